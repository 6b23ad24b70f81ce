"""Command-line front end: compute, crosscheck and sweep.

Settings come from built-in defaults, then an optional JSON config file,
then flags; later sources win.  Floats are printed with 17 significant
digits so output round-trips exactly.

Exit codes: 0 success, 1 usage or validation error, 2 computation error
(including a failed cross-check).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from itertools import combinations, product

from .errors import SegerdahlError
from .methods import METHODS, MethodReport, Problem, available_methods, run_method
from .phase_type import PhaseType

__all__ = ["main", "RunSpec", "UsageError"]

NUMERIC = {
    "c": "c", "r": "r", "lambda": "λ (lambda)", "mu": "μ (mu)", "q": "q",
    "x": "x", "a": "a", "b": "b", "power": "power", "tol_abs": "tol-abs",
    "tol_rel": "tol-rel", "volterra_h": "volterra-h", "asmussen_ceiling": "asmussen-ceiling",
}
RANGEABLE = ("c", "r", "lambda", "mu", "q", "x", "a", "b")
DEFAULTS = {
    "model": "segerdahl", "c": 1.0, "r": 1.0, "lambda": 1.0, "mu": 1.0, "q": 0.0,
    "x": 0.0, "a": 0.0, "b": math.inf, "methods": "all", "claims": "exp", "seed": 12345,
    "paths": 100_000, "format": "json", "tol_abs": 5e-4, "tol_rel": 1e-5, "power": 2.0,
    "quantity": "ruin", "volterra_h": 1e-3, "asmussen_ceiling": 50.0, "tolerances": {},
    "workers": 1,
}


class UsageError(SegerdahlError):
    """Bad flag, config entry or parameter value; maps to exit code 1."""


def fmt(v) -> str:
    return format(float(v), ".17g")


def _dump(obj) -> str:
    """JSON with every float written to 17 significant digits; non-finite floats become null."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def parse_number(name: str, text) -> float:
    if isinstance(text, bool):
        raise UsageError(f"invalid value for {NUMERIC.get(name, name)}: {text!r}")
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        try:
            value = float(Decimal(str(text).strip()))
        except InvalidOperation:
            raise UsageError(f"invalid value for {NUMERIC.get(name, name)}: {text!r} is not a number") from None
    if math.isnan(value) or (math.isinf(value) and not (name == "b" and value > 0)):
        raise UsageError(f"invalid value for {NUMERIC.get(name, name)}: must be finite")
    return value


def parse_range(name: str, text: str) -> list[float]:
    """start:stop:step, stop inclusive; an empty list when start > stop."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"range for {NUMERIC[name]} must be start:stop:step, got {text!r}")
    for part in parts:
        parse_number(name, part)
    start, stop, step = (Decimal(part.strip()) for part in parts)
    if step <= 0:
        raise UsageError(f"range step for {NUMERIC[name]} must be positive")
    if start > stop:
        return []
    count = int((stop - start) / step) + 1
    return [float(start + i * step) for i in range(count)]


@dataclass
class RunSpec:
    """Validated settings for one invocation."""

    values: dict
    methods: list
    claims: object
    fmt: str
    ranged: dict = field(default_factory=dict)

    def problem(self, overrides: dict | None = None) -> Problem:
        v = dict(self.values)
        v.update(overrides or {})
        _validate_params(v)
        try:
            return Problem(c=v["c"], r=v["r"], lam=v["lambda"], claims=self.claims if self.claims is not None
                           else v["mu"], q=v["q"], x=v["x"], a=v["a"], b=v["b"], model=v["model"],
                           power=v["power"], quantity=v["quantity"], seed=v["seed"], paths=v["paths"],
                           volterra_h=v["volterra_h"], asmussen_ceiling=v["asmussen_ceiling"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def methods_for(self, pr: Problem) -> list:
        return available_methods(pr) if self.methods == ["all"] else list(self.methods)


def _validate_params(v: dict):
    checks = [
        ("lambda", v["lambda"] > 0, "must be > 0"),
        ("r", v["r"] >= 0, "must be >= 0"),
        ("q", v["q"] >= 0, "must be >= 0"),
        ("volterra_h", v["volterra_h"] > 0, "must be > 0"),
        ("tol_abs", v["tol_abs"] >= 0, "must be >= 0"),
        ("tol_rel", v["tol_rel"] >= 0, "must be >= 0"),
    ]
    if v["claims"] == "exp":
        checks.append(("mu", v["mu"] > 0, "must be > 0"))
    if v["model"] == "segerdahl":
        checks.append(("c", v["c"] >= 0, "must be >= 0"))
        checks.append(("r", v["r"] > 0, "must be > 0 for the segerdahl model"))
    else:
        checks.append(("c", v["c"] > 0, "must be > 0 for the langevin model"))
        checks.append(("power", v["power"] > 0, "must be > 0"))
    for name, ok, why in checks:
        if not ok:
            raise UsageError(f"invalid value for {NUMERIC[name]}: {why}, got {fmt(v[name])}")
    if not v["a"] <= v["x"] <= v["b"]:
        raise UsageError(f"invalid value for x: need a <= x <= b, got a={fmt(v['a'])}, x={fmt(v['x'])}, "
                         f"b={fmt(v['b'])}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="segerdahl", description="Exit and ruin probabilities for risk processes "
                                                   "with state-dependent premium.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in [("compute", "evaluate the requested methods"),
                       ("crosscheck", "compare methods pairwise against tolerances"),
                       ("sweep", "tabulate over one or two ranged parameters")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON file with default settings (flags override it)")
        p.add_argument("--model", choices=("segerdahl", "langevin"))
        for flag in RANGEABLE:
            p.add_argument(f"--{flag}", dest=flag, help="number" + (", or start:stop:step" if name == "sweep" else ""))
        p.add_argument("--power", help="exponent p of the langevin premium c + r x^p (default 2)")
        p.add_argument("--methods", help=f"comma list from {','.join(METHODS)}, or all")
        p.add_argument("--claims", help="exp, or phasetype:<file.json>")
        p.add_argument("--quantity", choices=("ruin", "survival"))
        p.add_argument("--seed")
        p.add_argument("--paths")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--tol-abs", dest="tol_abs")
        p.add_argument("--tol-rel", dest="tol_rel")
        p.add_argument("--volterra-h", dest="volterra_h")
        p.add_argument("--asmussen-ceiling", dest="asmussen_ceiling")
        p.add_argument("--workers", help="threads for sweep rows")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    out = {}
    for key, value in data.items():
        k = key.replace("-", "_")
        if k == "lam":
            k = "lambda"
        if k not in DEFAULTS:
            raise UsageError(f"unknown config key {key!r}")
        out[k] = value
    return out


def _int(name: str, value) -> int:
    try:
        number = Decimal(str(value))
        if number != number.to_integral_value():
            raise InvalidOperation
        return int(number)
    except InvalidOperation:
        raise UsageError(f"invalid value for {name}: {value!r} is not an integer") from None


def make_spec(args: argparse.Namespace) -> RunSpec:
    values = dict(DEFAULTS)
    if args.config:
        values.update(_load_config(args.config))
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    ranged = {}
    for key in RANGEABLE:
        raw = values[key]
        if isinstance(raw, str) and ":" in raw:
            if args.command != "sweep":
                raise UsageError(f"ranges such as {raw!r} for {NUMERIC[key]} are only allowed in sweep")
            ranged[key] = parse_range(key, raw)
            values[key] = ranged[key][0] if ranged[key] else DEFAULTS[key]
        else:
            values[key] = parse_number(key, raw)
    for key in ("power", "tol_abs", "tol_rel", "volterra_h", "asmussen_ceiling"):
        values[key] = parse_number(key, values[key])
    values["seed"] = _int("seed", values["seed"])
    values["paths"] = _int("paths", values["paths"])
    values["workers"] = _int("workers", values["workers"])
    if not 0 <= values["seed"] < 2**64:
        raise UsageError("invalid value for seed: must be in [0, 2^64)")
    if values["paths"] < 1 or values["workers"] < 1:
        raise UsageError("invalid value for paths/workers: must be >= 1")
    if args.command == "sweep" and not 1 <= len(ranged) <= 2:
        raise UsageError(f"sweep needs one or two ranged parameters, got {len(ranged)}")
    if values["model"] not in ("segerdahl", "langevin"):
        raise UsageError(f"invalid value for model: {values['model']!r}")
    if values["quantity"] not in ("ruin", "survival"):
        raise UsageError(f"invalid value for quantity: {values['quantity']!r}")
    if values["format"] not in ("json", "csv"):
        raise UsageError(f"invalid value for format: {values['format']!r}")

    claims = None
    spec_claims = str(values["claims"])
    if spec_claims.startswith("phasetype:"):
        try:
            claims = PhaseType.from_json(spec_claims.split(":", 1)[1])
        except OSError as exc:
            raise UsageError(f"invalid value for claims: cannot read {exc.filename}") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"invalid value for claims: {exc}") from None
        values["claims"] = "phasetype"
    elif spec_claims != "exp":
        raise UsageError(f"invalid value for claims: {spec_claims!r}; use exp or phasetype:<file>")

    methods = values["methods"]
    methods = [m.strip() for m in methods.split(",")] if isinstance(methods, str) else list(methods)
    bad = [m for m in methods if m not in (*METHODS, "all")]
    if bad or not methods or ("all" in methods and len(methods) > 1):
        raise UsageError(f"invalid value for methods: {','.join(bad) or methods!r}; "
                         f"choose from {','.join(METHODS)} or all")
    if not isinstance(values["tolerances"], dict):
        raise UsageError("invalid value for tolerances: must be an object keyed by method pairs")
    spec = RunSpec(values, methods, claims, values["format"], ranged)
    spec.problem()  # validate now, before any work starts
    return spec


def _report_dict(rep: MethodReport) -> dict:
    return {"method": rep.method, "value": rep.value, "error_estimate": rep.error_estimate,
            "diagnostics": dict(sorted(rep.diagnostics.items()))}


def _diag_text(d: dict) -> str:
    return "; ".join(f"{k}={v}" for k, v in sorted(d.items()))


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _num(v) -> str:
    return "" if v is None else fmt(v)


def cmd_compute(spec: RunSpec) -> tuple[str, int]:
    pr = spec.problem()
    reports = [run_method(m, pr) for m in spec.methods_for(pr)]
    code = 0 if all(r.ok for r in reports) else 2
    if spec.fmt == "json":
        return _dump([_report_dict(r) for r in reports]) + "\n", code
    rows = [["method", "value", "error_estimate", "diagnostics"]]
    rows += [[r.method, _num(r.value), _num(r.error_estimate), _diag_text(r.diagnostics)] for r in reports]
    return _csv(rows), code


def _pair_tolerance(spec: RunSpec, m1: str, m2: str) -> tuple[float, float]:
    table = spec.values["tolerances"]
    entry = table.get(f"{m1}/{m2}") or table.get(f"{m2}/{m1}") or {}
    try:
        return float(entry.get("abs", spec.values["tol_abs"])), float(entry.get("rel", spec.values["tol_rel"]))
    except (TypeError, ValueError, AttributeError):
        raise UsageError(f"invalid value for tolerances: bad entry for {m1}/{m2}") from None


def compare(spec: RunSpec, reports: list) -> tuple[list, bool]:
    """Pairwise comparison rows and the overall pass flag.

    A pair passes when the absolute gap is within tol_abs plus three
    combined Monte Carlo standard errors, or the relative gap within tol_rel.
    """
    rows = []
    for r1, r2 in combinations(reports, 2):
        tol_abs, tol_rel = _pair_tolerance(spec, r1.method, r2.method)
        row = {"pair": f"{r1.method}/{r2.method}", "abs_diff": None, "rel_diff": None,
               "tol_abs": tol_abs, "tol_rel": tol_rel, "status": "incomparable", "hint": ""}
        if r1.ok and r2.ok:
            se = math.hypot(*[r.error_estimate if r.method == "monte_carlo" else 0.0 for r in (r1, r2)])
            diff = abs(r1.value - r2.value)
            scale = max(abs(r1.value), abs(r2.value))
            rel = diff / scale if scale > 0 else 0.0
            passed = diff <= tol_abs + 3.0 * se or rel <= tol_rel
            row.update(abs_diff=diff, rel_diff=rel, status="pass" if passed else "fail")
            if not passed:
                for r in (r1, r2):
                    if r.method == "volterra" and r.error_estimate is not None and r.error_estimate > tol_abs / 4:
                        row["hint"] = "volterra grid too coarse: refine --volterra-h"
                    if r.method == "monte_carlo":
                        row["hint"] = row["hint"] or "raise --paths"
        else:
            row["hint"] = "; ".join(f"{r.method} failed" for r in (r1, r2) if not r.ok)
        rows.append(row)
    return rows, all(r["status"] == "pass" for r in rows)


def cmd_crosscheck(spec: RunSpec) -> tuple[str, int]:
    pr = spec.problem()
    methods = spec.methods_for(pr)
    if len(methods) < 2:
        raise UsageError("crosscheck needs two methods or more")
    reports = [run_method(m, pr) for m in methods]
    rows, passed = compare(spec, reports)
    code = 0 if passed else 2
    if spec.fmt == "json":
        out = {"pass": passed, "reports": [_report_dict(r) for r in reports], "pairs": rows}
        return _dump(out) + "\n", code
    table = [["pair", "abs_diff", "rel_diff", "tol_abs", "tol_rel", "status", "hint"]]
    table += [[r["pair"], _num(r["abs_diff"]), _num(r["rel_diff"]), _num(r["tol_abs"]), _num(r["tol_rel"]),
               r["status"], r["hint"]] for r in rows]
    table.append(["overall", "", "", "", "", "pass" if passed else "fail", ""])
    return _csv(table), code


def cmd_sweep(spec: RunSpec) -> tuple[str, int]:
    names = list(spec.ranged)
    grids = [spec.ranged[n] for n in names]
    points = list(product(*grids))
    first = spec.problem(dict(zip(names, points[0]))) if points else spec.problem()
    methods = spec.methods_for(first)

    def row(point):
        pr = spec.problem(dict(zip(names, point)))
        return point, [run_method(m, pr) for m in methods]

    workers = spec.values["workers"]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(row, points))
    else:
        results = [row(p) for p in points]
    code = 0 if all(r.ok for _, reps in results for r in reps) else 2
    if spec.fmt == "json":
        out = [{**dict(zip(names, point)), "reports": [_report_dict(r) for r in reps]} for point, reps in results]
        return _dump(out) + "\n", code
    header = names + [col for m in methods for col in (m, f"{m}_error")]
    table = [header]
    for point, reps in results:
        table.append([fmt(v) for v in point] + [c for r in reps for c in (_num(r.value), _num(r.error_estimate))])
    return _csv(table), code


COMMANDS = {"compute": cmd_compute, "crosscheck": cmd_crosscheck, "sweep": cmd_sweep}


def run(argv=None) -> tuple[str, str, int]:
    """(stdout, stderr, exit code) for one invocation; nothing is printed."""
    try:
        args = build_parser().parse_args(argv)
        spec = make_spec(args)
        out, code = COMMANDS[args.command](spec)
        return out, "", code
    except UsageError as exc:
        return "", f"error: {exc}\n", 1
    except SystemExit as exc:  # --help
        return "", "", int(exc.code or 0)
    except (SegerdahlError, ArithmeticError, ValueError) as exc:
        return "", f"error: {type(exc).__name__}: {exc}\n", 2


def main(argv=None) -> int:
    out, err, code = run(argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
