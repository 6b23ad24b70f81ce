"""Ruin probabilities for the affine premium c + r x, five ways.

Run with ``python demos/method_tour.py``.  Prints the killed ruin
probability E_x[e^{-q T}] for a few start levels from every method and the
spread between them.
"""
import math

from segerdahl import Problem, available_methods, run_method

# canonical parameters: c = r = lam = mu = 1
BASE = dict(c=1.0, r=1.0, lam=1.0, claims=1.0, a=0.0, paths=200_000)

for q in (0.0, 0.5):
    print(f"\nkilling rate q = {q}")
    print(f"{'x':>5} " + " ".join(f"{m:>12}" for m in available_methods(Problem(q=q, x=1.0, **BASE))) + "   spread")
    for x in (0.0, 0.5, 1.0, 2.0):
        pr = Problem(q=q, x=x, **BASE)
        vals = [run_method(m, pr).value for m in available_methods(pr)]
        print(f"{x:5.1f} " + " ".join(f"{v:12.7f}" for v in vals) + f"   {max(vals) - min(vals):.1e}")

# at q = 0 the ruin probability is e^{-x} / 2
print("\nexact at q = 0:", [round(0.5 * math.exp(-x), 7) for x in (0.0, 0.5, 1.0, 2.0)])

# starting at the absolute ruin level -c/r, ruin happens iff a claim comes before killing
for lam, q in [(1.0, 1.0), (2.0, 0.5)]:
    pr = Problem(c=1.0, r=1.0, lam=lam, claims=1.0, q=q, x=-1.0, a=-1.0)
    print(f"lam={lam}, q={q}: closed form {run_method('closed_form', pr).value}, lam/(lam+q) = {lam / (lam + q)}")
