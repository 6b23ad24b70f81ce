"""Two-sided exit when the premium is not affine or claims are not exponential.

Only the ODE embedding and simulation cover these cases; they are compared
here.  Run with ``python demos/beyond_affine.py``.
"""
import numpy as np

from segerdahl import DriftSpec, PhaseType, SimConfig, estimate_two_sided, exit_numeric, exit_q0

cfg = SimConfig(n_paths=400_000, seed=1)

# quadratic premium 1 + x^2 explodes in finite time, so an upper barrier is needed
quad = DriftSpec.tichy(1.0, 1.0)
print("premium 1 + x^2, Exp(1) claims, corridor [0, 3]")
for x in (0.0, 1.0, 2.0):
    ode = exit_q0(quad, 1.0, 1.0, x, 0.0, 3.0).survival
    mc = estimate_two_sided(quad, 1.0, 1.0, 0.0, x, 0.0, 3.0, cfg)
    print(f"  x={x}: ode {ode:.6f}   mc {mc.survival:.6f} +- {mc.survival_se:.1e}")

# Erlang(2) claims with the same mean as Exp(1)
erl = PhaseType.erlang(2, 2.0)
lin = DriftSpec.linear(1.0, 1.0)
print("\npremium 1 + x, Erlang(2) claims with mean 1, corridor [0, 3], q = 0.2")
for x in np.linspace(0.0, 2.0, 3):
    s, r = exit_numeric(lin, erl, 1.0, 0.2, x, 0.0, 3.0)
    mc = estimate_two_sided(lin, 1.0, erl, 0.2, x, 0.0, 3.0, cfg)
    print(f"  x={x}: survival {s:.6f} (mc {mc.survival:.6f})   ruin {r:.6f} (mc {mc.ruin:.6f})")
