"""Algebraic tails and how two far-apart bumps talk to each other.

Fractional ground states decay like |x|^-(N+2s).  The overlap
A(d) = int u^(p-1) u(. - d) inherits the same rate, which is what makes
two-bump energies sit just below twice the single-bump level.
"""
import numpy as np

from fraclab import fit_decay_exponent, interaction_scan, limit_problem, make_grid, solve_ground_state

for s in (0.25, 0.5, 0.75):
    g = make_grid(1, 128.0, 4096)
    u, rep = solve_ground_state(limit_problem(s, 3.0, g))
    fit = fit_decay_exponent(u, periodic_images=True)
    print(f"s={s:4.2f}: tail exponent {fit.exponent:+.3f} (expected {-(1 + 2 * s):+.2f}), "
          f"r^2={fit.r_squared:.5f}")

g = make_grid(1, 64.0, 2048)
u, _ = solve_ground_state(limit_problem(0.5, 3.0, g))
table = interaction_scan(u, 0.5, 3.0, np.linspace(8, 24, 9))
for d, a, scaled in table.rows:
    print(f"d={d:5.1f}  A={a:.4e}  d^2 A={scaled:.4f}")
print("log-log slope:", round(table.metadata["slope"], 3))
