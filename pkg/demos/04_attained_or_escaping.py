"""When is the ground state level attained?

A potential well (V dips below 1) pulls the energy below c_inf and the
descent converges to a bound state.  A potential barrier (V >= 1, Q = 1)
pushes mass outward: the iterates drift toward the box boundary while J
creeps down to c_inf, and no minimizer exists to converge to.
"""
from fraclab import (
    PotentialFamily, SolverConfig, build_problem, gaussian_guess, limit_problem, make_grid,
    solve_ground_state, solve_odd,
)

g = make_grid(1, 32.0, 1024)
lim = limit_problem(0.5, 3.0, g)
_, rep = solve_ground_state(lim)
c_inf = rep.energy.J
print(f"c_inf ~ {c_inf:.5f}")

well = build_problem(0.5, 3.0, g, PotentialFamily("gaussian", -0.5))
_, rw = solve_ground_state(well)
print(f"well:    J={rw.energy.J:.5f} converged={rw.converged} positive={rw.positive}")

barrier = build_problem(0.5, 3.0, g, PotentialFamily("algebraic_bump", 0.4, 2.5))
_, rb = solve_ground_state(barrier, SolverConfig(max_iters=10000), gaussian_guess(g, 1.0))
centers = [float(r["center"][0]) for r in rb.trajectory_summary[::2000]]
print(f"barrier: J={rb.energy.J:.5f} converged={rb.converged} escape={rb.escape_detected}")
print("         dominant window centre every 2000 steps:", [round(c, 2) for c in centers])

_, ro = solve_odd(lim)
print(f"odd sector: J={ro.energy.J:.5f} vs 2 c_inf={2 * c_inf:.5f}")
