"""Trust-region subproblem with an indefinite quadratic.

The nonconvex problem min 0.5 y'Hy + c'y over the unit ball tightens to a
convex cone program after shifting the quadratic by its smallest eigenvalue;
the solver handles the quadratic objective directly, without factorizing it.
"""

import numpy as np

from socalm import AlmOptions, build_trs, extract_trs_solution, gen_trs, solve

d = 300
instance, problem = gen_trs(d, seed=11)
print(f"synthetic instance: d={d}, smallest eigenvalue {instance.lam_min:.4f}")
print(f"quadratic shifted by {instance.shift:.4f} -> PSD block of dim {d + 1}")

result = solve(problem, AlmOptions(tol=1e-8))
print(f"status={result.status}  kkt={result.kkt_residual:.2e}  "
      f"outer={result.outer_iters}  newton={result.newton_iters}  "
      f"time={result.wall_time:.2f}s")

y, value = extract_trs_solution(instance, result)
print(f"\nminimizer norm  : {np.linalg.norm(y):.12f} (boundary expected)")
print(f"objective value : {value:.10f}")

# sanity sweep: random boundary points cannot beat the minimizer
rng = np.random.default_rng(0)
Z = rng.standard_normal((20000, d))
Z /= np.linalg.norm(Z, axis=1)[:, None]
sweep = 0.5 * np.einsum("ij,jk,ik->i", Z, instance.H, Z) + Z @ instance.c
print(f"best of 20000 random boundary points: {sweep.min():.6f} "
      f"(>= {value:.6f})")

# the hard case: c orthogonal to the bottom eigenspace still lands on the
# boundary through the eigenvector correction
H2 = np.diag([-2.0, 1.0, 4.0])
c2 = np.array([0.0, 0.05, 0.05])
inst2, prob2 = build_trs(H2, c2)
res2 = solve(prob2, AlmOptions())
y2, val2 = extract_trs_solution(inst2, res2)
print(f"\nhard-case toy: |y|={np.linalg.norm(y2):.10f}, value={val2:.8f}")
