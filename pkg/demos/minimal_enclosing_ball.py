"""Smallest ball enclosing a family of balls.

Generates the deterministic pseudo-random benchmark instance, solves the
cone-program reformulation, and verifies the covering geometrically.
"""

import numpy as np

from socalm import AlmOptions, extract_meb_solution, gen_meb, solve

m, d = 2000, 50
print(f"generating {m} balls in R^{d} (deterministic congruential stream)")
instance, problem = gen_meb(m, d)
print(f"cone program: {problem.m} rows, {problem.n} variables, "
      f"{problem.cone.num_soc} Lorentz blocks of dim {d + 1}")

print("\nsolving (per-iteration log below)")
result = solve(problem, AlmOptions(tol=1e-8), log=print)
print(f"\nstatus={result.status}  kkt={result.kkt_residual:.2e}  "
      f"outer={result.outer_iters}  newton={result.newton_iters}  "
      f"time={result.wall_time:.2f}s")

center, radius = extract_meb_solution(instance, result)
needed = np.linalg.norm(instance.centers - center, axis=1) + instance.radii
print(f"\nenclosing radius    : {radius:.10f}")
print(f"farthest ball needs : {needed.max():.10f}")
print(f"covering slack      : {radius - needed.max():.3e}")
touching = np.sum(needed > radius - 1e-6 * (1 + radius))
print(f"balls touching the boundary: {touching}")

strict = sum(r.strictly_complementary for r in result.complementarity)
print(f"strictly complementary blocks: {strict}/{len(result.complementarity)}")
