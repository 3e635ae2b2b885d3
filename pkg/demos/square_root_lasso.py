"""Square-root Lasso regression as a cone program.

Fits min ||Bx - w|| + lam ||x||_1 on synthetic sparse data, with the pivotal
weight rule that needs no noise-level estimate, and verifies optimality via
the subgradient conditions.
"""

import numpy as np

from socalm import (
    AlmOptions,
    build_srlasso,
    extract_srlasso_solution,
    lambda_from_lambda_c,
    solve,
)

rng = np.random.default_rng(42)
m, d, k = 150, 800, 8
B = rng.standard_normal((m, d))
x_true = np.zeros(d)
support_true = rng.choice(d, k, replace=False)
x_true[support_true] = rng.standard_normal(k) * 4
w = B @ x_true + 0.7 * rng.standard_normal(m)

lam = lambda_from_lambda_c(0.9, d)
print(f"data: {m} samples, {d} features, {k} true nonzeros; lam = {lam:.4f}")

instance, problem = build_srlasso(B, w, lam)
print(f"cone program: {problem.m} rows, {problem.n} variables, "
      f"orthant(2x{d}) + Lorentz({m + 1})")

result = solve(problem, AlmOptions(tol=1e-8))
print(f"status={result.status}  kkt={result.kkt_residual:.2e}  "
      f"outer={result.outer_iters}  newton={result.newton_iters}  "
      f"time={result.wall_time:.2f}s")

x = extract_srlasso_solution(instance, result)
support = np.nonzero(np.abs(x) > 1e-6)[0]
print(f"\nrecovered support size: {len(support)} "
      f"(true support hit: {len(set(support) & set(support_true))}/{k})")
print(f"model objective : {instance.objective(x):.8f}")
print(f"cone objective  : {float(problem.c @ result.y):.8f}")

# subgradient certificate: stationary on the support, bounded off it
resid = B @ x - w
g = resid / np.linalg.norm(resid)
btg = B.T @ g
stat = np.abs(btg[support] + lam * np.sign(x[support])).max()
off = np.delete(np.abs(btg), support).max()
print(f"support stationarity violation : {stat:.2e}")
print(f"max |B'g| off support          : {off:.4f} (<= lam = {lam:.4f})")
