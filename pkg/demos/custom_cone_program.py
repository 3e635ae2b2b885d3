"""Building and solving a cone program directly through the library API.

A small portfolio-style toy: pick nonnegative weights y summing to one while
keeping the weighted deviation inside a norm ball, minimizing a linear cost
plus a quadratic penalty.  Shows hand-assembled problem data, the solve
callback, file round-trips, and residual diagnostics.
"""

import numpy as np
import scipy.sparse as sp

from socalm import (
    AlmOptions,
    Block,
    ConeSpec,
    ProblemData,
    SparseSymmetric,
    diagnose_strict_complementarity,
    kkt_residuals,
    parse_problem,
    solve,
    write_problem,
)

# variables y = (weights in R_+^4, (t, z) in Lorentz cone of dim 4)
# constraints: sum(weights) = 1, G @ weights - z = 0, and t is fixed at 0.35
cone = ConeSpec([Block("nonneg", 4), Block("soc", 4)])
rng = np.random.default_rng(5)
G = rng.standard_normal((3, 4)) * 0.8

A = sp.lil_matrix((5, 8))
A[0, :4] = 1.0                      # sum of weights
A[1:4, :4] = G                      # deviations
A[1:4, 5:] = -np.eye(3)             # ... equal z
A[4, 4] = 1.0                       # pin t
b = np.array([1.0, 0.0, 0.0, 0.0, 0.35])

cost = np.array([0.3, 0.1, 0.25, 0.2, 0.0, 0.0, 0.0, 0.0])
Hq = np.zeros((8, 8))
Hq[:4, :4] = 0.5 * np.eye(4)        # mild quadratic preference for spreading
problem = ProblemData(SparseSymmetric.from_dense(Hq), sp.csr_matrix(A), b,
                      cost, cone)
print(problem)

iterations = []
result = solve(problem, AlmOptions(tol=1e-10),
               callback=lambda k, it, info, d: iterations.append(max(d[:4])))
print(f"status={result.status}  kkt={result.kkt_residual:.2e}  "
      f"outer={result.outer_iters}")
print("kkt residual by iteration:",
      " ".join(f"{v:.1e}" for v in iterations))

weights = result.y[:4]
t, z = result.y[4], result.y[5:]
print(f"\nweights       : {np.round(weights, 6)}  (sum {weights.sum():.6f})")
print(f"deviation norm: {np.linalg.norm(z):.6f} <= t = {t:.6f}")

# file round-trip and independent residual recomputation
write_problem(problem, "/tmp/custom.prob")
reparsed = parse_problem("/tmp/custom.prob")
d = kkt_residuals(reparsed, result.x1, result.x2, result.x3, result.y)
print(f"\nresiduals recomputed from the re-parsed file: "
      f"{max(d[:4]):.2e} (matches {result.kkt_residual:.2e})")

for rep in diagnose_strict_complementarity(problem, result):
    print(f"block {rep.block_id} [{rep.kind:6s}] x3={rep.x3_status:8s} "
          f"y={rep.y_status:8s} {rep.category} margin={rep.margin:+.3e}")
