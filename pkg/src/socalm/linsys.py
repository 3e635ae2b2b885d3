"""Structured Newton linear systems: assembly, direct and Krylov solves.

The inner Newton matrix for the linear case is ``eps*I + sum_i A_i V_i A_i'``
with V one generalized-Jacobian element of the cone projection.  Each Lorentz
block splits into a scaled ``A_i A_i'`` part plus at most two rank-one columns,
so the whole operator is a sparse matrix plus a tall-skinny low-rank update.
Solves go through an augmented sparse system (the low-rank update is never
densified), a dense factorization when the update is wide, or a matrix-free
preconditioned symmetric QMR iteration.  The quadratic case solves the
unsymmetric two-by-two block system directly or with BiCGStab.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cone import JacobianElement, SocCase, apply_jacobian

# low-rank eigenvalue below this is dropped from the update (rank degenerates)
_DROP_TOL = 1e-14
_TINY = 1e-300


class LinearSolveError(RuntimeError):
    """A linear solve did not reach its residual tolerance."""

    def __init__(self, message, x=None, residual=None, iterations=0):
        super().__init__(message)
        self.x = x
        self.residual = residual
        self.iterations = iterations


class SparseSymmetric:
    """Symmetric matrix stored as coordinate entries of its lower triangle.

    Duplicate coordinates are summed during assembly; the realized matrix is
    symmetric by construction.
    """

    def __init__(self, n, rows=(), cols=(), vals=()):
        n = int(n)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols, vals must have equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n:
                raise ValueError("index out of range")
            if np.any(rows < cols):
                raise ValueError("entries must lie in the lower triangle (row >= col)")
        low = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
        low.sum_duplicates()
        low.eliminate_zeros()
        self.n = n
        self.rows = low.row.copy()
        self.cols = low.col.copy()
        self.vals = low.data.copy()
        strict = low.row != low.col
        upper = sp.coo_matrix(
            (low.data[strict], (low.col[strict], low.row[strict])), shape=(n, n))
        self._csr = (low.tocsr() + upper.tocsr()).tocsr()
        self._fro = None
        self._lam_max = None

    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def from_dense(cls, M, sym_tol=1e-10):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        scale = 1.0 + np.abs(M).max(initial=0.0)
        if np.abs(M - M.T).max(initial=0.0) > sym_tol * scale:
            raise ValueError("matrix is not symmetric")
        S = 0.5 * (M + M.T)
        r, c = np.nonzero(np.tril(S))
        return cls(M.shape[0], r, c, S[r, c])

    @classmethod
    def from_sparse(cls, M, sym_tol=1e-10):
        M = sp.csr_matrix(M)
        if M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        scale = 1.0 + (np.abs(M.data).max() if M.nnz else 0.0)
        diff = (M - M.T).tocoo()
        if diff.nnz and np.abs(diff.data).max() > sym_tol * scale:
            raise ValueError("matrix is not symmetric")
        S = (0.5 * (M + M.T)).tocoo()
        keep = S.row >= S.col
        return cls(M.shape[0], S.row[keep], S.col[keep], S.data[keep])

    @property
    def nnz_lower(self):
        return self.vals.size

    @property
    def is_zero(self):
        return self.vals.size == 0

    def to_csr(self):
        return self._csr

    def matvec(self, v):
        return self._csr @ v

    def quad(self, v):
        """Quadratic form <v, H v>."""
        return float(v @ (self._csr @ v))

    def fro_norm(self):
        if self._fro is None:
            self._fro = float(sp.linalg.norm(self._csr, "fro"))
        return self._fro

    def lambda_max_estimate(self):
        if self._lam_max is None:
            self._lam_max = estimate_lambda_max(self)
        return self._lam_max

    def __repr__(self):
        return f"SparseSymmetric(n={self.n}, nnz_lower={self.nnz_lower})"


def estimate_lambda_max(H: SparseSymmetric) -> float:
    """Upper estimate of the largest eigenvalue of a PSD symmetric matrix.

    Power iteration (at most 50 steps, relative tolerance 1e-4) scaled by a
    1.2 safety factor, capped by the infinity-norm row bound.  Returns 0 for
    the zero matrix.
    """
    if H.is_zero:
        return 0.0
    Hc = H.to_csr()
    inf_bound = float(np.abs(Hc).sum(axis=1).max())
    n = H.n
    v = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(50):
        w = Hc @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # started in the null space; restart from the heaviest diagonal
            j = int(np.argmax(np.abs(Hc.diagonal())))
            v = np.zeros(n)
            v[j] = 1.0
            continue
        lam_new = float(v @ w)
        v = w / nw
        if abs(lam_new - lam) <= 1e-4 * max(abs(lam_new), 1e-30):
            lam = lam_new
            break
        lam = lam_new
    return float(min(1.2 * max(lam, 0.0), inf_bound))


@dataclass
class SolveStats:
    method: str
    iterations: int = 0
    residual: float = 0.0
    quasi_residuals: list = field(default_factory=list)


def psqmr(matvec, rhs, precond=None, x0=None, stop=0.0, max_iter=500):
    """Preconditioned symmetric QMR for symmetric (possibly indefinite) systems.

    Stops when the tracked residual norm falls to ``stop`` (absolute).  The
    reported quasi-residual sequence is non-increasing by construction.
    Returns ``(x, converged, stats)`` with the best iterate seen.
    """
    rhs = np.asarray(rhs, dtype=float)
    if precond is None:
        precond = lambda v: v
    if x0 is None:
        x = np.zeros_like(rhs)
        r = rhs.copy()
    else:
        x = np.array(x0, dtype=float)
        r = rhs - matvec(x)
    resnorm = float(np.linalg.norm(r))
    stats = SolveStats("psqmr", 0, resnorm, [resnorm])
    if resnorm <= stop:
        return x, True, stats
    best_x = x.copy()
    best_res = resnorm
    q = precond(r)
    tau = float(np.linalg.norm(q))
    rho = float(r @ q)
    theta = 0.0
    d = np.zeros_like(rhs)
    res = r.copy()
    Ad = np.zeros_like(rhs)
    stats.quasi_residuals = [tau]
    for it in range(1, max_iter + 1):
        Aq = matvec(q)
        sig = float(q @ Aq)
        if abs(sig) < _TINY:
            break
        alpha = rho / sig
        r = r - alpha * Aq
        u = precond(r)
        theta_new = float(np.linalg.norm(u)) / tau if tau > 0 else 0.0
        c2 = 1.0 / (1.0 + theta_new * theta_new)
        tau = tau * theta_new * np.sqrt(c2)
        d = (c2 * theta * theta) * d + (c2 * alpha) * q
        x = x + d
        Ad = (c2 * theta * theta) * Ad + (c2 * alpha) * Aq
        res = res - Ad
        resnorm = float(np.linalg.norm(res))
        stats.iterations = it
        stats.quasi_residuals.append(tau)
        if resnorm < best_res:
            best_res = resnorm
            best_x = x.copy()
        if resnorm <= stop:
            true_res = float(np.linalg.norm(rhs - matvec(x)))
            if true_res <= stop:
                stats.residual = true_res
                return x, True, stats
            res = rhs - matvec(x)
            resnorm = true_res
            if resnorm < best_res:
                best_res = resnorm
                best_x = x.copy()
        if abs(rho) < _TINY:
            break
        rho_new = float(r @ u)
        beta = rho_new / rho
        q = u + beta * q
        rho = rho_new
        theta = theta_new
    stats.residual = best_res
    return best_x, best_res <= stop, stats


def _jacobian_scale(J: JacobianElement) -> np.ndarray:
    """Per-coordinate weights of the diagonal part of V."""
    cone = J.cone
    s = np.zeros(cone.total_dim)
    if cone.nonneg_dim:
        a = cone.nonneg_start
        s[a:a + cone.nonneg_dim] = J.nonneg_mask
    for gj in J.soc:
        g = gj.group
        blk = 0.5 * (1.0 + gj.rho)
        g.scatter(s, np.broadcast_to(blk[:, None], (g.count, g.dim)).copy())
    return s


def _jacobian_lowrank(J: JacobianElement):
    """Low-rank remainder of V: returns ``(W, d)`` with V = diag(s) + W diag(d) W'.

    Each middle-type Lorentz block contributes the two orthonormal columns
    (e0 +- (0, w))/sqrt(2) with weights (1 - r)/2 and -(1 + r)/2; weights of
    magnitude below 1e-14 (the boundary degeneracies) are dropped.
    """
    n = J.cone.total_dim
    rows_parts, cols_parts, vals_parts, d_parts = [], [], [], []
    k = 0
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for gj in J.soc:
        g = gj.group
        sel = np.nonzero(gj.codes >= SocCase.MIDDLE)[0]
        if not sel.size:
            continue
        starts = g.starts[sel]
        rho = gj.rho[sel]
        omega = gj.omega[sel]
        for sign, lam in ((1.0, 0.5 * (1.0 - rho)), (-1.0, -0.5 * (1.0 + rho))):
            keep = np.nonzero(np.abs(lam) > _DROP_TOL)[0]
            if not keep.size:
                continue
            nb = keep.size
            rmat = starts[keep, None] + np.arange(g.dim)[None, :]
            vmat = np.empty((nb, g.dim))
            vmat[:, 0] = inv_sqrt2
            vmat[:, 1:] = sign * inv_sqrt2 * omega[keep]
            rows_parts.append(rmat.ravel())
            cols_parts.append(np.repeat(k + np.arange(nb), g.dim))
            vals_parts.append(vmat.ravel())
            d_parts.append(lam[keep])
            k += nb
    if k == 0:
        return sp.csc_matrix((n, 0)), np.zeros(0)
    W = sp.csc_matrix(
        (np.concatenate(vals_parts),
         (np.concatenate(rows_parts), np.concatenate(cols_parts))),
        shape=(n, k))
    return W, np.concatenate(d_parts)


def jacobian_sparse_matrix(J: JacobianElement) -> sp.csr_matrix:
    """Realize V as a sparse matrix (diagonal plus low-rank columns)."""
    V = sp.diags(_jacobian_scale(J), format="csr")
    W, d = _jacobian_lowrank(J)
    if d.size:
        V = (V + (W.multiply(d[None, :]) @ W.T)).tocsr()
    return V


@dataclass
class NewtonSystem:
    """The operator ``eps*I_m + sum_i A_i V_i A_i'`` in assembled or operator form.

    Assembled systems carry ``M_sp`` (sparse part), ``U`` (m x k columns) and
    the diagonal weights ``d`` with operator ``M_sp + U diag(d) U'``.
    """

    m: int
    sigma: float
    eps: float
    A: sp.csr_matrix | None = None
    J: JacobianElement | None = None
    M_sp: sp.csr_matrix | None = None
    U: sp.csc_matrix | None = None
    d: np.ndarray | None = None
    matrix_free: bool = False
    _scale: np.ndarray | None = None

    @classmethod
    def from_parts(cls, M_sp, U, d, sigma=1.0, eps=0.0):
        """Assemble directly from the pieces (mainly for tests and diagnostics)."""
        M_sp = sp.csr_matrix(M_sp)
        U = sp.csc_matrix(np.atleast_2d(np.asarray(U, dtype=float)))
        if U.shape[0] != M_sp.shape[0]:
            U = U.T
        d = np.atleast_1d(np.asarray(d, dtype=float))
        if U.shape[1] != d.size:
            raise ValueError("U column count does not match diagonal weights")
        return cls(m=M_sp.shape[0], sigma=sigma, eps=eps, M_sp=M_sp, U=U, d=d)

    @property
    def k(self):
        if self.matrix_free or self.d is None:
            return 0
        return int(self.d.size)

    def matvec(self, v):
        if self.matrix_free:
            return self.eps * v + self.A @ apply_jacobian(self.J, self.A.T @ v)
        out = self.M_sp @ v
        if self.k:
            out = out + self.U @ (self.d * (self.U.T @ v))
        return out

    def diagonal(self):
        if self.matrix_free:
            A2 = self.A.multiply(self.A)
            return self.eps + A2 @ self._scale
        diag = self.M_sp.diagonal().astype(float, copy=True)
        if self.k:
            U2 = self.U.multiply(self.U)
            diag = diag + U2 @ self.d
        return diag

    def densify(self):
        if self.matrix_free:
            M = np.empty((self.m, self.m))
            e = np.zeros(self.m)
            for j in range(self.m):
                e[j] = 1.0
                M[:, j] = self.matvec(e)
                e[j] = 0.0
            return M
        M = self.M_sp.toarray()
        if self.k:
            Ud = self.U.toarray()
            M = M + (Ud * self.d) @ Ud.T
        return M


def assemble_linear(A, J: JacobianElement, sigma, eps, mode="assembled") -> NewtonSystem:
    """Assemble ``eps*I_m + sum_i A_i V_i A_i'`` from A and a Jacobian element.

    Lorentz blocks split into the sparse part ``(1+r)/2 * A_i A_i'`` plus low
    rank columns built from A_i's first column and ``A_{i,2} w_i``; identity
    blocks contribute ``A_i A_i'`` whole, zero blocks nothing, and the nonneg
    block a column-masked ``A_0 A_0'``.  ``mode="operator"`` skips assembly
    and keeps the operator matrix-free.
    """
    A = sp.csr_matrix(A)
    if A.shape[1] != J.cone.total_dim:
        raise ValueError(
            f"A has {A.shape[1]} columns, cone total_dim is {J.cone.total_dim}")
    m = A.shape[0]
    scale = _jacobian_scale(J)
    if mode == "operator":
        return NewtonSystem(m=m, sigma=sigma, eps=eps, A=A, J=J,
                            matrix_free=True, _scale=scale)
    if mode != "assembled":
        raise ValueError(f"unknown mode {mode!r}")
    As = A.multiply(scale[None, :]).tocsr()
    M_sp = (As @ A.T).tocsr()
    M_sp = (M_sp + sp.identity(m, format="csr") * eps).tocsr()
    W, d = _jacobian_lowrank(J)
    U = (A @ W).tocsc() if d.size else sp.csc_matrix((m, 0))
    return NewtonSystem(m=m, sigma=sigma, eps=eps, A=A, J=J,
                        M_sp=M_sp, U=U, d=d, _scale=scale)


def _solve_dense(sys_, rhs, stop):
    M = sys_.densify()
    try:
        cho = scipy.linalg.cho_factor(M, check_finite=False)
        x = scipy.linalg.cho_solve(cho, rhs, check_finite=False)
        refine = lambda r: scipy.linalg.cho_solve(cho, r, check_finite=False)
    except scipy.linalg.LinAlgError:
        lu = scipy.linalg.lu_factor(M, check_finite=False)
        x = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
        refine = lambda r: scipy.linalg.lu_solve(lu, r, check_finite=False)
    res = rhs - sys_.matvec(x)
    for _ in range(2):
        if np.linalg.norm(res) <= stop:
            break
        x = x + refine(res)
        res = rhs - sys_.matvec(x)
    return x, float(np.linalg.norm(res)), SolveStats("dense")


def _solve_augmented(sys_, rhs, stop, max_iter):
    """Direct solve through the sparse augmented system plus PSQMR refinement."""
    m, k = sys_.m, sys_.k
    Msp_lu = spla.splu(sys_.M_sp.tocsc())
    U = sys_.U
    Ud = U.toarray()
    dinv = 1.0 / sys_.d
    # S = D^{-1} + U' M_sp^{-1} U, dense k x k
    MiU = Msp_lu.solve(Ud)
    S = MiU.T @ Ud
    S[np.diag_indices(k)] += dinv
    S_lu = scipy.linalg.lu_factor(S, check_finite=False)

    def block_inverse(h1, h2):
        lam1 = Msp_lu.solve(h1)
        lam2 = scipy.linalg.lu_solve(S_lu, U.T @ lam1 - h2, check_finite=False)
        return lam1 - MiU @ lam2, lam2

    x, _ = block_inverse(rhs, np.zeros(k))
    res = rhs - sys_.matvec(x)
    resnorm = float(np.linalg.norm(res))
    stats = SolveStats("augmented")
    if resnorm <= stop:
        stats.residual = resnorm
        return x, resnorm, stats

    def aug_matvec(v):
        v1, v2 = v[:m], v[m:]
        return np.concatenate([sys_.M_sp @ v1 + U @ v2, U.T @ v1 - dinv * v2])

    def aug_precond(v):
        w1, w2 = block_inverse(v[:m], v[m:])
        return np.concatenate([w1, w2])

    rhs_aug = np.concatenate([rhs, np.zeros(k)])
    x0 = np.concatenate([x, sys_.d * (U.T @ x)])
    z, _, pst = psqmr(aug_matvec, rhs_aug, aug_precond, x0=x0, stop=stop,
                      max_iter=max_iter)
    x = z[:m]
    resnorm = float(np.linalg.norm(rhs - sys_.matvec(x)))
    stats.iterations = pst.iterations
    stats.quasi_residuals = pst.quasi_residuals
    stats.residual = resnorm
    stats.method = "augmented+psqmr"
    return x, resnorm, stats


def solve_spd(sys_: NewtonSystem, rhs, tol, strategy="auto", max_iter=500,
              dense_col_cap=None):
    """Solve the assembled SPD operator to ``||M d - rhs|| <= tol`` (absolute).

    Route selection for ``strategy="auto"``: pure sparse factorization when
    there are no low-rank columns; dense factorization when the update is at
    least as wide as the system; the augmented sparse solve (with the
    analytic block-inverse preconditioner and PSQMR refinement) while the
    column count stays under ``dense_col_cap``; matrix-free PSQMR with a
    diagonal preconditioner otherwise.  Raises :class:`LinearSolveError` on
    Krylov non-convergence, carrying the best iterate.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (sys_.m,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({sys_.m},)")
    stop = max(float(tol), 1e-12 * float(np.linalg.norm(rhs)))
    k = sys_.k
    if dense_col_cap is None:
        nsoc = sys_.J.cone.num_soc if sys_.J is not None else k
        dense_col_cap = 2 * nsoc + 50

    if sys_.matrix_free:
        strategy = "krylov" if strategy in ("auto", "sparse", "augmented") \
            else strategy
    elif strategy == "auto":
        if k == 0:
            strategy = "sparse"
        elif k >= sys_.m:
            strategy = "dense"
        elif k <= dense_col_cap:
            strategy = "augmented"
        else:
            strategy = "krylov"

    if strategy == "sparse":
        try:
            lu = spla.splu(sys_.M_sp.tocsc())
        except RuntimeError:
            return _finish_krylov(sys_, rhs, stop, max_iter)
        x = lu.solve(rhs)
        res = rhs - sys_.matvec(x)
        for _ in range(2):
            if np.linalg.norm(res) <= stop:
                break
            x = x + lu.solve(res)
            res = rhs - sys_.matvec(x)
        resnorm = float(np.linalg.norm(res))
        stats = SolveStats("sparse", residual=resnorm)
        if resnorm <= stop:
            return x, stats
        return _finish_krylov(sys_, rhs, stop, max_iter, x0=x)

    if strategy == "dense":
        x, resnorm, stats = _solve_dense(sys_, rhs, stop)
        stats.residual = resnorm
        if resnorm <= stop:
            return x, stats
        return _finish_krylov(sys_, rhs, stop, max_iter, x0=x)

    if strategy == "augmented":
        try:
            x, resnorm, stats = _solve_augmented(sys_, rhs, stop, max_iter)
        except RuntimeError:
            return _finish_krylov(sys_, rhs, stop, max_iter)
        if resnorm <= stop:
            return x, stats
        return _finish_krylov(sys_, rhs, stop, max_iter, x0=x)

    if strategy == "krylov":
        return _finish_krylov(sys_, rhs, stop, max_iter)

    raise ValueError(f"unknown strategy {strategy!r}")


def _finish_krylov(sys_, rhs, stop, max_iter, x0=None):
    diag = sys_.diagonal()
    diag = np.where(np.abs(diag) > _TINY, diag, 1.0)
    x, ok, stats = psqmr(sys_.matvec, rhs, lambda v: v / diag, x0=x0, stop=stop,
                         max_iter=max_iter)
    stats.method = "psqmr-diag"
    if not ok:
        raise LinearSolveError(
            f"PSQMR did not converge in {max_iter} iterations "
            f"(best residual {stats.residual:.3e}, target {stop:.3e})",
            x=x, residual=stats.residual, iterations=stats.iterations)
    return x, stats


def solve_quadratic(H: SparseSymmetric, A, J: JacobianElement, sigma, eps,
                    R1, R2, tol, max_iter=500):
    """Solve the unsymmetric Newton system of the quadratic case.

        [[I + sigma*V*H, -sigma*V*A'], [-sigma*A*V*H, eps*I + sigma*A*V*A']]

    applied to ``(d1, d2) = (R1, R2)`` with residual at most
    ``tol / max(1, lambda_max_estimate(H))``.  Only ``H @ d1`` and the
    quadratic form of ``d1`` are meaningful to callers; both agree with the
    range-space projected direction, which is never formed.
    """
    A = sp.csr_matrix(A)
    m, n = A.shape
    R1 = np.asarray(R1, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    if R1.shape != (n,) or R2.shape != (m,):
        raise ValueError("right-hand side block dimensions do not match A")
    rhs_scale = np.sqrt(R1 @ R1 + R2 @ R2)
    stop = max(float(tol) / max(1.0, H.lambda_max_estimate()),
               1e-12 * rhs_scale)

    if H.is_zero:
        # block-triangular: the second row is the linear-case SPD system
        sys_ = assemble_linear(A, J, sigma, eps / sigma)
        d2, stats = solve_spd(sys_, R2 / sigma, stop / sigma, max_iter=max_iter)
        d1 = R1 + sigma * apply_jacobian(J, A.T @ d2)
        stats.method = "decoupled:" + stats.method
        return d1, d2, stats

    V = jacobian_sparse_matrix(J)
    Hc = H.to_csr()
    VH = (V @ Hc).tocsr()
    VAT = (V @ A.T).tocsr()
    Mhat = sp.bmat(
        [[sp.identity(n) + sigma * VH, -sigma * VAT],
         [-sigma * (A @ VH), eps * sp.identity(m) + sigma * (A @ VAT)]],
        format="csc")
    rhs = np.concatenate([R1, R2])
    N = n + m
    density = Mhat.nnz / (N * N)

    if density < 0.10 or N <= 2000:
        try:
            lu = spla.splu(Mhat)
            x = lu.solve(rhs)
            res = rhs - Mhat @ x
            for _ in range(2):
                if np.linalg.norm(res) <= stop:
                    break
                x = x + lu.solve(res)
                res = rhs - Mhat @ x
            resnorm = float(np.linalg.norm(res))
            if resnorm <= stop:
                return x[:n], x[n:], SolveStats("splu", residual=resnorm)
        except RuntimeError:
            pass

    diag = Mhat.diagonal()
    diag = np.where(np.abs(diag) > _TINY, diag, 1.0)
    P = spla.LinearOperator((N, N), matvec=lambda v: v / diag)
    rhs_norm = float(np.linalg.norm(rhs))
    rtol = stop / rhs_norm if rhs_norm > 0 else 0.0
    x, info = spla.bicgstab(Mhat, rhs, rtol=max(rtol, 1e-14), atol=stop,
                            maxiter=max_iter, M=P)
    resnorm = float(np.linalg.norm(rhs - Mhat @ x))
    if resnorm > stop:
        raise LinearSolveError(
            f"BiCGStab did not reach the residual target "
            f"({resnorm:.3e} > {stop:.3e})",
            x=(x[:n], x[n:]), residual=resnorm, iterations=max_iter)
    return x[:n], x[n:], SolveStats("bicgstab", iterations=int(max(info, 0)),
                                    residual=resnorm)
