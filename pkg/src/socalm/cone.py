"""Cartesian cones built from one nonnegative-orthant block and Lorentz-cone blocks.

Provides the metric projection onto the cone, generalized-Jacobian elements
of the projection in closed low-rank form, and fast operator application.
All operations are vectorized over groups of equal-dimension Lorentz blocks,
so a cone with thousands of identical blocks costs a handful of array ops.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

NONNEG = "nonneg"
SOC = "soc"

# absolute tolerance for detecting the nonsmooth boundary cases x0 = +-||xt||
TIE_TOL = 1e-13


class SocCase(enum.IntEnum):
    """Shape of one Lorentz-block element of the projection's B-subdifferential."""

    ZERO = 0
    IDENTITY = 1
    MIDDLE = 2
    BOUNDARY_UPPER = 3
    BOUNDARY_LOWER = 4


@dataclass(frozen=True)
class Block:
    """One cone block: kind is ``"nonneg"`` or ``"soc"``."""

    kind: str
    dim: int


class _SocGroup:
    """Lorentz blocks of equal dimension, gathered for vectorized arithmetic."""

    def __init__(self, dim, starts, block_ids):
        self.dim = dim
        self.starts = np.asarray(starts, dtype=np.int64)
        self.block_ids = np.asarray(block_ids, dtype=np.int64)
        self.count = len(self.starts)
        # contiguous equal-stride groups (e.g. m identical blocks back to back)
        # can be gathered with a reshape instead of fancy indexing
        diffs = np.diff(self.starts)
        self.contiguous = bool(self.count == 1 or np.all(diffs == dim))
        if self.contiguous:
            self.base = int(self.starts[0])
            self._idx = None
        else:
            self.base = None
            self._idx = self.starts[:, None] + np.arange(dim)[None, :]

    def gather(self, x):
        if self.contiguous:
            return x[self.base:self.base + self.count * self.dim].reshape(
                self.count, self.dim)
        return x[self._idx]

    def scatter(self, out, values):
        if self.contiguous:
            out[self.base:self.base + self.count * self.dim] = values.reshape(-1)
        else:
            out[self._idx] = values


class ConeSpec:
    """Ordered block structure of a product cone.

    At most one nonnegative-orthant block is allowed (it may be absent or have
    dimension zero); every Lorentz block must have dimension >= 2.
    """

    def __init__(self, blocks: Sequence[Block]):
        blocks = tuple(blocks)
        nonneg_seen = 0
        for blk in blocks:
            if blk.kind == NONNEG:
                nonneg_seen += 1
                if blk.dim < 0:
                    raise ValueError(f"nonneg block dim must be >= 0, got {blk.dim}")
            elif blk.kind == SOC:
                if blk.dim < 2:
                    raise ValueError(
                        f"soc block dim must be >= 2, got {blk.dim}; "
                        "declare one-dimensional blocks as nonneg")
            else:
                raise ValueError(f"unknown block kind {blk.kind!r}")
        if nonneg_seen > 1:
            raise ValueError("at most one nonneg block is allowed")

        self.blocks = blocks
        dims = [blk.dim for blk in blocks]
        starts = np.concatenate(([0], np.cumsum(dims))).astype(np.int64)
        self.total_dim = int(starts[-1])
        self._starts = starts

        self.nonneg_start = None
        self.nonneg_dim = 0
        by_dim: dict[int, list[tuple[int, int]]] = {}
        soc_ids = []
        for i, blk in enumerate(blocks):
            if blk.kind == NONNEG:
                self.nonneg_start = int(starts[i])
                self.nonneg_dim = blk.dim
            elif blk.dim > 0:
                by_dim.setdefault(blk.dim, []).append((int(starts[i]), i))
                soc_ids.append(i)
        self.soc_block_ids = tuple(soc_ids)
        self.soc_groups = tuple(
            _SocGroup(d, [s for s, _ in lst], [b for _, b in lst])
            for d, lst in sorted(by_dim.items()))
        self.num_soc = len(soc_ids)

    @classmethod
    def make(cls, nonneg: int = 0, soc: Sequence[int] = ()) -> "ConeSpec":
        """Build a cone with an optional leading nonneg block followed by Lorentz blocks."""
        blocks = []
        if nonneg > 0:
            blocks.append(Block(NONNEG, int(nonneg)))
        blocks.extend(Block(SOC, int(d)) for d in soc)
        return cls(blocks)

    def block_start(self, i: int) -> int:
        return int(self._starts[i])

    def block_slice(self, i: int) -> slice:
        return slice(int(self._starts[i]), int(self._starts[i + 1]))

    def __repr__(self):
        parts = [f"{blk.kind}({blk.dim})" for blk in self.blocks]
        return f"ConeSpec({' x '.join(parts) or 'trivial'})"

    def __eq__(self, other):
        return isinstance(other, ConeSpec) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)


def _check_dim(cone: ConeSpec, x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != cone.total_dim:
        raise ValueError(
            f"{name} has length {x.shape}, cone has total_dim {cone.total_dim}")
    return x


def project(cone: ConeSpec, x) -> np.ndarray:
    """Euclidean projection of ``x`` onto the cone, block by block.

    Nonneg coordinates clip at zero.  A Lorentz block (x0, xt) maps to itself
    when x0 >= ||xt||, to zero when x0 <= -||xt||, and otherwise to
    (x0 + ||xt||)/2 * (1, xt/||xt||).
    """
    x = _check_dim(cone, x)
    out = x.copy()
    if cone.nonneg_dim:
        s, d = cone.nonneg_start, cone.nonneg_dim
        np.maximum(x[s:s + d], 0.0, out=out[s:s + d])
    for g in cone.soc_groups:
        X = g.gather(x)
        head = X[:, 0]
        tail = X[:, 1:]
        nt = np.linalg.norm(tail, axis=1)
        P = X.copy()
        polar = head <= -nt
        P[polar] = 0.0
        mid = ~polar & (head < nt)
        rows = np.nonzero(mid)[0]
        if rows.size:
            coef = 0.5 * (head[rows] + nt[rows])
            P[rows, 0] = coef
            P[rows, 1:] = (coef / nt[rows])[:, None] * tail[rows]
        g.scatter(out, P)
    return out


def dist_to_cone(cone: ConeSpec, x) -> float:
    """Euclidean distance from ``x`` to the cone (zero iff x is a member)."""
    x = _check_dim(cone, x)
    return float(np.linalg.norm(x - project(cone, x)))


@dataclass(frozen=True)
class _SocGroupJacobian:
    group: _SocGroup
    codes: np.ndarray   # (count,) SocCase values
    rho: np.ndarray     # (count,) in [-1, 1]; 1 for identity rows, -1 for zero rows
    omega: np.ndarray   # (count, dim-1) unit rows where the case needs one, else 0


@dataclass(frozen=True)
class JacobianElement:
    """One element of the projection's B-subdifferential, stored blockwise.

    The realized matrix of a Lorentz block is, with ``w`` the stored unit
    vector and ``r`` the stored ratio,

        0.5 * [[1, w'], [w, (1+r) I - r w w']]

    for the middle and both boundary cases (r = +-1 on the boundaries), the
    identity for interior points, and zero for polar-interior points.  The
    nonneg block stores a 0/1 mask.  Instances are immutable and cheap to
    apply: a matrix-vector product costs O(block dim) per block.
    """

    cone: ConeSpec
    nonneg_mask: np.ndarray | None
    soc: tuple[_SocGroupJacobian, ...]

    def soc_case(self, block_id: int):
        """Return ``(SocCase, rho, omega)`` for one Lorentz block (by block index)."""
        for gj in self.soc:
            pos = np.nonzero(gj.group.block_ids == block_id)[0]
            if pos.size:
                i = int(pos[0])
                code = SocCase(int(gj.codes[i]))
                return code, float(gj.rho[i]), gj.omega[i].copy()
        raise ValueError(f"block {block_id} is not a Lorentz block of this cone")

    def dense_block(self, block_id: int) -> np.ndarray:
        """Densify one block's realized matrix (diagnostics and small tests)."""
        blk = self.cone.blocks[block_id]
        if blk.kind == NONNEG:
            if self.nonneg_mask is None:
                raise ValueError("cone has no nonneg block content")
            return np.diag(self.nonneg_mask)
        code, rho, omega = self.soc_case(block_id)
        d = blk.dim
        if code == SocCase.ZERO:
            return np.zeros((d, d))
        if code == SocCase.IDENTITY:
            return np.eye(d)
        V = np.zeros((d, d))
        V[0, 0] = 0.5
        V[0, 1:] = 0.5 * omega
        V[1:, 0] = 0.5 * omega
        V[1:, 1:] = 0.5 * ((1.0 + rho) * np.eye(d - 1) - rho * np.outer(omega, omega))
        return V


def jacobian_element(cone: ConeSpec, x) -> JacobianElement:
    """Select one valid B-subdifferential element of the projection at ``x``.

    On smooth regions this is the classical Jacobian.  Ties (detected with
    absolute tolerance ``TIE_TOL`` on x0 -+ ||xt||) resolve to the identity on
    the upper boundary and at the origin, and to zero on the lower boundary;
    nonneg coordinates at exactly zero get derivative one.
    """
    x = _check_dim(cone, x)
    mask = None
    if cone.nonneg_dim:
        s, d = cone.nonneg_start, cone.nonneg_dim
        mask = (x[s:s + d] >= 0.0).astype(float)
    groups = []
    for g in cone.soc_groups:
        X = g.gather(x)
        head = X[:, 0]
        tail = X[:, 1:]
        nt = np.linalg.norm(tail, axis=1)
        d_up = head - nt
        d_low = head + nt
        identity = d_up >= -TIE_TOL           # interior, upper tie, and x ~ 0
        zero = ~identity & (d_low <= TIE_TOL)  # polar interior and lower tie
        middle = ~identity & ~zero
        codes = np.full(g.count, SocCase.MIDDLE, dtype=np.int8)
        codes[identity] = SocCase.IDENTITY
        codes[zero] = SocCase.ZERO
        rho = np.where(identity, 1.0, -1.0)
        omega = np.zeros_like(tail)
        rows = np.nonzero(middle)[0]
        if rows.size:
            rho[rows] = head[rows] / nt[rows]
            omega[rows] = tail[rows] / nt[rows][:, None]
        groups.append(_SocGroupJacobian(g, codes, rho, omega))
    return JacobianElement(cone, mask, tuple(groups))


def make_jacobian(cone: ConeSpec, nonneg_mask=None, soc_cases=None) -> JacobianElement:
    """Construct an element from explicit per-block cases.

    ``soc_cases`` maps Lorentz block index -> ``(SocCase, rho, omega)``; rho is
    ignored for zero/identity/boundary cases and omega for zero/identity.
    Useful for exercising boundary elements the default tie-breaking never
    emits.
    """
    soc_cases = dict(soc_cases or {})
    mask_arr = None
    if cone.nonneg_dim:
        if nonneg_mask is None:
            raise ValueError("cone has a nonneg block; a 0/1 mask is required")
        mask_arr = np.asarray(nonneg_mask, dtype=float)
        if mask_arr.shape != (cone.nonneg_dim,):
            raise ValueError("nonneg mask has the wrong length")
        if not np.all((mask_arr == 0.0) | (mask_arr == 1.0)):
            raise ValueError("nonneg mask entries must be 0 or 1")
    groups = []
    for g in cone.soc_groups:
        codes = np.empty(g.count, dtype=np.int8)
        rho = np.empty(g.count)
        omega = np.zeros((g.count, g.dim - 1))
        for i, blk_id in enumerate(g.block_ids):
            try:
                case, r, w = soc_cases[int(blk_id)]
            except KeyError:
                raise ValueError(f"missing case for Lorentz block {blk_id}")
            case = SocCase(case)
            codes[i] = case
            if case == SocCase.IDENTITY:
                rho[i] = 1.0
            elif case == SocCase.ZERO:
                rho[i] = -1.0
            elif case == SocCase.BOUNDARY_UPPER:
                rho[i] = 1.0
            elif case == SocCase.BOUNDARY_LOWER:
                rho[i] = -1.0
            else:
                r = float(r)
                if not -1.0 < r < 1.0:
                    raise ValueError(f"middle case needs rho in (-1, 1), got {r}")
                rho[i] = r
            if case in (SocCase.MIDDLE, SocCase.BOUNDARY_UPPER, SocCase.BOUNDARY_LOWER):
                w = np.asarray(w, dtype=float)
                if w.shape != (g.dim - 1,):
                    raise ValueError(f"omega for block {blk_id} has the wrong length")
                nw = np.linalg.norm(w)
                if abs(nw - 1.0) > 1e-14:
                    raise ValueError(f"omega for block {blk_id} is not a unit vector")
                omega[i] = w
        groups.append(_SocGroupJacobian(g, codes, rho, omega))
    return JacobianElement(cone, mask_arr, tuple(groups))


def apply_jacobian(J: JacobianElement, v) -> np.ndarray:
    """Apply the realized block-diagonal matrix to ``v`` without densifying."""
    cone = J.cone
    v = _check_dim(cone, v, name="v")
    out = np.zeros_like(v)
    if cone.nonneg_dim:
        s, d = cone.nonneg_start, cone.nonneg_dim
        out[s:s + d] = J.nonneg_mask * v[s:s + d]
    for gj in J.soc:
        g = gj.group
        V = g.gather(v)
        R = np.zeros_like(V)
        ident = gj.codes == SocCase.IDENTITY
        R[ident] = V[ident]
        rows = np.nonzero(gj.codes >= SocCase.MIDDLE)[0]
        if rows.size:
            head = V[rows, 0]
            tail = V[rows, 1:]
            w = gj.omega[rows]
            r = gj.rho[rows]
            wt = np.einsum("ij,ij->i", w, tail)
            R[rows, 0] = 0.5 * (head + wt)
            R[rows, 1:] = 0.5 * (
                head[:, None] * w
                + (1.0 + r)[:, None] * tail
                - (r * wt)[:, None] * w)
        g.scatter(out, R)
    return out
