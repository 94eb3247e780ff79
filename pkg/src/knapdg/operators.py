"""Reference-element operators for nodal DG on tensor-product elements.

Builds Legendre-Gauss-Lobatto quadrature, summation-by-parts (SBP)
matrices, their sparse low-order finite-volume analogues, and the
difference / cumulative-sum operator pair used by subcell blending.
Everything here is assembled once per run and then shared read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Lobatto rule on [-1, 1]: N+1 nodes, exact through degree 2N-1."""

    degree: int
    nodes: np.ndarray
    weights: np.ndarray


def _legendre_table(x: np.ndarray, n: int) -> np.ndarray:
    """Columns P_0(x) .. P_{n-1}(x) via the three-term recurrence."""
    table = np.zeros((x.size, n))
    table[:, 0] = 1.0
    if n > 1:
        table[:, 1] = x
    for k in range(1, n - 1):
        table[:, k + 1] = ((2 * k + 1) * x * table[:, k] - k * table[:, k - 1]) / (k + 1)
    return table


def lgl_rule(N: int) -> QuadratureRule:
    """Legendre-Gauss-Lobatto quadrature of degree N (N+1 nodes).

    Nodes are the roots of (1 - x^2) P_N'(x), found by Newton iteration
    from Chebyshev-Gauss-Lobatto initial guesses; weights follow from
    2 / (N (N+1) P_N(x_i)^2).
    """
    if N < 1:
        raise ValueError("LGL rule requires N >= 1; no SBP pair exists for N = 0")
    n = N + 1
    x = -np.cos(np.pi * np.arange(n) / N)
    for _ in range(_NEWTON_MAXIT):
        P = _legendre_table(x, n)
        # Newton step for (1 - x^2) P_N'(x); endpoints are exact fixed points
        dx = (x * P[:, n - 1] - P[:, n - 2]) / (n * P[:, n - 1])
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    # enforce exact symmetry and endpoint values
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    P = _legendre_table(x, n)
    w = 2.0 / (N * n * P[:, n - 1] ** 2)
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(degree=N, nodes=x, weights=w)


def lagrange_diff_matrix(x: np.ndarray) -> np.ndarray:
    """Differentiation matrix D_ij = l_j'(x_i) on the given nodes.

    Barycentric form with the negative-sum trick for the diagonal, which
    stays well conditioned at the polynomial degrees used here.
    """
    n = x.size
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    wb = 1.0 / np.prod(diff, axis=1)
    wb = wb / np.max(np.abs(wb))
    D = (wb[None, :] / wb[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -np.sum(D, axis=1))
    return D


def low_order_q(n: int) -> np.ndarray:
    """Sparse two-point finite-volume analogue of Q on n nodes."""
    QL = np.zeros((n, n))
    for i in range(n):
        if i > 0:
            QL[i, i - 1] = -0.5
        if i < n - 1:
            QL[i, i + 1] = 0.5
    QL[0, 0] = -0.5
    QL[n - 1, n - 1] = 0.5
    return QL


@dataclass(frozen=True)
class FaceGroup:
    """One face of the reference element: node selection, weights, normal."""

    axis: int
    side: int  # -1 or +1
    vol_idx: np.ndarray  # volume-node index of each face node, tangentially ordered
    weights: np.ndarray  # face quadrature weights (include transverse h/2 factors)
    normal: np.ndarray  # outward unit normal, shape (d,)


@dataclass(frozen=True)
class PairTable:
    """Nonzero skew-part entries of one axis, listed once per unordered pair."""

    axis: int
    i: np.ndarray
    j: np.ndarray
    w: np.ndarray  # |n_ij|
    nhat: np.ndarray  # unit normals, shape (npairs, d)


@dataclass(frozen=True)
class OperatorSet:
    """All discrete operators for a single element geometry."""

    dimension: int
    degree: int
    h: tuple[float, ...]
    quad: QuadratureRule
    n_nodes: int
    M: np.ndarray  # diagonal of the mass matrix, shape (n,)
    Q: tuple[np.ndarray, ...]  # per-axis SBP matrices
    D: tuple[np.ndarray, ...]  # per-axis physical differentiation matrices
    QL: tuple[np.ndarray, ...]  # per-axis low-order matrices
    E: np.ndarray  # face extraction, shape (n_face, n)
    face_groups: tuple[FaceGroup, ...]
    face_weights: np.ndarray  # stacked group weights, shape (n_face,)
    face_normals: np.ndarray  # stacked unit normals, shape (n_face, d)
    pairs_high: tuple[PairTable, ...]
    pairs_low: tuple[PairTable, ...]

    @property
    def n_face(self) -> int:
        return self.E.shape[0]

    def face_node_indices(self) -> np.ndarray:
        return np.concatenate([g.vol_idx for g in self.face_groups])

    def boundary_matrix(self, axis: int) -> np.ndarray:
        """E^T diag(w * nhat_axis) E, the SBP boundary term of one axis."""
        wn = self.face_weights * self.face_normals[:, axis]
        return self.E.T @ (wn[:, None] * self.E)


def _pair_tables(skew: list[np.ndarray], dimension: int) -> tuple[PairTable, ...]:
    tables = []
    for axis, S in enumerate(skew):
        scale = np.max(np.abs(S)) if S.size else 1.0
        ii, jj = np.nonzero(np.triu(np.abs(S) > 1e-13 * max(scale, 1e-300), k=1))
        vals = S[ii, jj]
        nhat = np.zeros((ii.size, dimension))
        nhat[:, axis] = np.sign(vals)
        tables.append(
            PairTable(axis=axis, i=ii, j=jj, w=np.abs(vals), nhat=nhat)
        )
    return tuple(tables)


def build_operators(N: int, dimension: int, h) -> OperatorSet:
    """Assemble the full operator set for one element geometry.

    1D blocks: M = (h/2) diag(w), Q = diag(w) D_ref (h-independent),
    E selects the endpoints, boundary weights are +/-1.  2D blocks are
    Kronecker products with x the fastest-running node index.  The
    low-order Q^L carries the same transverse mass weighting as Q so
    that both share one boundary operator.
    """
    if N < 1:
        raise ValueError("operators require N >= 1")
    if dimension not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    h = tuple(float(v) for v in (h if np.iterable(h) else [h] * dimension))
    if len(h) != dimension:
        raise ValueError("element size h must have one entry per axis")
    if any(v <= 0 for v in h):
        raise ValueError("element sizes must be positive")

    quad = lgl_rule(N)
    n1 = N + 1
    w1 = quad.weights
    Dref = lagrange_diff_matrix(quad.nodes)
    Qhat = w1[:, None] * Dref
    QLhat = low_order_q(n1)

    if dimension == 1:
        hx = h[0]
        M = 0.5 * hx * w1
        Q = (Qhat,)
        D = ((2.0 / hx) * Dref,)
        QL = (QLhat,)
        groups = (
            FaceGroup(0, -1, np.array([0]), np.array([1.0]), np.array([-1.0])),
            FaceGroup(0, +1, np.array([n1 - 1]), np.array([1.0]), np.array([1.0])),
        )
    else:
        hx, hy = h
        Mx = 0.5 * hx * w1
        My = 0.5 * hy * w1
        M = np.kron(My, Mx)
        Q1 = np.kron(np.diag(My), Qhat)
        Q2 = np.kron(Qhat, np.diag(Mx))
        QL1 = np.kron(np.diag(My), QLhat)
        QL2 = np.kron(QLhat, np.diag(Mx))
        Q = (Q1, Q2)
        D = (np.kron(np.eye(n1), (2.0 / hx) * Dref), np.kron((2.0 / hy) * Dref, np.eye(n1)))
        QL = (QL1, QL2)
        idx = np.arange(n1)
        groups = (
            FaceGroup(0, -1, idx * n1, My, np.array([-1.0, 0.0])),
            FaceGroup(0, +1, idx * n1 + (n1 - 1), My, np.array([1.0, 0.0])),
            FaceGroup(1, -1, idx, Mx, np.array([0.0, -1.0])),
            FaceGroup(1, +1, idx + n1 * (n1 - 1), Mx, np.array([0.0, 1.0])),
        )

    n = M.size
    E = np.zeros((sum(g.vol_idx.size for g in groups), n))
    row = 0
    for g in groups:
        for k in g.vol_idx:
            E[row, k] = 1.0
            row += 1
    face_weights = np.concatenate([g.weights for g in groups])
    face_normals = np.concatenate(
        [np.broadcast_to(g.normal, (g.vol_idx.size, dimension)) for g in groups]
    )

    pairs_high = _pair_tables([Qk - Qk.T for Qk in Q], dimension)
    pairs_low = _pair_tables([Qk - Qk.T for Qk in QL], dimension)

    return OperatorSet(
        dimension=dimension,
        degree=N,
        h=h,
        quad=quad,
        n_nodes=n,
        M=M,
        Q=Q,
        D=D,
        QL=QL,
        E=E,
        face_groups=groups,
        face_weights=face_weights,
        face_normals=face_normals,
        pairs_high=pairs_high,
        pairs_low=pairs_low,
    )


@dataclass(frozen=True)
class SubcellOperators:
    """Forward-difference / cumulative-sum pair used by subcell blending."""

    delta: np.ndarray  # (n, n+1)
    rsum: np.ndarray  # (n+1, n)
    L: int


def build_subcell_operators(n: int) -> SubcellOperators:
    """Difference stencil and strictly-lower-triangular summation matrix.

    Both defining identities (feasibility/consistency and conservation)
    are checked at build time; a failure is an internal bug, not a user
    error.
    """
    if n < 2:
        raise ValueError("subcell operators require n >= 2")
    delta = np.zeros((n, n + 1))
    for i in range(n):
        delta[i, i] = -1.0
        delta[i, i + 1] = 1.0
    rsum = np.tril(np.ones((n + 1, n)), k=-1)

    # basis of the zero-sum subspace: columns e_k - e_{k+1}
    basis = np.zeros((n, n - 1))
    for k in range(n - 1):
        basis[k, k] = 1.0
        basis[k + 1, k] = -1.0
    feas = (delta @ rsum - np.eye(n)) @ basis
    cons = np.diag(delta.T @ np.ones(n)) @ rsum @ basis
    if np.max(np.abs(feas)) > 1e-13 or np.max(np.abs(cons)) > 1e-13:
        raise SolverError("subcell operator property check failed")
    return SubcellOperators(delta=delta, rsum=rsum, L=n + 1)
