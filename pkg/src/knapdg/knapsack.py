"""Continuous linear and quadratic knapsack solvers.

Both problems minimize over theta subject to a . theta >= b and
0 <= theta <= caps.  The quadratic problem (L2 objective) reduces to a
scalar quasi-Newton rootfind that terminates in at most L+1 iterations;
the linear problem (L1 objective) is solved greedily.  A brute-force
grid oracle is provided for validating both on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleInstance

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class KnapsackInstance:
    """Weights a, right-hand side b, and upper bounds caps in [0, 1]."""

    a: np.ndarray
    b: float
    caps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "caps", np.asarray(self.caps, dtype=float))
        if self.a.shape != self.caps.shape or self.a.ndim != 1:
            raise ValueError("a and caps must be 1D arrays of equal length")
        if np.any(self.caps < -1e-14) or np.any(self.caps > 1.0 + 1e-14):
            raise ValueError("caps must lie in [0, 1]")

    @property
    def size(self) -> int:
        return self.a.size

    def is_feasible(self, tol: float = DEFAULT_TOL) -> bool:
        if self.b <= 0.0:
            return True
        return float(self.a @ self.caps) >= self.b - tol


@dataclass(frozen=True)
class KnapsackSolution:
    theta: np.ndarray
    lam: float | None
    iterations: int
    residual: float
    converged: bool


def clip(x, lo, hi):
    """Componentwise median(lo, x, hi)."""
    return np.minimum(np.maximum(x, lo), hi)


def f_and_df(inst: KnapsackInstance, lam: float) -> tuple[float, float]:
    """Constraint gap f(lam) = a . clip(lam a, 0, caps) - b and its right-derivative.

    The right-derivative sums a_i^2 over components with a_i > 0 and
    lam a_i strictly below caps_i.
    """
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    a = inst.a
    theta = clip(lam * a, 0.0, inst.caps)
    f = float(a @ theta) - inst.b
    active = (a > 0.0) & (lam * a < inst.caps)
    df = float(np.sum(a[active] ** 2))
    return f, df


def solve_quadratic_batch(a: np.ndarray, b: np.ndarray, caps: np.ndarray, tol: float = DEFAULT_TOL):
    """Vectorized quasi-Newton solve of many same-size quadratic instances.

    Returns (theta, lam, iterations, converged) with leading batch axis.
    Raises InfeasibleInstance if any instance has df = 0 while f < -tol.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    caps = np.atleast_2d(np.asarray(caps, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    B, L = a.shape
    lam = np.zeros(B)
    iterations = np.zeros(B, dtype=int)
    converged = b <= 0.0
    active = ~converged

    def eval_fdf(lam_v, rows):
        av = a[rows]
        cv = caps[rows]
        th = clip(lam_v[:, None] * av, 0.0, cv)
        f = np.einsum("ij,ij->i", av, th) - b[rows]
        mask = (av > 0.0) & (lam_v[:, None] * av < cv)
        df = np.einsum("ij,ij->i", np.where(mask, av, 0.0), np.where(mask, av, 0.0))
        return f, df

    rows = np.nonzero(active)[0]
    if rows.size:
        f, df = eval_fdf(lam[rows], rows)
        for _ in range(L + 1):
            if rows.size == 0:
                break
            stuck = df == 0.0
            if np.any(stuck):
                bad = f[stuck] < -tol
                if np.any(bad):
                    idx = rows[stuck][bad][0]
                    raise InfeasibleInstance(
                        f"knapsack instance {idx} is infeasible: caps exhausted with "
                        f"constraint gap {-f[stuck][bad][0]:.3e}"
                    )
                # saturated but feasible within tolerance: accept current lam
                keep = rows[stuck]
                converged[keep] = True
                rows = rows[~stuck]
                f, df = f[~stuck], df[~stuck]
                if rows.size == 0:
                    break
            lam[rows] -= f / df
            iterations[rows] += 1
            f, df = eval_fdf(lam[rows], rows)
            done = -f < tol
            converged[rows[done]] = True
            rows = rows[~done]
            f, df = f[~done], df[~done]

    theta = clip(lam[:, None] * a, 0.0, caps)
    theta[b <= 0.0] = 0.0
    return theta, lam, iterations, converged


def solve_quadratic(inst: KnapsackInstance, tol: float = DEFAULT_TOL) -> KnapsackSolution:
    """Minimal-L2-norm solution via the scalar quasi-Newton iteration."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    theta, lam, iters, conv = solve_quadratic_batch(
        inst.a[None, :], np.array([inst.b]), inst.caps[None, :], tol
    )
    theta = theta[0]
    return KnapsackSolution(
        theta=theta,
        lam=float(lam[0]),
        iterations=int(iters[0]),
        residual=float(inst.a @ theta - inst.b),
        converged=bool(conv[0]),
    )


def solve_linear_batch(a: np.ndarray, b: np.ndarray, caps: np.ndarray, tol: float = DEFAULT_TOL):
    """Vectorized greedy solve of many same-size linear instances.

    Components are filled in descending weight order (stable sort, so
    ties break toward the lower index).  Returns (theta, filled).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    caps = np.atleast_2d(np.asarray(caps, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    B, L = a.shape

    order = np.argsort(-a, axis=1, kind="stable")
    rows = np.arange(B)[:, None]
    a_s = a[rows, order]
    caps_s = np.where(a_s > 0.0, caps[rows, order], 0.0)
    full = a_s * caps_s
    prev = np.concatenate([np.zeros((B, 1)), np.cumsum(full, axis=1)[:, :-1]], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = (b[:, None] - prev) / np.where(a_s > 0.0, a_s, 1.0)
    theta_s = np.where(a_s > 0.0, clip(raw, 0.0, caps_s), 0.0)
    theta_s[b <= 0.0] = 0.0

    theta = np.empty_like(theta_s)
    theta[rows, order] = theta_s

    gap = b - np.einsum("ij,ij->i", a, theta)
    bad = (b > 0.0) & (gap > tol)
    if np.any(bad):
        idx = int(np.nonzero(bad)[0][0])
        raise InfeasibleInstance(
            f"knapsack instance {idx} is infeasible: caps exhausted with "
            f"constraint gap {gap[idx]:.3e}"
        )
    return theta, np.sum(theta_s > 0.0, axis=1)


def solve_linear(inst: KnapsackInstance, tol: float = DEFAULT_TOL) -> KnapsackSolution:
    """Minimal-L1-norm solution via the greedy fill."""
    theta, filled = solve_linear_batch(
        inst.a[None, :], np.array([inst.b]), inst.caps[None, :], tol
    )
    theta = theta[0]
    return KnapsackSolution(
        theta=theta,
        lam=None,
        iterations=int(filled[0]),
        residual=float(inst.a @ theta - inst.b),
        converged=True,
    )


def brute_force_oracle(inst: KnapsackInstance, objective: str = "l2", grid: int = 101):
    """Exhaustive grid search over [0, caps]^L; None if no grid point is feasible.

    Only intended for tests: L <= 4 and grid <= 201 per axis.
    """
    if inst.size > 4:
        raise ValueError("oracle limited to L <= 4")
    if grid > 201:
        raise ValueError("oracle limited to grid <= 201 per axis")
    axes = [np.linspace(0.0, c, grid) for c in inst.caps]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    feasible = pts @ inst.a >= inst.b - 1e-12
    if not np.any(feasible):
        return None
    pts = pts[feasible]
    if objective == "l2":
        obj = np.sum(pts * pts, axis=1)
    elif objective == "l1":
        obj = np.sum(pts, axis=1)
    else:
        raise ValueError("objective must be 'l1' or 'l2'")
    return pts[int(np.argmin(obj))]
