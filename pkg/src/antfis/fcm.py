"""Fuzzy c-means clustering with seeded random membership initialization.

Alternates the classic updates

    v_i = sum_k u_ik^m x_k / sum_k u_ik^m
    u_ik = 1 / sum_j (||x_k - v_i|| / ||x_k - v_j||)^(2/(m-1))

until the objective J = sum_i sum_k u_ik^m ||x_k - v_i||^2 stops
decreasing. Membership matrices are initialized from seeded uniform
draws and row-normalized, so runs are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FcmConfig:
    c: int
    m: float = 2.0
    tol: float = 1e-5
    max_iter: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.c < 2:
            raise ValueError(f"fcm: cluster count c must be >= 2, got {self.c}")
        if self.m <= 1.0:
            raise ValueError(f"fcm: fuzziness exponent m must be > 1, got {self.m}")
        if self.tol <= 0.0:
            raise ValueError(f"fcm: tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"fcm: max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class FcmResult:
    centers: np.ndarray            # (c, d)
    memberships: np.ndarray        # (n, c), rows sum to 1
    objective: float
    iterations: int
    objective_history: np.ndarray  # J after each completed iteration


def _sq_distances(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - centers[None, :, :]
    return np.einsum("ncd,ncd->nc", diff, diff)


def _memberships_from_distances(d2: np.ndarray, m: float) -> np.ndarray:
    # Coincident (or near-coincident to overflow) point/center pairs make
    # inv non-finite; those rows become a deterministic one-hot on the
    # first nearest center, removing the division singularity.
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inv = d2 ** (-1.0 / (m - 1.0))
        U = inv / inv.sum(axis=1, keepdims=True)
    bad = ~np.isfinite(U).all(axis=1)
    if bad.any():
        rows = np.flatnonzero(bad)
        U[rows] = 0.0
        U[rows, d2[rows].argmin(axis=1)] = 1.0
    return U


def fcm_cluster(data: np.ndarray, config: FcmConfig) -> FcmResult:
    """Cluster row vectors of `data` into config.c fuzzy groups.

    Expects data roughly scaled to [0, 1]. Raises ValueError when there
    are fewer points than clusters or the data contains non-finite values.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("fcm: data must be a 2-d (n, d) array")
    n, _ = X.shape
    if n < config.c:
        raise ValueError(f"fcm: need at least c={config.c} points, got {n}")
    if not np.isfinite(X).all():
        raise ValueError("fcm: data contains non-finite values")

    rng = np.random.default_rng(config.seed)
    U = rng.random((n, config.c))
    U /= U.sum(axis=1, keepdims=True)

    m = config.m
    centers = np.empty((config.c, X.shape[1]))
    centers_known = False
    history = []
    prev_j = np.inf
    iterations = 0
    for _ in range(config.max_iter):
        W = U ** m
        col = W.sum(axis=0)
        new_centers = np.where(col[:, None] > 0.0,
                               (W.T @ X) / np.maximum(col[:, None], 1e-300),
                               centers if centers_known else X.mean(axis=0))
        centers = new_centers
        centers_known = True
        d2 = _sq_distances(X, centers)
        U = _memberships_from_distances(d2, m)
        j = float(np.sum((U ** m) * d2))
        history.append(j)
        iterations += 1
        if prev_j - j < config.tol:
            break
        prev_j = j

    return FcmResult(centers=centers, memberships=U, objective=history[-1],
                     iterations=iterations,
                     objective_history=np.array(history))


def fcm_objective(data: np.ndarray, centers: np.ndarray,
                  memberships: np.ndarray, m: float) -> float:
    """J = sum_i sum_k u_ik^m ||x_k - v_i||^2 for the given partition."""
    X = np.asarray(data, dtype=float)
    V = np.asarray(centers, dtype=float)
    U = np.asarray(memberships, dtype=float)
    if X.ndim != 2 or V.ndim != 2 or U.ndim != 2:
        raise ValueError("fcm_objective: data, centers, memberships must be 2-d")
    if X.shape[0] != U.shape[0] or V.shape[0] != U.shape[1] \
            or X.shape[1] != V.shape[1]:
        raise ValueError("fcm_objective: dimension mismatch between "
                         f"data {X.shape}, centers {V.shape}, memberships {U.shape}")
    return float(np.sum((U ** m) * _sq_distances(X, V)))
