"""Continuous-domain ant colony optimizer.

A ranked archive of the k best solutions plays the pheromone role: each
ant picks an archive member with rank-weighted probability, then samples
every coordinate from a Gaussian kernel centered on it whose width is
the mean spread of the archive in that coordinate. Out-of-bounds draws
are reflected back into the box. After each iteration the archive keeps
the best k of old plus new solutions, which forgets weak trails the way
evaporation does.

Every candidate draws from its own counter-based stream addressed by
(seed, iteration, ant), so the trajectory is reproducible no matter how
fitness evaluations are parallelized.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NumericError
from .rng import substream

logger = logging.getLogger(__name__)

_INIT_STREAM = 0
_ANT_STREAM = 1
_SD_FLOOR_REL = 1e-9  # kernel width floor, relative to the box extent


@dataclass(frozen=True)
class AcoConfig:
    n_ants: int = 20
    archive_size: int = 25
    q: float = 0.1          # locality: small q concentrates on top ranks
    xi: float = 0.85        # kernel width factor; smaller converges faster
    max_iter: int = 100
    seed: int = 0
    bounds: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.n_ants < 1:
            raise ValueError(f"aco: n_ants must be >= 1, got {self.n_ants}")
        if self.archive_size < 2:
            raise ValueError(f"aco: archive_size must be >= 2, "
                             f"got {self.archive_size}")
        if self.q <= 0.0:
            raise ValueError(f"aco: q must be > 0, got {self.q}")
        if not 0.0 < self.xi <= 1.0:
            raise ValueError(f"aco: xi must be in (0, 1], got {self.xi}")
        if self.max_iter < 1:
            raise ValueError(f"aco: max_iter must be >= 1, got {self.max_iter}")
        if self.bounds is not None:
            for lo, hi in self.bounds:
                if not lo < hi:
                    raise ValueError(f"aco: bounds require lo < hi, "
                                     f"got ({lo}, {hi})")


@dataclass(frozen=True)
class SolutionArchive:
    solutions: np.ndarray   # (k, d), ascending objective
    objectives: np.ndarray  # (k,)
    weights: np.ndarray     # (k,) rank weights, best first


@dataclass(frozen=True)
class OptResult:
    best_vector: np.ndarray
    best_objective: float
    history: np.ndarray     # best-so-far objective after each iteration
    evaluations: int


def rank_weights(k: int, q: float) -> np.ndarray:
    """Unnormalized Gaussian rank weights w_l for ranks l = 1..k.

    w_l = exp(-(l-1)^2 / (2 q^2 k^2)) / (q k sqrt(2 pi)); consumers
    normalize when forming selection probabilities.
    """
    if k < 2 or q <= 0.0:
        raise ValueError("rank_weights: need k >= 2 and q > 0")
    ranks = np.arange(k, dtype=float)
    return np.exp(-ranks ** 2 / (2.0 * q ** 2 * k ** 2)) \
        / (q * k * np.sqrt(2.0 * np.pi))


def _reflect(v: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # Closed form of repeated reflection at both walls (period 2*span).
    span = hi - lo
    t = np.mod(v - lo, 2.0 * span)
    return lo + np.where(t > span, 2.0 * span - t, t)


def sample_candidate(archive: SolutionArchive, xi: float,
                     bounds: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one candidate from the archive's Gaussian kernel mixture."""
    weights = archive.weights
    probs = np.cumsum(weights / weights.sum())
    guide = min(int(np.searchsorted(probs, rng.random(), side="right")),
                len(weights) - 1)
    s_g = archive.solutions[guide]
    k = archive.solutions.shape[0]
    sd = xi * np.abs(archive.solutions - s_g).sum(axis=0) / (k - 1)
    lo, hi = bounds[:, 0], bounds[:, 1]
    sd = np.maximum(sd, _SD_FLOOR_REL * (hi - lo))
    return _reflect(s_g + sd * rng.standard_normal(s_g.shape[0]), lo, hi)


def update_archive(archive: SolutionArchive, candidates: np.ndarray,
                   objectives: np.ndarray) -> SolutionArchive:
    """Merge candidates, keep the best k; ties keep earlier insertions.

    NaN objectives are discarded with a warning; +inf marks an invalid
    candidate and simply sorts last.
    """
    objectives = np.asarray(objectives, dtype=float)
    keep = ~np.isnan(objectives)
    if not keep.all():
        logger.warning("aco: discarded %d candidate(s) with NaN objective",
                       int((~keep).sum()))
    merged_sol = np.vstack([archive.solutions, candidates[keep]])
    merged_obj = np.concatenate([archive.objectives, objectives[keep]])
    k = archive.solutions.shape[0]
    order = np.argsort(merged_obj, kind="stable")[:k]
    return SolutionArchive(solutions=merged_sol[order],
                           objectives=merged_obj[order],
                           weights=archive.weights)


def optimize(objective: Callable[[np.ndarray], float], dims: int,
             config: AcoConfig,
             initial_guesses: Sequence[np.ndarray] = (),
             n_workers: int = 1) -> OptResult:
    """Minimize `objective` over the configured box.

    The archive starts from k uniform seeded samples (optionally with
    `initial_guesses` replacing the first few, clipped into bounds), then
    runs exactly max_iter iterations of sample / evaluate / merge. The
    objective may return +inf to flag an invalid vector; NaN candidates
    are dropped. Raises NumericError if no initial point evaluates finite.

    n_workers > 1 evaluates each iteration's candidates in a thread pool;
    results are identical to the sequential run because candidates are
    drawn from per-(iteration, ant) counter-based streams before any
    evaluation starts.
    """
    if config.bounds is None:
        raise ValueError("optimize: config.bounds must be set")
    bounds = np.asarray(config.bounds, dtype=float)
    if bounds.shape != (dims, 2):
        raise ValueError(f"optimize: expected {dims} bounds pairs, "
                         f"got shape {bounds.shape}")
    k = config.archive_size
    lo, hi = bounds[:, 0], bounds[:, 1]

    def evaluate(batch: np.ndarray) -> np.ndarray:
        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                values = list(pool.map(objective, batch))
        else:
            values = [objective(v) for v in batch]
        return np.asarray(values, dtype=float)

    init_rng = substream(config.seed, _INIT_STREAM)
    solutions = lo + (hi - lo) * init_rng.random((k, dims))
    for i, guess in enumerate(initial_guesses[:k]):
        solutions[i] = np.clip(np.asarray(guess, dtype=float), lo, hi)
    objectives = evaluate(solutions)
    objectives[np.isnan(objectives)] = np.inf
    if not np.isfinite(objectives).any():
        raise NumericError("aco: objective invalid on domain")
    evaluations = k

    order = np.argsort(objectives, kind="stable")
    archive = SolutionArchive(solutions=solutions[order],
                              objectives=objectives[order],
                              weights=rank_weights(k, config.q))

    history = np.empty(config.max_iter)
    for it in range(config.max_iter):
        candidates = np.array([
            sample_candidate(archive, config.xi, bounds,
                             substream(config.seed, _ANT_STREAM, it, ant))
            for ant in range(config.n_ants)
        ])
        archive = update_archive(archive, candidates, evaluate(candidates))
        evaluations += config.n_ants
        history[it] = archive.objectives[0]

    return OptResult(best_vector=archive.solutions[0].copy(),
                     best_objective=float(archive.objectives[0]),
                     history=history, evaluations=evaluations)
