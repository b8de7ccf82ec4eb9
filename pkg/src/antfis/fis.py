"""First-order Takagi-Sugeno fuzzy system with Gaussian premises.

Each rule carries one Gaussian membership function per input feature and
an affine consequent. The output is the firing-strength-weighted average
of the rule consequents, computed through a log-domain shift so the
mixture stays defined even when every raw strength underflows.

Premise parameters live on a flat vector (rule-major, feature-minor,
(center, sigma) pairs) so an external optimizer can tune them while the
consequents are refit by damped least squares.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset import FeatureStage, Normalizer
from .errors import NumericError

SIGMA_FLOOR = 1e-3
SIGMA_CAP = 1.0
DEFAULT_DAMPING = 1e-6


@dataclass(frozen=True)
class GaussianMf:
    center: float
    sigma: float


@dataclass(frozen=True)
class Rule:
    premise: tuple[GaussianMf, ...]
    consequent: tuple[float, ...]  # d feature weights followed by the bias


@dataclass(frozen=True)
class FisModel:
    """Immutable rule base; refits return new models."""

    centers: np.ndarray   # (c, d) premise centers
    sigmas: np.ndarray    # (c, d) premise widths, >= SIGMA_FLOOR
    coeffs: np.ndarray    # (c, d+1) affine consequents
    stage: FeatureStage
    normalizer: Normalizer

    def __post_init__(self):
        c, d = self.centers.shape
        if self.sigmas.shape != (c, d) or self.coeffs.shape != (c, d + 1):
            raise ValueError("fis: inconsistent rule array shapes")
        if c < 1:
            raise ValueError("fis: need at least one rule")
        if d != self.stage.n_features:
            raise ValueError(f"fis: premise arity {d} != stage arity "
                             f"{self.stage.n_features}")
        if not (np.isfinite(self.centers).all() and np.isfinite(self.sigmas).all()
                and np.isfinite(self.coeffs).all()):
            raise ValueError("fis: parameters must be finite")
        if (self.sigmas < SIGMA_FLOOR * (1.0 - 1e-12)).any():
            raise ValueError(f"fis: sigma below floor {SIGMA_FLOOR}")

    @property
    def n_rules(self) -> int:
        return self.centers.shape[0]

    @property
    def n_features(self) -> int:
        return self.centers.shape[1]

    @property
    def rules(self) -> tuple[Rule, ...]:
        return tuple(
            Rule(premise=tuple(GaussianMf(float(c), float(s))
                               for c, s in zip(self.centers[i], self.sigmas[i])),
                 consequent=tuple(float(v) for v in self.coeffs[i]))
            for i in range(self.n_rules)
        )


def _as_batch(x) -> np.ndarray:
    X = np.asarray(x, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    return X


def log_firing_strengths(model: FisModel, X: np.ndarray) -> np.ndarray:
    """log w for a batch: (n, c) with log w_i = -0.5 sum_j ((x_j-c_ij)/s_ij)^2."""
    z = (X[:, None, :] - model.centers[None, :, :]) / model.sigmas[None, :, :]
    return -0.5 * np.einsum("ncd,ncd->nc", z, z)


def firing_strengths(model: FisModel, x) -> np.ndarray:
    """Raw rule activations w_i in (0, 1] at a single point."""
    X = _as_batch(x)
    if X.shape[1] != model.n_features:
        raise ValueError(f"firing_strengths: expected {model.n_features} "
                         f"features, got {X.shape[1]}")
    return np.exp(log_firing_strengths(model, X))[0]


def normalized_firing(model: FisModel, X: np.ndarray) -> np.ndarray:
    """Normalized strengths w_i / sum_j w_j, stable under underflow.

    The log-domain shift by the per-row maximum keeps the dominant rule's
    weight at exp(0) = 1, so the denominator never rounds to zero.
    """
    logw = log_firing_strengths(model, X)
    shifted = np.exp(logw - logw.max(axis=1, keepdims=True))
    total = shifted.sum(axis=1, keepdims=True)
    if not np.isfinite(total).all() or (total == 0.0).any():
        raise NumericError("fis: all rule premises degenerate at some input")
    return shifted / total


def predict_batch(model: FisModel, X) -> np.ndarray:
    """Weighted-average model output for a batch of feature rows (unclamped)."""
    X = _as_batch(X)
    if X.shape[1] != model.n_features:
        raise ValueError(f"predict: expected {model.n_features} features, "
                         f"got {X.shape[1]}")
    if not np.isfinite(X).all():
        raise ValueError("predict: non-finite feature value")
    wbar = normalized_firing(model, X)
    rule_out = X @ model.coeffs[:, :-1].T + model.coeffs[:, -1]  # (n, c)
    return np.einsum("nc,nc->n", wbar, rule_out)


def predict(model: FisModel, x) -> float:
    """Model output at a single feature vector (unclamped)."""
    return float(predict_batch(model, np.asarray(x, dtype=float)[None, :])[0])


def design_matrix(model: FisModel, X: np.ndarray) -> np.ndarray:
    """Least-squares regressors for the consequents: (n, c*(d+1)).

    Row k holds, rule by rule, the normalized strength times (features, 1),
    so design @ coeffs.ravel() equals the model prediction at X.
    """
    X = _as_batch(X)
    n, d = X.shape
    wbar = normalized_firing(model, X)
    Xa = np.concatenate([X, np.ones((n, 1))], axis=1)
    return (wbar[:, :, None] * Xa[:, None, :]).reshape(n, -1)


def solve_consequents(A: np.ndarray, y: np.ndarray,
                      lam: float = DEFAULT_DAMPING) -> np.ndarray:
    """Solve min ||A t - y||^2 + lam ||t||^2 for the stacked coefficients.

    With lam > 0 the normal equations are positive definite and solved
    directly; with lam = 0 the minimum-norm least-squares solution is
    returned, so rank-deficient systems never error.
    """
    if lam < 0.0:
        raise ValueError(f"solve_consequents: damping must be >= 0, got {lam}")
    if lam > 0.0:
        k = A.shape[1]
        gram = A.T @ A + lam * np.eye(k)
        try:
            return np.linalg.solve(gram, A.T @ y)
        except np.linalg.LinAlgError:
            pass
    return np.linalg.lstsq(A, y, rcond=None)[0]


def fit_consequents(model: FisModel, X: np.ndarray, y: np.ndarray,
                    lam: float = DEFAULT_DAMPING) -> FisModel:
    """Refit the affine consequents by damped least squares, premises fixed."""
    X = _as_batch(X)
    y = np.asarray(y, dtype=float)
    A = design_matrix(model, X)
    theta = solve_consequents(A, y, lam)
    coeffs = theta.reshape(model.n_rules, model.n_features + 1)
    return replace(model, coeffs=coeffs)


def init_from_fcm(fcm_result, X: np.ndarray, y: np.ndarray,
                  stage: FeatureStage, normalizer: Normalizer,
                  lam: float = DEFAULT_DAMPING) -> FisModel:
    """Seed one rule per cluster from a fuzzy c-means partition.

    Premise centers are the cluster centers; each sigma is the
    membership-weighted standard deviation of its feature about the
    center, floored at SIGMA_FLOOR. Consequents start at zero and are
    then fit by least squares.
    """
    X = _as_batch(X)
    centers = np.asarray(fcm_result.centers, dtype=float)
    U = np.asarray(fcm_result.memberships, dtype=float)
    c, d = centers.shape
    if X.shape[1] != d or X.shape[0] != U.shape[0] or U.shape[1] != c:
        raise ValueError("init_from_fcm: clustering does not match the data")
    if d != stage.n_features:
        raise ValueError(f"init_from_fcm: cluster arity {d} != stage arity "
                         f"{stage.n_features}")
    diff2 = (X[:, None, :] - centers[None, :, :]) ** 2
    wsum = U.sum(axis=0)
    var = np.einsum("nc,ncd->cd", U, diff2) / np.maximum(wsum[:, None], 1e-300)
    sigmas = np.clip(np.sqrt(var), SIGMA_FLOOR, SIGMA_CAP)
    model = FisModel(centers=centers, sigmas=sigmas,
                     coeffs=np.zeros((c, d + 1)), stage=stage,
                     normalizer=normalizer)
    return fit_consequents(model, X, y, lam)


def encode_premise(model: FisModel) -> np.ndarray:
    """Flatten premise parameters: rule-major, feature-minor, (center, sigma)."""
    packed = np.empty((model.n_rules, model.n_features, 2))
    packed[:, :, 0] = model.centers
    packed[:, :, 1] = model.sigmas
    return packed.ravel()


def decode_premise(vector: np.ndarray, template: FisModel) -> FisModel:
    """Rebuild a model from an encoded premise vector.

    Sigmas are clamped to [SIGMA_FLOOR, SIGMA_CAP]; consequents, stage,
    and normalizer are carried over from the template. Inverse of
    encode_premise on the clamped domain.
    """
    vector = np.asarray(vector, dtype=float)
    c, d = template.n_rules, template.n_features
    if vector.shape != (2 * c * d,):
        raise ValueError(f"decode_premise: expected length {2 * c * d}, "
                         f"got {vector.shape}")
    packed = vector.reshape(c, d, 2)
    sigmas = np.clip(packed[:, :, 1], SIGMA_FLOOR, SIGMA_CAP)
    return replace(template, centers=packed[:, :, 0].copy(), sigmas=sigmas)
