"""Random-feature model: frozen first layer, design matrix, risk functionals.

The model predicts g(x) = f(x'F / sqrt(d)) w with a frozen Gaussian feature
matrix F and a pointwise activation f. The likelihood is Gaussian with a
fixed scale sigma2 that is a modelling knob, deliberately separate from the
teacher's noise variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .data_gen import TeacherModel, rng_from, sample_dataset


@dataclass(frozen=True)
class Activation:
    """Pointwise activation with its derivative (derivative used for moment checks)."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]

    def gaussian_moments(self, order: int = 301) -> tuple[float, float, float]:
        """(E[f(e)], E[f(e)^2], E[f'(e)]) for e ~ N(0,1), via Gauss-Hermite quadrature."""
        nodes, weights = hermegauss(order)
        w = weights / np.sqrt(2.0 * np.pi)
        fx = self.f(nodes)
        return float(w @ fx), float(w @ fx**2), float(w @ self.fprime(nodes))


def _relu(x):
    return np.maximum(x, 0.0)


def _relu_prime(x):
    return (x > 0).astype(float)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _sigmoid_prime(x):
    s = _sigmoid(x)
    return s * (1.0 - s)


def _standardize(base: Activation) -> Activation:
    # shift/scale so that E[f]=0 and E[f^2]=1 under N(0,1) inputs
    m1, m2, _ = base.gaussian_moments()
    sd = np.sqrt(m2 - m1 * m1)
    return Activation(
        name=f"{base.name}_std",
        f=lambda x, _f=base.f, _m=m1, _s=sd: (_f(x) - _m) / _s,
        fprime=lambda x, _fp=base.fprime, _s=sd: _fp(x) / _s,
    )


CENTERED_QUADRATIC = Activation("centered_quadratic", lambda x: (x**2 - 1.0) / np.sqrt(2.0), lambda x: np.sqrt(2.0) * x)
RELU = Activation("relu", _relu, _relu_prime)
SIGMOID = Activation("sigmoid", _sigmoid, _sigmoid_prime)
IDENTITY = Activation("identity", lambda x: x, lambda x: np.ones_like(x))
RELU_STD = _standardize(RELU)
SIGMOID_STD = _standardize(SIGMOID)

ACTIVATIONS = {
    a.name: a
    for a in (CENTERED_QUADRATIC, RELU, SIGMOID, IDENTITY, RELU_STD, SIGMOID_STD)
}


def get_activation(name: str) -> Activation:
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}; known: {sorted(ACTIVATIONS)}") from None


@dataclass(frozen=True)
class RFModel:
    """Frozen d x p feature matrix plus the activation applied to x'F/sqrt(d)."""

    F: np.ndarray
    activation: Activation
    d: int
    p: int
    feature_seed: int

    def __post_init__(self):
        if self.F.shape != (self.d, self.p):
            raise ValueError(f"F shape {self.F.shape} != ({self.d}, {self.p})")
        self.F.flags.writeable = False


@dataclass(frozen=True)
class DesignMatrix:
    B: np.ndarray  # n x p

    def __post_init__(self):
        self.B.flags.writeable = False


def init_features(d: int, p: int, feature_seed: int, activation: Activation = RELU) -> RFModel:
    """Draw F with i.i.d. N(0,1) entries, deterministically in feature_seed."""
    if d < 1 or p < 1:
        raise ValueError(f"dimensions must be >= 1, got d={d}, p={p}")
    F = rng_from(feature_seed, 0xFEA7).standard_normal((d, p))
    return RFModel(F=F, activation=activation, d=d, p=p, feature_seed=int(feature_seed))


def design_matrix(model: RFModel, X: np.ndarray) -> DesignMatrix:
    """B[i, j] = f(<x_i, F_j> / sqrt(d)). Pure: identical inputs give identical bytes."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise ValueError(f"X must be n x {model.d}, got {X.shape}")
    return DesignMatrix(B=model.activation.f(X @ model.F / np.sqrt(model.d)))


def _check_dims(w, B, Y):
    w = np.asarray(w, dtype=float)
    B = B.B if isinstance(B, DesignMatrix) else np.asarray(B, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if B.shape[1] != w.shape[0] or B.shape[0] != Y.shape[0]:
        raise ValueError(f"shape mismatch: B {B.shape}, w {w.shape}, Y {Y.shape}")
    return w, B, Y


def empirical_mse(w, B, Y) -> float:
    """(1/n) ||Y - Bw||^2."""
    w, B, Y = _check_dims(w, B, Y)
    r = Y - B @ w
    return float(r @ r / len(Y))


def empirical_logloss(w, B, Y, sigma2: float) -> float:
    """Per-sample Gaussian log-loss, excluding any prior/regularizer term.

    Returns (1/n)[||Y - Bw||^2/(2 sigma2)] + (1/2) log(2 pi sigma2).
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    return empirical_mse(w, B, Y) / (2.0 * sigma2) + 0.5 * np.log(2.0 * np.pi * sigma2)


@dataclass(frozen=True)
class PopulationRisk:
    """Monte-Carlo estimate of the population risk of a fixed weight vector."""

    mse: float
    logloss: float
    mse_se: float
    logloss_se: float


def population_risk_mc(
    w: np.ndarray,
    model: RFModel,
    teacher: TeacherModel,
    m: int,
    seed: int,
    sigma2: float = 1.0,
) -> PopulationRisk:
    """Fresh-draw estimate of E[(y - b(x)'w)^2] and the matching log-loss.

    Deterministic in the seed; the standard error is over the m fresh samples.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    test = sample_dataset(teacher, m, seed)
    B = design_matrix(model, test.X).B
    sq = (test.Y - B @ w) ** 2
    mse = float(sq.mean())
    se = float(sq.std(ddof=1) / np.sqrt(m)) if m > 1 else float("inf")
    logloss = mse / (2.0 * sigma2) + 0.5 * np.log(2.0 * np.pi * sigma2)
    return PopulationRisk(mse=mse, logloss=float(logloss), mse_se=se, logloss_se=se / (2.0 * sigma2))
