"""Marchenko-Pastur asymptotics for the Gram spectrum of the design matrix.

Closed forms for the edge-gap function F(gamma, r), the eta and Shannon
transforms of MP(r), the aggregate V(gamma, r) = r * Shannon(gamma), the
finite-matrix covariance term they approximate, and a damped fixed-point
solver for the Stieltjes transform of the general nonlinear-feature
spectral law (arbitrary zero-mean activation moments).

Numerics: with S = sqrt(gamma (1+sqrt r)^2 + 1) + sqrt(gamma (1-sqrt r)^2 + 1)
the identities

    F = 16 gamma^2 r / S^2,
    1 + gamma   - F/4 = 1 / (1 - F/(4 r gamma)),
    1 + gamma r - F/4 = 1 / (1 - F/(4 gamma)),

hold exactly, which lets every transform be evaluated without subtracting
nearly-equal square roots (the direct difference loses all precision for
gamma >~ 1e3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rf_model import Activation


@dataclass(frozen=True)
class ShapeRatio:
    """Aspect ratio r = p/n, optionally carrying r1 = p/d and r2 = n/d."""

    r: float
    r1: float | None = None
    r2: float | None = None

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be > 0, got {self.r}")
        if (self.r1 is None) != (self.r2 is None):
            raise ValueError("r1 and r2 must be given together")
        if self.r1 is not None and abs(self.r - self.r1 / self.r2) > 1e-12:
            raise ValueError(f"r={self.r} inconsistent with r1/r2={self.r1 / self.r2}")


@dataclass(frozen=True)
class MPLaw:
    """Marchenko-Pastur law with shape r: support [a, b] plus an atom at zero."""

    r: float

    @property
    def a(self) -> float:
        return (1.0 - np.sqrt(self.r)) ** 2

    @property
    def b(self) -> float:
        return (1.0 + np.sqrt(self.r)) ** 2

    @property
    def point_mass(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.r)

    def density(self, x):
        return mp_density(x, self.r)


def mp_density(x, r: float):
    """Continuous MP(r) density at x > 0; the atom at zero is reported separately."""
    if not r > 0:
        raise ValueError(f"r must be > 0, got {r}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("mp_density is defined for x >= 0")
    law = MPLaw(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sqrt(np.maximum(x - law.a, 0.0) * np.maximum(law.b - x, 0.0)) / (2.0 * np.pi * r * x)
    val = np.where(x > 0, val, 0.0)
    return val if val.ndim else float(val)


def mp_point_mass(r: float) -> float:
    return MPLaw(r).point_mass


def _edge_pieces(gamma: float, r: float):
    """Shared stable pieces: Q = sqrt(AB), denom = 1 + gamma(1+r) + Q."""
    q = np.sqrt((gamma * (1.0 - r)) ** 2 + 2.0 * gamma * (1.0 + r) + 1.0)
    denom = 1.0 + gamma * (1.0 + r) + q
    return q, denom


def f_func(gamma: float, r: float) -> float:
    """F(gamma, r) = (sqrt(gamma(1+sqrt r)^2 + 1) - sqrt(gamma(1-sqrt r)^2 + 1))^2."""
    if gamma < 0 or not r > 0:
        raise ValueError(f"need gamma >= 0 and r > 0, got gamma={gamma}, r={r}")
    _, denom = _edge_pieces(gamma, r)
    return 8.0 * gamma * gamma * r / denom


def _stable_one_plus(x: float, gamma: float, r: float, q: float) -> float:
    # 1 + x + q without cancellation when x is a large negative multiple of gamma
    if x >= 0:
        return 1.0 + x + q
    return 1.0 + (2.0 * gamma * (1.0 + r) + 1.0) / (q - x)


def eta_transform(gamma: float, r: float) -> float:
    """eta(gamma) = E[1/(1 + gamma X)] under MP(r); equals 1 - F/(4 r gamma)."""
    if gamma < 0 or not r > 0:
        raise ValueError(f"need gamma >= 0 and r > 0, got gamma={gamma}, r={r}")
    if gamma == 0.0:
        return 1.0
    q, denom = _edge_pieces(gamma, r)
    return _stable_one_plus(gamma * (r - 1.0), gamma, r, q) / denom


def _eta_dual(gamma: float, r: float) -> float:
    # 1 - F/(4 gamma) = 1/(1 + gamma r - F/4)
    q, denom = _edge_pieces(gamma, r)
    return _stable_one_plus(gamma * (1.0 - r), gamma, r, q) / denom


def shannon_transform(gamma: float, r: float) -> float:
    """V_X(gamma) = E[log(1 + gamma X)] under MP(r); 0 at gamma = 0 by continuity."""
    if gamma < 0 or not r > 0:
        raise ValueError(f"need gamma >= 0 and r > 0, got gamma={gamma}, r={r}")
    if gamma == 0.0:
        return 0.0
    q, denom = _edge_pieces(gamma, r)
    eta_a = _stable_one_plus(gamma * (r - 1.0), gamma, r, q) / denom
    eta_b = _stable_one_plus(gamma * (1.0 - r), gamma, r, q) / denom
    f_over_4rg = 2.0 * gamma / denom
    return -np.log(eta_a) - np.log(eta_b) / r - f_over_4rg


def v_func(gamma: float, r: float) -> float:
    """V(gamma, r) = r log(1+gamma-F/4) + log(1+gamma r-F/4) - F/(4 gamma) = r * Shannon."""
    if gamma < 0 or not r > 0:
        raise ValueError(f"need gamma >= 0 and r > 0, got gamma={gamma}, r={r}")
    if gamma == 0.0:
        return 0.0
    q, denom = _edge_pieces(gamma, r)
    eta_a = _stable_one_plus(gamma * (r - 1.0), gamma, r, q) / denom
    eta_b = _stable_one_plus(gamma * (1.0 - r), gamma, r, q) / denom
    f_over_4g = 2.0 * gamma * r / denom
    return -r * np.log(eta_a) - np.log(eta_b) - f_over_4g


def covariance_term_finite(B: np.ndarray, lam: float, n: int) -> float:
    """(1/2n)[log det(I + B'B/(lam n)) + tr((I + B'B/(lam n))^{-1}) - p].

    Evaluated through the singular values of B; the p - rank zero eigenvalues
    contribute log 1 + 1 - 1 = 0 each, so only the nonzero spectrum matters.
    """
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    B = np.asarray(B, dtype=float)
    s = np.linalg.svd(B, compute_uv=False)
    u = s * s / (lam * n)
    return float((np.sum(np.log1p(u)) - np.sum(u / (1.0 + u))) / (2.0 * n))


def kl_asymptotic(lam: float, sigma2: float, r: float, w_lambda_norm2: float) -> float:
    """Limit of D(posterior||prior)/n: l2 term plus the covariance term.

    (lam/(2 sigma2)) ||W_hat||^2 - (lam/8) F(1/lam, r) + (1/2) V(1/lam, r).
    """
    if not (lam > 0 and sigma2 > 0 and r > 0) or w_lambda_norm2 < 0:
        raise ValueError("need lam, sigma2, r > 0 and w_lambda_norm2 >= 0")
    gamma = 1.0 / lam
    return lam / (2.0 * sigma2) * w_lambda_norm2 - lam / 8.0 * f_func(gamma, r) + 0.5 * v_func(gamma, r)


@dataclass(frozen=True)
class StieltjesParams:
    """Aspect ratios psi = d/p, phi = d/n and activation moments for the general law."""

    psi: float
    phi: float
    eta_mom: float  # E[f(e)^2]
    xi_mom: float  # E[f'(e)]^2

    def __post_init__(self):
        if not (self.psi > 0 and self.phi > 0 and self.eta_mom > 0 and self.xi_mom >= 0):
            raise ValueError("need psi, phi, eta_mom > 0 and xi_mom >= 0")

    @classmethod
    def from_activation(cls, activation: Activation, psi: float, phi: float) -> "StieltjesParams":
        m1, m2, mp1 = activation.gaussian_moments()
        if abs(m1) > 1e-6:
            raise ValueError(f"activation {activation.name!r} has E[f] = {m1:.3g} != 0; "
                             "the spectral law assumes a centered activation")
        return cls(psi=psi, phi=phi, eta_mom=m2, xi_mom=mp1 * mp1)


class StieltjesConvergenceError(RuntimeError):
    def __init__(self, residual: complex, iterations: int):
        super().__init__(f"fixed point not converged after {iterations} iterations "
                         f"(last residual {abs(residual):.3e})")
        self.residual = residual
        self.iterations = iterations


def _fixed_point_maps(z: complex, params: StieltjesParams):
    psi, phi = params.psi, params.phi
    eta, xi = params.eta_mom, params.xi_mom
    t = 1.0 / (z * psi)

    def rhs(a):
        a_phi = 1.0 + (a - 1.0) * phi
        a_psi = 1.0 + (a - 1.0) * psi
        prod = a_phi * a_psi * t
        return 1.0 + (eta - xi) * prod + prod * xi / (1.0 - prod * xi)

    def rhs_prime(a):
        a_phi = 1.0 + (a - 1.0) * phi
        a_psi = 1.0 + (a - 1.0) * psi
        prod = a_phi * a_psi * t
        dprod = t * (phi * a_psi + psi * a_phi)
        return (eta - xi) * dprod + xi * dprod / (1.0 - prod * xi) ** 2

    return rhs, rhs_prime


def _solve_A(z: complex, params: StieltjesParams, a0: complex, tol: float, max_iter: int) -> complex:
    """Newton iteration on A - rhs(A) = 0 from the warm start a0."""
    rhs, rhs_prime = _fixed_point_maps(z, params)
    a = a0
    residual = a - rhs(a)
    for _ in range(max_iter):
        if abs(residual) < tol:
            return a
        step = residual / (1.0 - rhs_prime(a))
        a = a - step
        if not (np.isfinite(a.real) and np.isfinite(a.imag)):
            break
        residual = a - rhs(a)
    raise StieltjesConvergenceError(residual, max_iter)


def stieltjes_general(
    z: complex,
    params: StieltjesParams,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    damping: float = 0.5,
) -> complex:
    """Stieltjes transform G(z) of the nonlinear-feature Gram spectral law.

    Solves, at t = 1/(z psi),

        A = 1 + (eta - xi) t A_phi A_psi + A_phi A_psi t xi / (1 - A_phi A_psi t xi),
        A_phi = 1 + (A - 1) phi,  A_psi = 1 + (A - 1) psi,

    then G(z) = (psi/z) A + (1 - psi)/z.

    On the spectrum (small Im z) the physical root of the implicit equation
    repels plain damped iteration, so the solve is Newton with continuation:
    start far from the real axis where the map contracts and step Im z down
    geometrically (factor `damping`), warm-starting each level.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    sign = -1.0 if z.imag <= 0 else 1.0
    far = max(1.0, 2.0 * abs(z.imag))
    level = complex(z.real, sign * far)
    a = _solve_A(level, params, complex(1.0, 0.0), tol, max_iter)
    target_im = abs(z.imag)
    im = far
    while im > max(target_im, 1e-12) * 1.0000001:
        im = max(im * damping, max(target_im, 1e-12))
        a = _solve_A(complex(z.real, sign * im), params, a, tol, max_iter)
    if z.imag == 0.0:
        a = _solve_A(complex(z.real, sign * 1e-12), params, a, tol, max_iter)
        # off-spectrum real z: the limit is real
        a = _solve_A(z, params, complex(a.real, 0.0), tol, max_iter) if abs(a.imag) < 1e-6 else a
    else:
        a = _solve_A(z, params, a, tol, max_iter)
    return (params.psi / z) * a + (1.0 - params.psi) / z


def spectral_density_from_stieltjes(
    x: float,
    params: StieltjesParams,
    eps: float = 1e-7,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> float:
    """Continuous density at x via (1/pi) Im G(x - i eps)."""
    return float(stieltjes_general(complex(x, -eps), params, tol=tol, max_iter=max_iter).imag / np.pi)


def activation_moment_flags(activation: Activation, atol: float = 1e-8) -> dict:
    """Which of the closed-form assumptions (E[f]=0, E[f^2]=1, E[f']=0) hold."""
    m1, m2, mp1 = activation.gaussian_moments()
    return {
        "mean_zero": abs(m1) <= atol,
        "unit_second_moment": abs(m2 - 1.0) <= atol,
        "deriv_mean_zero": abs(mp1) <= atol,
        "moments": (m1, m2, mp1),
    }
