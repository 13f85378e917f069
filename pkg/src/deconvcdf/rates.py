"""Reference formulas from the theory: smoothness/decay zone map,
convergence-rate curves, bias/variance bounds and the Bernstein tail.

These are computable curves used by tests and the `rates` CLI; the two
envelope constants ``k1``/``k2`` of the variance bound are defined in
supplementary material not reproduced here, so they enter as caller
configuration (default 1) and every check built on them is a slope or
shape check, never an absolute comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SobolevClass",
    "Zone",
    "classify_zone",
    "bandwidth_order",
    "regular_risk_rate",
    "boundary_risk_rate",
    "lower_bound_rate",
    "risk_rate_exponent",
    "lower_bound_exponent",
    "bias_bound",
    "variance_bound",
    "bernstein_envelope",
    "bernstein_tail",
]

_BORDER_TOL = 1e-12


@dataclass(frozen=True)
class SobolevClass:
    """Smoothness class: densities whose Fourier transform has weighted
    square integral (1/2pi) * int |f^|^2 (1+w^2)^alpha dw <= radius^2."""

    alpha: float
    radius: float

    def __post_init__(self):
        if self.alpha <= -0.5:
            raise ValueError("alpha must exceed -1/2")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class Zone:
    kind: str  # regular_1 | regular_2 | border | singular_1 | singular_2
    alpha: float
    beta: float
    log_factor: bool = False  # regular zone with beta = 1/2


def _check_domain(alpha, beta):
    if alpha <= -0.5 or beta <= 0:
        raise ValueError(f"(alpha, beta) = ({alpha}, {beta}) outside the parameter set")


def classify_zone(alpha, beta):
    """Exact zone of an (alpha, beta) pair.

    The regular zone (alpha + beta > 1/2) splits on beta vs 1/2, with
    beta = 1/2 reported as regular_1 plus a log-factor flag; the singular
    zone (alpha + beta < 1/2) splits on alpha + 3*beta vs 1/2 with the
    boundary included in singular_1.
    """
    _check_domain(alpha, beta)
    s = alpha + beta - 0.5
    if abs(s) <= _BORDER_TOL:
        return Zone("border", alpha, beta)
    if s > 0:
        if beta > 0.5:
            return Zone("regular_1", alpha, beta)
        if beta < 0.5:
            return Zone("regular_2", alpha, beta)
        return Zone("regular_1", alpha, beta, log_factor=True)
    if alpha + 3.0 * beta >= 0.5:
        return Zone("singular_1", alpha, beta)
    return Zone("singular_2", alpha, beta)


def _require_regular(alpha, beta):
    zone = classify_zone(alpha, beta)
    if not zone.kind.startswith("regular"):
        raise ValueError(f"(alpha, beta) = ({alpha}, {beta}) is not in the regular zone")
    return zone


def bandwidth_order(z, alpha, beta):
    """Rate-optimal bandwidth order z^(1/(2*alpha + max(2*beta, 1)))
    for the regular zone, z >= 1."""
    _require_regular(alpha, beta)
    z = np.asarray(z, dtype=float)
    if np.any(z < 1):
        raise ValueError("z must be >= 1")
    return z ** (1.0 / (2.0 * alpha + max(2.0 * beta, 1.0)))


def risk_rate_exponent(alpha, beta):
    """Exponent of the regular-zone risk rate for beta > 1/2."""
    return -(2.0 * alpha + 1.0) / (4.0 * alpha + 4.0 * beta)


def lower_bound_exponent(alpha, beta):
    """Exponent of the minimax lower-bound rate (same expression)."""
    return -(2.0 * alpha + 1.0) / (4.0 * alpha + 4.0 * beta)


def regular_risk_rate(z, alpha, beta):
    """Maximal-risk rate in the regular zone: z to the rate exponent for
    beta > 1/2, sqrt(ln z / z) at beta = 1/2, 1/sqrt(z) below."""
    _require_regular(alpha, beta)
    z = np.asarray(z, dtype=float)
    if np.any(z < 1):
        raise ValueError("z must be >= 1")
    if beta > 0.5:
        return z ** risk_rate_exponent(alpha, beta)
    if beta == 0.5:
        return np.sqrt(np.log(z) / z)
    return 1.0 / np.sqrt(z)


def boundary_risk_rate(n, alpha, beta):
    """(bandwidth, rate) orders in the border and singular zones.

    Five cases: the border zone (alpha + beta = 1/2) splits on beta vs
    1/2 and the singular zone on alpha + 3*beta vs 1/2.
    """
    zone = classify_zone(alpha, beta)
    n = np.asarray(n, dtype=float)
    if np.any(n <= 1):
        raise ValueError("n must exceed 1")
    if zone.kind == "border":
        if beta > 0.5:
            return n / np.sqrt(np.log(n)), (np.sqrt(np.log(n)) / n) ** (alpha + 0.5)
        if beta == 0.5:
            return n / np.log(n) ** 1.5, np.log(n) ** 0.75 / np.sqrt(n)
        return (n / np.sqrt(np.log(n))) ** (1.0 / (2.0 * alpha + 1.0)), \
            np.log(n) ** 0.25 / np.sqrt(n)
    if zone.kind == "singular_1":
        return n ** (2.0 / (2.0 * alpha + 3.0 - 2.0 * beta)), \
            n ** (-(2.0 * alpha + 1.0) / (2.0 * alpha + 3.0 - 2.0 * beta))
    if zone.kind == "singular_2":
        return n ** (1.0 / (2.0 * alpha + 2.0 * beta + 1.0)), \
            n ** (-(2.0 * alpha + 1.0) / (4.0 * alpha + 4.0 * beta + 2.0))
    raise ValueError(f"(alpha, beta) = ({alpha}, {beta}) lies in the regular zone")


def lower_bound_rate(z, alpha, beta):
    """Minimax lower-bound order z^(-(2a+1)/(4a+4b)) (reported only)."""
    _check_domain(alpha, beta)
    z = np.asarray(z, dtype=float)
    return z ** lower_bound_exponent(alpha, beta)


def bias_bound(cls, lam):
    """Worst-case bias over the class at bandwidth lam >= 1:
    sqrt(2/pi) * (1 + (2*alpha+1)^(-1/2)) * radius * lam^(-alpha-1/2)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 1):
        raise ValueError("lam must be >= 1")
    k0 = np.sqrt(2.0 / np.pi) * (1.0 + (2.0 * cls.alpha + 1.0) ** -0.5)
    return k0 * cls.radius * lam ** (-cls.alpha - 0.5)


def _w_factor(lam, beta, omega_cut):
    if beta > 0.5:
        return lam ** (2.0 * beta - 1.0)
    if beta == 0.5:
        return max(1.0, np.log(lam / omega_cut))
    return 1.0


def variance_bound(alpha, beta, radius, c_upper, c_lower, var_floor,
                   k1, k2, lam, n, omega_cut=1.0):
    """Zone-matched upper bound on the estimator variance at bandwidth
    ``lam >= max(1, omega_cut)``; ``k1``/``k2`` are configuration
    placeholders, so with the defaults the value is a shape curve only.
    """
    _check_domain(alpha, beta)
    lam = float(lam)
    if lam < max(1.0, omega_cut):
        raise ValueError("lam must be >= max(1, omega_cut)")
    s = alpha + beta - 0.5
    ratio = c_upper / c_lower**2
    floor = var_floor / n
    if s > _BORDER_TOL:
        main = k1 * radius * ratio * _w_factor(lam, beta, omega_cut) / n
        if beta > 1.0:
            main = min(main, k2 * ratio * lam ** (2.0 * beta - 1.0) / n)
        return main + floor
    if abs(s) <= _BORDER_TOL:
        logterm = np.sqrt(max(np.log(lam / omega_cut), 0.0))
        return k1 * radius * ratio * _w_factor(lam, beta, omega_cut) * logterm / n + floor
    alt = np.log(lam / omega_cut) ** 2 + lam ** (2.0 * beta)
    main = k1 * c_lower**-2 * min(radius * c_upper * lam ** (0.5 - beta - alpha), alt) / n
    return main + floor


def bernstein_envelope(lam, beta, c_lower, omega_cut, var_floor):
    """Scale constant of the Bernstein inequality at bandwidth lam:
    sqrt(2*floor) + 2^(1+(beta/2-1)_+) / (pi*c_lower) * [ln(lam/cut) + lam^beta/beta]."""
    if lam < omega_cut:
        raise ValueError("lam must be >= omega_cut")
    growth = 2.0 ** (1.0 + max(beta / 2.0 - 1.0, 0.0))
    return np.sqrt(2.0 * var_floor) + growth / (np.pi * c_lower) * (
        np.log(lam / omega_cut) + lam**beta / beta
    )


def bernstein_tail(z, n, sigma_sq, m):
    """Tail bound min(1, 2*exp(-n z^2 / (2*sigma_sq + (2/3) m z)))."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0) or n <= 0 or sigma_sq <= 0 or m <= 0:
        raise ValueError("all arguments must be positive")
    bound = 2.0 * np.exp(-n * z**2 / (2.0 * sigma_sq + (2.0 / 3.0) * m * z))
    return np.minimum(1.0, bound)
