"""Known error-law models: characteristic functions, CDFs, samplers.

Every model knows its characteristic function in closed form, can sample
i.i.d. draws deterministically from a seed, and evaluates its CDF exactly.
Models optionally carry two blocks of declared regularity constants:

* ``decay`` -- constants ``(beta, lower, upper)`` sandwiching the CF
  modulus between ``lower*(1+w^2)^(-beta/2)`` and
  ``upper*(1+w^2)^(-beta/2)`` (polynomially decaying, "ordinary smooth"
  errors),
* ``origin`` -- constants ``(radius, coeff, power)`` bounding the CF
  modulus from below by ``1 - coeff*|w|^power`` for ``|w| <= radius``.

The constants are declared, not inferred; `verify_assumptions` checks
them numerically on a frequency grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .errors import MissingParametersError

__all__ = [
    "DecayBounds",
    "OriginBound",
    "NoiseModel",
    "GammaNoise",
    "LaplaceNoise",
    "GaussianNoise",
    "NoiseMixture",
    "AssumptionReport",
    "cf_eval",
    "noise_cdf",
    "sample_noise",
    "verify_assumptions",
    "default_check_grid",
]


@dataclass(frozen=True)
class DecayBounds:
    """Polynomial-decay envelope for the CF modulus.

    ``lower*(1+w^2)^(-beta/2) <= |cf(w)| <= upper*(1+w^2)^(-beta/2)``
    """

    beta: float
    lower: float
    upper: float

    def __post_init__(self):
        if self.beta <= 0 or self.lower <= 0 or self.upper <= 0:
            raise ValueError("decay constants must be positive")


@dataclass(frozen=True)
class OriginBound:
    """Low-frequency lower bound ``|cf(w)| >= 1 - coeff*|w|^power``
    valid on ``|w| <= radius``.  ``power`` lies in (0, 2]."""

    radius: float
    coeff: float
    power: float

    def __post_init__(self):
        if self.radius <= 0 or self.coeff <= 0:
            raise ValueError("origin-bound constants must be positive")
        if not 0 < self.power <= 2:
            raise ValueError(f"power must lie in (0, 2], got {self.power}")


class NoiseModel:
    """Base class; concrete kinds implement `cf`, `cdf` and `_draw`."""

    decay: Optional[DecayBounds]
    origin: Optional[OriginBound]

    def cf(self, omega):
        """Characteristic function, vectorized over ``omega``."""
        raise NotImplementedError

    def cdf(self, t):
        """Exact CDF, vectorized over ``t``."""
        raise NotImplementedError

    def _draw(self, rng, n):
        raise NotImplementedError

    def mean(self):
        raise NotImplementedError

    def var(self):
        raise NotImplementedError

    def std(self):
        return float(np.sqrt(self.var()))

    def sample(self, n, seed):
        """Draw ``n`` i.i.d. values; deterministic given ``seed``.

        ``seed`` may be anything `numpy.random.default_rng` accepts, or
        an existing Generator (consumed in place).
        """
        if n < 0:
            raise ValueError("n must be >= 0")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return self._draw(rng, int(n))


@dataclass(frozen=True)
class GammaNoise(NoiseModel):
    """Shifted Gamma law with density
    ``(x-mu)^(shape-1) * exp(-(x-mu)/scale) / (Gamma(shape) scale^shape)``
    on ``x >= mu``."""

    mu: float = 0.0
    shape: float = 2.0
    scale: float = 1.0
    decay: Optional[DecayBounds] = None
    origin: Optional[OriginBound] = None

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("shape and scale must be positive")

    def cf(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.exp(1j * self.mu * omega) * (1.0 - 1j * self.scale * omega) ** (-self.shape)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        z = np.maximum((t - self.mu) / self.scale, 0.0)
        return special.gammainc(self.shape, z)

    def _draw(self, rng, n):
        return self.mu + rng.gamma(self.shape, self.scale, size=n)

    def mean(self):
        return self.mu + self.shape * self.scale

    def var(self):
        return self.shape * self.scale**2

    def with_default_bounds(self):
        """Attach exact decay constants and a quadratic origin bound.

        ``|cf| = (1+scale^2 w^2)^(-shape/2)``, so the decay exponent is
        the shape parameter and the envelope constants are the two
        endpoint values of ``((1+w^2)/(1+scale^2 w^2))^(shape/2)``.
        """
        r = self.scale ** (-self.shape)
        decay = DecayBounds(beta=self.shape, lower=min(1.0, r), upper=max(1.0, r))
        origin = OriginBound(radius=1.0 / self.scale,
                             coeff=0.5 * self.shape * self.scale**2, power=2.0)
        return GammaNoise(self.mu, self.shape, self.scale, decay, origin)


@dataclass(frozen=True)
class LaplaceNoise(NoiseModel):
    """Laplace law with density ``exp(-|x-mu|/a) / (2a)``."""

    mu: float = 0.0
    a: float = 1.0
    decay: Optional[DecayBounds] = None
    origin: Optional[OriginBound] = None

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("a must be positive")

    def cf(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.exp(1j * self.mu * omega) / (1.0 + self.a**2 * omega**2)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        z = (t - self.mu) / self.a
        return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0.0)),
                        1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))

    def _draw(self, rng, n):
        return rng.laplace(self.mu, self.a, size=n)

    def mean(self):
        return self.mu

    def var(self):
        return 2.0 * self.a**2

    def with_default_bounds(self):
        r = self.a**-2
        decay = DecayBounds(beta=2.0, lower=min(1.0, r), upper=max(1.0, r))
        origin = OriginBound(radius=1.0 / self.a, coeff=self.a**2, power=2.0)
        return LaplaceNoise(self.mu, self.a, decay, origin)


@dataclass(frozen=True)
class GaussianNoise(NoiseModel):
    """Normal law N(mu, var).  Its CF decays faster than any polynomial,
    so no decay block is attached by default."""

    mu: float = 0.0
    var_: float = 1.0
    decay: Optional[DecayBounds] = None
    origin: Optional[OriginBound] = None

    def __post_init__(self):
        if self.var_ <= 0:
            raise ValueError("variance must be positive")

    def cf(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.exp(1j * self.mu * omega - 0.5 * self.var_ * omega**2)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return special.ndtr((t - self.mu) / np.sqrt(self.var_))

    def _draw(self, rng, n):
        return rng.normal(self.mu, np.sqrt(self.var_), size=n)

    def mean(self):
        return self.mu

    def var(self):
        return self.var_

    def with_default_bounds(self):
        origin = OriginBound(radius=1.0 / np.sqrt(self.var_), coeff=0.5 * self.var_, power=2.0)
        return GaussianNoise(self.mu, self.var_, None, origin)


@dataclass(frozen=True)
class NoiseMixture(NoiseModel):
    """Finite mixture of noise models.

    No decay block is attached automatically: a mixture CF may vanish
    (e.g. two equal normal components two means apart), in which case no
    polynomial lower envelope exists and `verify_assumptions` reports
    failure for any declared constants.
    """

    components: Tuple[Tuple[float, NoiseModel], ...] = ()
    decay: Optional[DecayBounds] = None
    origin: Optional[OriginBound] = None

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        object.__setattr__(self, "components",
                           tuple((float(w), m) for w, m in self.components))
        weights = np.array([w for w, _ in self.components])
        if np.any(weights < 0):
            raise ValueError("mixture weights must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {weights.sum()!r}")

    def cf(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = sum(w * m.cf(omega) for w, m in self.components)
        # CF(0) = 1 by definition; pin it so float weight sums cannot drift.
        return np.where(omega == 0.0, 1.0 + 0.0j, out)

    def cdf(self, t):
        return sum(w * m.cdf(t) for w, m in self.components)

    def _draw(self, rng, n):
        weights = np.array([w for w, _ in self.components])
        idx = rng.choice(len(self.components), size=n, p=weights)
        out = np.empty(n, dtype=float)
        for i, (_, m) in enumerate(self.components):
            mask = idx == i
            k = int(mask.sum())
            if k:
                out[mask] = m._draw(rng, k)
        return out

    def mean(self):
        return sum(w * m.mean() for w, m in self.components)

    def var(self):
        mu = self.mean()
        second = sum(w * (m.var() + m.mean() ** 2) for w, m in self.components)
        return second - mu**2


@dataclass(frozen=True)
class AssumptionReport:
    """Grid-check result for the declared CF bounds.

    ``worst_ratio_low``/``worst_ratio_high`` are the minima over the grid
    of ``|cf| / lower_envelope`` and ``upper_envelope / |cf|``; each chain
    holds on the grid iff its ratio is >= 1.  The pass flag for the decay
    block tracks the *lower* chain (the bound the estimators rely on);
    the upper ratio is reported for inspection.  ``origin_worst_ratio``
    is the analogous minimum of ``|cf| / (1 - coeff |w|^power)`` over
    grid points where the bound is active.
    """

    e1_pass: Optional[bool]
    e2_pass: Optional[bool]
    worst_ratio_low: float
    worst_ratio_high: float
    origin_worst_ratio: float
    grid: np.ndarray = field(repr=False)


def default_check_grid():
    """400 log-spaced frequencies on [1e-2, 1e3]."""
    return np.geomspace(1e-2, 1e3, 400)


def verify_assumptions(model, omega_grid=None, check=None):
    """Evaluate the declared CF bounds pointwise on a frequency grid.

    Parameters
    ----------
    model : NoiseModel
    omega_grid : array-like of positive frequencies, optional
    check : iterable subset of {"decay", "origin"}, optional
        Defaults to every block the model carries.  Requesting a block
        the model lacks raises `MissingParametersError`.
    """
    if omega_grid is None:
        omega_grid = default_check_grid()
    grid = np.asarray(omega_grid, dtype=float)
    if grid.size == 0 or np.any(grid < 0):
        raise ValueError("omega grid must be nonempty and nonnegative")

    if check is None:
        check = [name for name in ("decay", "origin") if getattr(model, name) is not None]
        if not check:
            raise MissingParametersError(
                "model declares neither decay nor origin constants; nothing to verify"
            )
    else:
        check = list(check)
        for name in check:
            if name not in ("decay", "origin"):
                raise ValueError(f"unknown assumption block {name!r}")
            if getattr(model, name) is None:
                raise MissingParametersError(f"model carries no {name!r} block")

    mod = np.abs(model.cf(grid))

    e1_pass = None
    ratio_low = np.nan
    ratio_high = np.nan
    if "decay" in check:
        d = model.decay
        envelope = (1.0 + grid**2) ** (-d.beta / 2.0)
        with np.errstate(divide="ignore"):
            ratio_low = float(np.min(mod / (d.lower * envelope)))
            ratio_high = float(np.min(np.where(mod > 0, d.upper * envelope / mod, np.inf)))
        e1_pass = bool(ratio_low >= 1.0)

    e2_pass = None
    origin_ratio = np.nan
    if "origin" in check:
        o = model.origin
        active = grid <= o.radius
        rhs = 1.0 - o.coeff * grid[active] ** o.power
        positive = rhs > 0
        if np.any(positive):
            origin_ratio = float(np.min(mod[active][positive] / rhs[positive]))
        else:
            origin_ratio = np.inf  # bound vacuous on this grid
        e2_pass = bool(origin_ratio >= 1.0)

    return AssumptionReport(e1_pass, e2_pass, ratio_low, ratio_high, origin_ratio, grid)


def cf_eval(model, omega):
    """Characteristic function of the model at ``omega``."""
    return model.cf(omega)


def noise_cdf(model, t):
    """Exact CDF of the model at ``t``."""
    return model.cdf(t)


def sample_noise(model, n, seed):
    """``n`` i.i.d. draws from the model, deterministic given ``seed``."""
    return model.sample(n, seed)
