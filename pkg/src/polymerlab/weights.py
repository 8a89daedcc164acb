"""Random weight models for G_n and the scaling constants of the log-Gamma polymer.

Two models are supported:

* ``mixed``: red edges of G_n have weight 1 and blue edges are Gamma(gamma, 1).
  On the contracted square lattice every edge then has polymer weight -1 and
  every loop an inverse-Gamma weight.
* ``iid``: every edge of G_n has an independent copy of a distribution ``X``.

Randomness is derived from a master seed with :class:`numpy.random.SeedSequence`
keyed by ``(n, replica, attempt)`` and fed to a Philox counter-based generator,
so a replica can be regenerated alone and in any order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateInstanceError, DomainError
from .lattice import HexLattice, SquareLattice, build_square_from_hex
from .special import polygamma, gamma_star as _gamma_star

__all__ = [
    "DistSpec",
    "WeightModel",
    "ScalingConstants",
    "CriticalGammaWarning",
    "scaling_constants",
    "gamma_star",
    "replica_rng",
    "sample_inverse_gamma",
    "sample_hex",
    "assign_weights",
]

_GAMMA_STAR = None


def gamma_star():
    global _GAMMA_STAR
    if _GAMMA_STAR is None:
        _GAMMA_STAR = _gamma_star()
    return _GAMMA_STAR


class CriticalGammaWarning(UserWarning):
    """gamma >= gamma*: the inverse-Gamma log-weights no longer have positive mean."""


@dataclass(frozen=True)
class ScalingConstants:
    gamma: float
    f_bar: float
    g_bar: float
    gamma_star: float

    @property
    def above_critical(self):
        return self.gamma >= self.gamma_star

    def fluctuation_scale(self, n):
        """``(n g_bar / 2)^(1/3)``, the standard deviation scale of ``-log lambda_n``."""
        return (n * self.g_bar / 2.0) ** (1.0 / 3.0)


def scaling_constants(gamma):
    """``f_bar = -2 psi(gamma/2)`` and ``g_bar = -2 psi''(gamma/2)``.

    A :class:`CriticalGammaWarning` is emitted when ``gamma >= gamma*``.
    """
    gamma = float(gamma)
    if not gamma > 0.0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    sc = ScalingConstants(
        gamma=gamma,
        f_bar=-2.0 * polygamma(0, gamma / 2.0),
        g_bar=-2.0 * polygamma(2, gamma / 2.0),
        gamma_star=gamma_star(),
    )
    if sc.above_critical:
        warnings.warn(
            f"gamma={gamma} is not below gamma*={sc.gamma_star:.6f}",
            CriticalGammaWarning,
            stacklevel=2,
        )
    return sc


# -- distributions -----------------------------------------------------------

_DIST_PARAMS = {
    "inverse-gamma": 1,
    "gamma": 1,
    "lognormal": 2,
    "shifted-exponential": 2,
    "two-point": 2,
}


@dataclass(frozen=True)
class DistSpec:
    """A named edge-weight distribution for the i.i.d. model.

    ============================  ===========================================
    name                          params
    ============================  ===========================================
    ``inverse-gamma``             ``(gamma,)``: 1 / Gamma(gamma, 1)
    ``gamma``                     ``(gamma,)``: Gamma(gamma, 1)
    ``lognormal``                 ``(mu, sigma)``: exp(N(mu, sigma^2))
    ``shifted-exponential``       ``(shift, rate)``: shift + Exp(rate)
    ``two-point``                 ``(a, p)``: +a with prob. p, -a otherwise
    ============================  ===========================================
    """

    name: str
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.name not in _DIST_PARAMS:
            raise ConfigurationError(f"unknown distribution {self.name!r}; known: {sorted(_DIST_PARAMS)}")
        if len(self.params) != _DIST_PARAMS[self.name]:
            raise ConfigurationError(f"{self.name} takes {_DIST_PARAMS[self.name]} parameters, got {len(self.params)}")
        p = self.params
        bad = {
            "inverse-gamma": lambda: p[0] <= 0,
            "gamma": lambda: p[0] <= 0,
            "lognormal": lambda: p[1] < 0,
            "shifted-exponential": lambda: p[0] < 0 or p[1] <= 0,
            "two-point": lambda: p[0] <= 0 or not 0 <= p[1] <= 1,
        }[self.name]()
        if bad:
            raise ConfigurationError(f"invalid parameters {p} for {self.name}")

    def sample(self, rng, size):
        p = self.params
        if self.name == "inverse-gamma":
            return 1.0 / rng.gamma(p[0], 1.0, size)
        if self.name == "gamma":
            return rng.gamma(p[0], 1.0, size)
        if self.name == "lognormal":
            return rng.lognormal(p[0], p[1], size)
        if self.name == "shifted-exponential":
            return p[0] + rng.exponential(1.0 / p[1], size)
        signs = np.where(rng.random(size) < p[1], 1.0, -1.0)
        return p[0] * signs

    def mean_log_abs(self):
        """``E log|X|`` in closed form."""
        p = self.params
        if self.name == "inverse-gamma":
            return -polygamma(0, p[0])
        if self.name == "gamma":
            return polygamma(0, p[0])
        if self.name == "lognormal":
            return p[0]
        if self.name == "two-point":
            return math.log(p[0])
        # shift + Exp(rate): E log(X) by quadrature
        from scipy.integrate import quad

        shift, rate = p
        val, _ = quad(lambda t: math.log(shift + t) * rate * math.exp(-rate * t), 0.0, math.inf, limit=200)
        return val

    def has_exponential_moments(self):
        """Whether ``E exp(+-t log|X|) < inf`` for some ``t > 0``.

        All supported families have this property; the shifted exponential
        with zero shift only has it on the negative side for small ``t``,
        which is still enough.
        """
        return True

    def to_dict(self):
        return {"name": self.name, "params": list(self.params)}


@dataclass(frozen=True)
class WeightModel:
    kind: str
    gamma: float | None = None
    dist: DistSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind == "mixed":
            if self.gamma is None or not self.gamma > 0:
                raise ConfigurationError("mixed model requires gamma > 0")
        elif self.kind == "iid":
            if self.dist is None:
                raise ConfigurationError("iid model requires a distribution")
        else:
            raise ConfigurationError(f"unknown weight model {self.kind!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")

    @classmethod
    def mixed(cls, gamma, seed=0):
        return cls("mixed", gamma=float(gamma), seed=int(seed))

    @classmethod
    def iid(cls, dist, seed=0):
        return cls("iid", dist=dist, seed=int(seed))

    @classmethod
    def from_config(cls, cfg):
        """Parse ``{"model": "mixed", "gamma": 0.5, "seed": 1}`` or the iid form."""
        try:
            kind = cfg["model"]
            seed = int(cfg.get("seed", 0))
            if kind == "mixed":
                return cls.mixed(cfg["gamma"], seed)
            if kind == "iid":
                d = cfg["dist"]
                return cls.iid(DistSpec(d["name"], tuple(d.get("params", ()))), seed)
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed weight model config: {exc}") from exc
        raise ConfigurationError(f"unknown weight model {kind!r}")

    def to_config(self):
        if self.kind == "mixed":
            return {"model": "mixed", "gamma": self.gamma, "seed": self.seed}
        return {"model": "iid", "dist": self.dist.to_dict(), "seed": self.seed}

    def with_seed(self, seed):
        return WeightModel(self.kind, self.gamma, self.dist, int(seed))


def replica_rng(seed, n, replica=0, attempt=0):
    """Independent generator for one replica, keyed by ``(seed, n, replica, attempt)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(n), int(replica), int(attempt)))
    return np.random.Generator(np.random.Philox(ss))


def sample_inverse_gamma(gamma, rng, size=None):
    """Draw from the inverse-Gamma law with density ``x^(-g-1) e^(-1/x) / Gamma(g)``."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    return 1.0 / rng.gamma(gamma, 1.0, size)


def sample_hex(model, n, replica=0, attempt=0):
    """Random edge weights on G_n under ``model``.

    Blue weights are drawn first (canonical vertex order on the grid, row
    major), then red-right, then red-up, all from one replica stream.
    """
    rng = replica_rng(model.seed, n, replica, attempt)
    if model.kind == "mixed":
        blue = rng.gamma(model.gamma, 1.0, (n, n))
        return HexLattice(n, blue, np.ones((n, n - 1)), np.ones((n - 1, n)))
    d = model.dist
    blue = d.sample(rng, (n, n))
    rr = d.sample(rng, (n, n - 1))
    ru = d.sample(rng, (n - 1, n))
    return HexLattice(n, blue, rr, ru)


def assign_weights(model, n, replica=0, attempt=0):
    """Random square lattice for ``model``: the blue-matching contraction of :func:`sample_hex`.

    Mixed model: loop weights ``w_u = 1 / Gamma`` (inverse-Gamma), edge
    weights ``w_{u,v} = -1``.  iid model: ``w_u = 1 / X``, ``w_{u,v} = -X``.
    """
    if n < 1:
        raise ConfigurationError("n must be positive")
    hx = sample_hex(model, n, replica, attempt)
    if np.any(hx.blue == 0.0):
        raise DegenerateInstanceError("sampled a zero blue weight; the lattice would be singular")
    return build_square_from_hex(hx)
