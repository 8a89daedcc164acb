"""The GUE Tracy-Widom distribution.

``F_GUE(s) = det(I - K_Ai)`` on ``L^2(s, inf)`` with the Airy kernel
``K(x, y) = (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)``.  Two independent
evaluations are provided:

* :func:`fredholm_cdf` discretizes the determinant with Gauss-Legendre
  quadrature (Nystrom method);
* :func:`painleve_cdf` integrates the Hastings-McLeod solution of
  Painleve II, ``q'' = s q + 2 q^3``, and uses
  ``F(s) = exp(-int_s^inf (x - s) q(x)^2 dx)``.

Monte Carlo code only uses the frozen table in ``data/tw_gue.csv`` through
:func:`tw_gue_cdf`; the oracles exist to regenerate and audit that table.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.special import airy

__all__ = [
    "TWReference",
    "PUBLISHED_MOMENTS",
    "fredholm_cdf",
    "fredholm_pdf",
    "painleve_cdf",
    "generate_table",
    "write_table",
    "load_reference",
    "tw_gue_cdf",
    "tw_gue_ppf",
    "TABLE_NAME",
    "DATA_ENV",
]

TABLE_NAME = "tw_gue.csv"
DATA_ENV = "POLYMERLAB_DATA"
GRID = (-6.0, 4.0, 0.01)

# mean, variance, skewness, excess kurtosis of F_GUE (published high-precision values)
PUBLISHED_MOMENTS = {
    "mean": -1.7710868074,
    "variance": 0.8131947928,
    "skewness": 0.2240842036,
    "excess_kurtosis": 0.0934480876,
}


def _airy_kernel(x):
    ai, aip, _, _ = airy(x)
    dx = x[:, None] - x[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]) / dx
    K[np.diag_indices_from(K)] = aip**2 - x * ai**2
    return K


def fredholm_cdf(s, m=80, length=16.0):
    """``F_GUE(s)`` by Gauss-Legendre discretization on ``[s, s + length]``.

    The Airy kernel decays like ``exp(-4/3 x^{3/2})``, so the truncation is
    far below double precision for the default ``length``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t, w = np.polynomial.legendre.leggauss(m)
    out = np.empty_like(s)
    for i, si in enumerate(s):
        x = si + 0.5 * length * (t + 1.0)
        sw = np.sqrt(0.5 * length * w)
        K = _airy_kernel(x)
        out[i] = np.linalg.det(np.eye(m) - sw[:, None] * K * sw[None, :])
    return out if out.size > 1 else float(out[0])


def fredholm_pdf(s, h=1e-3, **kw):
    """Density by a fourth-order central difference of :func:`fredholm_cdf`."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    f = lambda d: np.asarray(fredholm_cdf(s + d, **kw))  # noqa: E731
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def painleve_cdf(s, s0=8.0, rtol=1e-12, atol=1e-30):
    """``F_GUE`` on the points ``s`` via the Hastings-McLeod solution.

    Integrates the system ``(q, q', I1, I2)`` from ``s0`` down to ``min(s)``
    where ``I1 = int q^2`` and ``I2 = int x q^2`` over ``[t, s0]``; then
    ``log F(t) = -(I2 - t I1) - tail(s0)``.  The tail beyond ``s0`` is
    below 1e-14 and is dropped.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    ai, aip, _, _ = airy(s0)

    def rhs(x, y):
        q, dq = y[0], y[1]
        return [dq, x * q + 2 * q**3, -(q * q), -(x * q * q)]

    lo = float(s.min())
    order = np.argsort(-s)
    sol = solve_ivp(
        rhs,
        (s0, lo),
        [ai, aip, 0.0, 0.0],
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=s[order] if lo < s0 else None,
        dense_output=False,
    )
    if not sol.success:
        raise RuntimeError(sol.message)
    I1 = sol.y[2]
    I2 = sol.y[3]
    t = sol.t
    logF = -(I2 - t * I1)
    out = np.empty_like(s)
    out[order] = np.exp(logF)
    return out if out.size > 1 else float(out[0])


@dataclass(frozen=True)
class TWReference:
    """Tabulated ``F_GUE`` with monotone cubic (PCHIP) interpolation, clamped outside the grid."""

    x: np.ndarray
    cdf: np.ndarray
    pdf: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(np.diff(self.cdf) <= 0) or self.cdf[0] < 0 or self.cdf[-1] > 1:
            raise ValueError("tabulated CDF must be strictly increasing within [0, 1]")

    @property
    def interpolant(self):
        return _pchip(self.x.tobytes(), self.cdf.tobytes())

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        v = self.interpolant(np.clip(s, self.x[0], self.x[-1]))
        return np.clip(v, 0.0, 1.0)

    def moments(self):
        """Mean, variance, skewness and excess kurtosis from the tabulated density."""
        from scipy.integrate import simpson

        x, p = self.x, self.pdf
        mass = simpson(p, x=x)
        mean = simpson(x * p, x=x) / mass
        c = x - mean
        var = simpson(c**2 * p, x=x) / mass
        skew = simpson(c**3 * p, x=x) / mass / var**1.5
        kurt = simpson(c**4 * p, x=x) / mass / var**2 - 3.0
        return {"mean": mean, "variance": var, "skewness": skew, "excess_kurtosis": kurt}

    def ppf(self, q):
        """Inverse CDF by monotone interpolation of the table."""
        return np.interp(q, self.cdf, self.x)

    def sample(self, rng, size):
        return self.ppf(rng.random(size))


@lru_cache(maxsize=8)
def _pchip(xb, cb):
    return PchipInterpolator(np.frombuffer(xb), np.frombuffer(cb), extrapolate=False)


def generate_table(lo=GRID[0], hi=GRID[1], step=GRID[2], m=80):
    """Evaluate the Fredholm oracle on the grid; returns ``(x, cdf, pdf)``."""
    count = int(round((hi - lo) / step)) + 1
    x = np.round(lo + step * np.arange(count), 10)
    cdf = np.asarray(fredholm_cdf(x, m=m))
    pdf = np.asarray(fredholm_pdf(x, m=m))
    return x, cdf, pdf


def write_table(path, x, cdf, pdf):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "cdf", "pdf"])
        for row in zip(x, cdf, pdf):
            w.writerow([f"{row[0]:.2f}", f"{row[1]:.17g}", f"{row[2]:.17g}"])


def _table_path():
    override = os.environ.get(DATA_ENV)
    if override:
        p = Path(override)
        return p / TABLE_NAME if p.is_dir() else p
    return resources.files("polymerlab") / "data" / TABLE_NAME


def load_reference(path=None) -> TWReference:
    """Read the frozen table (``$POLYMERLAB_DATA`` overrides the bundled copy)."""
    path = _table_path() if path is None else Path(path)
    return _load_cached(str(path))


@lru_cache(maxsize=4)
def _load_cached(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return TWReference(data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy())


def tw_gue_cdf(x, reference: TWReference | None = None):
    """Interpolated ``F_GUE(x)``; outside the tabulated range the end values are returned."""
    ref = load_reference() if reference is None else reference
    out = ref(x)
    return float(out) if np.ndim(out) == 0 else out


def tw_gue_ppf(q, reference: TWReference | None = None):
    ref = load_reference() if reference is None else reference
    out = ref.ppf(q)
    return float(out) if np.ndim(out) == 0 else out
