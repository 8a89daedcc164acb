"""Monte Carlo ensembles for the smallest eigenvalue and the corner partition functions.

Each replica samples a weight assignment, computes ``log sigma_i(A^{-1})``
(so ``-log lambda_n = log sigma_1``) and ``log|Z^{(k)}_n|``, and is
reproducible from ``(seed, n, replica)`` alone.  Summaries compare the
rescaled values with the GUE Tracy-Widom law and track the gap between the
spectral and polymer free energies.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import __version__
from .errors import ConfigurationError, DegenerateInstanceError, RangeError, RefusedError
from .polymer import nonintersecting_Z
from .spectra import log_top_inverse_singular_values
from .tracywidom import TWReference, load_reference
from .weights import WeightModel, assign_weights, scaling_constants

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "run_replica",
    "run_ensemble",
    "rescale_lambda",
    "ks_distance",
    "cdf_report",
    "topk_convergence",
    "ensemble_report",
    "airy_topk_report",
    "records_to_csv",
    "records_from_csv",
    "timings_to_csv",
    "plot_data_csv",
    "REPORT_SCHEMA_VERSION",
    "MAX_ATTEMPTS",
    "MIN_KS_SAMPLES",
]

log = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
MAX_ATTEMPTS = 16
MIN_KS_SAMPLES = 20

DEFAULT_PROFILE = {
    "mean_rel_tol": 0.10,
    "ks_max": 0.15,
    "y_mean_range": [-2.6, -0.9],
}


@dataclass
class ExperimentConfig:
    model: WeightModel
    sizes: list
    replicas: int
    k_max: int = 1
    output: str | None = None
    threads: int = 1
    profile: dict = field(default_factory=lambda: dict(DEFAULT_PROFILE))

    def __post_init__(self):
        if self.replicas < 1:
            raise ConfigurationError("replicas must be at least 1")
        if not self.sizes or any(int(n) < 1 for n in self.sizes):
            raise ConfigurationError("sizes must be a nonempty list of positive integers")
        self.sizes = [int(n) for n in self.sizes]
        if self.k_max < 1:
            raise ConfigurationError("k_max must be at least 1")
        if self.model.kind == "mixed":
            scaling_constants(self.model.gamma)  # warns above the critical gamma

    @property
    def seed(self):
        return self.model.seed

    @classmethod
    def from_dict(cls, d):
        try:
            model = WeightModel.from_config(d)
            return cls(
                model=model,
                sizes=list(d["sizes"]),
                replicas=int(d["replicas"]),
                k_max=int(d.get("k_max", 1)),
                output=d.get("output"),
                threads=int(d.get("threads", 1)),
                profile={**DEFAULT_PROFILE, **d.get("profile", {})},
            )
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed experiment config: missing or invalid {exc}") from exc

    def to_dict(self):
        return {
            **self.model.to_config(),
            "sizes": list(self.sizes),
            "replicas": self.replicas,
            "k_max": self.k_max,
            "profile": self.profile,
        }

    def config_hash(self):
        """SHA-256 of the canonical JSON config (output path and threads excluded)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ExperimentRecord:
    """One replica.  ``log_sigma[i]`` is ``log sigma_{i+1}(A^{-1})``; ``log_Z[k-1]`` is ``log|Z^{(k)}_n|``."""

    n: int
    replica: int
    attempt: int
    log_sigma: list
    sigma_resolved: list
    log_Z: list
    sign_Z: list
    seconds: float = 0.0

    @property
    def neg_log_lambda(self):
        return self.log_sigma[0]

    @property
    def k_max(self):
        return len(self.log_sigma)

    def bottom_k_log_product(self, k):
        """``sum_{i<=k} log lambda_{n-i+1} = -sum_{i<=k} log sigma_i(A^{-1})``."""
        if k > self.k_max:
            raise RangeError(f"k={k} beyond recorded k_max={self.k_max}")
        return -float(sum(self.log_sigma[:k]))

    def bound_holds(self, slack=1e-9):
        """``log sigma_1(A^{-1}) >= log|Z_n|`` (corner pair lower bound)."""
        return self.log_sigma[0] >= self.log_Z[0] - slack * max(1.0, abs(self.log_Z[0]))


def run_replica(model: WeightModel, n: int, replica: int, k_max: int = 1):
    """Compute one record, resampling with ``attempt + 1`` on degenerate instances."""
    for attempt in range(MAX_ATTEMPTS):
        t0 = time.perf_counter()
        try:
            lat = assign_weights(model, n, replica, attempt)
            logs, info = log_top_inverse_singular_values(lat, k=min(k_max, n * n), return_info=True)
            zs = [nonintersecting_Z(lat, k) for k in range(1, min(k_max, n) + 1)]
            if not np.all(np.isfinite(logs)) or any(z.is_zero() for z in zs):
                raise DegenerateInstanceError("non-finite spectral value or vanishing partition function")
        except DegenerateInstanceError as exc:
            log.warning("n=%d replica=%d attempt=%d degenerate (%s); resampling", n, replica, attempt, exc)
            continue
        return ExperimentRecord(
            n=n,
            replica=replica,
            attempt=attempt,
            log_sigma=[float(v) for v in logs],
            sigma_resolved=[bool(v) for v in info["resolved"]],
            log_Z=[float(z.logmag) for z in zs],
            sign_Z=[int(z.sign) for z in zs],
            seconds=time.perf_counter() - t0,
        )
    raise DegenerateInstanceError(f"n={n} replica={replica}: {MAX_ATTEMPTS} degenerate draws in a row")


def _replica_job(args):
    return run_replica(*args)


def run_ensemble(cfg: ExperimentConfig, progress=None):
    """All replicas for every size, ordered by ``(n, replica)`` whatever the worker count."""
    jobs = [(cfg.model, n, r, cfg.k_max) for n in cfg.sizes for r in range(cfg.replicas)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
            records = list(ex.map(_replica_job, jobs, chunksize=max(1, len(jobs) // (8 * cfg.threads))))
    else:
        records = []
        for i, job in enumerate(jobs):
            records.append(_replica_job(job))
            if progress is not None:
                progress(i + 1, len(jobs))
    records.sort(key=lambda r: (r.n, r.replica))
    resampled = sum(r.attempt for r in records)
    if resampled:
        log.info("%d degenerate draws were resampled", resampled)
    return records


def rescale_lambda(records, gamma, neg_log_lambda=None):
    """``y = (-log lambda_n - f n) / (n g / 2)^{1/3}`` for records sharing one ``n``."""
    ns = {r.n for r in records}
    if len(ns) != 1:
        raise ConfigurationError(f"records mix several lattice sizes: {sorted(ns)}")
    n = ns.pop()
    sc = scaling_constants(gamma)
    v = np.array([r.neg_log_lambda for r in records] if neg_log_lambda is None else neg_log_lambda, dtype=float)
    return (v - sc.f_bar * n) / sc.fluctuation_scale(n)


def _as_cdf(cdf):
    if cdf is None:
        return load_reference()
    return cdf


def ks_distance(samples, cdf=None):
    """Kolmogorov-Smirnov sup-distance between the empirical CDF and ``cdf`` (default ``F_GUE``)."""
    x = np.asarray(samples, dtype=float)
    if x.size < MIN_KS_SAMPLES:
        raise RefusedError(f"KS distance needs at least {MIN_KS_SAMPLES} samples, got {x.size}")
    f = _as_cdf(cdf)
    return float(stats.kstest(x, lambda t: np.asarray(f(t), dtype=float)).statistic)


def cdf_report(samples, cdf=None, grid=None):
    """Rows ``(x, F_emp(x), F_ref(x))`` on ``grid`` (default ``[-6, 4]`` step 0.1)."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size < MIN_KS_SAMPLES:
        raise RefusedError(f"CDF report needs at least {MIN_KS_SAMPLES} samples, got {x.size}")
    f = _as_cdf(cdf)
    grid = np.round(np.arange(-6.0, 4.0 + 1e-9, 0.1), 10) if grid is None else np.asarray(grid, dtype=float)
    emp = np.searchsorted(x, grid, side="right") / x.size
    ref = np.asarray(f(grid), dtype=float)
    return [(float(g), float(e), float(r)) for g, e, r in zip(grid, emp, ref)]


def topk_convergence(records, k, quantiles=(0.1, 0.25, 0.5, 0.75, 0.9)):
    """Per ``n``: ``Delta = n^{-1/3} |sum_{i<=k} log sigma_i - log|Z^{(k)}_n||`` and its quantiles."""
    out = {}
    by_n = {}
    for r in records:
        if k > len(r.log_sigma) or k > len(r.log_Z):
            raise RangeError(f"k={k} beyond recorded k_max={min(len(r.log_sigma), len(r.log_Z))}")
        by_n.setdefault(r.n, []).append(r)
    for n in sorted(by_n):
        rs = by_n[n]
        delta = np.array([abs(sum(r.log_sigma[:k]) - r.log_Z[k - 1]) for r in rs]) / n ** (1.0 / 3.0)
        resolved = all(all(r.sigma_resolved[:k]) for r in rs)
        out[n] = {
            "k": k,
            "count": len(rs),
            "median": float(np.median(delta)),
            "mean": float(delta.mean()),
            "quantiles": {str(q): float(np.quantile(delta, q)) for q in quantiles},
            "all_resolved": resolved,
            "delta": delta.tolist(),
        }
    return out


def ensemble_report(records, cfg: ExperimentConfig, reference: TWReference | None = None):
    """JSON-ready summary: free-energy means, KS table, rescaled moments, Delta series."""
    ref = load_reference() if reference is None else reference
    sc = scaling_constants(cfg.model.gamma) if cfg.model.kind == "mixed" else None
    per_n = {}
    for n in sorted({r.n for r in records}):
        rs = [r for r in records if r.n == n]
        v = np.array([r.neg_log_lambda for r in rs])
        entry = {
            "replicas": len(rs),
            "resampled": int(sum(r.attempt for r in rs)),
            "mean_neg_log_lambda_over_n": float(v.mean() / n),
            "bound_violations": int(sum(not r.bound_holds() for r in rs)),
            "nonpositive_Z": int(sum(r.sign_Z[0] <= 0 for r in rs)),
        }
        if sc is not None:
            y = rescale_lambda(rs, cfg.model.gamma)
            entry["f_bar"] = sc.f_bar
            entry["mean_rel_error"] = float(abs(v.mean() / n - sc.f_bar) / sc.f_bar)
            entry["y_mean"] = float(y.mean())
            entry["y_std"] = float(y.std(ddof=1)) if y.size > 1 else 0.0
            if y.size >= MIN_KS_SAMPLES:
                entry["ks"] = ks_distance(y, ref)
        per_n[str(n)] = entry
    topk = {}
    for k in range(1, cfg.k_max + 1):
        try:
            series = topk_convergence(records, k)
        except RangeError:
            break
        topk[str(k)] = {str(n): {key: val for key, val in d.items() if key != "delta"} for n, d in series.items()}
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "version": __version__,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "per_n": per_n,
        "topk": topk,
    }


def airy_topk_report(records, gamma, k=3):
    """Exploratory, not an acceptance check: rescaled top values and their spacings.

    Uses only replicas whose first ``k`` singular values are resolved.
    """
    sc = scaling_constants(gamma)
    out = {"exploratory": True}
    for n in sorted({r.n for r in records}):
        rs = [r for r in records if r.n == n and len(r.log_sigma) >= k and all(r.sigma_resolved[:k])]
        if not rs:
            continue
        y = (np.array([r.log_sigma[:k] for r in rs]) - sc.f_bar * n) / sc.fluctuation_scale(n)
        gaps = -np.diff(y, axis=1)
        out[str(n)] = {
            "replicas_used": len(rs),
            "mean": y.mean(axis=0).tolist(),
            "std": y.std(axis=0).tolist(),
            "mean_spacing": gaps.mean(axis=0).tolist(),
        }
    return out


# -- persistence ----------------------------------------------------------------


def _fmt(v):
    return repr(float(v))


def records_to_csv(records, gamma=None, fh=None):
    """Deterministic CSV (no timings); returns a string when ``fh`` is None."""
    own = fh is None
    fh = io.StringIO() if own else fh
    k_sig = max(len(r.log_sigma) for r in records)
    k_z = max(len(r.log_Z) for r in records)
    w = csv.writer(fh, lineterminator="\n")
    header = ["n", "replica", "attempt", "neg_log_lambda"]
    header += [f"log_sigma_{i}" for i in range(1, k_sig + 1)]
    header += [f"resolved_{i}" for i in range(1, k_sig + 1)]
    header += [f"log_Z_{k}" for k in range(1, k_z + 1)]
    header += [f"sign_Z_{k}" for k in range(1, k_z + 1)]
    header += ["y"]
    w.writerow(header)
    by_n = {}
    for r in records:
        by_n.setdefault(r.n, []).append(r)
    ys = {}
    if gamma is not None:
        for n, rs in by_n.items():
            for r, y in zip(rs, rescale_lambda(rs, gamma)):
                ys[(r.n, r.replica)] = y
    for r in sorted(records, key=lambda r: (r.n, r.replica)):
        pad = lambda xs, m, fill="": list(xs) + [fill] * (m - len(xs))  # noqa: E731
        row = [r.n, r.replica, r.attempt, _fmt(r.neg_log_lambda)]
        row += pad([_fmt(v) for v in r.log_sigma], k_sig)
        row += pad([int(b) for b in r.sigma_resolved], k_sig)
        row += pad([_fmt(v) for v in r.log_Z], k_z)
        row += pad(r.sign_Z, k_z)
        row += [_fmt(ys[(r.n, r.replica)]) if ys else ""]
        w.writerow(row)
    return fh.getvalue() if own else None


def records_from_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        ks = sorted(int(c.split("_")[-1]) for c in row if c.startswith("log_sigma_") and row[c] != "")
        kz = sorted(int(c.split("_")[-1]) for c in row if c.startswith("log_Z_") and row[c] != "")
        out.append(
            ExperimentRecord(
                n=int(row["n"]),
                replica=int(row["replica"]),
                attempt=int(row["attempt"]),
                log_sigma=[float(row[f"log_sigma_{i}"]) for i in ks],
                sigma_resolved=[bool(int(row[f"resolved_{i}"])) for i in ks],
                log_Z=[float(row[f"log_Z_{k}"]) for k in kz],
                sign_Z=[int(row[f"sign_Z_{k}"]) for k in kz],
            )
        )
    return out


def timings_to_csv(records):
    fh = io.StringIO()
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "replica", "seconds"])
    for r in sorted(records, key=lambda r: (r.n, r.replica)):
        w.writerow([r.n, r.replica, f"{r.seconds:.6f}"])
    return fh.getvalue()


def plot_data_csv(records, gamma, reference: TWReference | None = None):
    """Empirical-vs-reference CDF curves of the rescaled samples, one column pair per ``n``."""
    ref = load_reference() if reference is None else reference
    sizes = sorted({r.n for r in records})
    grid = np.round(np.arange(-6.0, 4.0 + 1e-9, 0.1), 10)
    cols = {}
    for n in sizes:
        y = rescale_lambda([r for r in records if r.n == n], gamma)
        cols[n] = np.searchsorted(np.sort(y), grid, side="right") / y.size
    fh = io.StringIO()
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "F_ref"] + [f"F_emp_n{n}" for n in sizes])
    refv = np.asarray(ref(grid), dtype=float)
    for i, g in enumerate(grid):
        w.writerow([f"{g:.1f}", f"{refv[i]:.12g}"] + [f"{cols[n][i]:.12g}" for n in sizes])
    return fh.getvalue()
