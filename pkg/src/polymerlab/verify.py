"""Invariant batteries comparing fast code paths against independent oracles.

Each suite returns a :class:`SuiteResult` with a pass flag, summary metrics
and the first few failures.  Suites are deterministic given ``seed``.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .combinatorics.paths import PathTuple, enumerate_paths
from .combinatorics.instances import random_nonintersecting_tuple, random_tuple
from .combinatorics.surgery import lift_to_corner
from .combinatorics.uncross import check_uncrossed, uncross
from .errors import ConfigurationError, PolymerLabError
from .lattice import build_square_from_hex, canonical_order, hex_adjacency, square_adjacency
from .polymer import EndpointSpec, brute_force_Zk, inverse_residual, lgv_determinant, max_ZST
from .spectra import eigenvalues_hex, log_top_inverse_singular_values_dense
from .weights import DistSpec, WeightModel, assign_weights, sample_hex

__all__ = [
    "SuiteResult",
    "SUITES",
    "TOLERANCES",
    "default_models",
    "duality_suite",
    "inverse_suite",
    "lgv_suite",
    "sandwich_suite",
    "surgery_suite",
    "run_suite",
]

TOLERANCES = {
    "duality_rel": 1e-8,
    "inverse_abs": 1e-8,
    "lgv_log_rel": 1e-8,
    "sandwich_slack": -1e-9,
    "surgery_growth": 2,
}

MAX_FAILURES_KEPT = 5


@dataclass
class SuiteResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self):
        return {
            "suite": self.name,
            "passed": self.passed,
            "metrics": self.metrics,
            "failures": self.failures,
            "seconds": round(self.seconds, 3),
        }

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        keys = ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items() if not isinstance(v, (dict, list)))
        return f"[{status}] {self.name}: {keys} ({self.seconds:.1f}s)"


def _short(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def default_models(seed=0):
    """The mixed model at ``gamma = 0.5`` and an i.i.d. lognormal model."""
    return {
        "mixed": WeightModel.mixed(0.5, seed),
        "iid": WeightModel.iid(DistSpec("lognormal", (0.0, 0.5)), seed),
    }


def _keep(failures, item):
    if len(failures) < MAX_FAILURES_KEPT:
        failures.append(item)


# -- spectra -----------------------------------------------------------------------


def duality_error(hx):
    """Normwise error between the hexagonal spectrum and ``+-`` the singular values of the square dual."""
    ev = eigenvalues_hex(hex_adjacency(hx, dense=True), dense=True)
    sq = build_square_from_hex(hx)
    sv = np.sort(sla.svdvals(square_adjacency(sq, dense=True).toarray()))[::-1]
    N = sv.size
    err = max(np.abs(ev[:N] - sv).max(), np.abs(ev[N:] + sv[::-1]).max())
    return float(err / sv[0])


def duality_suite(sizes=range(2, 13), instances=50, seed=0):
    t0 = time.perf_counter()
    worst, failures, count = 0.0, [], 0
    for name, model in default_models(seed).items():
        for n in sizes:
            for r in range(instances):
                e = duality_error(sample_hex(model, n, r))
                count += 1
                worst = max(worst, e)
                if not e < TOLERANCES["duality_rel"]:
                    _keep(failures, {"model": name, "n": n, "replica": r, "error": e})
    return SuiteResult(
        "duality",
        not failures,
        {"instances": count, "max_rel_error": worst, "tolerance": TOLERANCES["duality_rel"]},
        failures,
        time.perf_counter() - t0,
    )


# -- polymer identities ------------------------------------------------------------


def inverse_suite(max_n=8, instances=20, seed=0):
    """Exact rational residual of ``A F = I`` and ``F A = I``; the float residual is a diagnostic."""
    t0 = time.perf_counter()
    worst, worst_float, failures, count = 0.0, {}, [], 0
    for name, model in default_models(seed).items():
        for r in range(instances):
            n = 1 + r % max_n
            lat = assign_weights(model, n, r)
            left, right = inverse_residual(lat, exact=True)
            fl, _ = inverse_residual(lat, exact=False)
            worst_float[name] = max(worst_float.get(name, 0.0), fl)
            count += 1
            worst = max(worst, left, right)
            if not max(left, right) < TOLERANCES["inverse_abs"]:
                _keep(failures, {"model": name, "n": n, "replica": r, "residual": max(left, right)})
    return SuiteResult(
        "inverse",
        not failures,
        {
            "instances": count,
            "max_exact_residual": worst,
            "max_float_residual": worst_float,
            "tolerance": TOLERANCES["inverse_abs"],
        },
        failures,
        time.perf_counter() - t0,
    )


def _random_spec(rng, n, k):
    order = canonical_order(n)
    S = [order[i] for i in rng.choice(len(order), k, replace=False)]
    T = [order[i] for i in rng.choice(len(order), k, replace=False)]
    return EndpointSpec(tuple(S), tuple(T))


def lgv_suite(max_n=5, max_k=3, seeds=50, seed=0):
    """Determinant formula against signed enumeration of vertex-disjoint tuples.

    Each instance checks the corner endpoints and one random endpoint pair.
    """
    t0 = time.perf_counter()
    worst, failures, count, zeros = 0.0, [], 0, 0
    for name, model in default_models(seed).items():
        for n in range(1, max_n + 1):
            for k in range(1, min(max_k, n) + 1):
                for r in range(seeds):
                    lat = assign_weights(model, n, r)
                    rng = np.random.default_rng([seed, n, k, r])
                    for spec in (EndpointSpec.corner(n, k), _random_spec(rng, n, k)):
                        det = lgv_determinant(lat, spec)
                        ref = brute_force_Zk(lat, spec)
                        count += 1
                        if ref.is_zero() or det.is_zero():
                            zeros += 1
                            ok = ref.is_zero() and det.is_zero()
                            err = 0.0 if ok else math.inf
                        else:
                            err = abs(det.logmag - ref.logmag) / max(1.0, abs(ref.logmag))
                            ok = det.sign == ref.sign and err < TOLERANCES["lgv_log_rel"]
                        worst = max(worst, err)
                        if not ok:
                            _keep(failures, {"model": name, "n": n, "k": k, "replica": r, "spec": spec.to_dict(),
                                             "lgv": repr(det), "enumeration": repr(ref)})
    return SuiteResult(
        "lgv",
        not failures,
        {"checks": count, "zero_cases": zeros, "max_log_rel_error": worst, "tolerance": TOLERANCES["lgv_log_rel"]},
        failures,
        time.perf_counter() - t0,
    )


def sandwich_slacks(lat, k):
    """``(lower, upper)`` log-domain slacks of ``max|Z| <= prod sigma_i(A^{-1}) <= C(N, k)^2 max|Z|``."""
    top = float(np.sum(log_top_inverse_singular_values_dense(lat, k)))
    mz, _ = max_ZST(lat, k)
    N = lat.n * lat.n
    lower = top - mz.logmag
    upper = 2.0 * math.log(math.comb(N, k)) + mz.logmag - top
    return lower, upper


def sandwich_suite(max_n=4, max_k=2, instances=100, seed=0):
    t0 = time.perf_counter()
    failures, count = [], 0
    lo_min = up_min = math.inf
    for name, model in default_models(seed).items():
        for r in range(instances):
            n = 2 + r % (max_n - 1) if max_n > 1 else 1
            for k in range(1, min(max_k, n) + 1):
                lat = assign_weights(model, n, r)
                lower, upper = sandwich_slacks(lat, k)
                count += 1
                lo_min, up_min = min(lo_min, lower), min(up_min, upper)
                if not (lower >= TOLERANCES["sandwich_slack"] and upper >= TOLERANCES["sandwich_slack"]):
                    _keep(failures, {"model": name, "n": n, "k": k, "replica": r, "lower": lower, "upper": upper})
    return SuiteResult(
        "sandwich",
        not failures,
        {"checks": count, "min_lower_slack": lo_min, "min_upper_slack": up_min,
         "tolerance": TOLERANCES["sandwich_slack"]},
        failures,
        time.perf_counter() - t0,
    )


# -- surgery --------------------------------------------------------------------------


def _all_paths(n):
    cells = [(x, y) for x in range(1, n + 1) for y in range(1, n + 1)]
    out = []
    for s in cells:
        for t in cells:
            if t[0] >= s[0] and t[1] >= s[1]:
                out += enumerate_paths(s, t)
    return out


def exhaustive_tuples(n, k):
    """Every ``k``-set of paths on the ``n x n`` grid with distinct starts and ends, up to translation.

    Only tuples touching both the left and the bottom side are produced;
    uncrossing commutes with translation, so these represent all.
    """
    for combo in itertools.combinations(_all_paths(n), k):
        if len({p.start for p in combo}) < k or len({p.end for p in combo}) < k:
            continue
        if min(p.start[0] for p in combo) != 1 or min(p.start[1] for p in combo) != 1:
            continue
        yield PathTuple.of(combo)


EXHAUSTIVE_UNCROSS = ((1, 5), (2, 5), (3, 4))
# smaller exhaustive set used when the caller caps the lattice size
EXHAUSTIVE_UNCROSS_QUICK = ((1, 4), (2, 4), (3, 3))


def uncross_checks(exhaustive=EXHAUSTIVE_UNCROSS, random_cases=1000, max_n=12, seed=0):
    """``(checked, failures)`` for uncrossing on exhaustive small tuples and random tuples."""
    failures, checked = [], 0
    for k, n in exhaustive:
        for tup in exhaustive_tuples(n, k):
            checked += 1
            try:
                check_uncrossed(tup, uncross(tup))
            except PolymerLabError as exc:
                _keep(failures, {"tuple": tup.to_dict(), "error": str(exc)})
    rng = np.random.default_rng([seed, 1])
    for _ in range(random_cases):
        n = int(rng.integers(2, max_n + 1))
        k = int(rng.integers(1, 4))
        tup = random_tuple(rng, n, k)
        checked += 1
        try:
            check_uncrossed(tup, uncross(tup))
        except PolymerLabError as exc:
            _keep(failures, {"tuple": tup.to_dict(), "error": str(exc)})
    return checked, failures


def pipeline_checks(sizes=(6, 8, 10, 12), k=2, cases=1000, seed=0):
    """Run the corner pipeline on random non-intersecting tuples; returns per-size statistics and failures."""
    stats, failures = {}, []
    for n in sizes:
        rng = np.random.default_rng([seed, n, k])
        worst, rounds, nonlocal_, failed = 0, 0, 0, 0
        for _ in range(cases):
            tup = random_nonintersecting_tuple(rng, n, k)
            try:
                out, rep = lift_to_corner(tup, n)
            except PolymerLabError as exc:
                failed += 1
                _keep(failures, {"n": n, "tuple": tup.to_dict(), "error": str(exc)})
                continue
            if rep.rounds > 2 * k:
                failed += 1
                _keep(failures, {"n": n, "tuple": tup.to_dict(), "error": f"{rep.rounds} rounds"})
            worst = max(worst, rep.removed_edges)
            rounds = max(rounds, rep.rounds)
            nonlocal_ += not rep.local
        stats[n] = {"max_removed_edges": worst, "max_rounds": rounds, "failed": failed, "nonlocal": nonlocal_}
    return stats, failures


def surgery_suite(sizes=(6, 8, 10, 12), k=2, cases=1000, seed=0, exhaustive=EXHAUSTIVE_UNCROSS, uncross_cases=1000):
    """Uncrossing invariants plus the corner pipeline with the removed-edge growth check."""
    t0 = time.perf_counter()
    checked, failures = uncross_checks(exhaustive, uncross_cases, seed=seed)
    stats, pfail = pipeline_checks(sizes, k, cases, seed)
    failures += pfail
    growth_ok = True
    if len(sizes) > 1:
        first, last = stats[min(sizes)]["max_removed_edges"], stats[max(sizes)]["max_removed_edges"]
        growth_ok = last <= first + TOLERANCES["surgery_growth"]
        if not growth_ok:
            _keep(failures, {"error": f"removed edges grew from {first} to {last}"})
    passed = not failures and growth_ok
    metrics = {
        "uncross_checked": checked,
        "pipeline_cases": cases * len(sizes),
        "k": k,
        "max_removed_edges": max(s["max_removed_edges"] for s in stats.values()),
        "per_n": {str(n): s for n, s in stats.items()},
    }
    return SuiteResult("surgery", passed, metrics, failures, time.perf_counter() - t0)


# -- dispatch ----------------------------------------------------------------------------

SUITES = ("duality", "inverse", "lgv", "sandwich", "surgery")


def run_suite(name, n=None, k=None, cases=None, seed=0):
    """Run one suite with optional size caps (``n``: largest side, ``k``: order, ``cases``: instance count)."""
    if name == "duality":
        return duality_suite(range(2, (n or 12) + 1), cases or 50, seed)
    if name == "inverse":
        return inverse_suite(n or 8, cases or 20, seed)
    if name == "lgv":
        return lgv_suite(n or 5, k or 3, cases or 50, seed)
    if name == "sandwich":
        return sandwich_suite(n or 4, k or 2, cases or 100, seed)
    if name == "surgery":
        if n:
            return surgery_suite((n,), k or 2, cases or 1000, seed, EXHAUSTIVE_UNCROSS_QUICK, cases or 1000)
        return surgery_suite((6, 8, 10, 12), k or 2, cases or 1000, seed)
    raise ConfigurationError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
