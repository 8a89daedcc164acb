"""Random path tuples for exercising the surgery routines."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from .paths import LatticePath, PathTuple

__all__ = ["random_path", "random_tuple", "random_nonintersecting_tuple"]


def random_path(rng, s, t):
    """Uniformly random monotone path from ``s`` to ``t``."""
    dx, dy = t[0] - s[0], t[1] - s[1]
    if dx < 0 or dy < 0:
        raise ConfigurationError(f"{t} is not up and to the right of {s}")
    steps = np.array(["R"] * dx + ["U"] * dy)
    rng.shuffle(steps)
    return LatticePath.from_steps(s, "".join(steps))


def _random_endpoints(rng, n, k):
    verts = [(x, y) for x in range(1, n + 1) for y in range(1, n + 1)]
    while True:
        idx = rng.choice(len(verts), size=k, replace=False)
        S = [verts[i] for i in idx]
        T = []
        for s in S:
            cand = [v for v in verts if v[0] >= s[0] and v[1] >= s[1] and v not in T]
            if not cand:
                break
            T.append(cand[rng.integers(len(cand))])
        if len(T) == k:
            return S, T


def random_tuple(rng, n, k):
    """``k`` independent random paths between random endpoints; may cross."""
    S, T = _random_endpoints(rng, n, k)
    return PathTuple.of([random_path(rng, s, t) for s, t in zip(S, T)])


def random_nonintersecting_tuple(rng, n, k, max_tries=100_000):
    """Random vertex-disjoint ``k``-tuple by rejection.

    Endpoints are uniform among distinct grid vertices with each end up and
    to the right of its start; each path is a uniformly random monotone path.
    """
    for _ in range(max_tries):
        tup = random_tuple(rng, n, k)
        if tup.is_nonintersecting():
            return tup
    raise ConfigurationError(f"no disjoint {k}-tuple found on the {n}x{n} grid after {max_tries} tries")
