"""Local surgery turning a non-intersecting path tuple into one between corner endpoints.

The corner endpoints of a ``k``-tuple on the ``n x n`` grid are
``S0 = ((1, 1), ..., (1, k))`` and ``T0 = ((n, n-k+1), ..., (n, n))``.  The
pipeline first clears the boundary bands (:func:`clear_boundary`), then
repeats lifting rounds (:func:`lift_round`), each of which attaches a simple
path ``tau`` from the lowest missing corner start to a stray start and
repairs the resulting intersections stage by stage:

1. :func:`~polymerlab.combinatorics.uncross.uncross` the paths that are not yet fixed;
2. :func:`clean_proper` moves endpoints that sit on other paths;
3. :func:`push_away` pushes the paths below the current top path one step
   down and to the right, which makes the top path disjoint from the rest.

Rounds on the end side run on the half-turned grid.  Every step records a
trace entry, and :class:`SurgeryReport` keeps the removed edges, the
decomposition of the symmetric difference into paths and the paths ``tau``
whose neighbourhoods confine the changes.

Stage conditions
----------------
At stage ``i`` of a round with attached path ``tau`` and protected column
height ``m`` a tuple (ordered bottom to top) satisfies

1. the top ``i`` paths meet no other path;
2. no path lies strictly below a path with a smaller index;
3. at most ``C`` edges of the tuple before the round are missing;
4. intersections and changed edges are within distance ``5 (i + 1)`` of ``tau``;
5. each ``(1, j)`` with ``j <= m`` is on exactly one path, each ``(1, j)``
   with ``j > m`` on at most one.

:func:`check_conditions` raises :class:`~polymerlab.errors.ContractError`
carrying the index of the first failing condition.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from ..errors import AlgorithmicFailure, ContractError, PolymerLabError, StructuralError
from .paths import LatticePath, PathTuple, intersect, northwest
from .uncross import order_paths, uncross

__all__ = [
    "corner_endpoints",
    "neighborhood_radius",
    "turn_bound",
    "max_turns_in_neighborhood",
    "simple_paths",
    "min_path",
    "shift_down_right",
    "Stage",
    "check_conditions",
    "clean_proper",
    "push_away",
    "run_stages",
    "lift_round",
    "clear_boundary",
    "lift_to_corner",
    "SurgeryReport",
    "decompose_edges",
    "ord_start",
    "ord_end",
]


# -- geometry ----------------------------------------------------------------


def corner_endpoints(n, k):
    """``(S0, T0)`` for ``k`` paths on the ``n x n`` grid."""
    if not 1 <= k <= n:
        raise StructuralError(f"need 1 <= k <= n, got k={k}, n={n}")
    return tuple((1, i) for i in range(1, k + 1)), tuple((n, n - k + i) for i in range(1, k + 1))


def neighborhood_radius(k):
    """l1 radius of the neighbourhood around an attached path."""
    return 6 * k


def _dist(v, verts):
    return min(abs(v[0] - u[0]) + abs(v[1] - u[1]) for u in verts)


def _ball(verts, r, n):
    """Grid vertices within l1 distance ``r`` of ``verts``."""
    out = set()
    for x0, y0 in verts:
        for dx in range(-r, r + 1):
            rem = r - abs(dx)
            x = x0 + dx
            if not 1 <= x <= n:
                continue
            for y in range(max(1, y0 - rem), min(n, y0 + rem) + 1):
                out.add((x, y))
    return out


def ord_start(S):
    """Smallest ``i`` with ``(1, i)`` not a start."""
    s = set(S)
    i = 1
    while (1, i) in s:
        i += 1
    return i


def ord_end(T, n):
    """Largest ``i`` with ``(n, i)`` not an end."""
    t = set(T)
    i = n
    while (n, i) in t:
        i -= 1
    return i


def simple_paths(n):
    """All paths on the grid with at most one turn (including single vertices)."""
    out = []
    for x0 in range(1, n + 1):
        for y0 in range(1, n + 1):
            for x1 in range(x0, n + 1):
                for y1 in range(y0, n + 1):
                    dx, dy = x1 - x0, y1 - y0
                    out.append(LatticePath.from_steps((x0, y0), "R" * dx + "U" * dy))
                    if dx and dy:
                        out.append(LatticePath.from_steps((x0, y0), "U" * dy + "R" * dx))
    return out


def _region_mask(tau: LatticePath, r, n):
    """Boolean ``(n, n)`` mask, indexed ``[x-1, y-1]``, of vertices within ``r`` of ``tau``."""
    tv = np.asarray(tau.vertices)
    g = np.arange(1, n + 1)
    dx = np.abs(g[:, None] - tv[:, 0][None, :])
    dy = np.abs(g[:, None] - tv[:, 1][None, :])
    d = (dx[:, None, :] + dy[None, :, :]).min(axis=2)
    return d <= r


def max_turns_in_neighborhood(tau: LatticePath, k, n):
    """Most turns of a monotone path whose vertices all lie within ``6k`` of ``tau``.

    Dynamic programme over the region in increasing ``x + y``; the state is
    the direction of the last step.
    """
    inside = _region_mask(tau, neighborhood_radius(k), n)
    # best[x, y, d]: most turns of a path ending at (x, y) with last step d (0 right, 1 up)
    best = np.full((n + 1, n + 1, 2), -1, dtype=np.int64)
    top = 0
    for s in range(2, 2 * n + 1):
        for x in range(max(1, s - n), min(n, s - 1) + 1):
            y = s - x
            if not inside[x - 1, y - 1]:
                continue
            if x > 1 and inside[x - 2, y - 1]:
                l0, l1 = best[x - 1, y]
                best[x, y, 0] = max(0, l0, l1 + 1 if l1 >= 0 else 0)
            if y > 1 and inside[x - 1, y - 2]:
                d0, d1 = best[x, y - 1]
                best[x, y, 1] = max(0, d1, d0 + 1 if d0 >= 0 else 0)
            top = max(top, best[x, y].max())
    return int(top)


def turn_bound(k):
    """Bound ``D(k)`` on the turns of a monotone path near a one-turn path.

    With ``r = 6k``: a turn count is at most twice the number of vertical
    runs.  Vertical steps near the horizontal leg number at most ``2r``;
    vertical runs near the vertical leg are separated by horizontal steps
    there, again at most ``2r``; steps switching between the two legs stay
    in the ``(4r + 1)``-box around the corner, at most ``8r`` of them.
    Hence ``D(k) = 2 (2r + 2r + 8r + 2) = 24 r + 4``.
    """
    r = neighborhood_radius(k)
    return 24 * r + 4


# -- lowest path and shifting --------------------------------------------------


def min_path(s, t, edges):
    """The lowest path from ``s`` to ``t`` using only ``edges``.

    Greedy: step right whenever the target stays reachable, otherwise up.
    Raises :class:`StructuralError` if ``t`` is unreachable.
    """
    s, t = tuple(s), tuple(t)
    edges = set(edges)
    succ = {}
    pred = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
        pred.setdefault(b, set()).add(a)
    reach = {t}
    queue = deque([t])
    while queue:
        v = queue.popleft()
        for u in pred.get(v, ()):
            if u not in reach:
                reach.add(u)
                queue.append(u)
    if s not in reach:
        raise StructuralError(f"{t} is not reachable from {s} within the edge set")
    verts = [s]
    v = s
    while v != t:
        right, up = (v[0] + 1, v[1]), (v[0], v[1] + 1)
        nxt = succ.get(v, ())
        if right in nxt and right in reach:
            v = right
        elif up in nxt and up in reach:
            v = up
        else:  # pragma: no cover - excluded by the reachability set
            raise StructuralError("greedy walk got stuck")
        verts.append(v)
    return LatticePath(tuple(verts))


def shift_down_right(path: LatticePath, n):
    """Edges of ``path`` moved one step right and one down; edges touching the bottom or right side are dropped."""
    out = set()
    for a, b in path.edges():
        if a[1] == 1 or b[1] == 1 or a[0] == n or b[0] == n:
            continue
        out.add(((a[0] + 1, a[1] - 1), (b[0] + 1, b[1] - 1)))
    return out


# -- stage bookkeeping -----------------------------------------------------------


@dataclass
class Stage:
    """Context shared by the stages of one round.

    Attributes
    ----------
    n, k : grid side and number of paths
    tau : the attached simple path
    m : column-1 vertices ``(1, 1..m)`` are protected (condition 5)
    protected : overrides the protected set when the corner starts below
        ``m`` are not all present (boundary clearing)
    base : tuple before the round, for conditions 3 and 4
    budget : bound ``C`` for condition 3 (``None`` skips it)
    band : extra vertices where changes are allowed (boundary bands)
    trace : list collecting one dict per step
    """

    n: int
    k: int
    tau: LatticePath
    m: int = 0
    base: PathTuple | None = None
    budget: int | None = None
    band: frozenset = frozenset()
    trace: list = field(default_factory=list)
    protected: frozenset | None = None

    def __post_init__(self):
        if self.protected is None:
            self.protected = frozenset((1, y) for y in range(1, self.m + 1))

    def log(self, step, **info):
        self.trace.append({"step": step, **info})


def _occupied(paths, skip=None):
    occ = Counter()
    for idx, p in enumerate(paths):
        if idx != skip:
            occ.update(p.vertex_set)
    return occ


def _near(v, stage, radius):
    return v in stage.band or _dist(v, stage.tau.vertices) <= radius


def check_conditions(tup: PathTuple, i, stage: Stage, which=(1, 2, 3, 4, 5)):
    """Raise :class:`ContractError` with the index of the first failing condition."""
    paths = tup.paths
    k = len(paths)
    if 1 in which:
        for a in range(max(0, k - i), k):
            for b in range(k):
                if a != b and intersect(paths[a], paths[b]):
                    raise ContractError(f"fixed path {a} meets path {b}", condition=1)
    if 2 in which and tup.order_violations():
        raise ContractError(f"order violated at {tup.order_violations()}", condition=2)
    if stage.base is not None and (3 in which or 4 in which):
        before, after = stage.base.edge_set(), tup.edge_set()
        if 3 in which and stage.budget is not None and len(before - after) > stage.budget:
            raise ContractError(f"{len(before - after)} edges removed, budget {stage.budget}", condition=3)
        if 4 in which:
            radius = 5 * (i + 1)
            for e in before ^ after:
                for v in e:
                    if not _near(v, stage, radius):
                        raise ContractError(f"changed edge {e} farther than {radius} from tau", condition=4)
            occ = _occupied(paths)
            for v, c in occ.items():
                if c > 1 and not _near(v, stage, radius):
                    raise ContractError(f"intersection at {v} farther than {radius} from tau", condition=4)
    if 5 in which:
        occ = _occupied(paths)
        for y in range(1, stage.n + 1):
            c = occ.get((1, y), 0)
            if ((1, y) in stage.protected and c != 1) or c > 1:
                raise ContractError(f"(1, {y}) lies on {c} paths", condition=5)
    return True


def _relocation_target(paths, j, stage, region, prefer=None):
    """Free vertex southeast of path ``j`` inside ``region``, closest to the path."""
    p = paths[j]
    occ = _occupied(paths, skip=j)
    occ.update(p.vertex_set)
    lo, hi = stage.k + 1, stage.n - stage.k
    best, key_best = None, None
    for v in region:
        if v in occ or v[0] == 1:
            continue
        if not any(northwest(u, v) for u in p.vertices):
            continue
        in_band = lo <= v[1] <= hi and 1 < v[0] < stage.n
        key = (not in_band, _dist(v, p.vertices), -(v[0] - v[1]), v[0])
        if key_best is None or key < key_best:
            best, key_best = v, key
    return best


def clean_proper(tup: PathTuple, stage: Stage, i=0, check=True):
    """Move endpoints lying on other paths so that every intersection is proper.

    A start on another path advances to the first vertex of its path lying
    on no other path, and an end retreats to the last such vertex.  If the
    path has no such vertex it becomes a zero-length path at the closest
    free vertex southeast of it within the neighbourhood of ``tau``.
    Paths are then reordered bottom to top.
    """
    if check:
        check_conditions(tup, i, stage, which=(1, 2, 5))
    paths = list(tup.paths)
    k = len(paths)
    fixed = paths[k - i :] if i else []
    active = paths[: k - i] if i else paths
    region = _ball(stage.tau.vertices, neighborhood_radius(stage.k), stage.n)
    for _ in range(4 * k + 4):
        everything = active + fixed
        changed = False
        for j, p in enumerate(active):
            others = _occupied(everything, skip=j)
            if p.start not in others and p.end not in others:
                continue
            if p.start in stage.protected and p.start in others:
                raise ContractError(f"protected start {p.start} lies on another path", condition=5)
            free = [idx for idx, v in enumerate(p.vertices) if v not in others]
            if free:
                a, b = free[0], free[-1]
                q = p.subpath(a, b)
                stage.log("clean", old=p.vertices, new=q.vertices, action="trim")
            else:
                v = _relocation_target(everything, j, stage, region)
                if v is None:
                    raise AlgorithmicFailure(f"no free vertex to relocate path starting at {p.start}", trace=stage.trace)
                q = LatticePath.point(v)
                stage.log("clean", old=p.vertices, new=q.vertices, action="relocate")
            active[j] = q
            changed = True
            break
        if not changed:
            break
    else:
        raise AlgorithmicFailure("cleaning did not settle", trace=stage.trace)
    out = PathTuple.of(order_paths(active) + fixed)
    if check:
        bad = [
            (a, b)
            for a in range(out.k)
            for b in range(out.k)
            if a != b and (out.paths[a].start in out.paths[b] or out.paths[a].end in out.paths[b])
        ]
        if bad:
            raise AlgorithmicFailure(f"improper intersections remain: {bad}", trace=stage.trace)
    return out


def push_away(tup: PathTuple, stage: Stage, i=0, check=True):
    """Make path ``k - i - 1`` (the top unfixed path) disjoint from all others.

    Each lower path meeting it is replaced by the lowest path between its
    endpoints that uses its own edges and the top path's edges shifted one
    step down and right.
    """
    paths = list(tup.paths)
    k = len(paths)
    top_idx = k - i - 1
    if top_idx < 0:
        return tup
    if check:
        check_conditions(tup, i, stage, which=(1, 2, 5))
        for j in range(top_idx):
            p = paths[j]
            if intersect(p, paths[top_idx]) and (
                p.start in paths[top_idx].vertex_set or p.end in paths[top_idx].vertex_set
            ):
                raise ContractError(f"path {j} meets the top path improperly", condition="proper")
    top = paths[top_idx]
    shifted = shift_down_right(top, stage.n)
    for j in range(top_idx):
        p = paths[j]
        if not intersect(p, top):
            continue
        q = min_path(p.start, p.end, set(p.edges()) | shifted)
        stage.log("push", index=j, old=p.vertices, new=q.vertices, lost=len(set(p.edges()) - set(q.edges())))
        paths[j] = q
    out = PathTuple.of(paths, tup.targets)
    if check:
        for j in range(k):
            if j != top_idx and intersect(out.paths[j], top):
                raise AlgorithmicFailure(f"path {j} still meets the top path after pushing", trace=stage.trace)
    return out


def run_stages(tup: PathTuple, stage: Stage, check=True):
    """Uncross, clean and push for stages ``0 .. k-1``; returns a non-intersecting tuple."""
    k = tup.k
    cur = tup
    for i in range(k):
        fixed = list(cur.paths[k - i :]) if i else []
        active = list(cur.paths[: k - i])
        unc = uncross(PathTuple.of(active))
        cur = PathTuple.of(list(unc.paths) + fixed)
        if check:
            check_conditions(cur, i, stage, which=(1, 2, 4, 5))
        cur = clean_proper(cur, stage, i, check=check)
        cur = push_away(cur, stage, i, check=check)
        stage.log("stage", index=i, tuple=cur.to_dict())
    if not cur.is_nonintersecting():
        raise AlgorithmicFailure("stages ended with intersecting paths", trace=stage.trace)
    if check:
        check_conditions(cur, k, stage, which=(1, 3, 4, 5))
    return cur


# -- rounds --------------------------------------------------------------------


def _horizontal_then_vertical(a, b):
    return LatticePath.from_steps(a, "R" * (b[0] - a[0]) + "U" * (b[1] - a[1]))


def _reroute_column_conflict(paths, m, joined_idx):
    """Resolve a column-1 path passing ``(1, m)`` after ``tau`` was attached at ``(1, m)``.

    ``joined_idx`` is the path now starting with ``tau``.  The other path
    keeps its column-1 part up to ``(1, m-1)`` and then

    * ``swap``: when ``tau`` leaves ``(1, m)`` to the right, it steps to
      ``(2, m-1)``, ``(2, m)`` and takes over the rest of the joined path,
      while the joined path takes over its old route above ``(1, m)``;
    * ``collapse``: when it never leaves column 1, it ends at ``(1, m-1)``;
    * ``detour``: otherwise it climbs column 2 from ``(2, m-1)`` to where it
      first entered column 2.

    Returns the new list of paths and the name of the fix (or ``None``).
    """
    if m < 2:
        return paths, None
    corner = (1, m)
    jp = next((j for j, p in enumerate(paths) if j != joined_idx and corner in p.vertex_set), None)
    if jp is None:
        return paths, None
    other, joined = paths[jp], paths[joined_idx]
    if other.start[0] != 1 or other.start[1] >= m:
        raise ContractError(f"path through {corner} does not start in column 1 below it", condition=5)
    paths = list(paths)
    below = other.vertices[: other.index((1, m - 1)) + 1]
    tail = other.vertices[other.index(corner) :]
    if len(joined) and joined.vertices[1] == (2, m):
        paths[joined_idx] = LatticePath(tail)
        paths[jp] = LatticePath(below + ((2, m - 1),) + joined.vertices[1:])
        return paths, "swap"
    if all(v[0] == 1 for v in other.vertices):
        paths[jp] = LatticePath(below)
        return paths, "collapse"
    a = next(v[1] for v in other.vertices if v[0] == 2)
    climb = tuple((2, y) for y in range(m - 1, a + 1))
    paths[jp] = LatticePath(below + climb + other.vertices[other.index((2, a)) + 1 :])
    return paths, "detour"


def _vertical_then_horizontal(a, b):
    return LatticePath.from_steps(a, "U" * (b[1] - a[1]) + "R" * (b[0] - a[0]))


def _choose_tau(tup, n, m, cands):
    """Nearest target and the first of the two one-turn shapes avoiding settled far-corner ends.

    Ends already at the far corner must not be touched by ``tau``,
    otherwise cleaning would move them off the corner again.  If every
    choice touches one, the right-then-up path to the nearest target is used.
    """
    _, T0 = corner_endpoints(n, tup.k)
    settled_ends = set(T0) & set(tup.T)
    ranked = sorted(cands, key=lambda v: (v[0] - 1 + v[1] - m, v[0], v[1]))
    ends = {p.start: p.end for p in tup.paths}
    for target in ranked:
        avoid = settled_ends - {ends[target]}
        for shape in (_horizontal_then_vertical, _vertical_then_horizontal):
            tau = shape((1, m), target)
            if avoid.isdisjoint(tau.vertices):
                return tau, target
    return _horizontal_then_vertical((1, m), ranked[0]), ranked[0]


def lift_round(tup: PathTuple, n, trace=None, budget=None, check=True):
    """One round raising the start order: attach ``tau`` from the lowest missing corner start.

    ``tau`` is a one-turn path from ``(1, m)``, ``m`` the start order, to the
    nearest start other than ``(1, 1..m-1)`` (see :func:`_choose_tau`).
    Returns ``(new_tuple, tau)``.
    """
    k = tup.k
    S0, _ = corner_endpoints(n, k)
    m = ord_start(tup.S)
    if m > k:
        return tup, None
    stray = [s for s in tup.S if s not in S0]
    if any(s[1] < m for s in stray):
        raise ContractError(f"stray start below (1, {m}); clear the boundary first", condition="boundary")
    # nearest start not among (1, 1..m-1); a corner start above m also works and
    # keeps the column-1 segment of tau free of other starts
    settled = {(1, y) for y in range(1, m)}
    cands = [s for s in tup.S if s not in settled and s[1] >= m]
    tau, target = _choose_tau(tup, n, m, cands)
    j = tup.S.index(target)
    paths = list(tup.paths)
    paths[j] = tau.concat(paths[j])
    paths, fix = _reroute_column_conflict(paths, m, j)
    stage = Stage(n=n, k=k, tau=tau, m=m, base=tup, budget=budget, trace=[] if trace is None else trace)
    stage.log("attach", tau=tau.vertices, m=m, target=target, fix=fix)
    new = PathTuple.of(order_paths(paths))
    out = run_stages(new, stage, check=check)
    if check and ord_start(out.S) <= m:
        raise AlgorithmicFailure(f"start order did not progress past {m}", trace=stage.trace)
    return out, tau


def _level_free_vertex(paths, n, k, near):
    occ = _occupied(paths)
    best, key_best = None, None
    # rows outside both boundary bands; columns 1 and n stay reserved for corner endpoints
    for x in range(2, n):
        for y in range(k + 1, n - k + 1):
            v = (x, y)
            if v in occ:
                continue
            key = (abs(v[0] - near[0]) + abs(v[1] - near[1]), x, y)
            if key_best is None or key < key_best:
                best, key_best = v, key
    return best


def _first_at_level(p, level):
    for idx, v in enumerate(p.vertices):
        if v[1] == level:
            return idx
    return None


def _clear_bottom(tup: PathTuple, n, trace, check=True):
    """Remove stray starts from the lowest ``k`` rows; returns ``(tuple, taus)``."""
    k = tup.k
    S0, _ = corner_endpoints(n, k)
    taus = []
    band = frozenset((x, y) for x in range(1, n + 1) for y in range(1, min(n, k + 1) + 1))
    for _ in range(2 * k + 2):
        low = [s for s in tup.S if s not in S0 and s[1] <= k]
        if not low:
            return tup, taus
        level = min(s[1] for s in low)
        row = sorted((s for s in low if s[1] == level), key=lambda v: v[0])
        right = row[-1]
        tau = _horizontal_then_vertical((1, level), right)
        paths = list(tup.paths)
        corner_idx = next((j for j, p in enumerate(paths) if p.start == (1, level)), None)
        movers = [tup.S.index(s) for s in row[:-1]] + ([corner_idx] if corner_idx is not None else [])
        info = {"level": level, "tau": tau.vertices, "moved": []}
        homeless = []
        for j in movers:
            p = paths[j]
            cut = _first_at_level(p, level + 1)
            if cut is not None:
                paths[j] = p.subpath(cut)
                info["moved"].append({"old": p.vertices, "new": paths[j].vertices, "action": "advance"})
            else:
                homeless.append(j)
                paths[j] = None
        for j in homeless:
            old = tup.paths[j]
            v = _level_free_vertex([q for q in paths if q is not None], n, k, old.start)
            if v is None:
                raise AlgorithmicFailure(f"no interior vertex free for relocating {old.start}", trace=trace)
            paths[j] = LatticePath.point(v)
            info["moved"].append({"old": old.vertices, "new": paths[j].vertices, "action": "relocate"})
        r = tup.S.index(right)
        paths[r] = tau.concat(paths[r])
        paths, fix = (paths, None) if corner_idx is not None else _reroute_column_conflict(paths, level, r)
        info["fix"] = fix
        starts = {p.start for p in paths}
        protected = frozenset((1, y) for y in range(1, level + 1) if (1, y) in starts)
        stage = Stage(n=n, k=k, tau=tau, m=level, base=tup, band=band, trace=trace, protected=protected)
        stage.log("clear_bottom", **info)
        tup = run_stages(PathTuple.of(order_paths(paths)), stage, check=check)
        taus.append(tau)
    raise AlgorithmicFailure("boundary clearing did not finish", trace=trace)


def _rotated_taus(taus, n):
    return [t.rotated(n) for t in taus]


def clear_boundary(tup: PathTuple, n, trace=None, check=True):
    """Clear stray starts from the bottom ``k`` rows and stray ends from the top ``k`` rows.

    Returns ``(tuple, report)``.
    """
    trace = [] if trace is None else trace
    out, taus = _clear_bottom(tup, n, trace, check=check)
    rot, taus_top = _clear_bottom(out.rotated(n), n, trace, check=check)
    out = rot.rotated(n)
    taus = taus + _rotated_taus(taus_top, n)
    return out, SurgeryReport.build(tup, out, taus, n, trace=trace)


def _is_corner(tup, n):
    S0, T0 = corner_endpoints(n, tup.k)
    return set(tup.S) == set(S0) and set(tup.T) == set(T0)


def lift_to_corner(tup: PathTuple, n, check=True, budget=None):
    """Full pipeline: boundary clearing, then lifting rounds until the corner endpoints are reached.

    Returns ``(tuple, report)``; the output is non-intersecting with path
    ``i`` running from ``(1, i)`` to ``(n, n - k + i)``.  Raises
    :class:`AlgorithmicFailure` if ``2k`` rounds do not suffice.
    """
    if not tup.is_nonintersecting():
        raise ContractError("input tuple must be non-intersecting", condition="input")
    if not tup.within(n):
        raise StructuralError("tuple leaves the grid")
    trace = []
    try:
        return _lift_to_corner(tup, n, trace, check, budget)
    except PolymerLabError as exc:
        if getattr(exc, "trace", None) is None:
            exc.trace = trace
        raise


def _lift_to_corner(tup, n, trace, check, budget):
    k = tup.k
    taus = []
    cur, rep = clear_boundary(tup, n, trace, check=check)
    taus += rep.taus
    rounds = 0
    while not _is_corner(cur, n):
        if rounds >= 2 * k:
            raise AlgorithmicFailure(f"no corner tuple after {rounds} rounds", trace=trace)
        rounds += 1
        S0, _ = corner_endpoints(n, k)
        if set(cur.S) != set(S0):
            cur, tau = lift_round(cur, n, trace, budget=budget, check=check)
            taus.append(tau)
        else:
            rot, tau = lift_round(cur.rotated(n), n, trace, budget=budget, check=check)
            cur = rot.rotated(n)
            taus.append(tau.rotated(n))
        cur, rep = clear_boundary(cur, n, trace, check=check)
        taus += rep.taus
    paths = sorted(cur.paths, key=lambda p: p.start[1])
    S0, T0 = corner_endpoints(n, k)
    out = PathTuple.of(paths, T0)
    if out.S != S0 or tuple(p.end for p in out.paths) != T0 or not out.is_nonintersecting():
        raise AlgorithmicFailure("final tuple is not a non-intersecting corner tuple", trace=trace)
    report = SurgeryReport.build(tup, out, taus, n, trace=trace, rounds=rounds)
    return out, report


# -- reporting -------------------------------------------------------------------


def decompose_edges(edges):
    """Split a set of directed lattice edges into edge-disjoint paths.

    Each path starts where out-degree exceeds in-degree and is followed
    until it cannot continue; the edges form a DAG, so this covers all.
    """
    out_edges = {}
    indeg, outdeg = Counter(), Counter()
    for a, b in edges:
        out_edges.setdefault(a, []).append(b)
        outdeg[a] += 1
        indeg[b] += 1
    for v in out_edges:
        out_edges[v].sort()
    paths = []
    remaining = sum(outdeg.values())
    while remaining:
        starts = sorted(v for v in out_edges if out_edges[v] and outdeg[v] > indeg[v])
        v = starts[0] if starts else min(v for v in out_edges if out_edges[v])
        verts = [v]
        while out_edges.get(v):
            w = out_edges[v].pop()
            outdeg[v] -= 1
            indeg[w] -= 1
            remaining -= 1
            verts.append(w)
            v = w
        paths.append(LatticePath(tuple(verts)))
    return paths


@dataclass
class SurgeryReport:
    """Outcome of a surgery run.

    ``removed_edges`` counts edges of the input missing from the output
    (edges used by several paths count once); ``sym_diff_paths`` cover the
    symmetric difference of the two edge sets; ``taus`` are the attached
    simple paths.  ``max_distance`` is the largest distance of a changed
    vertex from the attached paths, ignoring the boundary bands.
    """

    input: PathTuple
    output: PathTuple
    removed_edges: int
    added_edges: int
    sym_diff_paths: list
    taus: list
    n: int
    rounds: int = 0
    max_distance: int = 0
    local: bool = True
    trace: list = field(default_factory=list, repr=False)

    @classmethod
    def build(cls, before, after, taus, n, trace=None, rounds=0):
        k = before.k
        e0, e1 = before.edge_set(), after.edge_set()
        diff = e0 ^ e1
        parts = decompose_edges(diff)
        radius = neighborhood_radius(k)
        tau_verts = [v for t in taus for v in t.vertices]
        max_d, local = 0, True
        for e in diff:
            for v in e:
                if _in_boundary_band(v, n, k):
                    continue
                d = _dist(v, tau_verts) if tau_verts else n * n
                max_d = max(max_d, d)
                if d > radius:
                    local = False
        return cls(
            input=before,
            output=after,
            removed_edges=len(e0 - e1),
            added_edges=len(e1 - e0),
            sym_diff_paths=parts,
            taus=list(taus),
            n=n,
            rounds=rounds,
            max_distance=max_d,
            local=local,
            trace=[] if trace is None else trace,
        )

    def turns_added(self):
        return sum(p.turns() for p in self.output.paths) - sum(p.turns() for p in self.input.paths)

    def to_dict(self, include_trace=False):
        d = {
            "n": self.n,
            "input": self.input.to_dict(),
            "output": self.output.to_dict(),
            "removed_edges": self.removed_edges,
            "added_edges": self.added_edges,
            "sym_diff_paths": [[list(v) for v in p.vertices] for p in self.sym_diff_paths],
            "taus": [[list(v) for v in t.vertices] for t in self.taus],
            "rounds": self.rounds,
            "max_distance": self.max_distance,
            "local": self.local,
        }
        if include_trace:
            d["trace"] = _jsonable(self.trace)
        return d

    def to_json(self, include_trace=False):
        return json.dumps(self.to_dict(include_trace), indent=2)


def _in_boundary_band(v, n, k):
    return min(v[0] - 1, v[1] - 1, n - v[0], n - v[1]) <= k


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj

