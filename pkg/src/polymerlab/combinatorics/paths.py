"""Monotone lattice paths, tuples of them, and the relations between paths.

A vertex ``(x, y)`` is *northwest* of ``(x', y')``, written ``(x, y) > (x', y')``,
when ``y > y'`` and ``x < x'``.  A path ``p`` dominates ``q`` (``p`` is "above"
``q``) if some vertex of ``p`` is northwest of some vertex of ``q`` and no vertex
of ``q`` is northwest of a vertex of ``p``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import combinations

from ..errors import StructuralError

__all__ = [
    "LatticePath",
    "PathTuple",
    "Order",
    "northwest",
    "path_order",
    "dominates",
    "is_crossing",
    "is_proper",
    "intersect",
    "enumerate_paths",
    "rotate_vertex",
]


def northwest(a, b):
    """``a > b`` in the vertex partial order."""
    return a[1] > b[1] and a[0] < b[0]


def rotate_vertex(v, n):
    """Half-turn of the n x n grid; maps up-right paths to reversed up-right paths."""
    return (n + 1 - v[0], n + 1 - v[1])


@dataclass(frozen=True)
class LatticePath:
    """Vertex sequence of a path taking unit steps right or up.

    A single vertex is a path of length zero.
    """

    vertices: tuple

    def __post_init__(self):
        vs = tuple((int(x), int(y)) for x, y in self.vertices)
        if not vs:
            raise StructuralError("a path needs at least one vertex")
        for (x, y), (x2, y2) in zip(vs, vs[1:]):
            if not ((x2 == x + 1 and y2 == y) or (x2 == x and y2 == y + 1)):
                raise StructuralError(f"illegal step {(x, y)} -> {(x2, y2)}")
        object.__setattr__(self, "vertices", vs)

    @classmethod
    def from_steps(cls, start, steps):
        """``steps`` is a string over ``R`` (right) and ``U`` (up)."""
        x, y = start
        vs = [(x, y)]
        for s in steps:
            if s == "R":
                x += 1
            elif s == "U":
                y += 1
            else:
                raise StructuralError(f"bad step {s!r}")
            vs.append((x, y))
        return cls(tuple(vs))

    @classmethod
    def point(cls, v):
        return cls((tuple(v),))

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def __len__(self):
        """Number of edges."""
        return len(self.vertices) - 1

    @cached_property
    def vertex_set(self):
        return frozenset(self.vertices)

    def __contains__(self, v):
        return tuple(v) in self.vertex_set

    def edges(self):
        return tuple(zip(self.vertices, self.vertices[1:]))

    def steps(self):
        return "".join("R" if b[0] > a[0] else "U" for a, b in self.edges())

    def turn_vertices(self):
        """Interior vertices where the step direction changes."""
        st = self.steps()
        return [self.vertices[i + 1] for i in range(len(st) - 1) if st[i] != st[i + 1]]

    def turns(self):
        return len(self.turn_vertices())

    def is_simple(self):
        """At most one turn."""
        return self.turns() <= 1

    def within(self, n):
        return all(1 <= x <= n and 1 <= y <= n for x, y in self.vertices)

    def index(self, v):
        return self.vertices.index(tuple(v))

    def subpath(self, i, j=None):
        """Vertices ``i .. j`` inclusive (``j`` defaults to the end)."""
        j = len(self.vertices) - 1 if j is None else j
        return LatticePath(self.vertices[i : j + 1])

    def concat(self, other):
        if self.end != other.start:
            raise StructuralError(f"cannot join path ending at {self.end} to one starting at {other.start}")
        return LatticePath(self.vertices + other.vertices[1:])

    def rotated(self, n):
        return LatticePath(tuple(rotate_vertex(v, n) for v in reversed(self.vertices)))

    def shifted(self, dx, dy):
        return LatticePath(tuple((x + dx, y + dy) for x, y in self.vertices))

    def __repr__(self):
        if len(self.vertices) == 1:
            return f"LatticePath({self.start})"
        return f"LatticePath({self.start} {self.steps()})"


def enumerate_paths(u, v):
    """All up-right paths from ``u`` to ``v`` (lexicographic in the step word)."""
    dx, dy = v[0] - u[0], v[1] - u[1]
    if dx < 0 or dy < 0:
        return []
    out = []

    def rec(x, y, acc):
        if (x, y) == tuple(v):
            out.append(LatticePath(tuple(acc)))
            return
        if x < v[0]:
            acc.append((x + 1, y))
            rec(x + 1, y, acc)
            acc.pop()
        if y < v[1]:
            acc.append((x, y + 1))
            rec(x, y + 1, acc)
            acc.pop()

    rec(u[0], u[1], [tuple(u)])
    return out


class Order(Enum):
    SUCC = "succ"  # first path above the second
    PREC = "prec"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def _comparabilities(p, q):
    above = below = False
    for a in p.vertices:
        for b in q.vertices:
            if northwest(a, b):
                above = True
            elif northwest(b, a):
                below = True
            if above and below:
                return True, True
    return above, below


def dominates(p, q):
    """``p`` strictly above ``q`` in the path order."""
    above, below = _comparabilities(p, q)
    return above and not below


def path_order(p, q):
    if p == q:
        return Order.EQUAL
    above, below = _comparabilities(p, q)
    if above and not below:
        return Order.SUCC
    if below and not above:
        return Order.PREC
    return Order.INCOMPARABLE


def intersect(p, q):
    return not p.vertex_set.isdisjoint(q.vertex_set)


def _common_runs(p, q):
    """Maximal runs ``(i, j)`` of consecutive vertices of ``p`` lying on ``q``."""
    runs = []
    i = None
    for idx, v in enumerate(p.vertices):
        if v in q.vertex_set:
            if i is None:
                i = idx
        elif i is not None:
            runs.append((i, idx - 1))
            i = None
    if i is not None:
        runs.append((i, len(p.vertices) - 1))
    return runs


def _entry_exit(path, i, j):
    """How ``path`` enters vertex ``i`` and leaves vertex ``j`` (None at an endpoint)."""
    vs = path.vertices
    entry = None if i == 0 else ("left" if vs[i - 1][0] < vs[i][0] else "bottom")
    exit_ = None if j == len(vs) - 1 else ("right" if vs[j + 1][0] > vs[j][0] else "up")
    return entry, exit_


def crossing_intersections(p, q):
    """Common segments where one path passes from left-to-right and the other bottom-to-up."""
    out = []
    for i, j in _common_runs(p, q):
        a, b = p.vertices[i], p.vertices[j]
        qi, qj = q.index(a), q.index(b)
        pe = _entry_exit(p, i, j)
        qe = _entry_exit(q, qi, qj)
        if (pe == ("left", "right") and qe == ("bottom", "up")) or (
            qe == ("left", "right") and pe == ("bottom", "up")
        ):
            out.append(p.vertices[i : j + 1])
    return out


def is_crossing(p, q):
    return bool(crossing_intersections(p, q))


def is_proper(p, q):
    """Whether two intersecting paths intersect properly; ``None`` if they are disjoint."""
    if not intersect(p, q):
        return None
    return p.start not in q and p.end not in q and q.start not in p and q.end not in p


@dataclass(frozen=True)
class PathTuple:
    """``k`` paths; path ``i`` runs from ``S[i]`` to ``targets[sigma[i]]``."""

    paths: tuple
    targets: tuple

    def __post_init__(self):
        paths = tuple(self.paths)
        targets = tuple(tuple(t) for t in self.targets)
        object.__setattr__(self, "paths", paths)
        object.__setattr__(self, "targets", targets)
        if len(paths) != len(targets):
            raise StructuralError("need exactly one target per path")
        if len(set(p.start for p in paths)) != len(paths):
            raise StructuralError("start vertices must be distinct")
        if len(set(targets)) != len(targets):
            raise StructuralError("target vertices must be distinct")
        if sorted(p.end for p in paths) != sorted(targets):
            raise StructuralError("path ends do not match the target sequence")

    @classmethod
    def of(cls, paths, targets=None):
        paths = tuple(paths)
        if targets is None:
            targets = tuple(p.end for p in paths)
        return cls(paths, tuple(targets))

    @property
    def k(self):
        return len(self.paths)

    @property
    def S(self):
        return tuple(p.start for p in self.paths)

    @property
    def T(self):
        return self.targets

    @property
    def sigma(self):
        pos = {t: i for i, t in enumerate(self.targets)}
        return tuple(pos[p.end] for p in self.paths)

    def edge_multiset(self):
        return Counter(e for p in self.paths for e in p.edges())

    def edge_set(self):
        return frozenset(e for p in self.paths for e in p.edges())

    def intersecting_pairs(self):
        return [(i, j) for i, j in combinations(range(self.k), 2) if intersect(self.paths[i], self.paths[j])]

    def is_nonintersecting(self):
        seen = set()
        for p in self.paths:
            if not seen.isdisjoint(p.vertex_set):
                return False
            seen |= p.vertex_set
        return True

    def is_noncrossing(self):
        return not any(is_crossing(self.paths[i], self.paths[j]) for i, j in combinations(range(self.k), 2))

    def order_violations(self):
        """Pairs ``j < j'`` with path ``j'`` strictly below path ``j``."""
        return [
            (i, j)
            for i, j in combinations(range(self.k), 2)
            if dominates(self.paths[i], self.paths[j])
        ]

    def with_paths(self, paths, targets=None):
        return PathTuple.of(paths, self.targets if targets is None else targets)

    def rotated(self, n):
        """Half-turn: starts and targets swap roles."""
        paths = tuple(p.rotated(n) for p in self.paths)
        return PathTuple.of(paths, tuple(p.end for p in paths))

    def within(self, n):
        return all(p.within(n) for p in self.paths)

    def to_dict(self):
        return {
            "k": self.k,
            "S": [list(s) for s in self.S],
            "T": [list(t) for t in self.targets],
            "sigma": list(self.sigma),
            "paths": [[list(v) for v in p.vertices] for p in self.paths],
        }

    @classmethod
    def from_dict(cls, d):
        paths = tuple(LatticePath(tuple(tuple(v) for v in p)) for p in d["paths"])
        return cls(paths, tuple(tuple(t) for t in d["T"]))
