"""Rearranging a path tuple into noncrossing paths on the same edge multiset.

Edges between the diagonals ``x + y = d`` and ``x + y = d + 1`` form a strip.
Within a strip edges are listed from southeast to northwest and labelled by
the number of edges preceding them (copies of one edge get consecutive
labels).  Repeatedly peeling off a path made of label-0 edges, started at a
suitable start vertex, yields a noncrossing decomposition in which every
peeled path lies below all later ones.
"""

from __future__ import annotations

from collections import Counter, defaultdict

from ..errors import ContractError
from .paths import LatticePath, PathTuple, dominates

__all__ = ["uncross", "strip_labels", "order_paths", "check_uncrossed"]


def _strip(edge):
    (x, y), _ = edge
    return x + y


def _se_key(edge):
    """Position across the strip; larger is further southeast."""
    (x, y), (x2, y2) = edge
    return (x - y) + (0.5 if x2 > x else -0.5)


def strip_labels(edges):
    """Map ``edge -> list of labels`` for a multiset of edges (a Counter)."""
    by_strip = defaultdict(list)
    for e, c in edges.items():
        if c > 0:
            by_strip[_strip(e)].append(e)
    labels = {}
    for es in by_strip.values():
        es.sort(key=_se_key, reverse=True)
        pos = 0
        for e in es:
            labels[e] = list(range(pos, pos + edges[e]))
            pos += edges[e]
    return labels


def _label_zero_out(edges):
    """``vertex -> head`` of the label-0 edge of the vertex's strip, when that edge starts there."""
    best = {}
    for e, c in edges.items():
        if c <= 0:
            continue
        d = _strip(e)
        if d not in best or _se_key(e) > _se_key(best[d]):
            best[d] = e
    return {e[0]: e[1] for e in best.values()}


def _used_vertices(edges):
    used = set()
    for (a, b), c in edges.items():
        if c > 0:
            used.add(a)
            used.add(b)
    return used


def _peel(edges, starts, ends):
    """One label-0 path from the northeasternmost admissible start."""
    used = _used_vertices(edges)
    zero = _label_zero_out(edges)
    candidates = []
    for s in starts:
        x, y = s
        # the southeast diagonal ray from s must avoid every vertex carrying an edge
        if s in zero and not any((x + t, y - t) in used for t in range(1, y)):
            candidates.append(s)
    if not candidates:
        raise ContractError("no admissible start for a label-0 path", condition="uncross")
    s = max(candidates, key=lambda v: (v[0] + v[1], v[0]))
    verts = [s]
    v = s
    # a walk meets each strip once, so labels computed up front stay valid
    while v in zero:
        v = zero[v]
        verts.append(v)
        e = (verts[-2], v)
        edges[e] -= 1
        if edges[e] == 0:
            del edges[e]
    if v not in ends:
        raise ContractError(f"label-0 walk from {s} stopped at {v}, which is not an end vertex", condition="uncross")
    return LatticePath(tuple(verts))


def order_paths(paths):
    """Stable linear extension with every path placed after all paths it dominates.

    Raises :class:`ContractError` if the dominance relation has a cycle.
    """
    paths = list(paths)
    k = len(paths)
    after = {i: set() for i in range(k)}  # i must come after the members of after[i]
    for i in range(k):
        for j in range(k):
            if i != j and dominates(paths[i], paths[j]):
                after[i].add(j)
    placed, out = set(), []
    while len(out) < k:
        ready = [i for i in range(k) if i not in placed and after[i] <= placed]
        if not ready:
            raise ContractError("path order relation has a cycle", condition=2)
        i = ready[0]
        placed.add(i)
        out.append(paths[i])
    return out


def uncross(tup: PathTuple) -> PathTuple:
    """Noncrossing tuple on the same edge multiset, ordered from bottom to top.

    Zero-length paths carry no edges and are kept as they are; they are
    then merged into the order.  Starts and ends are preserved as sets;
    the matching between them (the permutation) may change.
    """
    zero_len = [p for p in tup.paths if len(p) == 0]
    others = [p for p in tup.paths if len(p) > 0]
    edges = Counter(e for p in others for e in p.edges())
    starts = [p.start for p in others]
    ends = [p.end for p in others]
    peeled = []
    while starts:
        rho = _peel(edges, starts, ends)
        peeled.append(rho)
        starts.remove(rho.start)
        ends.remove(rho.end)
    if edges:
        raise ContractError("edges left over after peeling every start", condition="uncross")
    ordered = order_paths(peeled + zero_len)
    out = PathTuple.of(ordered)
    return out


def check_uncrossed(before: PathTuple, after: PathTuple):
    """Raise :class:`ContractError` unless ``after`` is a valid uncrossing of ``before``."""
    if before.edge_multiset() != after.edge_multiset():
        raise ContractError("edge multiset changed", condition="uncross")
    if sorted(before.S) != sorted(after.S) or sorted(before.T) != sorted(after.T):
        raise ContractError("endpoint sets changed", condition="uncross")
    if not after.is_noncrossing():
        raise ContractError("crossing pair remains", condition="uncross")
    if after.order_violations():
        raise ContractError("order condition violated", condition=2)
    return True
