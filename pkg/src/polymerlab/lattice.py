"""Directed square lattice with loops and its bipartite hexagonal double.

Vertices of the n x n square lattice are pairs ``(x, y)`` with
``1 <= x, y <= n``; edges go right ``(x, y) -> (x + 1, y)`` or up
``(x, y) -> (x, y + 1)`` and every vertex carries a loop.

Weights are stored in the adjacency convention, i.e. the matrix entries
``A[u, u]`` (loops) and ``A[u, v]`` (edges).  The polymer weights are derived
from them: ``w_u = 1 / A[u, u]`` and ``w_{u,v} = -A[u, v]``.  Keeping the
adjacency entries canonical makes the square <-> hexagon round trip exact.

Grid arrays are indexed ``[y - 1, x - 1]`` (row major, rows bottom to top):

* ``loops``  shape ``(n, n)``
* ``right``  shape ``(n, n - 1)``; ``right[y-1, x-1]`` is edge ``(x, y) -> (x+1, y)``
* ``up``     shape ``(n - 1, n)``; ``up[y-1, x-1]`` is edge ``(x, y) -> (x, y+1)``
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import StructuralError

__all__ = [
    "SCHEMA_VERSION",
    "DENSE_CUTOFF",
    "SquareLattice",
    "HexLattice",
    "AdjacencyMatrix",
    "build_square_lattice",
    "build_hex_from_square",
    "build_square_from_hex",
    "square_adjacency",
    "hex_adjacency",
    "canonical_order",
    "hexagon_levels",
    "expected_hexagon_levels",
]

SCHEMA_VERSION = 1

# largest number of square-lattice vertices for which matrices are dense
DENSE_CUTOFF = 4096


def canonical_order(n):
    """Vertices sorted by ``x + y`` then ``x``; a topological order of the lattice."""
    return [(x, s - x) for s in range(2, 2 * n + 1) for x in range(max(1, s - n), min(n, s - 1) + 1)]


def _index_grid(n):
    """``grid[y-1, x-1]`` -> position in the canonical order."""
    grid = np.empty((n, n), dtype=np.int64)
    for i, (x, y) in enumerate(canonical_order(n)):
        grid[y - 1, x - 1] = i
    return grid


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SquareLattice:
    """Weighted directed n x n lattice, stored as adjacency-matrix entries."""

    n: int
    loops: np.ndarray
    right: np.ndarray
    up: np.ndarray

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise StructuralError("lattice side must be at least 1")
        object.__setattr__(self, "loops", _frozen(self.loops))
        object.__setattr__(self, "right", _frozen(self.right).reshape(n, n - 1))
        object.__setattr__(self, "up", _frozen(self.up).reshape(n - 1, n))
        if self.loops.shape != (n, n):
            raise StructuralError(f"loops must have shape {(n, n)}, got {self.loops.shape}")
        if np.any(self.loops == 0.0):
            raise StructuralError("every loop weight must be nonzero (A would be singular)")
        for name in ("loops", "right", "up"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise StructuralError(f"non-finite entries in {name}")

    # polymer weights
    @property
    def loop_weights(self):
        """``w_u = 1 / A[u, u]`` on the grid."""
        return 1.0 / self.loops

    @property
    def right_weights(self):
        return -self.right

    @property
    def up_weights(self):
        return -self.up

    @property
    def num_vertices(self):
        return self.n * self.n

    @property
    def num_edges(self):
        """Number of non-loop edges, always ``2 n (n - 1)``."""
        return self.right.size + self.up.size

    def vertices(self):
        return canonical_order(self.n)

    @cached_property
    def index(self):
        return _index_grid(self.n)

    def edges(self):
        """Directed non-loop edges ``(u, v)`` in canonical order of ``u``."""
        n = self.n
        out = []
        for x, y in canonical_order(n):
            if x < n:
                out.append(((x, y), (x + 1, y)))
            if y < n:
                out.append(((x, y), (x, y + 1)))
        return out

    def loop(self, u):
        x, y = u
        return float(self.loops[y - 1, x - 1])

    def edge(self, u, v):
        """Adjacency entry ``A[u, v]`` of a lattice edge."""
        (x, y), (x2, y2) = u, v
        if x2 == x + 1 and y2 == y and x < self.n:
            return float(self.right[y - 1, x - 1])
        if x2 == x and y2 == y + 1 and y < self.n:
            return float(self.up[y - 1, x - 1])
        raise StructuralError(f"no lattice edge {u} -> {v}")

    def loop_weight(self, u):
        return 1.0 / self.loop(u)

    def edge_weight(self, u, v):
        return -self.edge(u, v)

    def contains(self, u):
        x, y = u
        return 1 <= x <= self.n and 1 <= y <= self.n

    def same_weights(self, other):
        return (
            self.n == other.n
            and np.array_equal(self.loops, other.loops)
            and np.array_equal(self.right, other.right)
            and np.array_equal(self.up, other.up)
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "convention": "adjacency",
            "n": self.n,
            "loops": self.loops.tolist(),
            "right_edges": self.right.tolist(),
            "up_edges": self.up.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise StructuralError(f"unsupported lattice schema version {d.get('schema_version')!r}")
        n = int(d["n"])
        loops = np.asarray(d["loops"], dtype=float).reshape(n, n)
        right = np.asarray(d["right_edges"], dtype=float).reshape(n, n - 1)
        up = np.asarray(d["up_edges"], dtype=float).reshape(n - 1, n)
        if d.get("convention", "adjacency") == "polymer":
            return build_square_lattice(n, 1.0 / loops, -right, -up)
        return cls(n, loops, right, up)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def build_square_lattice(n, loop_weights, right_weights=None, up_weights=None):
    """Build a lattice from polymer weights ``w_u`` and ``w_{u,v}``.

    ``loop_weights`` may be a scalar, an ``(n, n)`` grid or a mapping from
    vertices to weights; the edge arguments likewise (scalar, grid, or a
    mapping ``(u, v) -> w``).  Missing edge weights default to 1.
    """
    if n < 1:
        raise StructuralError("lattice side must be at least 1")
    w = _grid_from(loop_weights, (n, n), lambda x, y: (x, y))
    if np.any(w == 0.0):
        raise StructuralError("loop weights must be nonzero")
    if right_weights is None:
        right_weights = 1.0
    if up_weights is None:
        up_weights = right_weights if np.isscalar(right_weights) else 1.0
    r = _grid_from(right_weights, (n, n - 1), lambda x, y: ((x, y), (x + 1, y)))
    u = _grid_from(up_weights, (n - 1, n), lambda x, y: ((x, y), (x, y + 1)))
    return SquareLattice(n, 1.0 / w, -r, -u)


def _grid_from(values, shape, key):
    if isinstance(values, dict):
        out = np.empty(shape)
        for yi in range(shape[0]):
            for xi in range(shape[1]):
                out[yi, xi] = values[key(xi + 1, yi + 1)]
        return out
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return np.full(shape, float(arr))
    return arr.reshape(shape)


@dataclass(frozen=True, eq=False)
class HexLattice:
    """Bipartite graph G_n: classes ``a_u``, ``b_u`` indexed by square vertices.

    Blue edges ``(a_u, b_u)`` form a perfect matching; the red edge
    ``(a_u, b_v)`` exists exactly when ``u -> v`` is a square-lattice edge.
    """

    n: int
    blue: np.ndarray
    red_right: np.ndarray
    red_up: np.ndarray

    def __post_init__(self):
        n = self.n
        object.__setattr__(self, "blue", _frozen(self.blue).reshape(n, n))
        object.__setattr__(self, "red_right", _frozen(self.red_right).reshape(n, n - 1))
        object.__setattr__(self, "red_up", _frozen(self.red_up).reshape(n - 1, n))

    @property
    def num_vertices(self):
        return 2 * self.n * self.n

    def blue_edges(self):
        """``(("a", u), ("b", u), weight)`` for every matching edge."""
        return [(("a", u), ("b", u), float(self.blue[u[1] - 1, u[0] - 1])) for u in canonical_order(self.n)]

    def red_edges(self):
        n = self.n
        out = []
        for x, y in canonical_order(n):
            if x < n:
                out.append((("a", (x, y)), ("b", (x + 1, y)), float(self.red_right[y - 1, x - 1])))
            if y < n:
                out.append((("a", (x, y)), ("b", (x, y + 1)), float(self.red_up[y - 1, x - 1])))
        return out

    def edges(self):
        return self.blue_edges() + self.red_edges()

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        for u in canonical_order(self.n):
            g.add_node(("a", u), bipartite=0)
            g.add_node(("b", u), bipartite=1)
        for a, b, w in self.blue_edges():
            g.add_edge(a, b, weight=w, color="blue")
        for a, b, w in self.red_edges():
            g.add_edge(a, b, weight=w, color="red")
        return g


def build_hex_from_square(sq):
    """Hexagonal lattice whose matching contraction is ``sq``.

    Blue edge ``(a_u, b_u)`` gets ``A[u, u]``, red edge ``(a_u, b_v)`` gets
    ``A[u, v]``.
    """
    return HexLattice(sq.n, sq.loops, sq.right, sq.up)


def build_square_from_hex(hx):
    """Contract the blue matching of ``hx`` into loops of a square lattice."""
    return SquareLattice(hx.n, hx.blue, hx.red_right, hx.red_up)


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """A (possibly sparse) adjacency matrix with its rows in canonical order."""

    matrix: object
    symmetric: bool

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def is_sparse(self):
        return sp.issparse(self.matrix)

    def toarray(self):
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def nnz(self):
        if self.is_sparse:
            return int(self.matrix.count_nonzero())
        return int(np.count_nonzero(self.matrix))


def _square_coo(n, loops, right, up):
    idx = _index_grid(n)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [loops.ravel()]
    if n > 1:
        rows += [idx[:, :-1].ravel(), idx[:-1, :].ravel()]
        cols += [idx[:, 1:].ravel(), idx[1:, :].ravel()]
        vals += [right.ravel(), up.ravel()]
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def square_adjacency(sq, dense=None):
    """The n^2 x n^2 matrix A in canonical order (upper triangular)."""
    N = sq.n * sq.n
    if dense is None:
        dense = N <= DENSE_CUTOFF
    r, c, v = _square_coo(sq.n, sq.loops, sq.right, sq.up)
    m = sp.csr_matrix((v, (r, c)), shape=(N, N))
    return AdjacencyMatrix(m.toarray() if dense else m, symmetric=False)


def hex_adjacency(hx, dense=None):
    """Symmetric 2n^2 x 2n^2 adjacency of G_n ordered ``(a_1..a_N, b_1..b_N)``.

    In this order the matrix is exactly ``[[0, At], [At^T, 0]]`` where ``At``
    is the square adjacency of the contracted lattice.
    """
    N = hx.n * hx.n
    if dense is None:
        dense = N <= DENSE_CUTOFF
    r, c, v = _square_coo(hx.n, hx.blue, hx.red_right, hx.red_up)
    rows = np.concatenate([r, c + N])
    cols = np.concatenate([c + N, r])
    vals = np.concatenate([v, v])
    m = sp.csr_matrix((vals, (rows, cols)), shape=(2 * N, 2 * N))
    return AdjacencyMatrix(m.toarray() if dense else m, symmetric=True)


def expected_hexagon_levels(n):
    """Hexagons per level, ``min(k, 2n - k - 2)`` for ``k = 0 .. 2n - 2``."""
    return [min(k, 2 * n - k - 2) for k in range(2 * n - 1)]


def hexagon_levels(hx):
    """Count the hexagonal faces of ``hx`` level by level.

    Each unit square of the contracted lattice with lower-left corner
    ``(x, y)`` must appear in G_n as the 6-cycle
    ``a_u b_r a_r b_t a_l b_l`` (u = (x, y), r = right, l = up, t = diagonal);
    it sits on level ``x + y - 1``.  A missing cycle raises ``StructuralError``.
    """
    n = hx.n
    g = hx.to_networkx()
    counts = [0] * (2 * n - 1)
    for y in range(1, n):
        for x in range(1, n):
            u, r, l, t = (x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)
            cycle = [("a", u), ("b", r), ("a", r), ("b", t), ("a", l), ("b", l)]
            for p, q in zip(cycle, cycle[1:] + cycle[:1]):
                if not g.has_edge(p, q):
                    raise StructuralError(f"hexagon at {u} is missing edge {p}-{q}")
            counts[x + y - 1] += 1
    # faces of a connected plane graph: E - V + 1 bounded faces
    if sum(counts) != g.number_of_edges() - g.number_of_nodes() + 1:
        raise StructuralError("hexagon count disagrees with Euler's formula")
    return counts
