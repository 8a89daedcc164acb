"""Partition functions of directed polymers on the square lattice.

A path ``p = (v_0, ..., v_m)`` has weight ``prod_i w_{v_i} * prod_i w_{v_i, v_{i+1}}``
and ``Z_{u,v}`` sums these over all up-right paths from ``u`` to ``v``.  For
fixed ``u`` the function ``f_u(v) = Z_{u,v}`` is row ``u`` of ``A^{-1}``.
Values live in the log domain with an explicit sign because they grow like
``exp(c n)`` and the i.i.d. model has weights of both signs.
"""

from __future__ import annotations

import csv
import decimal
import io
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations

import numpy as np

from . import _kernels
from .combinatorics.paths import LatticePath, enumerate_paths
from .errors import RangeError, RefusedError, StructuralError
from .lattice import SquareLattice, canonical_order
from .signedlog import PrecisionWarning, SignedLog, signed_logsumexp

__all__ = [
    "EndpointSpec",
    "PartitionTable",
    "path_weight",
    "partition_function",
    "f_table",
    "f_matrix",
    "f_matrix_exact",
    "inverse_residual",
    "lgv_determinant",
    "nonintersecting_Z",
    "transfer_weights_to_edges",
    "brute_force_Z",
    "brute_force_Zk",
    "max_ZST",
    "EXHAUSTIVE_MAX_N",
    "EXHAUSTIVE_MAX_K",
]

EXHAUSTIVE_MAX_N = 6
EXHAUSTIVE_MAX_K = 3
# exact recomputation of badly cancelled LGV determinants
REFINE_BELOW = 1e-6
EXACT_REFINE_MAX_N = 32
EXACT_REFINE_MAX_K = 6
# beyond those limits: decimal arithmetic, precision doubled until two runs agree
DECIMAL_AGREE_RTOL = 1e-12
DECIMAL_MAX_PREC = 4000


def _signed_log_grid(a):
    s = np.sign(a).astype(np.int8)
    with np.errstate(divide="ignore"):
        lg = np.log(np.abs(a))
    return s, lg


def _log_weights(lat):
    """Sign / log grids of the polymer weights, cached on the lattice object."""
    cached = lat.__dict__.get("_log_weights")
    if cached is None:
        cached = (
            *_signed_log_grid(lat.loop_weights),
            *_signed_log_grid(lat.right_weights),
            *_signed_log_grid(lat.up_weights),
        )
        object.__setattr__(lat, "_log_weights", cached)
    return cached


@dataclass(frozen=True)
class EndpointSpec:
    """Start sequence ``S`` and end sequence ``T`` of ``k`` distinct vertices each."""

    S: tuple
    T: tuple

    def __post_init__(self):
        S = tuple((int(x), int(y)) for x, y in self.S)
        T = tuple((int(x), int(y)) for x, y in self.T)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "T", T)
        if len(S) != len(T) or not S:
            raise StructuralError("S and T must be nonempty and of equal length")
        if len(set(S)) != len(S) or len(set(T)) != len(T):
            raise StructuralError("endpoint vertices must be distinct")

    @property
    def k(self):
        return len(self.S)

    @classmethod
    def corner(cls, n, k):
        """``S = ((1,1), ..., (1,k))`` and ``T = ((n, n-k+1), ..., (n, n))``."""
        if not 1 <= k <= n:
            raise RangeError(f"corner spec needs 1 <= k <= n, got k={k}, n={n}")
        return cls(tuple((1, i) for i in range(1, k + 1)), tuple((n, n - k + i) for i in range(1, k + 1)))

    def to_dict(self):
        return {"S": [list(s) for s in self.S], "T": [list(t) for t in self.T]}


@dataclass(frozen=True, eq=False)
class PartitionTable:
    """``f_u(v) = Z_{u,v}`` for one source ``u`` and every ``v``, as sign / log grids.

    ``sign`` and ``logmag`` are indexed ``[y-1, x-1]``.
    """

    source: tuple
    sign: np.ndarray
    logmag: np.ndarray
    n_cancellations: int = 0

    def __getitem__(self, v):
        x, y = v
        s = int(self.sign[y - 1, x - 1])
        return SignedLog(s, float(self.logmag[y - 1, x - 1])) if s else SignedLog.ZERO

    @property
    def n(self):
        return self.sign.shape[0]

    def values(self):
        """Float values (may overflow to inf for large lattices)."""
        with np.errstate(over="ignore"):
            return np.where(self.sign != 0, self.sign * np.exp(self.logmag), 0.0)

    def to_csv(self, fh=None):
        """Rows ``x, y, sign, logmag`` in canonical vertex order."""
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "sign", "logmag"])
        for x, y in canonical_order(self.n):
            s = int(self.sign[y - 1, x - 1])
            w.writerow([x, y, s, repr(float(self.logmag[y - 1, x - 1])) if s else "-inf"])
        return fh.getvalue() if own else None


def _check_vertex(lat, u):
    if not lat.contains(u):
        raise StructuralError(f"vertex {u} is outside the {lat.n}x{lat.n} lattice")
    return (int(u[0]), int(u[1]))


def path_weight(path: LatticePath, lat: SquareLattice) -> SignedLog:
    """Product of the vertex weights and edge weights along ``path``."""
    sign = 1
    logmag = 0.0
    for v in path.vertices:
        _check_vertex(lat, v)
        w = lat.loop_weight(v)
        sign *= 1 if w > 0 else -1
        logmag += math.log(abs(w))
    for a, b in path.edges():
        w = lat.edge_weight(a, b)
        if w == 0.0:
            return SignedLog.ZERO
        sign *= 1 if w > 0 else -1
        logmag += math.log(abs(w))
    return SignedLog(sign, logmag)


def f_table(lat: SquareLattice, u) -> PartitionTable:
    """Single dynamic-programming sweep for ``f_u = Z_{u, .}``."""
    x, y = _check_vertex(lat, u)
    sgn, lg, nc = _kernels.partition_table(y - 1, x - 1, *_log_weights(lat))
    sgn.setflags(write=False)
    lg.setflags(write=False)
    return PartitionTable((x, y), sgn, lg, int(nc))


def partition_function(lat: SquareLattice, u, v) -> SignedLog:
    u = _check_vertex(lat, u)
    v = _check_vertex(lat, v)
    if v[0] < u[0] or v[1] < u[1]:
        return SignedLog.ZERO
    return f_table(lat, u)[v]


def f_matrix(lat: SquareLattice, scaled=False):
    """Matrix ``F[i, j] = f_{u_i}(u_j)`` in canonical vertex order; equals ``A^{-1}``.

    With ``scaled=True`` returns ``(F / exp(c), c)`` where ``c`` is the largest
    log-magnitude, which keeps the matrix finite for any ``n``.
    """
    order = canonical_order(lat.n)
    N = len(order)
    sgn = np.zeros((N, N), dtype=np.int8)
    lg = np.full((N, N), -np.inf)
    rows = np.array([y - 1 for _, y in order])
    cols = np.array([x - 1 for x, _ in order])
    for i, u in enumerate(order):
        t = f_table(lat, u)
        sgn[i] = t.sign[rows, cols]
        lg[i] = t.logmag[rows, cols]
    c = float(lg.max()) if scaled else 0.0
    with np.errstate(over="ignore"):
        F = np.where(sgn != 0, sgn * np.exp(lg - c), 0.0)
    return (F, c) if scaled else F


def _exact_weights(lat):
    to_q = lambda a: [[Fraction(float(v)) for v in row] for row in a]  # noqa: E731
    return to_q(lat.loops), to_q(lat.right), to_q(lat.up)


def _exact_f(weights, u, corner):
    """Exact ``f_u`` on the rectangle from ``u`` to ``corner`` as a dict keyed by vertex."""
    loops, right, up = weights
    ux, uy = u
    f = {}
    for y in range(uy, corner[1] + 1):
        for x in range(ux, corner[0] + 1):
            acc = Fraction(1) if (x, y) == u else Fraction(0)
            # f(v) = w_v (delta + sum_p w_{p,v} f(p)), with w = 1/A_vv and w_{p,v} = -A_pv
            if x > ux:
                acc -= right[y - 1][x - 2] * f[(x - 1, y)]
            if y > uy:
                acc -= up[y - 2][x - 1] * f[(x, y - 1)]
            f[(x, y)] = acc / loops[y - 1][x - 1]
    return f


def f_matrix_exact(lat: SquareLattice):
    """``F`` as nested lists of :class:`fractions.Fraction`, exact for the stored float weights.

    Cost grows quickly with ``n``; intended for ``n <= 8``.
    """
    n = lat.n
    order = canonical_order(n)
    weights = _exact_weights(lat)
    F = []
    for u in order:
        f = _exact_f(weights, u, (n, n))
        F.append([f.get(v, Fraction(0)) for v in order])
    return F


def inverse_residual(lat: SquareLattice, exact=False):
    """``(max|A F - I|, max|F A - I|)`` where ``F`` is the matrix of path sums.

    With ``exact=True`` the products are formed in rational arithmetic on the
    exact ``F``; otherwise ``F`` comes from the floating-point recursion.
    """
    from .lattice import square_adjacency

    A = square_adjacency(lat, dense=True).toarray()
    N = A.shape[0]
    if not exact:
        F = f_matrix(lat)
        eye = np.eye(N)
        return float(np.abs(A @ F - eye).max()), float(np.abs(F @ A - eye).max())
    F = f_matrix_exact(lat)
    Aq = [[Fraction(float(a)) if a != 0 else None for a in row] for row in A]
    nz_row = [[(j, a) for j, a in enumerate(r) if a is not None] for r in Aq]
    nz_col = [[(i, Aq[i][j]) for i in range(N) if Aq[i][j] is not None] for j in range(N)]
    left = right = Fraction(0)
    for i in range(N):
        for j in range(N):
            target = 1 if i == j else 0
            af = sum((a * F[m][j] for m, a in nz_row[i]), Fraction(0)) - target
            fa = sum((F[i][m] * a for m, a in nz_col[j]), Fraction(0)) - target
            left = max(left, abs(af))
            right = max(right, abs(fa))
    return float(left), float(right)


def _lgv_matrix(lat, spec):
    tables = {}
    k = spec.k
    sgn = np.zeros((k, k), dtype=np.int8)
    lg = np.full((k, k), -np.inf)
    for i, s in enumerate(spec.S):
        if s not in tables:
            tables[s] = f_table(lat, s)
        t = tables[s]
        for j, (x, y) in enumerate(spec.T):
            _check_vertex(lat, (x, y))
            sgn[i, j] = t.sign[y - 1, x - 1]
            lg[i, j] = t.logmag[y - 1, x - 1]
    return sgn, lg


def _det_signed_log(sgn, lg):
    """Determinant of ``sgn * exp(lg)`` after pulling out each row's largest log-magnitude.

    Returns ``(value, lost)`` where ``lost`` is ``|det|`` relative to the
    product of the scaled row sums, an upper bound on the Leibniz terms.
    """
    if not sgn.any(axis=1).all():
        return SignedLog.ZERO, 1.0
    shift = np.where(sgn != 0, lg, -np.inf).max(axis=1)
    M = np.where(sgn != 0, sgn * np.exp(lg - shift[:, None]), 0.0)
    s, ld = np.linalg.slogdet(M)
    bound = float(np.prod(np.abs(M).sum(axis=1)))
    if s == 0 or not np.isfinite(ld):
        return SignedLog.ZERO, 0.0
    return SignedLog(int(np.sign(s)), float(ld + shift.sum())), math.exp(ld) / bound


def _fraction_signed_log(q):
    if q == 0:
        return SignedLog.ZERO
    return SignedLog(1 if q > 0 else -1, math.log(abs(q.numerator)) - math.log(q.denominator))


def _exact_lgv(lat, spec):
    weights = _exact_weights(lat)
    corner = (max(x for x, _ in spec.T), max(y for _, y in spec.T))
    rows = []
    for u in spec.S:
        f = _exact_f(weights, u, corner)
        rows.append([f.get(v, Fraction(0)) for v in spec.T])
    k = spec.k
    det = Fraction(0)
    for perm in permutations(range(k)):
        term = Fraction(_perm_sign(perm))
        for i, j in enumerate(perm):
            term *= rows[i][j]
            if term == 0:
                break
        det += term
    return _fraction_signed_log(det)


def _decimal_lgv(lat, spec, prec):
    """LGV determinant with every path sum carried at ``prec`` significant digits."""
    ctx = decimal.Context(prec=prec, Emax=decimal.MAX_EMAX, Emin=decimal.MIN_EMIN)
    D = decimal.Decimal
    loops = [[D(float(v)) for v in row] for row in lat.loops]
    right = [[D(float(v)) for v in row] for row in lat.right]
    up = [[D(float(v)) for v in row] for row in lat.up]
    corner = (max(x for x, _ in spec.T), max(y for _, y in spec.T))
    rows = []
    for ux, uy in spec.S:
        f = {}
        for y in range(uy, corner[1] + 1):
            for x in range(ux, corner[0] + 1):
                acc = D(1) if (x, y) == (ux, uy) else D(0)
                if x > ux:
                    acc = ctx.subtract(acc, ctx.multiply(right[y - 1][x - 2], f[(x - 1, y)]))
                if y > uy:
                    acc = ctx.subtract(acc, ctx.multiply(up[y - 2][x - 1], f[(x, y - 1)]))
                f[(x, y)] = ctx.divide(acc, loops[y - 1][x - 1])
        rows.append([f.get(v, D(0)) for v in spec.T])
    det = D(0)
    for perm in permutations(range(spec.k)):
        term = D(_perm_sign(perm))
        for i, j in enumerate(perm):
            term = ctx.multiply(term, rows[i][j])
        det = ctx.add(det, term)
    if det == 0:
        return SignedLog.ZERO
    return SignedLog(1 if det > 0 else -1, float(ctx.ln(abs(det))))


def _refined_lgv(lat, spec, lost):
    prec = 30 + int(math.ceil(-math.log10(max(lost, 1e-300))))
    prev = _decimal_lgv(lat, spec, prec)
    while prec < DECIMAL_MAX_PREC:
        prec *= 2
        cur = _decimal_lgv(lat, spec, prec)
        same_sign = cur.sign == prev.sign
        if same_sign and (cur.sign == 0 or abs(cur.logmag - prev.logmag) <= DECIMAL_AGREE_RTOL * max(1.0, abs(cur.logmag))):
            return cur
        prev = cur
    return None


def lgv_determinant(lat: SquareLattice, spec: EndpointSpec) -> SignedLog:
    """``det(f_{S_i}(T_j))``, the signed sum over vertex-disjoint path tuples.

    The determinant is first formed in floating point.  When it cancels to
    below ``REFINE_BELOW`` of its term bound, it is recomputed in exact
    rational arithmetic (lattices up to ``EXACT_REFINE_MAX_N``, ``k`` up to
    ``EXACT_REFINE_MAX_K``).  Past those limits it is recomputed in decimal
    arithmetic with the precision doubled until two runs agree; only if that
    fails is a :class:`PrecisionWarning` emitted and the float value returned.
    """
    if spec.k > lat.n:
        raise RangeError(f"k={spec.k} exceeds the lattice side n={lat.n}")
    value, lost = _det_signed_log(*_lgv_matrix(lat, spec))
    if lost >= REFINE_BELOW:
        return value
    if lat.n <= EXACT_REFINE_MAX_N and spec.k <= EXACT_REFINE_MAX_K:
        return _exact_lgv(lat, spec)
    refined = _refined_lgv(lat, spec, lost)
    if refined is not None:
        return refined
    warnings.warn(f"LGV determinant cancelled to {lost:.3g} of its term bound", PrecisionWarning, stacklevel=2)
    return value


def nonintersecting_Z(lat: SquareLattice, k: int) -> SignedLog:
    """Non-intersecting partition function of order ``k`` between the corner sequences."""
    return lgv_determinant(lat, EndpointSpec.corner(lat.n, k))


def transfer_weights_to_edges(lat: SquareLattice) -> SquareLattice:
    """Move each vertex weight onto its incoming edges: ``w'_{u,v} = w_{u,v} w_v``, ``w'_u = 1``.

    For any ``S, T`` the partition functions satisfy ``Z = Z' * prod_{u in S} w_u``.
    """
    loops = lat.loops
    right = lat.right / loops[:, 1:]
    up = lat.up / loops[1:, :]
    return SquareLattice(lat.n, np.ones_like(loops), right, up)


# -- exhaustive oracles -------------------------------------------------------


def _refuse(n, k=1):
    if n > EXHAUSTIVE_MAX_N or k > EXHAUSTIVE_MAX_K:
        raise RefusedError(
            f"exhaustive enumeration is limited to n <= {EXHAUSTIVE_MAX_N}, k <= {EXHAUSTIVE_MAX_K}"
            f" (got n={n}, k={k})"
        )


def brute_force_Z(lat: SquareLattice, u, v) -> SignedLog:
    """``Z_{u,v}`` by summing over every path."""
    _refuse(lat.n)
    u = _check_vertex(lat, u)
    v = _check_vertex(lat, v)
    ws = [path_weight(p, lat) for p in enumerate_paths(u, v)]
    if not ws:
        return SignedLog.ZERO
    return signed_logsumexp([w.sign for w in ws], [w.logmag for w in ws], warn=False)


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def brute_force_Zk(lat: SquareLattice, spec: EndpointSpec) -> SignedLog:
    """Signed sum over permutations and vertex-disjoint path tuples ``S_i -> T_sigma(i)``."""
    _refuse(lat.n, spec.k)
    for v in spec.S + spec.T:
        _check_vertex(lat, v)
    k = spec.k
    cache = {}

    def paths(i, j):
        if (i, j) not in cache:
            cache[i, j] = [(p, path_weight(p, lat)) for p in enumerate_paths(spec.S[i], spec.T[j])]
        return cache[i, j]

    signs, logs = [], []
    for perm in permutations(range(k)):
        psign = _perm_sign(perm)

        def rec(i, used, sign, logmag):
            if i == k:
                signs.append(sign)
                logs.append(logmag)
                return
            for p, w in paths(i, perm[i]):
                if w.sign == 0 or not used.isdisjoint(p.vertex_set):
                    continue
                rec(i + 1, used | p.vertex_set, sign * w.sign, logmag + w.logmag)

        rec(0, frozenset(), psign, 0.0)
    if not signs:
        return SignedLog.ZERO
    return signed_logsumexp(signs, logs, warn=False)


def max_ZST(lat: SquareLattice, k: int):
    """Largest ``|Z^{(k)}_{S,T}|`` over all pairs of ``k``-subsets of vertices.

    Returns ``(value, spec)``; ``value`` is a nonnegative :class:`SignedLog`.
    Orderings inside ``S`` and ``T`` only change the sign, so unordered
    subsets (in canonical order) suffice.
    """
    _refuse(lat.n, k)
    if not 1 <= k <= lat.n:
        raise RangeError(f"need 1 <= k <= n, got k={k}")
    F, c = f_matrix(lat, scaled=True)
    order = canonical_order(lat.n)
    subsets = np.array(list(combinations(range(len(order)), k)))
    best, arg = -1.0, None
    for S in subsets:
        rows = F[S]  # (k, N)
        minors = rows[:, subsets]  # (k, nT, k)
        dets = np.abs(np.linalg.det(np.moveaxis(minors, 1, 0)))
        j = int(np.argmax(dets))
        if dets[j] > best:
            best, arg = float(dets[j]), (S, subsets[j])
    spec = EndpointSpec(tuple(order[i] for i in arg[0]), tuple(order[j] for j in arg[1]))
    # exact value from the signed-log determinant of the maximizer
    val = abs(lgv_determinant(lat, spec))
    if val.is_zero() and best > 0:
        val = SignedLog(1, math.log(best) + k * c)
    return val, spec
