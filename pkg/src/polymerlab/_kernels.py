"""Compiled inner loops over the n x n grid (arrays indexed [row, col] = [y-1, x-1])."""

import math

import numba as nb
import numpy as np

# relative size below which a signed sum is treated as catastrophic cancellation
CANCEL_RTOL = 1e-13
_LOG_CANCEL = math.log(CANCEL_RTOL)

@nb.njit(cache=True)
def signed_logaddexp(s1, l1, s2, l2):
    """Return ``(sign, log|.|, cancelled)`` of ``s1 e^l1 + s2 e^l2``."""
    if s1 == 0:
        return s2, l2, False
    if s2 == 0:
        return s1, l1, False
    if l1 >= l2:
        hi_s, hi_l, lo_s, lo_l = s1, l1, s2, l2
    else:
        hi_s, hi_l, lo_s, lo_l = s2, l2, s1, l1
    d = lo_l - hi_l
    if hi_s == lo_s:
        return hi_s, hi_l + math.log1p(math.exp(d)), False
    if d == 0.0:
        return 0, -np.inf, True
    out = hi_l + math.log1p(-math.exp(d))
    return hi_s, out, out - hi_l < _LOG_CANCEL


@nb.njit(cache=True)
def partition_table(r0, c0, lw_s, lw_l, re_s, re_l, ue_s, ue_l):
    """Signed-log values of ``Z_{u, v}`` for ``u = (c0+1, r0+1)`` and every ``v``.

    ``lw_*`` are sign / log|.| of the loop weights ``w_v`` (shape (n, n)),
    ``re_*`` and ``ue_*`` of the right / up edge weights ``w_{p,v}``.
    Returns ``(sign, logmag, n_cancellations)``.
    """
    n = lw_s.shape[0]
    sgn = np.zeros((n, n), dtype=np.int8)
    lg = np.full((n, n), -np.inf)
    ncancel = 0
    for r in range(r0, n):
        for c in range(c0, n):
            if r == r0 and c == c0:
                s, l = 1, 0.0
            else:
                s, l = 0, -np.inf
                if c > c0 and sgn[r, c - 1] != 0:
                    s2 = sgn[r, c - 1] * re_s[r, c - 1]
                    l2 = lg[r, c - 1] + re_l[r, c - 1]
                    s, l, bad = signed_logaddexp(s, l, s2, l2)
                    ncancel += bad
                if r > r0 and sgn[r - 1, c] != 0:
                    s2 = sgn[r - 1, c] * ue_s[r - 1, c]
                    l2 = lg[r - 1, c] + ue_l[r - 1, c]
                    s, l, bad = signed_logaddexp(s, l, s2, l2)
                    ncancel += bad
            if s != 0:
                sgn[r, c] = s * lw_s[r, c]
                lg[r, c] = l + lw_l[r, c]
    return sgn, lg, ncancel


@nb.njit(cache=True)
def _to_scaled(sgn, lg):
    """Float array ``sgn * exp(lg - max)`` together with ``max``."""
    n = sgn.shape[0]
    top = -np.inf
    for r in range(n):
        for c in range(n):
            if sgn[r, c] != 0 and lg[r, c] > top:
                top = lg[r, c]
    x = np.zeros((n, n))
    if top == -np.inf:
        return x, 0.0
    for r in range(n):
        for c in range(n):
            if sgn[r, c] != 0:
                x[r, c] = sgn[r, c] * math.exp(lg[r, c] - top)
    return x, top


@nb.njit(cache=True)
def solve_upper(ls, ll, rs, rl, us, ul, b):
    """Solve ``A x = b`` by back substitution in signed-log arithmetic.

    Coefficients come as sign/log pairs: ``A[u, u]`` (loops), ``A[u, right(u)]``
    and ``A[u, up(u)]``.  Every entry keeps its own scale, so terms that
    dominate locally survive however small they are globally.  Returns
    ``(x, logscale)`` with the true solution ``x * exp(logscale)`` and
    ``max |x| = 1``; entries below ``exp(-745)`` of the maximum underflow to 0.
    """
    n = ls.shape[0]
    xs = np.zeros((n, n), dtype=np.int8)
    xl = np.full((n, n), -np.inf)
    for r in range(n - 1, -1, -1):
        for c in range(n - 1, -1, -1):
            v = b[r, c]
            s = 0
            l = -np.inf
            if v != 0.0:
                s = 1 if v > 0 else -1
                l = math.log(abs(v))
            if c + 1 < n and xs[r, c + 1] != 0 and rs[r, c] != 0:
                s, l, _ = signed_logaddexp(s, l, -rs[r, c] * xs[r, c + 1], rl[r, c] + xl[r, c + 1])
            if r + 1 < n and xs[r + 1, c] != 0 and us[r, c] != 0:
                s, l, _ = signed_logaddexp(s, l, -us[r, c] * xs[r + 1, c], ul[r, c] + xl[r + 1, c])
            if s != 0:
                xs[r, c] = s * ls[r, c]
                xl[r, c] = l - ll[r, c]
    return _to_scaled(xs, xl)


@nb.njit(cache=True)
def solve_upper_transposed(ls, ll, rs, rl, us, ul, b):
    """Solve ``A^T y = b`` by forward substitution; same conventions as :func:`solve_upper`."""
    n = ls.shape[0]
    ys = np.zeros((n, n), dtype=np.int8)
    yl = np.full((n, n), -np.inf)
    for r in range(n):
        for c in range(n):
            v = b[r, c]
            s = 0
            l = -np.inf
            if v != 0.0:
                s = 1 if v > 0 else -1
                l = math.log(abs(v))
            if c > 0 and ys[r, c - 1] != 0 and rs[r, c - 1] != 0:
                s, l, _ = signed_logaddexp(s, l, -rs[r, c - 1] * ys[r, c - 1], rl[r, c - 1] + yl[r, c - 1])
            if r > 0 and ys[r - 1, c] != 0 and us[r - 1, c] != 0:
                s, l, _ = signed_logaddexp(s, l, -us[r - 1, c] * ys[r - 1, c], ul[r - 1, c] + yl[r - 1, c])
            if s != 0:
                ys[r, c] = s * ls[r, c]
                yl[r, c] = l - ll[r, c]
    return _to_scaled(ys, yl)
