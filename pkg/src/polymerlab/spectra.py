"""Spectra of the hexagonal adjacency matrix and singular values of its square dual.

For a bipartite matrix ``H = [[0, B], [B^T, 0]]`` the eigenvalues are
``+-sigma_i(B)``, so the smallest positive eigenvalue of ``H`` is
``sigma_min(B) = 1 / sigma_1(B^{-1})``.  Near the corner of the spectrum the
values are astronomically small (``exp(-c n)``), so for large lattices the
package works with ``log sigma_i(A^{-1})`` obtained by subspace iteration
with rescaled triangular solves.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import DegenerateInstanceError, RangeError, StructuralError
from .lattice import AdjacencyMatrix, SquareLattice

__all__ = [
    "SpectralSummary",
    "eigenvalues_hex",
    "singular_values_square",
    "inverse_singular_values",
    "smallest_positive_eigenvalue",
    "bottom_k_log_product",
    "log_top_inverse_singular_values",
    "log_top_inverse_singular_values_dense",
    "spectral_summary",
    "POSITIVE_RTOL",
    "DEGENERATE_SIGMA",
]

POSITIVE_RTOL = 1e-12
DEGENERATE_SIGMA = 1e-300

# log of double-precision epsilon: relative noise floor of sigma_i / sigma_1
LOG_EPS = math.log(np.finfo(float).eps)

# lattices up to this side use the dense oracle in spectral_summary
DENSE_SUMMARY_MAX_N = 24


def _as_matrix(A):
    if isinstance(A, AdjacencyMatrix):
        return A.matrix
    return A


def _is_symmetric(M):
    if sp.issparse(M):
        d = abs(M - M.T)
        return d.nnz == 0 or d.max() == 0
    return np.array_equal(M, M.T)


def eigenvalues_hex(A, k=None, dense=None):
    """Eigenvalues of a symmetric matrix, sorted descending.

    Parameters
    ----------
    A : AdjacencyMatrix or array or sparse matrix
    k : int, optional
        Number of eigenvalues closest to zero for the iterative path.
        Defaults to 6.
    dense : bool, optional
        Force the dense (full spectrum) or iterative (shift-invert at 0)
        path.  By default the dense path is used up to dimension
        ``2 * 4096``.
    """
    M = _as_matrix(A)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {M.shape}")
    if not _is_symmetric(M):
        raise StructuralError("eigenvalues_hex needs a symmetric matrix")
    N = M.shape[0]
    if dense is None:
        dense = N <= 2 * 4096
    if dense:
        arr = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
        return np.sort(sla.eigvalsh(arr))[::-1]
    k = 6 if k is None else int(k)
    if not 1 <= k < N:
        raise RangeError(f"need 1 <= k < {N} for the iterative path")
    vals = spla.eigsh(sp.csc_matrix(M), k=k, sigma=0.0, which="LM", return_eigenvectors=False)
    return np.sort(vals)[::-1]


def singular_values_square(Atil):
    """All singular values of a square matrix, sorted descending."""
    M = _as_matrix(Atil)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {M.shape}")
    arr = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
    s = np.sort(sla.svdvals(arr))[::-1]
    if s[-1] < DEGENERATE_SIGMA:
        raise DegenerateInstanceError(f"smallest singular value {s[-1]:.3g} is below {DEGENERATE_SIGMA}")
    return s


def inverse_singular_values(svals):
    """``sigma_i(A^{-1}) = 1 / sigma_{N+1-i}(A)``, sorted descending."""
    s = np.asarray(svals, dtype=float)
    return 1.0 / np.sort(s)


def _positive_part(spectrum, norm=None, tol=None):
    spec = np.asarray(spectrum, dtype=float)
    if spec.size == 0:
        raise DegenerateInstanceError("empty spectrum")
    if tol is None:
        norm = float(np.abs(spec).max()) if norm is None else float(norm)
        tol = POSITIVE_RTOL * norm
    return np.sort(spec[spec > tol])


def smallest_positive_eigenvalue(spectrum, norm=None, tol=None):
    """``min{lam : lam > tol}`` with ``tol = 1e-12 * ||A||``.

    ``norm`` defaults to the largest absolute value in ``spectrum``.
    """
    pos = _positive_part(spectrum, norm, tol)
    if pos.size == 0:
        raise DegenerateInstanceError("no positive eigenvalue above the tolerance")
    return float(pos[0])


def bottom_k_log_product(spectrum, k, norm=None, tol=None):
    """Sum of the logarithms of the ``k`` smallest positive eigenvalues."""
    pos = _positive_part(spectrum, norm, tol)
    if k < 1 or pos.size < k:
        raise RangeError(f"need {k} positive eigenvalues, found {pos.size}")
    return float(np.sum(np.log(pos[:k])))


# -- large lattices: top singular values of A^{-1} ---------------------------


def _solve_columns(lat, X, transpose):
    """Apply ``A^{-1}`` (or ``A^{-T}``) to each column; returns ``(Y, logscale per column)``."""
    n = lat.n
    solve = _kernels.solve_upper_transposed if transpose else _kernels.solve_upper
    coeffs = []
    for a in (lat.loops, lat.right, lat.up):
        with np.errstate(divide="ignore"):
            coeffs += [np.sign(a).astype(np.int8), np.log(np.abs(a))]
    Y = np.empty_like(X)
    logs = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        y, l = solve(*coeffs, np.ascontiguousarray(X[:, j]).reshape(n, n))
        Y[:, j] = y.ravel()
        logs[j] = l
    return Y, logs


def log_top_inverse_singular_values(
    lat: SquareLattice, k=1, oversample=4, tol=1e-13, maxiter=500, seed=0, return_info=False
):
    """``log sigma_i(A^{-1})`` for ``i = 1..k``, descending, without forming any matrix.

    Subspace iteration that alternates ``A^{-T}`` and ``A^{-1}`` (two
    triangular solves per column, carried out in signed-log arithmetic) with a QR
    factorization after each half step.  Column scalings do not change the
    QR basis, so each column keeps its own log-scale, and the singular
    values are read from the diagonal of the triangular factor.

    Values with ``sigma_i / sigma_1`` below machine epsilon sit at the
    floating-point noise floor; ``return_info=True`` adds a dict with
    ``converged``, ``iterations`` and a boolean ``resolved`` array.
    """
    N = lat.n * lat.n
    if k < 1:
        raise RangeError("k must be positive")
    if k > N:
        raise RangeError(f"k={k} exceeds the matrix size {N}")
    b = min(N, k + oversample)
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((N, b)))
    prev = None
    est = None
    converged = False
    it = 0
    for it in range(1, maxiter + 1):
        Y, _ = _solve_columns(lat, Q, transpose=True)
        Qy, _ = np.linalg.qr(Y)
        Z, lz = _solve_columns(lat, Qy, transpose=False)
        Q, R = np.linalg.qr(Z)
        d = np.abs(np.diag(R))
        if np.any(d == 0.0):
            raise DegenerateInstanceError("subspace iteration produced a zero direction")
        est = np.sort(np.log(d) + lz)[::-1][:k]
        if prev is not None and np.all(np.abs(est - prev) <= tol * np.maximum(1.0, np.abs(est))):
            converged = True
            break
        prev = est
    if not return_info:
        return est
    resolved = est >= est[0] + LOG_EPS
    return est, {"converged": converged, "iterations": it, "resolved": resolved}


def log_top_inverse_singular_values_dense(lat: SquareLattice, k=None):
    """Dense oracle: singular values of ``A^{-1}`` built from the path-sum tables."""
    from .polymer import f_matrix

    F, c = f_matrix(lat, scaled=True)
    s = sla.svdvals(F)
    s = np.sort(s)[::-1]
    if k is not None:
        if k > s.size:
            raise RangeError(f"k={k} exceeds the matrix size {s.size}")
        s = s[:k]
    with np.errstate(divide="ignore"):
        return c + np.log(s)


@dataclass
class SpectralSummary:
    """Spectral data of one instance.

    ``log_inverse_singular_values`` holds ``log sigma_i(A^{-1})`` for the
    top indices, which remain finite when ``lambda_min_pos`` underflows.
    """

    n: int
    eigenvalues: list = field(default_factory=list)
    singular_values: list = field(default_factory=list)
    log_inverse_singular_values: list = field(default_factory=list)
    bottom_k_log_products: dict = field(default_factory=dict)

    @property
    def log_lambda_min_pos(self):
        return -float(self.log_inverse_singular_values[0])

    @property
    def lambda_min_pos(self):
        """May underflow to 0.0 for large ``n``; prefer :attr:`log_lambda_min_pos`."""
        return math.exp(self.log_lambda_min_pos)

    def to_dict(self):
        return {
            "n": self.n,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "singular_values": [float(v) for v in self.singular_values],
            "log_inverse_singular_values": [float(v) for v in self.log_inverse_singular_values],
            "lambda_min_pos": self.lambda_min_pos,
            "log_lambda_min_pos": self.log_lambda_min_pos,
            "bottom_k_log_products": {str(k): float(v) for k, v in self.bottom_k_log_products.items()},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        return cls(
            n=int(d["n"]),
            eigenvalues=list(d.get("eigenvalues", [])),
            singular_values=list(d.get("singular_values", [])),
            log_inverse_singular_values=list(d["log_inverse_singular_values"]),
            bottom_k_log_products={int(k): float(v) for k, v in d.get("bottom_k_log_products", {}).items()},
        )

    def spectrum_csv(self, which="eigenvalues"):
        """``index,value`` rows for one of the stored lists."""
        fh = io.StringIO()
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "value"])
        for i, v in enumerate(getattr(self, which), start=1):
            w.writerow([i, repr(float(v))])
        return fh.getvalue()


def spectral_summary(lat: SquareLattice, k_max=1, dense=None):
    """Collect eigenvalues, singular values and bottom-k log products for ``lat``.

    The dense path (small ``n``) also stores the full hexagonal spectrum and the
    singular values of the square dual; the iterative path stores only the
    top ``k_max`` values of ``log sigma_i(A^{-1})``.
    """
    from .lattice import build_hex_from_square, hex_adjacency, square_adjacency

    if dense is None:
        dense = lat.n <= DENSE_SUMMARY_MAX_N
    out = SpectralSummary(n=lat.n)
    if dense:
        out.eigenvalues = eigenvalues_hex(hex_adjacency(build_hex_from_square(lat), dense=True)).tolist()
        s = sla.svdvals(square_adjacency(lat, dense=True).toarray())
        out.singular_values = np.sort(s)[::-1].tolist()
        logs = log_top_inverse_singular_values_dense(lat, k_max)
    else:
        logs = log_top_inverse_singular_values(lat, k_max)
    out.log_inverse_singular_values = [float(v) for v in logs]
    out.bottom_k_log_products = {k: -float(np.sum(logs[:k])) for k in range(1, k_max + 1)}
    return out
