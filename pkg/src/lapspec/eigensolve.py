"""Dense symmetric eigensolver.

Pipeline: Householder reduction to tridiagonal form, then either implicit QL
with Wilkinson shifts (full spectrum) or Sturm-sequence bisection (top-k and
eigenvalue counts). All kernels are written here and compiled with numba.

The reduction is the only O(n^3) stage. ``backend="lapack"`` swaps just that
stage for LAPACK's blocked ``dsytrd``; the tridiagonal stages always run the
kernels below.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import InvalidArgumentError, SolverFailure

__all__ = [
    "Tridiagonal",
    "Spectrum",
    "tridiagonalize",
    "eigenvalues",
    "top_k_eigenvalues",
    "count_above",
    "tridiagonal_eigenvalues",
    "sturm_count",
    "MAX_SWEEPS",
]

MAX_SWEEPS = 50
_EPS = np.finfo(float).eps
_BACKENDS = ("native", "lapack")


@dataclass(frozen=True)
class Tridiagonal:
    diag: np.ndarray
    offdiag: np.ndarray
    accumulatedQ: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending, ``values[0]`` the largest.

    ``vectors[:, j]`` (when present) pairs with ``values[j]``.
    """

    values: np.ndarray
    vectors: Optional[np.ndarray] = None

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


# -- kernels ---------------------------------------------------------------

@njit(cache=True)
def _householder_tridiag(a, want_q):
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    q = np.eye(n) if want_q else np.empty((0, 0))
    v = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        x0 = a[k + 1, k]
        tail = 0.0
        for i in range(k + 2, n):
            tail += a[i, k] * a[i, k]
        if tail == 0.0:
            e[k] = x0
            continue
        norm = np.sqrt(x0 * x0 + tail)
        beta = -norm if x0 >= 0.0 else norm
        tau = (beta - x0) / beta
        scale = 1.0 / (x0 - beta)
        m = n - k - 1
        v[0] = 1.0
        for i in range(1, m):
            v[i] = a[k + 1 + i, k] * scale
        e[k] = beta
        # p = tau * A22 v
        for i in range(m):
            s = 0.0
            for j in range(m):
                s += a[k + 1 + i, k + 1 + j] * v[j]
            p[i] = tau * s
        pv = 0.0
        for i in range(m):
            pv += p[i] * v[i]
        alpha = -0.5 * tau * pv
        for i in range(m):
            p[i] += alpha * v[i]
        # A22 -= v w^T + w v^T, with w stored in p
        for i in range(m):
            vi = v[i]
            wi = p[i]
            for j in range(m):
                a[k + 1 + i, k + 1 + j] -= vi * p[j] + wi * v[j]
        if want_q:
            # Q <- Q (I - tau v v^T) on columns k+1..n-1
            for r in range(n):
                s = 0.0
                for j in range(m):
                    s += q[r, k + 1 + j] * v[j]
                s *= tau
                for j in range(m):
                    q[r, k + 1 + j] -= s * v[j]
    for i in range(n):
        d[i] = a[i, i]
    if n >= 2:
        e[n - 2] = a[n - 1, n - 2]
    return d, e, q


@njit(cache=True)
def _tql_implicit(d, e_in, z, want_z, max_sweeps):
    """Implicit QL with Wilkinson shifts; ``d`` and ``z`` are overwritten.

    Returns -1 on success, otherwise the index of the unconverged eigenvalue.
    """
    n = d.size
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = e_in[i]
    eps = np.finfo(np.float64).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            deflated = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_z:
                    for kk in range(z.shape[0]):
                        f = z[kk, i + 1]
                        z[kk, i + 1] = s * z[kk, i] + c * f
                        z[kk, i] = c * z[kk, i] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


@njit(cache=True)
def _sturm_count(d, e2, x, pivmin):
    """Number of eigenvalues strictly below ``x``."""
    n = d.size
    count = 0
    q = d[0] - x
    if abs(q) <= pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) <= pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _gershgorin(d, e):
    n = d.size
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        r = 0.0
        if i > 0:
            r += abs(e[i - 1])
        if i < n - 1:
            r += abs(e[i])
        lo = min(lo, d[i] - r)
        hi = max(hi, d[i] + r)
    return lo, hi


@njit(cache=True)
def _pivmin(d, e2):
    big = 1.0
    for i in range(d.size):
        big = max(big, d[i] * d[i])
    for i in range(e2.size):
        big = max(big, e2[i])
    return np.finfo(np.float64).tiny * big


@njit(cache=True)
def _bisect_top_k(d, e, k):
    n = d.size
    e2 = e * e
    pivmin = _pivmin(d, e2)
    lo0, hi0 = _gershgorin(d, e)
    span = max(hi0 - lo0, 1.0)
    lo0 -= 2.0 * np.finfo(np.float64).eps * span + pivmin
    hi0 += 2.0 * np.finfo(np.float64).eps * span + pivmin
    out = np.empty(k)
    eps = np.finfo(np.float64).eps
    upper = hi0
    for j in range(k):
        idx = n - 1 - j  # ascending index of the (j+1)-th largest
        lo = lo0
        hi = upper
        for _ in range(200):
            if hi - lo <= 2.0 * eps * max(abs(lo), abs(hi)) + pivmin:
                break
            mid = 0.5 * (lo + hi)
            if _sturm_count(d, e2, mid, pivmin) > idx:
                hi = mid
            else:
                lo = mid
        out[j] = 0.5 * (lo + hi)
        upper = hi
    return out


# -- public API ------------------------------------------------------------

def _as_square(S) -> np.ndarray:
    a = np.asarray(S, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidArgumentError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def tridiagonalize(S, want_q: bool = False, backend: str = "native") -> Tridiagonal:
    """Householder similarity reduction ``S = Q T Q^T``."""
    if backend not in _BACKENDS:
        raise InvalidArgumentError(f"unknown backend {backend!r}")
    a = _as_square(S)
    n = a.shape[0]
    if backend == "lapack" and n > 2:
        from scipy.linalg import lapack

        lwork = int(lapack.dsytrd_lwork(n, lower=1)[0])
        c, d, e, tau, info = lapack.dsytrd(a, lower=1, lwork=lwork)
        if info != 0:
            raise SolverFailure(f"dsytrd failed with info={info}", -1)
        q = None
        if want_q:
            # Q = H(0) H(1) ... H(n-2), reflector i stored below the subdiagonal
            q = np.eye(n)
            for i in range(n - 2):
                v = np.zeros(n - i - 1)
                v[0] = 1.0
                v[1:] = c[i + 2:, i]
                blk = q[:, i + 1:]
                blk -= tau[i] * np.outer(blk @ v, v)
        return Tridiagonal(np.ascontiguousarray(d), np.ascontiguousarray(e), q)
    d, e, q = _householder_tridiag(np.array(a, order="C"), want_q)
    return Tridiagonal(d, e, q if want_q else None)


def tridiagonal_eigenvalues(t: Tridiagonal, want_vectors: bool = False) -> Spectrum:
    d = t.diag.copy()
    if want_vectors:
        z = np.array(t.accumulatedQ if t.accumulatedQ is not None else np.eye(t.n), order="C")
    else:
        z = np.empty((0, 0))
    status = _tql_implicit(d, t.offdiag, z, want_vectors, MAX_SWEEPS)
    if status >= 0:
        raise SolverFailure(
            f"QL iteration did not converge for eigenvalue {status} after {MAX_SWEEPS} sweeps",
            int(status),
        )
    order = np.argsort(-d, kind="stable")
    return Spectrum(d[order], z[:, order] if want_vectors else None)


def eigenvalues(S, want_vectors: bool = False, backend: str = "native") -> Spectrum:
    """All eigenvalues of a symmetric matrix, descending."""
    t = tridiagonalize(S, want_q=want_vectors, backend=backend)
    return tridiagonal_eigenvalues(t, want_vectors)


def top_k_eigenvalues(S, k: int, backend: str = "native") -> Spectrum:
    """The ``k`` largest eigenvalues, descending, by Sturm bisection."""
    a = _as_square(S)
    n = a.shape[0]
    if int(k) != k or not 1 <= k <= n:
        raise InvalidArgumentError(f"k must satisfy 1 <= k <= {n}, got {k}")
    t = tridiagonalize(a, backend=backend)
    if n == 1:
        return Spectrum(t.diag.copy())
    return Spectrum(_bisect_top_k(t.diag, t.offdiag, int(k)))


def sturm_count(t: Tridiagonal, x: float) -> int:
    """Number of eigenvalues of ``t`` strictly below ``x``."""
    e2 = t.offdiag * t.offdiag
    return int(_sturm_count(t.diag, e2, float(x), _pivmin(t.diag, e2)))


def count_above(S, thresholds, backend: str = "native") -> np.ndarray:
    """Number of eigenvalues ``>= x`` for each threshold ``x``."""
    t = S if isinstance(S, Tridiagonal) else tridiagonalize(S, backend=backend)
    xs = np.atleast_1d(np.asarray(thresholds, dtype=float))
    return np.array([t.n - sturm_count(t, x) for x in xs], dtype=int)
