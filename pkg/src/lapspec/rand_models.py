"""Random matrix models: GOE, Laplacians, the surrogate ``D - A`` and the
reduction-chain matrices that connect them.

Every sampler is a pure function of ``(n, seed)``. Seeds are :class:`SeedPath`
values, which map onto independent counter-based (Philox) streams through
numpy's ``SeedSequence`` spawn keys, so a trial's draw never depends on the
order in which trials are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import InvalidDimensionError

__all__ = [
    "SeedPath",
    "SymmetricMatrix",
    "DiagonalVector",
    "OrthogonalReducer",
    "ReductionSample",
    "as_seed",
    "sample_goe",
    "laplacian_of",
    "sample_surrogate",
    "build_reducer",
    "sample_reduced_model",
    "sample_reduction_chain",
    "sigma_and_sqrt",
    "max_diagonal",
]

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedPath:
    """Position in the seed tree: a master seed plus a lane of indices."""

    master: int
    lane: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master) <= _U64:
            raise ValueError(f"master seed must fit in 64 bits, got {self.master}")
        lane = tuple(int(i) for i in self.lane)
        if any(i < 0 or i > _U64 for i in lane):
            raise ValueError(f"lane indices must fit in 64 bits, got {lane}")
        object.__setattr__(self, "master", int(self.master))
        object.__setattr__(self, "lane", lane)

    def child(self, *index: int) -> "SeedPath":
        return SeedPath(self.master, self.lane + tuple(index))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master, spawn_key=self.lane)
        return np.random.Generator(np.random.Philox(ss))


SeedLike = Union[SeedPath, int]


def as_seed(seed: SeedLike) -> SeedPath:
    if isinstance(seed, SeedPath):
        return seed
    return SeedPath(int(seed))


class SymmetricMatrix:
    """Dense real symmetric matrix.

    Built from the lower triangle only, so ``entry(i, j) == entry(j, i)``
    holds bit-for-bit. The backing array is read-only; ``np.asarray`` gives
    a view of it.
    """

    __slots__ = ("_a",)

    def __init__(self, array, *, check: bool = True):
        a = np.array(array, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidDimensionError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise InvalidDimensionError("dimension must be >= 1")
        if check and not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        lower = np.tril(a)
        a = lower + np.tril(a, -1).T
        a.setflags(write=False)
        self._a = a

    @classmethod
    def from_lower(cls, packed: Sequence[float], n: int) -> "SymmetricMatrix":
        """Build from row-major packed lower-triangle storage."""
        packed = np.asarray(packed, dtype=float)
        if packed.shape != (n * (n + 1) // 2,):
            raise InvalidDimensionError(f"packed length {packed.size} does not match n={n}")
        a = np.zeros((n, n))
        a[np.tril_indices(n)] = packed
        return cls(a)

    @classmethod
    def _trusted(cls, a: np.ndarray) -> "SymmetricMatrix":
        # Caller guarantees exact symmetry; skips the copy and re-symmetrization.
        obj = cls.__new__(cls)
        a = np.ascontiguousarray(a, dtype=float)
        a.setflags(write=False)
        obj._a = a
        return obj

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._a

    def entry(self, i: int, j: int) -> float:
        return float(self._a[i, j])

    def lower(self) -> np.ndarray:
        return self._a[np.tril_indices(self.dim)]

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self._a).copy()

    def trace(self) -> float:
        return float(np.trace(self._a))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._a
        return self._a.astype(dtype)

    def __add__(self, other):
        if isinstance(other, SymmetricMatrix):
            return SymmetricMatrix._trusted(self._a + other._a)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SymmetricMatrix):
            return SymmetricMatrix._trusted(self._a - other._a)
        return NotImplemented

    def __repr__(self):
        return f"SymmetricMatrix(dim={self.dim})"


@dataclass(frozen=True)
class DiagonalVector:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True).ravel()
        if v.size < 1:
            raise InvalidDimensionError("diagonal must have at least one entry")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size

    def as_matrix(self) -> SymmetricMatrix:
        return SymmetricMatrix._trusted(np.diag(self.values))

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True)
class OrthogonalReducer:
    """Orthogonal ``n x n`` matrix whose last column is ``e = 1/sqrt(n) * ones``.

    Realized as the Householder reflection ``H = I - 2 u u^T / |u|^2`` with
    ``u = e_n - e``. ``H`` maps ``e_n`` to ``e``, so ``e`` is already its last
    column, and ``H`` is symmetric, which lets conjugations ``H M H`` run in
    O(n^2) without forming products of dense matrices.
    """

    dim: int
    matrix: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    beta: float = field(repr=False)

    @property
    def R(self) -> np.ndarray:
        """First ``n - 1`` columns."""
        return self.matrix[:, :-1]

    @property
    def e(self) -> np.ndarray:
        return self.matrix[:, -1]

    def conjugate(self, m) -> np.ndarray:
        """``R~^T M R~`` for symmetric ``M`` (given as a matrix or a 1-d diagonal)."""
        u, beta = self.u, self.beta
        m = np.asarray(m, dtype=float)
        if m.ndim == 1:
            mu = m * u
            out = np.diag(m)
        else:
            mu = m @ u
            out = m.copy()
        c = float(u @ mu)
        out -= beta * (np.outer(u, mu) + np.outer(mu, u))
        out += (beta * beta * c) * np.outer(u, u)
        # symmetrize away rounding in the two outer products
        return 0.5 * (out + out.T)

    def reduce(self, m) -> np.ndarray:
        """``R^T M R``: the conjugation with the ``e`` row and column dropped."""
        return self.conjugate(m)[:-1, :-1]


def _check_dim(n: int, minimum: int = 1) -> int:
    if int(n) != n or n < minimum:
        raise InvalidDimensionError(f"dimension must be an integer >= {minimum}, got {n}")
    return int(n)


def _goe_array(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n))
    # (G + G^T)/sqrt(2n): off-diagonal variance 1/n, diagonal 2/n, exactly symmetric
    return (g + g.T) / np.sqrt(2.0 * n)


def sample_goe(n: int, seed: SeedLike) -> SymmetricMatrix:
    """GOE matrix with entry variances ``(1 + delta_ij) / n``."""
    n = _check_dim(n)
    return SymmetricMatrix._trusted(_goe_array(n, as_seed(seed).generator()))


def laplacian_of(A) -> SymmetricMatrix:
    """``D_A - A`` where ``D_A`` holds the row sums of ``A``."""
    a = np.asarray(A, dtype=float)
    out = -a
    out[np.diag_indices_from(out)] += a.sum(axis=1)
    return SymmetricMatrix._trusted(out)


def sample_surrogate(n: int, seed: SeedLike):
    """Draw ``(D, A, L)`` with ``D`` iid N(0,1) diagonal, ``A`` GOE, ``L = D - A``.

    ``D`` comes from lane ``seed/0`` and ``A`` from ``seed/1``.
    """
    n = _check_dim(n)
    seed = as_seed(seed)
    d = seed.child(0).generator().standard_normal(n)
    a = _goe_array(n, seed.child(1).generator())
    l = -a
    l[np.diag_indices(n)] += d
    return DiagonalVector(d), SymmetricMatrix._trusted(a), SymmetricMatrix._trusted(l)


def build_reducer(n: int) -> OrthogonalReducer:
    n = _check_dim(n, 2)
    e = np.full(n, 1.0 / np.sqrt(n))
    u = -e.copy()
    u[-1] += 1.0
    beta = 2.0 / float(u @ u)
    h = np.eye(n) - beta * np.outer(u, u)
    # H e_n = e analytically; pin the rounding of the last row/column
    h[:, -1] = e
    h[-1, :] = e
    h.setflags(write=False)
    return OrthogonalReducer(n, h, u, beta)


@dataclass(frozen=True)
class ReductionSample:
    """Coupled draw of every matrix in the Laplacian -> surrogate reduction.

    Independent pieces: ``A_prime`` ((n-1)-GOE), ``D_tilde`` (iid N(0, n/(n-1))),
    ``g`` (N(0, 1/(n-1))), ``Y`` (iid N(0, 1/(n-1))), ``g_prime`` (N(0, 2/(n-1))).
    """

    n: int
    A_prime: np.ndarray = field(repr=False)
    D_tilde: np.ndarray = field(repr=False)
    g: float
    Y: np.ndarray = field(repr=False)
    g_prime: float
    reducer: OrthogonalReducer = field(repr=False)

    def _rdr(self, diag) -> np.ndarray:
        return self.reducer.reduce(diag)

    @property
    def W_prime(self) -> np.ndarray:
        """``A' + R^T D~ R + g I``."""
        w = self.A_prime + self._rdr(self.D_tilde)
        w[np.diag_indices_from(w)] += self.g
        return w

    @property
    def W(self) -> np.ndarray:
        """``A' + sqrt((n-1)/n) R^T D~ R``."""
        return self.A_prime + np.sqrt((self.n - 1) / self.n) * self._rdr(self.D_tilde)

    @property
    def D(self) -> np.ndarray:
        return np.sqrt((self.n - 1) / self.n) * self.D_tilde

    @property
    def A(self) -> np.ndarray:
        """``sqrt((n-1)/n) [[A', Y], [Y^T, g']]``, an n-GOE."""
        n = self.n
        a = np.empty((n, n))
        a[:-1, :-1] = self.A_prime
        a[:-1, -1] = self.Y
        a[-1, :-1] = self.Y
        a[-1, -1] = self.g_prime
        return np.sqrt((n - 1) / n) * a

    @property
    def truncated(self) -> np.ndarray:
        """``R^T D R + A'``."""
        return self._rdr(self.D) + self.A_prime

    @property
    def augmented(self) -> np.ndarray:
        """``R~^T D R~ + A``."""
        return self.reducer.conjugate(self.D) + self.A


def sample_reduction_chain(n: int, seed: SeedLike) -> ReductionSample:
    n = _check_dim(n, 2)
    seed = as_seed(seed)
    m = n - 1
    a_prime = _goe_array(m, seed.child(0).generator())
    rng = seed.child(1).generator()
    d_tilde = rng.standard_normal(n) * np.sqrt(n / m)
    g = float(rng.standard_normal()) / np.sqrt(m)
    y = rng.standard_normal(m) / np.sqrt(m)
    g_prime = float(rng.standard_normal()) * np.sqrt(2.0 / m)
    return ReductionSample(n, a_prime, d_tilde, g, y, g_prime, build_reducer(n))


def sample_reduced_model(n: int, seed: SeedLike) -> SymmetricMatrix:
    """``W' = A' + R^T D~ R + g I`` of dimension ``n - 1``."""
    w = sample_reduction_chain(n, seed).W_prime
    return SymmetricMatrix._trusted(0.5 * (w + w.T))


def sigma_and_sqrt(n: int):
    """Covariance of the Laplacian diagonal under GOE input, and its square root.

    ``Sigma = (n-2)/n I + (1/n) 1 1^T``; the root uses the closed-form entries.
    """
    n = _check_dim(n, 2)
    sigma = np.full((n, n), 1.0 / n)
    np.fill_diagonal(sigma, (n - 1) / n)
    lo = np.sqrt((n - 2) / n)
    hi = np.sqrt((2 * n - 2) / n)
    off = (hi - lo) / n
    root = np.full((n, n), off)
    np.fill_diagonal(root, lo + off)
    return SymmetricMatrix._trusted(sigma), SymmetricMatrix._trusted(root)


def max_diagonal(L) -> float:
    return float(np.max(np.diagonal(np.asarray(L))))
