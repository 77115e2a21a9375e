"""Resolvent diagnostics near the spectral edge.

The production path never forms a resolvent: ``m_n`` is an eigenvalue sum and
``s_n`` a sum over the diagonal. Expectations over the GOE part are replaced
by sample means over independent redraws with the diagonal held fixed, and
the functional is evaluated on a redraw left out of that mean.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .eigensolve import Spectrum, eigenvalues
from .errors import DomainError, InvalidArgumentError
from .rand_models import DiagonalVector, SeedLike, _goe_array, as_seed

__all__ = [
    "SpectralDomain",
    "LocalLawDiagnostic",
    "empirical_m",
    "empirical_s",
    "build_domain",
    "sample_spectra",
    "diagnostic_from_spectra",
    "locallaw_diagnostic",
    "concentration_diagnostic",
    "count_large_diagonal",
    "eigenvalue_spacings",
    "KINDS",
]

KINDS = ("S", "S-tilde", "S-hat")
FUNCTIONALS = ("locallaw", "concentration")


def _values(x) -> np.ndarray:
    if isinstance(x, Spectrum):
        return x.values
    if isinstance(x, DiagonalVector):
        return x.values
    return np.asarray(x, dtype=float).ravel()


def _check_upper(z) -> np.ndarray:
    zz = np.asarray(z, dtype=complex)
    if np.any(~(zz.imag > 0)):
        raise DomainError("Stieltjes transforms need Im z > 0")
    return zz


def _stieltjes_sum(points: np.ndarray, z):
    zz = _check_upper(z)
    out = np.mean(1.0 / (points[:, None] - zz.ravel()[None, :]), axis=0).reshape(zz.shape)
    return complex(out) if out.ndim == 0 else out


def empirical_m(spectrum, z):
    """``(1/n) sum_j 1/(lambda_j - z)``; vectorised over ``z``."""
    return _stieltjes_sum(_values(spectrum), z)


def empirical_s(D, z):
    """``(1/n) sum_i 1/(D_ii - z)``; vectorised over ``z``."""
    return _stieltjes_sum(_values(D), z)


@dataclass(frozen=True)
class SpectralDomain:
    delta: float
    n: int
    kind: str
    gridE: np.ndarray
    gridEta: np.ndarray

    @property
    def points(self) -> np.ndarray:
        """All grid points ``E + i eta``, E varying fastest."""
        return (self.gridE[None, :] + 1j * self.gridEta[:, None]).ravel()

    @property
    def size(self) -> int:
        return self.gridE.size * self.gridEta.size


def build_domain(delta: float, n: int, kind: str = "S-tilde", grid_size: int = 64,
                 eta_count: int = 4) -> SpectralDomain:
    """Uniform grid on ``sqrt((2-delta) log n) <= E <= sqrt(3 log n)``.

    ``S-tilde`` uses ``eta = n^(-1/4)``, ``S-hat`` uses ``sqrt(2) n^(-1/4)`` and
    ``S`` takes ``eta_count`` geometric levels between ``n^(-1/4)`` and 1.
    """
    if not 0 < delta < 0.5:
        raise InvalidArgumentError(f"delta must lie in (0, 1/2), got {delta}")
    if not n >= 3:
        raise InvalidArgumentError(f"n must be at least 3, got {n}")
    if kind not in KINDS:
        raise InvalidArgumentError(f"kind must be one of {KINDS}, got {kind!r}")
    if grid_size < 2:
        raise InvalidArgumentError("grid_size must be at least 2")
    ln = math.log(n)
    lo, hi = math.sqrt((2.0 - delta) * ln), math.sqrt(3.0 * ln)
    grid_e = np.linspace(lo, hi, int(grid_size))
    grid_e[0], grid_e[-1] = lo, hi
    eta0 = n ** -0.25
    if kind == "S-tilde":
        grid_eta = np.array([eta0])
    elif kind == "S-hat":
        grid_eta = np.array([math.sqrt(2.0) * eta0])
    else:
        grid_eta = np.geomspace(eta0, 1.0, max(int(eta_count), 2))
    return SpectralDomain(float(delta), int(n), kind, grid_e, grid_eta)


@dataclass
class LocalLawDiagnostic:
    """Grid supremum of ``n eta |...|`` for one diagonal and a batch of redraws.

    ``supValue`` evaluates the last redraw against the mean of the others;
    ``loo_median`` is the median of that supremum over every leave-one-out
    choice of held-out redraw, which is far less noisy. ``values`` keeps the
    per-point held-out functional for the last redraw.
    """

    n: int
    delta: float
    supValue: float
    resamples: int
    gridSize: int
    functional: str = "locallaw"
    kind: str = "S-tilde"
    loo_median: float = math.nan
    values: np.ndarray = field(default=None, repr=False)
    points: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "delta": self.delta, "kind": self.kind, "functional": self.functional,
            "supValue": self.supValue, "loo_median": self.loo_median,
            "resamples": self.resamples, "gridSize": self.gridSize,
        }


def sample_spectra(D, a_samples: int, seed: SeedLike, backend: str = "native") -> np.ndarray:
    """Spectra of ``D - A_j`` for ``a_samples`` independent GOE draws, shape (a, n).

    Draw ``j`` uses seed lane ``child(j)``.
    """
    d = _values(D)
    n = d.size
    base = as_seed(seed)
    out = np.empty((int(a_samples), n))
    for j in range(int(a_samples)):
        a = _goe_array(n, base.child(j).generator())
        m = -a
        m[np.diag_indices(n)] += d
        out[j] = eigenvalues(m, backend=backend).values
    return out


def _domain_points(domain) -> tuple:
    doms = [domain] if isinstance(domain, SpectralDomain) else list(domain)
    if not doms:
        raise InvalidArgumentError("empty domain list")
    pts = np.concatenate([d.points for d in doms])
    kind = "+".join(d.kind for d in doms)
    return doms[0], pts, kind


def _functional(which: str, held: np.ndarray, mean_m: np.ndarray, d: np.ndarray,
                z: np.ndarray) -> np.ndarray:
    n = d.size
    if which == "locallaw":
        target = empirical_s(d, z + mean_m)
    else:
        target = mean_m
    return n * z.imag * np.abs(held - target)


def diagnostic_from_spectra(D, spectra: np.ndarray, domain: Union[SpectralDomain, Sequence[SpectralDomain]],
                            functional: str = "locallaw") -> LocalLawDiagnostic:
    """Evaluate a diagnostic from precomputed redraw spectra (rows of ``spectra``)."""
    if functional not in FUNCTIONALS:
        raise InvalidArgumentError(f"functional must be one of {FUNCTIONALS}")
    d = _values(D)
    spectra = np.atleast_2d(np.asarray(spectra, dtype=float))
    a = spectra.shape[0]
    if a < 2:
        raise InvalidArgumentError("at least two redraws are needed")
    if spectra.shape[1] != d.size:
        raise InvalidArgumentError("spectra and diagonal disagree in size")
    dom, z, kind = _domain_points(domain)
    ms = np.stack([empirical_m(s, z) for s in spectra])
    total = ms.sum(axis=0)
    sups = np.empty(a)
    last = None
    for j in range(a):
        vals = _functional(functional, ms[j], (total - ms[j]) / (a - 1), d, z)
        sups[j] = vals.max()
        last = vals
    return LocalLawDiagnostic(
        n=d.size, delta=dom.delta, supValue=float(sups[-1]), resamples=a,
        gridSize=z.size, functional=functional, kind=kind,
        loo_median=float(np.median(sups)), values=last, points=z,
    )


def locallaw_diagnostic(D, a_samples: int, domain, seed: SeedLike,
                        backend: str = "native") -> LocalLawDiagnostic:
    """``sup n eta |m_n(z) - s_n(z + E_A m_n(z))|`` with ``E_A`` estimated by redraws."""
    if a_samples < 2:
        raise InvalidArgumentError("a_samples must be at least 2")
    spectra = sample_spectra(D, a_samples, seed, backend)
    return diagnostic_from_spectra(D, spectra, domain, "locallaw")


def concentration_diagnostic(D, a_samples: int, domain, seed: SeedLike,
                             backend: str = "native") -> LocalLawDiagnostic:
    """``sup n eta |m_n(z) - E_A m_n(z)|`` with ``E_A`` estimated by redraws."""
    if a_samples < 2:
        raise InvalidArgumentError("a_samples must be at least 2")
    spectra = sample_spectra(D, a_samples, seed, backend)
    return diagnostic_from_spectra(D, spectra, domain, "concentration")


def count_large_diagonal(D, delta: float) -> int:
    """``#{i : D_ii >= sqrt((2 - delta) log n)}``."""
    if not 0 < delta < 2:
        raise InvalidArgumentError(f"delta must lie in (0, 2), got {delta}")
    d = _values(D)
    return int(np.count_nonzero(d >= math.sqrt((2.0 - delta) * math.log(d.size))))


def eigenvalue_spacings(spectrum, k: int) -> np.ndarray:
    """``lambda_j - lambda_{j+1}`` for ``j = 1..k`` (descending eigenvalues)."""
    v = _values(spectrum)
    if isinstance(spectrum, Spectrum):
        lam = v
    else:
        lam = np.sort(v)[::-1]
    if not 1 <= k < lam.size:
        raise InvalidArgumentError(f"need 1 <= k < n = {lam.size}, got {k}")
    return lam[:k] - lam[1:k + 1]

