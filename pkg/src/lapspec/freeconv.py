"""Free convolution of the semicircle law with the standard Gaussian.

``s(z)`` is the Stieltjes transform of N(0, 1) and ``m(z)`` solves the
subordination equation ``m = s(z + m)``. The density of the convolution is
parametrized through Biane's functions: ``p(psi(u)) = v(u) / pi``.

Both ``v`` and ``psi`` reduce to ``s`` evaluated at ``u + i v``::

    int phi(x) / ((u - x)^2 + v^2) dx = Im s(u + iv) / v
    psi(u) = u - Re s(u + iv(u))

so everything here is driven by one Faddeeva evaluation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import wofz

from .errors import DomainError, InvalidArgumentError, NonConvergenceError, RootNotFoundError

__all__ = [
    "SolverConfig",
    "DensityGrid",
    "gaussian_stieltjes",
    "gaussian_stieltjes_prime",
    "solve_m",
    "m_prime",
    "biane_v",
    "biane_psi",
    "lipschitz_region_boundary",
    "density_grid",
    "density",
    "predict_location",
]

_SQRT_HALF_PI = np.sqrt(np.pi / 2.0)
_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 500
    damping: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be positive")
        if self.max_iter < 1:
            raise InvalidArgumentError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise InvalidArgumentError("damping must lie in (0, 1]")


def _require_upper(z):
    if np.any(np.imag(z) <= 0):
        raise DomainError("argument must lie in the upper half-plane (Im z > 0)")


def _s(z):
    return 1j * _SQRT_HALF_PI * wofz(z * _INV_SQRT2)


def gaussian_stieltjes(z):
    """``s(z) = int phi(x) / (x - z) dx`` for ``Im z > 0`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    _require_upper(z)
    out = _s(z)
    return out[()] if out.ndim == 0 else out


def gaussian_stieltjes_prime(z):
    """``s'(z) = -1 - z s(z)`` (Gaussian integration by parts)."""
    z = np.asarray(z, dtype=complex)
    _require_upper(z)
    out = -1.0 - z * _s(z)
    return out[()] if out.ndim == 0 else out


# -- fixed point m = s(z + m) ------------------------------------------------

def _newton(z, m, tol, steps):
    """Guarded Newton on ``F(m) = m - s(z + m)``, elementwise."""
    res = np.abs(m - _s(z + m))
    for _ in range(steps):
        todo = res > tol
        if not np.any(todo):
            break
        zt, mt = z[todo], m[todo]
        w = zt + mt
        sw = _s(w)
        step = (mt - sw) / (1.0 + (1.0 + w * sw))  # F / F', F' = 1 - s'(w)
        rt = res[todo]
        lam = np.ones(zt.shape)
        accepted = np.zeros(zt.shape, dtype=bool)
        best_m, best_r = mt.copy(), rt.copy()
        for _ in range(30):
            cand = mt - lam * step
            ok = (cand.imag >= 0) & ((zt + cand).imag > 0)
            r = np.full(zt.shape, np.inf)
            r[ok] = np.abs(cand[ok] - _s(zt[ok] + cand[ok]))
            good = ok & (r < rt) & ~accepted
            best_m[good], best_r[good] = cand[good], r[good]
            accepted |= good
            if accepted.all():
                break
            lam = np.where(accepted, lam, lam * 0.5)
        if not accepted.any():
            break
        m[todo], res[todo] = best_m, best_r
    return m, res


def _fixed_point(z, m, cfg, switch):
    omega = np.full(z.shape, cfg.damping)
    res = np.abs(m - _s(z + m))
    for _ in range(cfg.max_iter):
        todo = res > switch
        if not np.any(todo):
            break
        zt, mt, ot = z[todo], m[todo], omega[todo]
        cand = (1.0 - ot) * mt + ot * _s(zt + mt)
        r = np.abs(cand - _s(zt + cand))
        better = r < res[todo]
        mt[better] = cand[better]
        rt = res[todo]
        rt[better] = r[better]
        ot[~better] *= 0.5
        m[todo], res[todo], omega[todo] = mt, rt, ot
    return m, res


def _continuation(z, cfg):
    """Track the physical branch down from ``Im z = max(1, 4 Im z)``."""
    eta = z.imag
    top = max(1.0, 4.0 * eta)
    etas = np.geomspace(top, eta, 40)
    w = complex(z.real, top)
    m = np.array([-1.0 / w])
    m, _ = _fixed_point(np.array([w]), m, cfg, 1e-10)
    for h in etas:
        zz = np.array([complex(z.real, h)])
        m, res = _newton(zz, m, cfg.tol, 50)
    return m[0], float(res[0])


def solve_m(z, cfg: SolverConfig = SolverConfig()):
    """Solve ``m = s(z + m)`` on the branch with ``z m(z) -> -1``.

    Damped fixed-point iteration from ``m0 = -1/z`` (damping halves whenever
    the residual would grow), then Newton polishing. Points that still miss
    ``cfg.tol`` are re-solved by continuation in ``Im z``.
    """
    z = np.asarray(z, dtype=complex)
    _require_upper(z)
    scalar = z.ndim == 0
    zf = z.ravel().copy()
    m = -1.0 / zf
    m, _ = _fixed_point(zf, m, cfg, max(cfg.tol, 1e-8))
    m, res = _newton(zf, m, cfg.tol, 60)
    bad = np.flatnonzero((res > cfg.tol) | (m.imag < 0))
    for i in bad:
        m[i], res[i] = _continuation(zf[i], cfg)
    worst = float(res.max()) if res.size else 0.0
    if worst > cfg.tol or np.any(m.imag < 0):
        raise NonConvergenceError(f"fixed point did not reach tol={cfg.tol:g}; residual {worst:.3e}", worst)
    m = m.reshape(z.shape)
    return complex(m) if scalar else m


def m_prime(z, m=None, cfg: SolverConfig = SolverConfig()):
    """``m'(z) = s'(w) / (1 - s'(w))`` with ``w = z + m(z)``."""
    if m is None:
        m = solve_m(z, cfg)
    w = np.asarray(z, dtype=complex) + np.asarray(m)
    sp = -1.0 - w * _s(w)
    return sp / (1.0 - sp)


# -- Biane parametrization ---------------------------------------------------

def _phi_integral(u: float, v: float) -> float:
    """``int phi(x) / ((u - x)^2 + v^2) dx`` for ``v > 0``."""
    return float(_s(complex(u, v)).imag) / v


def lipschitz_region_boundary(t: float, u: float) -> float:
    """``v_t(u)``: smallest ``v >= 0`` with Phi-integral ``<= 1/t``.

    The Phi-integral diverges as ``v -> 0`` and is at most ``1/v^2``, so the
    root lies in ``(0, sqrt(t)]`` and is found by bisection to full precision.
    """
    if not t >= 1:
        raise InvalidArgumentError(f"t must be >= 1, got {t}")
    u = float(u)
    target = 1.0 / t
    lo, hi = 0.0, max(2.0, np.sqrt(t))
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mid <= 0.0:
            break
        if _phi_integral(u, mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    return 0.5 * (lo + hi)


def biane_v(u: float) -> float:
    return lipschitz_region_boundary(1.0, u)


def biane_psi(u: float, v: float | None = None) -> float:
    """``psi(u) = u + int (u - x) phi(x) / ((u - x)^2 + v(u)^2) dx``."""
    u = float(u)
    if v is None:
        v = biane_v(u)
    return u - float(_s(complex(u, v)).real)


@dataclass(frozen=True)
class DensityGrid:
    u_nodes: np.ndarray
    x_nodes: np.ndarray
    v_values: np.ndarray
    p_values: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights over ``x_nodes``."""
        x = self.x_nodes
        w = np.zeros_like(x)
        dx = np.diff(x)
        w[:-1] += 0.5 * dx
        w[1:] += 0.5 * dx
        return w

    def mass(self) -> float:
        return float(self.weights @ self.p_values)

    def __call__(self, x):
        """Density at ``x`` by linear interpolation (0 outside the grid)."""
        return np.interp(x, self.x_nodes, self.p_values, left=0.0, right=0.0)

    def write_csv(self, path, extra: dict | None = None):
        """Columns ``u, x, v, p, weight`` plus any ``extra`` per-node columns."""
        extra = extra or {}
        cols = {
            "u": self.u_nodes,
            "x": self.x_nodes,
            "v": self.v_values,
            "p": self.p_values,
            "weight": self.weights,
            **{k: np.asarray(v, dtype=float) for k, v in extra.items()},
        }
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(list(cols))
            for row in zip(*cols.values()):
                w.writerow([format(float(x), ".17g") for x in row])
        return path

    @classmethod
    def read_csv(cls, path) -> "DensityGrid":
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        col = lambda k: np.array([float(r[k]) for r in rows])
        return cls(col("u"), col("x"), col("v"), col("p"))

    def __eq__(self, other):
        if not isinstance(other, DensityGrid):
            return NotImplemented
        return all(
            np.array_equal(a, b)
            for a, b in (
                (self.u_nodes, other.u_nodes),
                (self.x_nodes, other.x_nodes),
                (self.v_values, other.v_values),
                (self.p_values, other.p_values),
            )
        )


def density_grid(u_min: float = -8.0, u_max: float = 8.0, count: int = 2001) -> DensityGrid:
    if not (np.isfinite(u_min) and np.isfinite(u_max)) or not u_min < u_max:
        raise InvalidArgumentError(f"need finite u_min < u_max, got [{u_min}, {u_max}]")
    if count < 16:
        raise InvalidArgumentError(f"count must be >= 16, got {count}")
    u = np.linspace(u_min, u_max, int(count))
    v = np.array([biane_v(x) for x in u])
    x = u - _s(u + 1j * v).real
    return DensityGrid(u, x, v, v / np.pi)


def density(x):
    """Density of the free convolution at ``x`` via ``psi^{-1}`` (scalar or array)."""
    from scipy.optimize import brentq

    def one(xx):
        # psi(u) - u = O(1/u) and |psi(u) - u| <= 1 in practice; bracket generously
        f = lambda u: biane_psi(u) - xx
        lo, hi = xx - 2.0, xx + 2.0
        while f(lo) > 0:
            lo -= 2.0
        while f(hi) < 0:
            hi += 2.0
        u = brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        return biane_v(u) / np.pi

    xs = np.asarray(x, dtype=float)
    out = np.array([one(float(xx)) for xx in xs.ravel()]).reshape(xs.shape)
    return float(out) if xs.ndim == 0 else out


# -- eigenvalue location -----------------------------------------------------

def _location_residual(E, X, eta, cfg):
    return X - E - solve_m(complex(E, eta), cfg).real


def predict_location(X: float, eta: float, cfg: SolverConfig = SolverConfig(), method: str = "newton") -> float:
    """Root ``E`` of ``X - E - Re m(E + i eta) = 0`` in ``[X, X + 2]``.

    ``method`` is ``"newton"`` (safeguarded by the bracket) or ``"bisect"``.
    """
    if not X > 1:
        raise InvalidArgumentError(f"X must exceed 1, got {X}")
    if not eta > 0:
        raise InvalidArgumentError(f"eta must be positive, got {eta}")
    lo, hi = float(X), float(X) + 2.0
    f_lo = _location_residual(lo, X, eta, cfg)
    f_hi = _location_residual(hi, X, eta, cfg)
    if not (f_lo > 0 > f_hi):
        raise RootNotFoundError(f"no sign change on [{lo}, {hi}]: f = ({f_lo:.3e}, {f_hi:.3e})")
    if method == "bisect":
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if _location_residual(mid, X, eta, cfg) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    if method != "newton":
        raise InvalidArgumentError(f"unknown method {method!r}")
    E = float(X) + 1.0 / float(X)
    if not lo < E < hi:
        E = 0.5 * (lo + hi)
    for _ in range(100):
        z = complex(E, eta)
        m = solve_m(z, cfg)
        f = X - E - m.real
        if abs(f) <= 1e-13:
            return E
        if f > 0:
            lo = E
        else:
            hi = E
        fp = -1.0 - complex(m_prime(z, m)).real
        step = E - f / fp
        E = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            return E
    return E
