"""Extreme-value constants, the Gumbel law, and the Gaussian order-statistics
oracle that defines the joint limit laws ``F_k``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, InvalidArgumentError
from .rand_models import SeedLike, as_seed

__all__ = [
    "CenteringConstants",
    "OrderStatSample",
    "constants",
    "gumbel_cdf",
    "sample_gumbel",
    "sample_gaussian_topk",
    "gaussian_topk_batch",
    "ppp_interval_mean",
    "spacing_threshold",
]


@dataclass(frozen=True)
class CenteringConstants:
    """``a_n``, the eigenvalue centering ``b_n`` and the iid-max centering ``b_n'``."""

    n: int
    a_n: float
    b_n: float
    b_n_prime: float

    def rescale(self, x, centering: str = "eigen"):
        """``a_n (x - b)`` with ``b = b_n`` (``"eigen"``) or ``b_n'`` (``"iid"``)."""
        b = {"eigen": self.b_n, "iid": self.b_n_prime}[centering]
        return self.a_n * (np.asarray(x, dtype=float) - b)


def constants(n: int) -> CenteringConstants:
    if n < 3:
        raise DomainError(f"centering constants need n >= 3 (log log n > 0), got {n}")
    ln = math.log(n)
    a = math.sqrt(2.0 * ln)
    base = math.log(ln) + math.log(4.0 * math.pi)
    return CenteringConstants(int(n), a, a - (base - 2.0) / (2.0 * a), a - base / (2.0 * a))


def gumbel_cdf(x):
    """``exp(-exp(-x))``."""
    out = np.exp(-np.exp(-np.asarray(x, dtype=float)))
    return float(out) if out.ndim == 0 else out


def sample_gumbel(size, seed: SeedLike) -> np.ndarray:
    """Standard Gumbel draws by inverse transform ``-log(-log U)``."""
    u = as_seed(seed).generator().random(size)
    return -np.log(-np.log(u))


@dataclass(frozen=True)
class OrderStatSample:
    k: int
    values: np.ndarray


def _renyi_topk(n: int, k: int, rng: np.random.Generator, trials: int) -> np.ndarray:
    # Top-k of n iid uniforms via Renyi: U_(n-j+1) = 1 - G_j / G_{n+1},
    # G_j partial sums of Exp(1), G_{n+1} = G_k + Gamma(n + 1 - k).
    g = np.cumsum(rng.standard_exponential((trials, k)), axis=1)
    total = g[:, -1] + rng.standard_gamma(n + 1 - k, size=trials)
    # upper tail probabilities map to normals via -ndtri(p), accurate for small p
    return -ndtri(g / total[:, None])


def sample_gaussian_topk(n: int, k: int, seed: SeedLike, method: str = "renyi") -> OrderStatSample:
    """Top ``k`` order statistics of ``n`` iid N(0, 1), descending.

    ``"renyi"`` samples them exactly in O(k) through exponential spacings;
    ``"direct"`` sorts ``n`` fresh normals. Tied draws are resampled.
    """
    if int(k) != k or int(n) != n or not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = as_seed(seed).generator()
    for _ in range(100):
        if method == "renyi":
            vals = _renyi_topk(int(n), int(k), rng, 1)[0]
        elif method == "direct":
            vals = np.sort(rng.standard_normal(int(n)))[::-1][: int(k)]
        else:
            raise InvalidArgumentError(f"unknown method {method!r}")
        if k == 1 or np.all(np.diff(vals) < 0):
            return OrderStatSample(int(k), vals)
    raise RuntimeError("could not draw strictly ordered statistics")


def gaussian_topk_batch(n: int, k: int, trials: int, seed: SeedLike) -> np.ndarray:
    """``(trials, k)`` array of independent top-k samples (rows descending)."""
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= k <= n, got k={k}, n={n}")
    return _renyi_topk(int(n), int(k), as_seed(seed).generator(), int(trials))


def ppp_interval_mean(a: float) -> float:
    """Mean number of points of the ``e^{-x} dx`` Poisson process in ``[a, inf)``."""
    return math.exp(-a)


def spacing_threshold(n: int, k: int = 1, delta_exp: float = 0.25) -> float:
    """Gap scale ``(log n)^(-1/2 - delta_exp)``; ``k`` only labels the gap."""
    if not n > 1:
        raise DomainError(f"need n > 1 so that log n > 0, got {n}")
    if not delta_exp > 0:
        raise InvalidArgumentError("delta_exp must be positive")
    return math.log(n) ** (-0.5 - delta_exp)
