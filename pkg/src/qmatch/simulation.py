"""Ground-truth generators for synthetic quantile data.

Everything here works by literally sampling and sorting, so these functions
double as brute-force oracles for the analytic order-statistics densities:
no shared code with the likelihood kernels beyond the distribution objects.

Replicates use independent RNG streams seeded by (seed, replicate_index),
so an ensemble is reproducible row-by-row and insensitive to evaluation
order.  Where only the k-th order statistic is needed, the generators sort
uniform draws and push just the selected column through the quantile
function; that is distribution-identical to sorting the mapped sample
because the quantile function is monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Dist
from .orderstats import QuantileObservation

__all__ = [
    "SimConfig",
    "simulate_quantile_data",
    "empirical_cdf_ensemble",
    "os_marginal_oracle",
]

# smallest positive double: rng.random() can return exactly 0, which the
# quantile functions reject
_TINY_U = 5e-324


@dataclass(frozen=True)
class SimConfig:
    """A generating distribution plus the observation layout to simulate."""

    d: Dist
    n_total: int
    q: tuple[float, ...]
    reps: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_total", int(self.n_total))
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))
        object.__setattr__(self, "reps", int(self.reps))
        if self.n_total < 1:
            raise ValueError(f"n_total must be >= 1, got {self.n_total}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if len(self.q) == 0:
            raise ValueError("q must be non-empty")
        for v in self.q:
            if not 0.0 < v < 1.0:
                raise ValueError(f"quantile levels must lie in (0, 1), got {v!r}")
        if any(b <= a for a, b in zip(self.q, self.q[1:])):
            raise ValueError(f"quantile levels must be strictly increasing: "
                             f"{self.q}")


def _interp_at_rank(sorted_x: np.ndarray, rank: float) -> float:
    """Value at real-valued 1-indexed rank, linear between order statistics."""
    n = sorted_x.size
    if rank < 1.0 or rank > n:
        raise ValueError(
            f"rank q*N = {rank} falls outside the realized order statistics "
            f"[1, {n}]; choose q in [1/N, 1]"
        )
    i = math.floor(rank)
    frac = rank - i
    if frac == 0.0 or i == n:
        return float(sorted_x[i - 1])
    return float(sorted_x[i - 1] + frac * (sorted_x[i] - sorted_x[i - 1]))


def simulate_quantile_data(cfg: SimConfig) -> QuantileObservation:
    """Draw N samples, sort them, and read off the configured quantiles.

    The value for level q_m sits at real rank q_m * N, interpolated
    linearly between the two adjacent order statistics; integer ranks pick
    the order statistic itself.
    """
    rng = np.random.default_rng(cfg.seed)
    sorted_x = np.sort(cfg.d.sample(rng, cfg.n_total))
    x = tuple(_interp_at_rank(sorted_x, qm * cfg.n_total) for qm in cfg.q)
    return QuantileObservation(q=cfg.q, x=x, n_total=cfg.n_total)


def _uniform_rows(seed: int, reps: int, n: int) -> np.ndarray:
    rows = [np.random.default_rng([seed, i]).random(n) for i in range(reps)]
    return np.clip(np.stack(rows), _TINY_U, None)


def empirical_cdf_ensemble(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """reps independent sorted samples plus the rank grid m/N.

    Returns (values, ranks): values has shape (reps, N) with each row an
    ascending sample from cfg.d, and ranks[m-1] = m/N, so each row paired
    with ranks traces one empirical CDF.  Rank N (grid value 1.0) is kept:
    an empirical CDF does reach 1, even though a fit would reject q = 1.
    """
    u = np.sort(_uniform_rows(cfg.seed, cfg.reps, cfg.n_total), axis=1)
    quantile = cfg.d.quantile
    flat = np.fromiter((quantile(v) for v in u.ravel()), dtype=float,
                       count=u.size)
    values = flat.reshape(cfg.reps, cfg.n_total)
    ranks = np.arange(1, cfg.n_total + 1, dtype=float) / cfg.n_total
    return values, ranks


def os_marginal_oracle(d: Dist, n_total: int, k: int, reps: int,
                       seed: int = 0) -> np.ndarray:
    """reps sort-and-pick draws of the k-th order statistic of n_total.

    Brute-force reference for the analytic marginal: no density code is
    involved, only sampling, sorting and the monotone quantile map.
    """
    n_total = int(n_total)
    k_f = float(k)
    if not k_f.is_integer() or not 1 <= int(k_f) <= n_total:
        raise ValueError(f"k must be an integer in [1, {n_total}], got {k!r}")
    k = int(k_f)
    if int(reps) < 1:
        raise ValueError(f"reps must be >= 1, got {reps!r}")
    u = np.sort(_uniform_rows(seed, int(reps), n_total), axis=1)[:, k - 1]
    quantile = d.quantile
    return np.fromiter((quantile(v) for v in u), dtype=float, count=u.size)
