"""Order-statistics likelihood kernels, all in log domain.

Given M empirical quantile levels ``q`` with values ``x`` computed from a
hidden sample of size N, the joint density of the corresponding order
statistics is, with k_m = q_m * N (real-valued orders; ranks between
integers are understood through the usual interpolation),

    c * u_1^{k_1 - 1} * (1 - u_M)^{N - k_M}
      * prod_{m=2}^{M} (u_m - u_{m-1})^{k_m - k_{m-1} - 1}
      * prod_m f_theta(x_m),          u_m = F_theta(x_m),

    ln c = ln N! - ln Gamma(k_1) - ln Gamma(N - k_M + 1)
                 - sum_{m=2}^{M} ln Gamma(k_m - k_{m-1}).

``joint_os_loglik`` evaluates exactly that; ``gaussian_noise_loglik`` is the
CDF-regression baseline that treats the quantile levels as Gaussian
observations of F_theta(x); ``penalty_curves`` renders both as normalized
one-point likelihood curves for comparing their tail behavior.

Numerical conventions
---------------------
* Exponents such as k_m - k_{m-1} - 1 may be negative when quantiles sit
  closer than 1/N; that keeps a valid (integrable) density while the
  exponent stays above -1, and is rejected with a clear error at <= -1.
* F_theta(x) is clamped to [1e-300, 1 - 1e-300] before taking logs, so an
  underflowed CDF cannot masquerade as a genuine zero-density region.
* CDF values that tie at machine precision (catastrophically misfit
  parameters pushing several x into one tail) yield -inf and bump the
  module-level ``tie_events`` counter instead of raising, so samplers can
  simply reject the proposal.

All functions are pure; ``tie_events`` is the only piece of module state
and is a monotone diagnostic counter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .distributions import Dist
from .special import log_beta, log_gamma

__all__ = [
    "QuantileObservation",
    "OrderVector",
    "uniform_os_cdf",
    "uniform_os_logpdf",
    "os_logpdf",
    "log_norm_const",
    "joint_uniform_os_logpdf",
    "joint_os_loglik",
    "gaussian_noise_loglik",
    "penalty_curves",
    "tie_events",
    "reset_tie_events",
]

_INF = math.inf
_CDF_CLAMP = 1e-300
# 1 - 1e-300 is not representable; the closest honest upper clamp is the
# largest double below 1, which log1p still resolves to a finite log
_CDF_CLAMP_HI = math.nextafter(1.0, 0.0)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)

# diagnostic counter: number of joint_os_loglik calls rejected on tied CDFs
tie_events: int = 0


def reset_tie_events() -> None:
    global tie_events
    tie_events = 0


def _bump_tie_events() -> None:
    global tie_events
    tie_events += 1


@dataclass(frozen=True)
class QuantileObservation:
    """The observed triple (q, x, N) plus the normalization divisor.

    ``x`` is stored in whatever units the likelihood should consume;
    ``scale_divisor`` records the factor that maps those units back to the
    raw ones (``raw = x * scale_divisor``), e.g. the median used to
    normalize salary data.  ``normalized()`` performs that division once.
    """

    q: tuple[float, ...]
    x: tuple[float, ...]
    n_total: float
    scale_divisor: float = 1.0

    def __post_init__(self) -> None:
        q = tuple(float(v) for v in self.q)
        x = tuple(float(v) for v in self.x)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "n_total", float(self.n_total))
        object.__setattr__(self, "scale_divisor", float(self.scale_divisor))
        if len(q) == 0 or len(q) != len(x):
            raise ValueError(f"q and x must be equal-length, non-empty "
                             f"(got {len(q)} and {len(x)})")
        for v in q:
            if not 0.0 < v < 1.0:
                raise ValueError(f"quantile levels must lie in (0, 1), got {v!r}")
        if any(b <= a for a, b in zip(q, q[1:])):
            raise ValueError(f"quantile levels must be strictly increasing: {q}")
        for v in x:
            if not math.isfinite(v):
                raise ValueError(f"x values must be finite, got {v!r}")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ValueError(f"x values must be strictly increasing: {x}")
        if not self.n_total >= 1.0:
            raise ValueError(f"n_total must be >= 1, got {self.n_total!r}")
        if not self.scale_divisor > 0.0:
            raise ValueError(f"scale_divisor must be positive, "
                             f"got {self.scale_divisor!r}")

    @property
    def m(self) -> int:
        return len(self.q)

    def normalized(self) -> "QuantileObservation":
        """Divide x by scale_divisor (the divisor stays, for de-normalizing)."""
        return replace(self, x=tuple(v / self.scale_divisor for v in self.x))


@dataclass(frozen=True)
class OrderVector:
    """Real-valued orders k_m = q_m * N, strictly increasing and positive."""

    k: tuple[float, ...]

    def __post_init__(self) -> None:
        k = tuple(float(v) for v in self.k)
        object.__setattr__(self, "k", k)
        if len(k) == 0:
            raise ValueError("OrderVector needs at least one order")
        if k[0] <= 0.0:
            raise ValueError(f"orders must be positive, got k_1 = {k[0]!r}")
        if any(b <= a for a, b in zip(k, k[1:])):
            raise ValueError(f"orders must be strictly increasing: {k}")

    @classmethod
    def from_quantiles(cls, q, n_total: float) -> "OrderVector":
        return cls(tuple(float(v) * float(n_total) for v in q))


@lru_cache(maxsize=256)
def _log_binomials(n: int) -> tuple[float, ...]:
    lg_n1 = log_gamma(n + 1.0)
    return tuple(
        lg_n1 - log_gamma(i + 1.0) - log_gamma(n - i + 1.0) for i in range(n + 1)
    )


def uniform_os_cdf(n: int, k: int, x: float) -> float:
    """P(U_(k) <= x) for the k-th of n iid uniforms: the at-least-k sum
    sum_{i=k}^{n} C(n,i) x^i (1-x)^{n-i}, integer k only."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not float(k).is_integer() or not 1 <= int(k) <= n:
        raise ValueError(f"k must be an integer in [1, {n}], got {k!r}")
    k = int(k)
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    lx = math.log(x)
    l1x = math.log1p(-x)
    logc = _log_binomials(n)
    terms = [math.exp(logc[i] + i * lx + (n - i) * l1x) for i in range(k, n + 1)]
    return min(math.fsum(terms), 1.0)


def _pow_term(e: float, v: float) -> float:
    # e * ln(v) with the boundary conventions: exponent 0 contributes nothing
    # even at v = 0; a genuinely negative exponent at v = 0 is a divergence.
    if e == 0.0:
        return 0.0
    if v <= 0.0:
        if e > 0.0:
            return -_INF
        raise ValueError(
            f"density diverges: boundary value with negative exponent {e}"
        )
    return e * math.log(v)


def uniform_os_logpdf(n: float, k: float, x: float) -> float:
    """log Beta(x | k, n - k + 1): marginal density of the k-th uniform
    order statistic, generalized to real-valued k through the gamma
    function."""
    n = float(n)
    k = float(k)
    if not 0.0 < k <= n:
        raise ValueError(f"order k must satisfy 0 < k <= n, got k={k}, n={n}")
    x = float(x)
    if not 0.0 < x < 1.0:
        return -_INF
    return ((k - 1.0) * math.log(x) + (n - k) * math.log1p(-x)
            - log_beta(k, n - k + 1.0))


def os_logpdf(d: Dist, n: float, k: float, x: float) -> float:
    """Log-density of the k-th order statistic of n draws from d at x:
    the uniform marginal evaluated at F(x) plus the Jacobian log f(x)."""
    u = d.cdf(x)
    return uniform_os_logpdf(n, k, u) + d.log_pdf(x)


def _k_diffs(k: tuple[float, ...]) -> tuple[float, ...]:
    diffs = tuple(b - a for a, b in zip(k, k[1:]))
    for d in diffs:
        if d <= 0.0:
            raise ValueError(
                f"order spacing must be positive (quantiles too close given N); "
                f"got difference {d!r} in k={k}"
            )
    return diffs


def log_norm_const(n: float, k) -> float:
    """ln of the joint-density normalization constant:
    ln N! - ln Gamma(k_1) - ln Gamma(N - k_M + 1) - sum ln Gamma(k_m - k_{m-1})."""
    kk = k.k if isinstance(k, OrderVector) else tuple(float(v) for v in k)
    n = float(n)
    if kk[0] <= 0.0:
        raise ValueError(f"orders must be positive, got k_1 = {kk[0]!r}")
    if kk[-1] > n:
        raise ValueError(f"largest order {kk[-1]!r} exceeds n = {n!r}")
    diffs = _k_diffs(kk)
    total = log_gamma(n + 1.0) - log_gamma(kk[0]) - log_gamma(n - kk[-1] + 1.0)
    for d in diffs:
        total -= log_gamma(d)
    return total


def joint_uniform_os_logpdf(n: float, k, u) -> float:
    """Joint log-density of M uniform order statistics with real-valued
    orders k at points u; -inf (zero density) off the ordered simplex,
    error on boundary values whose exponent is negative."""
    kk = k.k if isinstance(k, OrderVector) else tuple(float(v) for v in k)
    uu = tuple(float(v) for v in u)
    if len(uu) != len(kk):
        raise ValueError(f"dimension mismatch: {len(kk)} orders, {len(uu)} points")
    for v in uu:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"u values must lie in [0, 1], got {v!r}")
    if any(b <= a for a, b in zip(uu, uu[1:])):
        return -_INF
    total = log_norm_const(n, kk)
    total += _pow_term(kk[0] - 1.0, uu[0])
    total += _pow_term(float(n) - kk[-1], 1.0 - uu[-1])
    for m in range(1, len(uu)):
        total += _pow_term(kk[m] - kk[m - 1] - 1.0, uu[m] - uu[m - 1])
    return total


@lru_cache(maxsize=4096)
def _cached_norm_const(n: float, q: tuple[float, ...]) -> float:
    return log_norm_const(n, tuple(v * n for v in q))


def joint_os_loglik(d: Dist, obs: QuantileObservation) -> float:
    """Joint order-statistics log-likelihood of obs under d.

    Term-for-term this is ``joint_uniform_os_logpdf(N, q*N, F(x)) +
    sum log f(x_m)`` with the CDF clamp described in the module docstring;
    tied CDF values return -inf and increment ``tie_events``.
    """
    n = obs.n_total
    q = obs.q
    x = obs.x
    cdf = d.cdf
    log_pdf = d.log_pdf

    u = [min(max(cdf(v), _CDF_CLAMP), _CDF_CLAMP_HI) for v in x]
    for a, b in zip(u, u[1:]):
        if b <= a:
            _bump_tie_events()
            return -_INF

    total = _cached_norm_const(n, q)
    k1 = q[0] * n
    km = q[-1] * n
    total += _pow_term(k1 - 1.0, u[0])
    if n != km:
        total += (n - km) * math.log1p(-u[-1])
    for m in range(1, len(u)):
        e = (q[m] - q[m - 1]) * n - 1.0
        if e != 0.0:
            total += e * math.log(u[m] - u[m - 1])
    for v in x:
        total += log_pdf(v)
    return total


def gaussian_noise_loglik(d: Dist, obs: QuantileObservation,
                          sigma_noise: float) -> float:
    """CDF-regression baseline: sum_m log N(q_m | F_theta(x_m), sigma_noise^2)."""
    sigma_noise = float(sigma_noise)
    if not sigma_noise > 0.0:
        raise ValueError(f"sigma_noise must be positive, got {sigma_noise!r}")
    cdf = d.cdf
    const = -_HALF_LOG_TWO_PI - math.log(sigma_noise)
    inv_two_var = 0.5 / (sigma_noise * sigma_noise)
    total = 0.0
    for qm, xm in zip(obs.q, obs.x):
        r = qm - cdf(xm)
        total += const - r * r * inv_two_var
    return total


def penalty_curves(d: Dist, q: float, n: float, x_grid,
                   sigma_noise: float = 0.05):
    """Single-point likelihood curves over x_grid under both models, each
    max-normalized to 1: returns (os_curve, gn_curve) as numpy arrays.

    os: F(x)^{qN-1} (1-F(x))^{N-qN} f(x);  gn: exp(-(F(x)-q)^2 / 2 sigma^2).
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q!r}")
    grid = np.asarray(x_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("x_grid must be a non-empty 1-D vector")
    if not np.all(np.isfinite(grid)):
        raise ValueError("x_grid must be finite")
    if np.any(np.diff(grid) < 0):
        raise ValueError("x_grid must be sorted ascending")
    k = q * float(n)
    e_lo = k - 1.0
    e_hi = float(n) - k
    log_os = np.empty(grid.size)
    gn_resid = np.empty(grid.size)
    for i, xv in enumerate(grid):
        xv = float(xv)
        u = min(max(d.cdf(xv), _CDF_CLAMP), _CDF_CLAMP_HI)
        log_os[i] = (_pow_term(e_lo, u) + _pow_term(e_hi, 1.0 - u)
                     + d.log_pdf(xv))
        r = u - q
        gn_resid[i] = r * r
    m = log_os.max()
    os_curve = (np.exp(log_os - m) if math.isfinite(m)
                else np.zeros(grid.size))
    gn_curve = np.exp(-(gn_resid - gn_resid.min()) / (2.0 * sigma_noise ** 2))
    return os_curve, gn_curve
