"""Posterior-predictive queries, model scores, and fit summaries.

Every quantity here is a plain Monte-Carlo functional of the retained
draws: the predictive CDF averages F_theta over draws (with pointwise 5/95%
draw-quantile bands), predictive quantiles invert per draw, and model
scores summarize the stored per-draw order-statistics log-likelihood.

Scores stay in the units the model was fitted in (median-normalized for
the salary data); only quantile and sample outputs are de-normalized, via
the scale_divisor carried by the observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .distributions import Dist, FamilySpec, get_family
from .inference import Diagnostics, ModelSpec, PosteriorDraws, diagnostics
from .orderstats import QuantileObservation

__all__ = [
    "ParamSummary",
    "Score",
    "PredictiveQuantile",
    "PredictiveCurve",
    "FitReport",
    "predictive_cdf",
    "predictive_quantile",
    "predictive_sample",
    "score_model",
    "compare_models",
    "kde_curve",
    "make_fit_report",
]


def _resolve(family) -> FamilySpec:
    return get_family(family) if isinstance(family, str) else family


def _draw_dists(pd: PosteriorDraws, spec: FamilySpec):
    for row in pd.draws:
        yield Dist(spec, tuple(row))


@dataclass(frozen=True)
class ParamSummary:
    """Marginal posterior summary of one parameter."""

    name: str
    mean: float
    sd: float
    q05: float
    q50: float
    q95: float


@dataclass(frozen=True)
class Score:
    """Mean per-draw log-likelihood and distances to its 5/95% quantiles."""

    mean: float
    minus: float   # mean - q05
    plus: float    # q95 - mean


@dataclass(frozen=True)
class PredictiveQuantile:
    """De-normalized predictive quantile with 5/95% credible bounds."""

    p: float
    value: float
    lo: float
    hi: float


@dataclass(frozen=True)
class PredictiveCurve:
    """Pointwise posterior-predictive CDF: mean with 5/95% bands."""

    x: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


@dataclass(frozen=True)
class FitReport:
    """Everything a fit produced, sufficient to rank, predict, and rerun."""

    family: str
    likelihood_kind: str
    sigma_noise: float
    params: tuple[ParamSummary, ...]
    diag: Diagnostics
    score: Score
    predictive: tuple[PredictiveQuantile, ...]
    obs: QuantileObservation
    seed: int
    draws: PosteriorDraws | None = None

    def __post_init__(self) -> None:
        spec = get_family(self.family)
        if len(self.params) != spec.arity:
            raise ValueError(f"{spec.name} has {spec.arity} parameters, "
                             f"summary lists {len(self.params)}")
        for ps, summ in zip(spec.params, self.params):
            for label in ("mean", "q05", "q50", "q95"):
                v = getattr(summ, label)
                if not ps.contains(v):
                    raise ValueError(
                        f"reported {spec.name}.{ps.name} {label}={v!r} "
                        f"violates domain {ps.domain}")
        if self.score.minus < 0.0 or self.score.plus < 0.0:
            raise ValueError(
                "score quantile distances must bracket the mean "
                f"(got -{self.score.minus}/+{self.score.plus})")

    def without_draws(self) -> "FitReport":
        return replace(self, draws=None)


def predictive_cdf(pd: PosteriorDraws, family, x_grid) -> PredictiveCurve:
    """Monte-Carlo posterior-predictive CDF over x_grid."""
    spec = _resolve(family)
    grid = np.asarray(x_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("x_grid must be a non-empty 1-D vector")
    values = np.empty((pd.n_draws, grid.size))
    for i, d in enumerate(_draw_dists(pd, spec)):
        cdf = d.cdf
        values[i] = [cdf(v) for v in grid]
    return PredictiveCurve(
        x=grid,
        mean=values.mean(axis=0),
        lo=np.quantile(values, 0.05, axis=0),
        hi=np.quantile(values, 0.95, axis=0),
    )


def predictive_quantile(pd: PosteriorDraws, family, p: float,
                        scale_divisor: float = 1.0) -> PredictiveQuantile:
    """Mean of the per-draw p-quantile with 5/95% bounds, de-normalized."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    scale_divisor = float(scale_divisor)
    if not scale_divisor > 0.0:
        raise ValueError(f"scale_divisor must be positive, "
                         f"got {scale_divisor!r}")
    spec = _resolve(family)
    q = np.fromiter((d.quantile(p) for d in _draw_dists(pd, spec)),
                    dtype=float, count=pd.n_draws)
    return PredictiveQuantile(
        p=p,
        value=float(q.mean()) * scale_divisor,
        lo=float(np.quantile(q, 0.05)) * scale_divisor,
        hi=float(np.quantile(q, 0.95)) * scale_divisor,
    )


def predictive_sample(pd: PosteriorDraws, family, rng: np.random.Generator,
                      n_per_draw: int = 1) -> np.ndarray:
    """n_per_draw samples from each retained draw's distribution."""
    if int(n_per_draw) < 1:
        raise ValueError(f"n_per_draw must be >= 1, got {n_per_draw!r}")
    spec = _resolve(family)
    chunks = [d.sample(rng, int(n_per_draw)) for d in _draw_dists(pd, spec)]
    return np.concatenate(chunks)


def score_model(pd: PosteriorDraws) -> Score:
    """Summary of the stored per-draw log-likelihood values."""
    ll = pd.log_likelihood
    mean = float(ll.mean())
    q05 = float(np.quantile(ll, 0.05))
    q95 = float(np.quantile(ll, 0.95))
    return Score(mean=mean, minus=mean - q05, plus=q95 - mean)


def compare_models(reports) -> tuple[FitReport, ...]:
    """Rank fits of the same observation by mean score, best first.

    Ties break alphabetically by family name, so the ranking is a
    deterministic function of its inputs.
    """
    reports = tuple(reports)
    if not reports:
        raise ValueError("need at least one report to rank")
    first = reports[0].obs
    for r in reports[1:]:
        if r.obs != first:
            raise ValueError(
                f"reports describe different observations: {r.family} was "
                f"fitted to different data than {reports[0].family}")
    return tuple(sorted(reports,
                        key=lambda r: (-r.score.mean, r.family)))


def kde_curve(samples, grid) -> np.ndarray:
    """Gaussian kernel density with Silverman's bandwidth on the grid."""
    samples = np.asarray(samples, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if samples.ndim != 1 or samples.size < 2:
        raise ValueError("need at least two samples for a density estimate")
    sd = float(samples.std(ddof=1))
    if sd == 0.0:
        raise ValueError("samples have zero variance")
    h = 1.06 * sd * samples.size ** (-0.2)
    z = (grid[:, None] - samples[None, :]) / h
    return np.exp(-0.5 * z * z).sum(axis=1) / (
        samples.size * h * math.sqrt(2.0 * math.pi))


def make_fit_report(model: ModelSpec, pd: PosteriorDraws,
                    predictive_ps=(), include_draws: bool = True) -> FitReport:
    """Assemble the full report for one finished fit."""
    spec = model.family
    params = []
    for i, ps in enumerate(spec.params):
        col = pd.draws[:, i]
        params.append(ParamSummary(
            name=ps.name,
            mean=float(col.mean()),
            sd=float(col.std(ddof=1)),
            q05=float(np.quantile(col, 0.05)),
            q50=float(np.quantile(col, 0.50)),
            q95=float(np.quantile(col, 0.95)),
        ))
    predictive = tuple(
        predictive_quantile(pd, spec, p, model.obs.scale_divisor)
        for p in predictive_ps)
    return FitReport(
        family=spec.name,
        likelihood_kind=model.likelihood_kind,
        sigma_noise=model.sigma_noise,
        params=tuple(params),
        diag=diagnostics(pd),
        score=score_model(pd),
        predictive=predictive,
        obs=model.obs,
        seed=pd.seed,
        draws=pd if include_draws else None,
    )
