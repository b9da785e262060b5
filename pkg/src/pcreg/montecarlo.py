"""Seeded simulation harness for the component-regression estimators.

Generates ``y = X beta + eps`` with known ground truth, fits the
component regression per replicate, and compares the aggregates against
the closed-form predictions for the estimator mean, covariance, and the
residual-variance bias.  Two bias predictions are tracked side by side,
differing in the degrees-of-freedom constant booked for the error term:
the trace-derived ``E(RSS_d) = sigma2 (n - d) + omitted quad form`` and
the alternative with ``n - p`` in place of ``n - d``; the adjudication
between them is part of the output.

Replicate streams come from a counter-based generator (numpy Philox,
one ``jumped`` stream per replicate index), so results depend only on
``(seed, replicate)`` and never on execution order; aggregation reduces
over replicate-indexed arrays, keeping output bits independent of any
parallel scheduling of the replicates themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PcregError, ValidationError
from .linalg import ComponentSplit, gram_pseudo_inverse, svd_thin
from .model import Dataset, fit_pcr

GENERATOR_NAME = "numpy-philox-jumped-per-replicate"

MIN_REPLICATES = 100
# Covariance rows need enough replicates for a meaningful matrix estimate.
COVARIANCE_MIN_REPLICATES = 1000


@dataclass(frozen=True)
class SimulationConfig:
    """Fixed-design simulation setup with known truth.

    The design is held fixed across replicates (inference conditional on
    X); errors are drawn iid normal with variance ``sigma2_true``, which
    is the assumption under which the stated sampling distributions hold.
    """

    x: np.ndarray
    beta_true: np.ndarray
    sigma2_true: float
    d: int
    replicates: int
    seed: int

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float)
        beta = np.array(self.beta_true, dtype=float)
        if x.ndim != 2:
            raise ValidationError(f"design must be 2-d, got ndim={x.ndim}")
        n, p = x.shape
        if n <= p:
            raise ValidationError(f"need n > p, got n={n}, p={p}")
        if beta.shape != (p,):
            raise ValidationError(f"beta_true must have shape ({p},), got {beta.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(beta))):
            raise ValidationError("design or truth contains non-finite values")
        if not self.sigma2_true > 0:
            raise ValidationError(f"sigma2_true must be positive, got {self.sigma2_true}")
        if not 1 <= self.d <= p:
            raise ValidationError(f"d must lie in 1..{p}, got {self.d}")
        if self.replicates < MIN_REPLICATES:
            raise ValidationError(
                f"replicates must be >= {MIN_REPLICATES}, got {self.replicates}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "beta_true", beta)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class SimulationResult:
    """Aggregates over replicates next to their closed-form predictions."""

    config: SimulationConfig
    mean_sigma2_d: float
    mean_rss_d: float
    mean_beta_d: np.ndarray
    empirical_cov_beta_d: np.ndarray
    predicted_mean_beta_d: np.ndarray
    predicted_cov: np.ndarray
    predicted_bias_nd_dof: float
    predicted_bias_np_dof: float
    predicted_rss_nd_dof: float
    predicted_rss_np_dof: float
    mcse_sigma2_d: float
    mcse_rss_d: float
    mcse_beta_d: np.ndarray
    generator: str = GENERATOR_NAME


@dataclass(frozen=True)
class TheoryRow:
    """One predicted-versus-observed comparison with its z-score.

    ``asserted`` rows are claims the theory says must match (alerting
    material); recorded rows exist for side-by-side comparison, like the
    n-p dof variant, and deviate by design whenever signal sits on the
    omitted components.
    """

    claim: str
    predicted: float
    observed: float
    mcse: float
    z: float
    asserted: bool = True


def _replicate_rng(seed: int, index: int) -> np.random.Generator:
    # Each replicate gets its own non-overlapping Philox stream.
    return np.random.Generator(np.random.Philox(key=seed).jumped(index))


def run_simulation(cfg: SimulationConfig) -> SimulationResult:
    """Run the configured replicates and aggregate.

    Per replicate r the error vector is drawn from the (seed, r) stream,
    the component regression is fitted, and the retained-slope vector and
    residual variance are recorded.  Fit errors propagate annotated with
    the replicate index.
    """
    f = svd_thin(cfg.x)
    n, p, d = cfg.n, cfg.p, cfg.d
    split = ComponentSplit(d=d, p=p)
    mu = cfg.x @ cfg.beta_true
    sd = math.sqrt(cfg.sigma2_true)
    names = tuple(f"x{j + 1}" for j in range(p))

    reps = cfg.replicates
    sigma2_d_draws = np.empty(reps)
    rss_d_draws = np.empty(reps)
    beta_d_draws = np.empty((reps, p))
    for r in range(reps):
        y = mu + sd * _replicate_rng(cfg.seed, r).standard_normal(n)
        data = Dataset(y=y, x=cfg.x, names=names)
        try:
            pcr = fit_pcr(data, d, factors=f)
        except PcregError as exc:
            raise type(exc)(f"replicate {r}: {exc}") from exc
        sigma2_d_draws[r] = pcr.sigma2_d
        rss_d_draws[r] = pcr.rss_d
        beta_d_draws[r, :] = pcr.beta_d

    # Ground-truth decomposition of beta over retained/omitted loadings.
    beta_k_true = f.v[:, d:] @ (f.v[:, d:].T @ cfg.beta_true)
    beta_d_true = cfg.beta_true - beta_k_true
    omitted_quad = float(np.sum((f.sigma[d:] * (f.v[:, d:].T @ cfg.beta_true)) ** 2))

    sigma2_d_pop = (cfg.sigma2_true * (n - d) + omitted_quad) / (n - d)
    predicted_cov = gram_pseudo_inverse(f, split.retained) * sigma2_d_pop

    root = math.sqrt(reps)
    return SimulationResult(
        config=cfg,
        mean_sigma2_d=float(np.mean(sigma2_d_draws)),
        mean_rss_d=float(np.mean(rss_d_draws)),
        mean_beta_d=np.mean(beta_d_draws, axis=0),
        empirical_cov_beta_d=np.cov(beta_d_draws, rowvar=False, ddof=1),
        predicted_mean_beta_d=beta_d_true,
        predicted_cov=predicted_cov,
        predicted_bias_nd_dof=omitted_quad / (n - d),
        predicted_bias_np_dof=((n - p) / (n - d) - 1.0) * cfg.sigma2_true
        + omitted_quad / (n - d),
        predicted_rss_nd_dof=cfg.sigma2_true * (n - d) + omitted_quad,
        predicted_rss_np_dof=cfg.sigma2_true * (n - p) + omitted_quad,
        mcse_sigma2_d=float(np.std(sigma2_d_draws, ddof=1)) / root,
        mcse_rss_d=float(np.std(rss_d_draws, ddof=1)) / root,
        mcse_beta_d=np.std(beta_d_draws, axis=0, ddof=1) / root,
    )


def _z(observed: float, predicted: float, mcse: float) -> float:
    if mcse == 0.0:
        return 0.0 if observed == predicted else math.inf
    return (observed - predicted) / mcse


def theory_comparison(res: SimulationResult) -> list[TheoryRow]:
    """Tabulate every tracked claim as (predicted, observed, MCSE, z).

    The n-p dof variants are included as recorded (non-asserted) rows so
    the adjudication stays visible without flagging an expected
    deviation.  The covariance claim is summarized by its relative
    Frobenius distance (z is not applicable there and is reported as
    nan); it is included only when the run had at least 1000 replicates.
    """
    cfg = res.config
    rows: list[TheoryRow] = []
    for j in range(cfg.p):
        rows.append(
            TheoryRow(
                claim=f"mean_beta_d[{j}]",
                predicted=float(res.predicted_mean_beta_d[j]),
                observed=float(res.mean_beta_d[j]),
                mcse=float(res.mcse_beta_d[j]),
                z=_z(res.mean_beta_d[j], res.predicted_mean_beta_d[j], res.mcse_beta_d[j]),
            )
        )
    for label, predicted, asserted in (
        ("mean_rss_d (n-d dof)", res.predicted_rss_nd_dof, True),
        ("mean_rss_d (n-p dof)", res.predicted_rss_np_dof, False),
    ):
        rows.append(
            TheoryRow(
                claim=label,
                predicted=predicted,
                observed=res.mean_rss_d,
                mcse=res.mcse_rss_d,
                z=_z(res.mean_rss_d, predicted, res.mcse_rss_d),
                asserted=asserted,
            )
        )
    observed_bias = res.mean_sigma2_d - cfg.sigma2_true
    for label, predicted, asserted in (
        ("bias_sigma2_d (n-d dof)", res.predicted_bias_nd_dof, True),
        ("bias_sigma2_d (n-p dof)", res.predicted_bias_np_dof, False),
    ):
        rows.append(
            TheoryRow(
                claim=label,
                predicted=predicted,
                observed=observed_bias,
                mcse=res.mcse_sigma2_d,
                z=_z(observed_bias, predicted, res.mcse_sigma2_d),
                asserted=asserted,
            )
        )
    if cfg.replicates >= COVARIANCE_MIN_REPLICATES:
        dist = float(
            np.linalg.norm(res.empirical_cov_beta_d - res.predicted_cov)
            / np.linalg.norm(res.predicted_cov)
        )
        rows.append(
            TheoryRow(
                claim="cov_beta_d relative Frobenius distance",
                predicted=0.0,
                observed=dist,
                mcse=float("nan"),
                z=float("nan"),
            )
        )
    return rows


def adjudicate_rss_dof(res: SimulationResult) -> dict:
    """Which degrees-of-freedom variant does the simulated mean RSS back?

    Compares the observed mean against both predictions and names the one
    with the smaller absolute z-score.
    """
    z_nd = _z(res.mean_rss_d, res.predicted_rss_nd_dof, res.mcse_rss_d)
    z_np = _z(res.mean_rss_d, res.predicted_rss_np_dof, res.mcse_rss_d)
    winner = "n-d" if abs(z_nd) <= abs(z_np) else "n-p"
    return {
        "winner": winner,
        "z_nd": z_nd,
        "z_np": z_np,
        "predicted_nd": res.predicted_rss_nd_dof,
        "predicted_np": res.predicted_rss_np_dof,
        "observed": res.mean_rss_d,
    }
