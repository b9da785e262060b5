"""Variance and bias diagnostics for component regressions.

Three equivalent covariance formulations for the retained-component slope
estimator, the recomposition identity splitting the OLS covariance into
retained and omitted contributions, and the bias ledger comparing the two
residual variance estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import SvdFactors, gram_pseudo_inverse, loading_projector
from .model import OlsEstimate, PcrEstimate

# Residual variances below this trip the degenerate path instead of
# producing infinite ratios.
RATIO_GUARD = 1e-300


@dataclass(frozen=True)
class CovarianceSet:
    """The covariance of the retained-component slopes, three ways.

    ``direct`` is the canonical pseudo-inverse form and is always present.
    ``scaled`` rescales the OLS covariance through the loading projector;
    ``difference`` subtracts the omitted-component contribution.  The
    latter two are verification artifacts and are dropped (None) on the
    degenerate paths: ``scaled`` requires a nonzero OLS residual variance,
    ``difference`` additionally requires d < p and a nonzero omitted-set
    variance.
    """

    direct: np.ndarray
    scaled: np.ndarray | None
    difference: np.ndarray | None
    degenerate: bool = False


@dataclass(frozen=True)
class DiagnosticsReport:
    """Per-fit comparison of PCR against OLS.

    ``exceeds_ols[j]`` is the strict comparison se_pcr[j] > se_ols[j] and
    mirrors the bolding convention of tabulated comparisons.  A degenerate
    report (zero OLS residual variance) carries ``inflation_ratio = nan``.
    """

    inflation_ratio: float
    loading_diag: np.ndarray
    se_ols: np.ndarray
    se_pcr: np.ndarray
    exceeds_ols: np.ndarray
    bias_beta: np.ndarray
    bias_sigma2_plugin: float
    degenerate: bool = False


def covariance_agreement(covs: CovarianceSet) -> float:
    """Max absolute entrywise gap between the available covariance forms.

    Zero when only the direct form is present.  Contract for full-rank
    fits: <= 1e-8 * (1 + max diagonal of the direct form).
    """
    forms = [covs.direct]
    if covs.scaled is not None:
        forms.append(covs.scaled)
    if covs.difference is not None:
        forms.append(covs.difference)
    worst = 0.0
    for a in range(len(forms)):
        for b in range(a + 1, len(forms)):
            worst = max(worst, float(np.max(np.abs(forms[a] - forms[b]))))
    return worst


def pcr_covariance(f: SvdFactors, ols: OlsEstimate, pcr: PcrEstimate) -> CovarianceSet:
    """Covariance of the retained-component slopes in all applicable forms.

    direct     = V_d Sigma_d^-2 V_d^T * sigma2_d
    scaled     = cov_ols V_d V_d^T * (sigma2_d / sigma2)
    difference = {cov_ols - (sigma2 / sigma2_k) var(beta_k)} * (sigma2_d / sigma2)

    A zero OLS residual variance makes the ratios undefined, so only the
    direct form is returned, flagged degenerate.  At d = p the difference
    form is omitted (there is no omitted set) and direct = scaled = the
    OLS covariance.
    """
    split = pcr.split
    direct = gram_pseudo_inverse(f, split.retained) * pcr.sigma2_d
    if ols.sigma2 < RATIO_GUARD:
        return CovarianceSet(direct=direct, scaled=None, difference=None, degenerate=True)
    ratio = pcr.sigma2_d / ols.sigma2
    scaled = ols.cov @ loading_projector(f, split.retained) * ratio
    if split.k == 0:
        return CovarianceSet(direct=direct, scaled=scaled, difference=None)
    if pcr.sigma2_k < RATIO_GUARD:
        return CovarianceSet(direct=direct, scaled=scaled, difference=None, degenerate=True)
    var_beta_k = gram_pseudo_inverse(f, split.omitted) * pcr.sigma2_k
    difference = (ols.cov - (ols.sigma2 / pcr.sigma2_k) * var_beta_k) * ratio
    return CovarianceSet(direct=direct, scaled=scaled, difference=difference)


def variance_recomposition_check(
    f: SvdFactors, ols: OlsEstimate, pcr: PcrEstimate
) -> float:
    """Max absolute gap in rebuilding the OLS covariance from both blocks.

    Checks cov_ols = var(beta_d) sigma2/sigma2_d + var(beta_k) sigma2/sigma2_k
    with both variances in their direct forms.  Requires 1 <= d < p and
    nonzero residual variances.  Contract: <= 1e-8 * (1 + max diagonal).
    """
    split = pcr.split
    if split.k == 0:
        raise ValidationError("recomposition needs at least one omitted component (d < p)")
    if pcr.sigma2_d < RATIO_GUARD or pcr.sigma2_k < RATIO_GUARD:
        raise ValidationError("recomposition undefined for a zero residual variance")
    direct_d = gram_pseudo_inverse(f, split.retained) * pcr.sigma2_d
    direct_k = gram_pseudo_inverse(f, split.omitted) * pcr.sigma2_k
    rebuilt = direct_d * (ols.sigma2 / pcr.sigma2_d) + direct_k * (ols.sigma2 / pcr.sigma2_k)
    return float(np.max(np.abs(ols.cov - rebuilt)))


def bias_report(
    ols: OlsEstimate, pcr: PcrEstimate, x: np.ndarray
) -> tuple[np.ndarray, float]:
    """Plug-in bias estimates for the component regression.

    Returns the omitted-space slopes (the slope-bias estimate) and the
    plug-in evaluation of the residual-variance bias,

        ((n - p)/(n - d) - 1) sigma2 + (beta - beta_d)^T X^T X (beta - beta_d) / (n - d),

    which collapses to ``sigma2_d - sigma2`` exactly (1e-10 relative).
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    d = pcr.split.d
    delta = ols.beta - pcr.beta_d
    quad = float(delta @ (x.T @ x) @ delta)
    plugin = ((n - p) / (n - d) - 1.0) * ols.sigma2 + quad / (n - d)
    return pcr.beta_k.copy(), plugin


def build_report(f: SvdFactors, ols: OlsEstimate, pcr: PcrEstimate) -> DiagnosticsReport:
    """Assemble the per-coefficient comparison report.

    Standard errors come from the covariance diagonals (direct form for
    PCR); the exceedance flags use the strict inequality.
    """
    covs = pcr_covariance(f, ols, pcr)
    se_ols = np.sqrt(np.diag(ols.cov))
    se_pcr = np.sqrt(np.diag(covs.direct))
    degenerate = ols.sigma2 < RATIO_GUARD
    inflation = float("nan") if degenerate else pcr.sigma2_d / ols.sigma2
    # X^T X reconstructed from the factors for the plug-in bias.
    gram = (f.v * f.sigma**2) @ f.v.T
    delta = ols.beta - pcr.beta_d
    quad = float(delta @ gram @ delta)
    n, p, d = f.n, f.p, pcr.split.d
    plugin = ((n - p) / (n - d) - 1.0) * ols.sigma2 + quad / (n - d)
    return DiagnosticsReport(
        inflation_ratio=inflation,
        loading_diag=np.diag(loading_projector(f, pcr.split.retained)).copy(),
        se_ols=se_ols,
        se_pcr=se_pcr,
        exceeds_ols=se_pcr > se_ols,
        bias_beta=pcr.beta_k.copy(),
        bias_sigma2_plugin=plugin,
        degenerate=degenerate,
    )
