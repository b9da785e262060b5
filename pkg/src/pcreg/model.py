"""OLS and principal component regression estimators.

Slope vectors, residual variances, and the exact algebraic identities
tying the two fits together.  All fitting goes through the SVD route of
:mod:`pcreg.linalg`; every function is pure, so fits on distinct datasets
can run concurrently without shared state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegreesOfFreedomError, RankDeficiencyError, ValidationError
from .linalg import ComponentSplit, SvdFactors, gram_pseudo_inverse, svd_thin


@dataclass(frozen=True)
class Dataset:
    """Response vector and design matrix, with column labels.

    The design matrix contains the intercept column when one is used; set
    ``intercept_included`` accordingly so downstream standardization can
    exempt it.  Construction validates that all values are finite, that
    n > p, and (when flagged) that exactly one all-ones column exists and
    sits first.
    """

    y: np.ndarray
    x: np.ndarray
    names: tuple[str, ...] | None = None
    intercept_included: bool = False

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 2:
            raise ValidationError(f"design matrix must be 2-d, got ndim={x.ndim}")
        n, p = x.shape
        if y.shape != (n,):
            raise ValidationError(f"response must have shape ({n},), got {y.shape}")
        if n <= p:
            raise DegreesOfFreedomError(
                f"need more observations than design columns: n={n}, p={p}"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("dataset contains non-finite values")
        names = self.names
        if names is None:
            names = tuple(f"x{j + 1}" for j in range(p))
        else:
            names = tuple(str(c) for c in names)
            if len(names) != p:
                raise ValidationError(f"expected {p} column names, got {len(names)}")
        if self.intercept_included:
            ones = np.all(x == 1.0, axis=0)
            if ones.sum() != 1 or not ones[0]:
                raise ValidationError(
                    "intercept_included requires exactly one all-ones column, in position 0"
                )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class OlsEstimate:
    """Ordinary least squares fit: slopes, residual variance, covariance."""

    beta: np.ndarray
    sigma2: float
    cov: np.ndarray
    rss: float
    dof: int


@dataclass(frozen=True)
class PcrEstimate:
    """Principal component regression fit for a given retained count d.

    ``beta_pc_d`` are the d score-space coefficients, ``beta_d`` their
    rotation back to predictor space (in span of the retained loadings),
    ``beta_k`` the complementary omitted-space slopes.  ``sigma2_q`` holds
    the residual variance of the single-component regression for every
    component, omitted ones included.
    """

    split: ComponentSplit
    beta_pc_d: np.ndarray
    beta_d: np.ndarray
    beta_k: np.ndarray
    sigma2_d: float
    sigma2_k: float
    sigma2_q: np.ndarray
    rss_d: float


def _checked_factors(data: Dataset, factors: SvdFactors | None) -> SvdFactors:
    f = factors if factors is not None else svd_thin(data.x)
    if f.u.shape != data.x.shape:
        raise ValidationError(
            f"factors shape {f.u.shape} does not match design shape {data.x.shape}"
        )
    cutoff = f.rank_cutoff
    near_zero = np.flatnonzero(f.sigma <= cutoff)
    if near_zero.size:
        pairs = ", ".join(f"{q}: {f.sigma[q]:.3e}" for q in near_zero.tolist())
        raise RankDeficiencyError(
            f"design is rank deficient at tolerance {cutoff:.3e}; "
            f"near-zero singular value(s) {pairs}"
        )
    return f


def fit_ols(data: Dataset, factors: SvdFactors | None = None) -> OlsEstimate:
    """Fit ordinary least squares through the SVD route.

    ``beta = V Sigma^-1 U^T y``, residual variance ``rss / (n - p)``, and
    covariance ``(X^T X)^-1 sigma2`` via the Gram pseudo-inverse.  Requires
    full column rank; pass precomputed ``factors`` to skip the SVD.
    """
    f = _checked_factors(data, factors)
    n, p = data.x.shape
    scores = f.u.T @ data.y
    beta = f.v @ (scores / f.sigma)
    resid = data.y - data.x @ beta
    rss = float(resid @ resid)
    dof = n - p
    sigma2 = rss / dof
    cov = gram_pseudo_inverse(f, "all") * sigma2
    return OlsEstimate(beta=beta, sigma2=sigma2, cov=cov, rss=rss, dof=dof)


def fit_pcr(data: Dataset, d: int, factors: SvdFactors | None = None) -> PcrEstimate:
    """Fit the principal component regression that retains the d leading components.

    Returns score-space coefficients ``U_d^T y``, both slope blocks, the
    residual variances of the d-, k-, and every single-component
    regression (divisors n-d, n-k, and n-1).  ``d = p`` is allowed and
    reproduces the OLS fit.
    """
    f = _checked_factors(data, factors)
    n, p = data.x.shape
    split = ComponentSplit(d=d, p=p)
    y = data.y

    scores = f.u.T @ y
    beta_pc_d = scores[: split.d]
    beta_d = f.v[:, : split.d] @ (beta_pc_d / f.sigma[: split.d])
    beta_k = f.v[:, split.d :] @ (scores[split.d :] / f.sigma[split.d :])

    resid_d = y - f.u[:, : split.d] @ beta_pc_d
    rss_d = float(resid_d @ resid_d)
    resid_k = y - f.u[:, split.d :] @ scores[split.d :]
    rss_k = float(resid_k @ resid_k)

    # Residuals of the p single-component regressions, one column each.
    resid_q = y[:, None] - f.u * scores
    rss_q = np.sum(resid_q * resid_q, axis=0)

    return PcrEstimate(
        split=split,
        beta_pc_d=beta_pc_d,
        beta_d=beta_d,
        beta_k=beta_k,
        sigma2_d=rss_d / (n - split.d),
        sigma2_k=rss_k / (n - split.k),
        sigma2_q=rss_q / (n - 1),
        rss_d=rss_d,
    )


def beta_additivity_check(ols: OlsEstimate, pcr: PcrEstimate) -> float:
    """Max absolute gap in the decomposition ``beta = beta_d + beta_k``.

    Both fits must come from the same dataset; the gap is zero up to
    rounding (contract: <= 1e-10 * (1 + max |beta|)).
    """
    if ols.beta.shape != pcr.beta_d.shape:
        raise ValidationError(
            f"slope length mismatch: OLS has {ols.beta.shape[0]}, "
            f"PCR has {pcr.beta_d.shape[0]}"
        )
    return float(np.max(np.abs(ols.beta - (pcr.beta_d + pcr.beta_k))))


def recover_ols_sigma2(
    data: Dataset, pcr: PcrEstimate, factors: SvdFactors | None = None
) -> float:
    """Recover the OLS residual variance from PCR quantities alone.

    Evaluates ``(sigma2_d * (n - d) - y^T H_k y) / (n - p)``, which equals
    the OLS estimate exactly because ``RSS_d = RSS + y^T H_k y``.
    """
    f = _checked_factors(data, factors)
    n, p = data.x.shape
    d = pcr.split.d
    scores_k = f.u[:, d:].T @ data.y
    y_hk_y = float(scores_k @ scores_k)
    return (pcr.sigma2_d * (n - d) - y_hk_y) / (n - p)


def sigma2_d_three_forms(
    data: Dataset,
    pcr: PcrEstimate,
    ols: OlsEstimate | None = None,
    factors: SvdFactors | None = None,
) -> tuple[float, float, float]:
    """The PCR residual variance written three equivalent ways.

    form1 rebuilds it from the OLS and omitted-set variances, form2 from
    the omitted single-component variances, form3 from the retained ones.
    All three equal ``sigma2_d`` up to rounding (contract: 1e-10 relative).
    """
    if ols is None:
        ols = fit_ols(data, factors=factors)
    n, p = data.x.shape
    d, k = pcr.split.d, pcr.split.k
    yty = float(data.y @ data.y)
    omitted_sum = float(np.sum(pcr.sigma2_q[d:]))
    retained_sum = float(np.sum(pcr.sigma2_q[:d]))
    form1 = (ols.sigma2 * (n - p) + yty - pcr.sigma2_k * (n - p + d)) / (n - d)
    form2 = (ols.sigma2 * (n - p) + yty * k - (n - 1) * omitted_sum) / (n - d)
    form3 = ((n - 1) * retained_sum - yty * (d - 1)) / (n - d)
    return form1, form2, form3


def default_names(p: int, prefix: str = "x") -> tuple[str, ...]:
    """Generated column labels x1..xp for synthetic designs."""
    return tuple(f"{prefix}{j + 1}" for j in range(p))


__all__ = [
    "Dataset",
    "OlsEstimate",
    "PcrEstimate",
    "fit_ols",
    "fit_pcr",
    "beta_additivity_check",
    "recover_ols_sigma2",
    "sigma2_d_three_forms",
    "default_names",
]
