"""Principal component regression with a complete variance and bias ledger.

Estimators for the retained- and omitted-component slopes and residual
variances, the equivalent covariance formulations with their agreement
checks, a seeded Monte Carlo harness for the expectation-level claims,
and a CSV-driven command line (``pcreg``).
"""

from importlib import resources
from pathlib import Path

from .diagnostics import (
    CovarianceSet,
    DiagnosticsReport,
    bias_report,
    build_report,
    covariance_agreement,
    pcr_covariance,
    variance_recomposition_check,
)
from .errors import (
    ConvergenceError,
    DataFormatError,
    DegreesOfFreedomError,
    PcregError,
    RankDeficiencyError,
    ValidationError,
)
from .linalg import (
    ComponentSplit,
    SvdFactors,
    gram_pseudo_inverse,
    hat_matrix,
    loading_projector,
    svd_thin,
)
from .model import (
    Dataset,
    OlsEstimate,
    PcrEstimate,
    beta_additivity_check,
    fit_ols,
    fit_pcr,
    recover_ols_sigma2,
    sigma2_d_three_forms,
)
from .montecarlo import (
    SimulationConfig,
    SimulationResult,
    TheoryRow,
    adjudicate_rss_dof,
    run_simulation,
    theory_comparison,
)

__version__ = "0.1.0"


def fixture_path() -> Path:
    """Path of the bundled synthetic electricity-style CSV fixture."""
    return Path(str(resources.files(__package__) / "data" / "electricity_synthetic.csv"))


__all__ = [
    "ComponentSplit",
    "ConvergenceError",
    "CovarianceSet",
    "DataFormatError",
    "Dataset",
    "DegreesOfFreedomError",
    "DiagnosticsReport",
    "OlsEstimate",
    "PcrEstimate",
    "PcregError",
    "RankDeficiencyError",
    "SimulationConfig",
    "SimulationResult",
    "SvdFactors",
    "TheoryRow",
    "ValidationError",
    "adjudicate_rss_dof",
    "beta_additivity_check",
    "bias_report",
    "build_report",
    "covariance_agreement",
    "fit_ols",
    "fit_pcr",
    "fixture_path",
    "gram_pseudo_inverse",
    "hat_matrix",
    "loading_projector",
    "pcr_covariance",
    "recover_ols_sigma2",
    "run_simulation",
    "sigma2_d_three_forms",
    "svd_thin",
    "theory_comparison",
    "variance_recomposition_check",
]
