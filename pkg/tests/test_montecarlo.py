"""Tests for the simulation harness.

These use small replicate counts; the full-scale runs specified for
acceptance live in test_acceptance.py.
"""

import numpy as np
import pytest

from pcreg.errors import ValidationError
from pcreg.linalg import svd_thin
from pcreg.montecarlo import (
    SimulationConfig,
    adjudicate_rss_dof,
    run_simulation,
    theory_comparison,
)


def design(seed=101, n=60, p=4):
    return np.random.default_rng(seed).standard_normal((n, p))


def config(**kw):
    x = kw.pop("x", design())
    defaults = dict(
        x=x,
        beta_true=np.zeros(x.shape[1]),
        sigma2_true=1.0,
        d=2,
        replicates=200,
        seed=7,
    )
    defaults.update(kw)
    return SimulationConfig(**defaults)


class TestSimulationConfig:
    def test_replicate_floor(self):
        with pytest.raises(ValidationError, match="replicates"):
            config(replicates=99)

    def test_sigma2_positive(self):
        with pytest.raises(ValidationError, match="sigma2"):
            config(sigma2_true=0.0)

    def test_d_bounds(self):
        with pytest.raises(ValidationError, match="d must"):
            config(d=5)

    def test_beta_shape(self):
        with pytest.raises(ValidationError, match="beta_true"):
            config(beta_true=np.zeros(3))


class TestRunSimulation:
    def test_reproducible_bit_identical(self):
        cfg = config()
        a, b = run_simulation(cfg), run_simulation(cfg)
        assert a.mean_beta_d.tobytes() == b.mean_beta_d.tobytes()
        assert a.empirical_cov_beta_d.tobytes() == b.empirical_cov_beta_d.tobytes()
        assert a.mean_sigma2_d == b.mean_sigma2_d
        assert a.mean_rss_d == b.mean_rss_d

    def test_seed_changes_output(self):
        a = run_simulation(config(seed=1))
        b = run_simulation(config(seed=2))
        assert a.mean_sigma2_d != b.mean_sigma2_d

    def test_no_omitted_signal_recovers_truth(self):
        x = design(5, 80, 4)
        f = svd_thin(x)
        beta = f.v[:, :2] @ np.array([3.0, -2.0])  # truth entirely retained
        res = run_simulation(config(x=x, beta_true=beta, d=2, replicates=400, seed=11))
        np.testing.assert_allclose(res.predicted_mean_beta_d, beta, atol=1e-10)
        gap = np.abs(res.mean_beta_d - beta)
        assert np.all(gap <= 4.0 * res.mcse_beta_d)
        assert abs(res.predicted_bias_nd_dof) <= 1e-12
        assert abs(res.mean_sigma2_d - 1.0) <= 4.0 * res.mcse_sigma2_d

    def test_full_d_unbiased_for_sigma2(self):
        x = design(6, 50, 3)
        beta = np.array([1.0, 0.5, -0.25])
        res = run_simulation(config(x=x, beta_true=beta, d=3, replicates=400, seed=21))
        assert abs(res.mean_sigma2_d - 1.0) <= 4.0 * res.mcse_sigma2_d
        assert res.predicted_rss_nd_dof == res.predicted_rss_np_dof  # n-d == n-p at d=p

    def test_empirical_cov_symmetric_psd(self):
        res = run_simulation(config(replicates=150))
        emp = res.empirical_cov_beta_d
        np.testing.assert_allclose(emp, emp.T, atol=1e-14)
        assert np.min(np.linalg.eigvalsh(emp)) >= -1e-12


class TestTheoryComparison:
    def test_row_set_small_run(self):
        res = run_simulation(config(replicates=200))
        rows = theory_comparison(res)
        claims = [row.claim for row in rows]
        assert claims.count("mean_rss_d (n-d dof)") == 1
        assert claims.count("mean_rss_d (n-p dof)") == 1
        assert sum(c.startswith("mean_beta_d[") for c in claims) == 4
        # covariance row needs >= 1000 replicates
        assert not any("Frobenius" in c for c in claims)

    def test_covariance_row_at_scale(self):
        res = run_simulation(config(replicates=1000))
        rows = theory_comparison(res)
        frob = [row for row in rows if "Frobenius" in row.claim]
        assert len(frob) == 1
        assert frob[0].predicted == 0.0 and np.isnan(frob[0].z)

    def test_dof_variant_rows_are_recorded_not_asserted(self):
        res = run_simulation(config(replicates=200))
        roles = {row.claim: row.asserted for row in theory_comparison(res)}
        assert roles["mean_rss_d (n-d dof)"] is True
        assert roles["mean_rss_d (n-p dof)"] is False
        assert roles["bias_sigma2_d (n-p dof)"] is False

    def test_adjudication_prefers_nd_dof(self):
        # truth placed on the omitted components so the two predictions
        # separate by sigma2 * (p - d); the trace-derived n-d form should win
        x = design(9, 100, 5)
        f = svd_thin(x)
        coeff = np.sqrt(50.0 / 3.0) / f.sigma[2:]
        beta = f.v[:, 2:] @ coeff
        res = run_simulation(config(x=x, beta_true=beta, d=2, replicates=2000, seed=33))
        adj = adjudicate_rss_dof(res)
        assert adj["winner"] == "n-d"
        assert abs(adj["z_nd"]) <= 4.0
        assert abs(adj["z_np"]) > 4.0
