import numpy as np
import pytest

from tdmv.errors import DegenerateConstraintError, ValidationError
from tdmv.estimation import p_transform, sample_autocov_array
from tdmv.mclab import ExperimentConfig, aggregate_strategies, run_alpha_sweep
from tdmv.model import AutoCovMatrix, Layer, ProcessSpec, Provenance, Strategy
from tdmv.optimizer import global_minimum_strategy
from tdmv.procgen import ar1_filter, closed_form_global_strategy
from tdmv.rng import make_rng


class TestAggregate:
    def test_two_strategies(self):
        mean, std = aggregate_strategies([Strategy([1.0, 0.0], 1, 0), Strategy([0.0, 1.0], 1, 0)])
        assert mean.tolist() == [0.5, 0.5]
        np.testing.assert_allclose(std, np.sqrt(0.5), rtol=1e-15)

    def test_single(self):
        mean, std = aggregate_strategies([Strategy([0.3, 0.7], 1, 0)])
        assert mean.tolist() == [0.3, 0.7] and std.tolist() == [0.0, 0.0]

    def test_array_input(self):
        mean, std = aggregate_strategies(np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]))
        assert mean.tolist() == [3.0, 4.0] and std.tolist() == [2.0, 2.0]

    def test_empty(self):
        with pytest.raises(ValidationError):
            aggregate_strategies([])


class TestConfig:
    def test_roundtrip(self):
        cfg = ExperimentConfig(ProcessSpec.ar1(0.5), T=8, alphas=(0.5,), samples=3,
                               targets=(1e-3,), seed=4)
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_field(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.from_dict({"spec": {}, "bogus": 1})

    def test_M(self):
        assert ExperimentConfig(ProcessSpec.ar1(0.5), T=10).M(0.01) == 1000

    @pytest.mark.parametrize("kw", [{"samples": 0}, {"T": 2}, {"alphas": (20.0,)}])
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            ExperimentConfig(ProcessSpec.ar1(0.5), **kw)


class TestSweep:
    def test_single_sample_reproduces_manual_pipeline(self):
        spec = ProcessSpec.ar1(0.5, layer=Layer.INCREMENT)
        cfg = ExperimentConfig(spec, T=6, alphas=(0.2,), samples=1, seed=12)
        row = run_alpha_sweep(cfg).row(0.2)
        M = 30
        y = ar1_filter(make_rng(12, 0, 0).standard_normal(6 + M), 0.5)
        S = p_transform(AutoCovMatrix(sample_autocov_array(y, 6, M), Layer.INCREMENT,
                                      Provenance.SAMPLED, M))
        w = global_minimum_strategy(S).weights
        np.testing.assert_allclose(row.global_minimum.mean, w, rtol=0, atol=1e-14)
        assert row.global_minimum.std.tolist() == [0.0] * 6
        assert row.failures == 0

    def test_deterministic_and_thread_independent(self, monkeypatch):
        cfg = ExperimentConfig(ProcessSpec.ar1(0.8, drift_slope=1e-4), T=5, alphas=(0.5, 0.1),
                               samples=300,
                               targets=(1e-3,), seed=1)
        monkeypatch.setenv("TDMV_THREADS", "1")
        a = run_alpha_sweep(cfg).to_dict()
        monkeypatch.setenv("TDMV_THREADS", "4")
        b = run_alpha_sweep(cfg).to_dict()
        assert a == b
        assert "wall_clock" not in a

    def test_true_row(self):
        spec = ProcessSpec.ar1(0.8)
        rep = run_alpha_sweep(ExperimentConfig(spec, T=10, alphas=(0.5,), samples=2))
        np.testing.assert_allclose(rep.true_row.global_minimum.mean,
                                   closed_form_global_strategy(spec, 10).weights, atol=1e-12)
        assert rep.true_row.alpha == 0.0

    def test_singular_samples_are_failures(self):
        # M < T leaves the estimate rank deficient
        cfg = ExperimentConfig(ProcessSpec.ar1(0.5), T=10, alphas=(2.0,), samples=5)
        row = run_alpha_sweep(cfg).row(2.0)
        assert row.failures == 5 and row.failure_fraction == 1.0
        assert row.global_minimum is None

    def test_target_without_drift_rejected(self):
        cfg = ExperimentConfig(ProcessSpec.ar1(0.8), T=5, alphas=(0.5,), samples=2,
                               targets=(1e-3,))
        with pytest.raises(DegenerateConstraintError):
            run_alpha_sweep(cfg)

    def test_reestimated_drift_runs(self):
        spec = ProcessSpec.ar1(0.3, layer=Layer.INCREMENT, drift_slope=0.1)
        cfg = ExperimentConfig(spec, T=5, alphas=(0.1,), samples=20, targets=(0.5,),
                               reestimate_drift=True)
        row = run_alpha_sweep(cfg).row(0.1)
        assert row.failures == 0
        assert abs(row.targets[0].mean.sum() - 1) < 1e-10
