import numpy as np
import pytest

import kcprobe as kp
from kcprobe.errors import DimensionError, PreconditionError
from kcprobe.linalg import frobenius
from kcprobe.serialize import fingerprint, model_payload


class TestRandomModel:
    def test_commuting_by_construction(self):
        for seed in range(10):
            model = kp.random_model(seed, 2, 4, commuting=True)
            ok, worst = kp.is_commutative(model.hamiltonians)
            assert ok, worst

    def test_noncommuting_has_separated_commutator(self):
        for seed in range(10):
            model = kp.random_model(seed, 3, 3, commuting=False)
            _, worst = kp.is_commutative(model.hamiltonians)
            assert worst > 1e-6

    def test_bit_stable_determinism(self):
        a = kp.random_model(1234, 2, 3, commuting=True)
        b = kp.random_model(1234, 2, 3, commuting=True)
        for ha, hb in zip(a.hamiltonians, b.hamiltonians):
            assert np.array_equal(ha, hb)
        assert fingerprint(model_payload(a)) == fingerprint(model_payload(b))

    def test_dimension_limits(self):
        with pytest.raises(DimensionError):
            kp.random_model(0, 5, 2, commuting=True)
        with pytest.raises(DimensionError):
            kp.random_model(0, 2, 17, commuting=True)

    def test_haar_unitary_is_unitary(self):
        rng = np.random.default_rng(5)
        u = kp.haar_unitary(6, rng)
        assert frobenius(u.conj().T @ u - np.eye(6)) <= 1e-12


class TestNVModel:
    def test_zero_field_is_commutative(self):
        model = kp.nv_center_model(1, 0.0, 0.0, (0.4, 0.3, 0.2))
        ok, _ = kp.is_commutative(model.hamiltonians)
        assert ok
        assert frobenius(model.hamiltonians[0]) == 0.0

    def test_no_transverse_coupling_is_commutative(self):
        couplings = [[0.0, 0.0, 1.1], [0.0, 0.0, 0.7]]
        model = kp.nv_center_model(2, 1.5, 0.3, couplings)
        ok, _ = kp.is_commutative(model.hamiltonians)
        assert ok

    def test_transverse_coupling_commutator_norm(self):
        model = kp.nv_center_model(1, 1.0, 0.0, (1.0, 0.0, 0.0))
        _, worst = kp.is_commutative(model.hamiltonians)
        assert worst == pytest.approx(np.sqrt(2.0) / 2.0, abs=1e-12)

    def test_splitting_never_affects_commutativity(self):
        for splitting in (0.0, 3.7):
            model = kp.nv_center_model(1, 1.0, splitting, (1.0, 0.0, 0.0))
            _, worst = kp.is_commutative(model.hamiltonians)
            assert worst == pytest.approx(np.sqrt(2.0) / 2.0, abs=1e-12)

    def test_dimension_scaling_and_limits(self):
        model = kp.nv_center_model(3, 0.5, 0.0, np.ones((3, 3)))
        assert model.system_dim == 8
        with pytest.raises(DimensionError):
            kp.nv_center_model(6, 0.5, 0.0, np.ones((6, 3)))


class TestClassicalNoise:
    def test_quarter_turn_effects(self):
        realization = kp.NoiseRealization((np.pi / 4,), (1.0,))
        protocol = kp.classical_noise_model(realization, 1)
        effects = protocol.step_measurements[0].effects
        assert effects[0][0, 0].real == pytest.approx(0.5, abs=1e-12)
        assert effects[1][0, 0].real == pytest.approx(0.5, abs=1e-12)

    def test_zero_phase_effects(self):
        realization = kp.NoiseRealization((0.0,), (1.0,))
        protocol = kp.classical_noise_model(realization, 1)
        effects = protocol.step_measurements[0].effects
        assert effects[0][0, 0].real == pytest.approx(1.0)
        assert effects[1][0, 0].real == pytest.approx(0.0, abs=1e-15)

    def test_kraus_scalars_match_trig_values(self):
        realization = kp.random_noise_realization(17, 4)
        protocol = kp.classical_noise_model(realization, 4)
        for alpha, measurement in zip(realization.phases(), protocol.step_measurements):
            assert measurement.kraus[0][0, 0] == pytest.approx(np.cos(alpha), abs=1e-12)
            assert measurement.kraus[1][0, 0] == pytest.approx(-1j * np.sin(alpha), abs=1e-12)

    def test_every_realization_is_consistent(self):
        for seed in range(10):
            realization = kp.random_noise_realization(seed, 4)
            protocol = kp.classical_noise_model(realization, 4)
            report = kp.check_kc_all(protocol, 4)
            assert report.consistent
            assert report.max_operator_defect <= 1e-10

    def test_needs_enough_segments(self):
        realization = kp.random_noise_realization(0, 2)
        with pytest.raises(PreconditionError):
            kp.classical_noise_model(realization, 3)


class TestNoiseEnsemble:
    def test_single_realization_matches_direct_distribution(self):
        realization = kp.random_noise_realization(3, 3)
        rho = np.array([[1.0]], dtype=complex)
        direct = kp.full_distribution(kp.classical_noise_model(realization, 3), rho, 3)
        averaged = kp.noise_ensemble_average([realization], [1.0], 3)
        for seq, p in direct.table.items():
            assert averaged.table[seq] == pytest.approx(p, abs=1e-15)

    def test_two_point_mixture_single_step(self):
        quiet = kp.NoiseRealization((0.0,), (1.0,))
        loud = kp.NoiseRealization((np.pi / 2,), (1.0,))
        averaged = kp.noise_ensemble_average([quiet, loud], [0.5, 0.5], 1)
        assert averaged.table[(0,)] == pytest.approx(0.5, abs=1e-12)

    def test_mixture_normalization_and_consistency(self):
        rng = np.random.default_rng(9)
        realizations = [kp.random_noise_realization(int(s), 4) for s in rng.integers(0, 1 << 30, 5)]
        weights = rng.uniform(0.2, 1.0, size=5)
        weights = weights / weights.sum()
        dist = kp.noise_ensemble_average(realizations, weights, 4)
        assert dist.total() == pytest.approx(1.0, abs=1e-10)
        assert kp.ensemble_kc_max_defect(realizations, weights, 4) <= 1e-10

    def test_weights_must_normalize(self):
        realization = kp.random_noise_realization(0, 2)
        with pytest.raises(PreconditionError):
            kp.noise_ensemble_average([realization], [0.9], 2)


class TestCounterexampleSearch:
    def test_canonical_instance_is_found(self):
        # the sigma_z/sigma_x X-axis effects stay proportional to the
        # identity at every step time, so each grid point qualifies
        model = kp.degenerate_qubit_instance()
        findings = kp.counterexample_search(
            0, 1, t_grid=(np.pi / 4, np.pi / 2), include=[(model, "X")]
        )
        canonical = [f for f in findings if f.source == "include"]
        assert [f.step_time for f in canonical] == pytest.approx([np.pi / 4, np.pi / 2])
        for f in canonical:
            assert f.max_effect_gap <= 1e-10
            assert f.max_operator_defect <= 1e-10
            assert f.generator_commutator == pytest.approx(2 * np.sqrt(2.0))

    def test_commuting_ensemble_yields_nothing(self):
        findings = kp.counterexample_search(7, 25, commuting=True)
        assert findings == []

    def test_zero_trials_rejected(self):
        with pytest.raises(PreconditionError):
            kp.counterexample_search(0, 0)


class TestScenarioSpec:
    def test_build_random(self):
        spec = kp.ScenarioSpec("random", 5, {"probe_dim": 2, "system_dim": 3, "commuting": True})
        model = kp.build_scenario(spec)
        assert model.system_dim == 3
        again = kp.build_scenario(spec)
        assert fingerprint(model_payload(model)) == fingerprint(model_payload(again))

    def test_build_nv_and_noise(self):
        nv = kp.build_scenario(
            kp.ScenarioSpec("nv", 0, {"n_nuclei": 1, "omega": 1.0, "couplings": [[1, 0, 0]]})
        )
        assert nv.probe_dim == 2
        noise = kp.build_scenario(kp.ScenarioSpec("classical_noise", 3, {"n_segments": 4}))
        assert noise.n_steps == 4

    def test_unknown_kind(self):
        with pytest.raises(PreconditionError):
            kp.build_scenario(kp.ScenarioSpec("exotic", 0, {}))
