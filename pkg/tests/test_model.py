import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import kcprobe as kp
from kcprobe.errors import DimensionError, InvariantViolation, ProtocolError
from kcprobe.linalg import SIGMA_X, SIGMA_Y, SIGMA_Z, frobenius

from conftest import random_hermitian

I2 = np.eye(2, dtype=complex)


def trivial_model():
    zero = np.zeros((2, 2), dtype=complex)
    return kp.DephasingModel(2, 2, (zero, zero), 1.0)


class TestBuildConditionalHamiltonians:
    def test_commuting_pair(self):
        model = kp.build_conditional_hamiltonians(SIGMA_Z, SIGMA_Z, (0.0, 0.0), (0.0, 1.0))
        assert np.allclose(model.hamiltonians[0], SIGMA_Z)
        assert np.allclose(model.hamiltonians[1], 2.0 * SIGMA_Z)
        assert kp.is_commutative(model.hamiltonians)[0]

    def test_noncommuting_pair(self):
        model = kp.build_conditional_hamiltonians(SIGMA_Z, SIGMA_X, (0.0, 0.0), (0.0, 1.0))
        assert np.allclose(model.hamiltonians[1], SIGMA_Z + SIGMA_X)
        comm = kp.commutator(model.hamiltonians[0], model.hamiltonians[1])
        assert np.allclose(comm, 2j * SIGMA_Y)

    def test_scalar_multiples_of_identity(self):
        zero = np.zeros((2, 2))
        model = kp.build_conditional_hamiltonians(zero, SIGMA_X, (1.0, 2.0), (0.0, 0.0))
        assert np.allclose(model.hamiltonians[0], np.eye(2))
        assert np.allclose(model.hamiltonians[1], 2.0 * np.eye(2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            kp.build_conditional_hamiltonians(SIGMA_Z, np.eye(3), (0.0, 0.0), (0.0, 1.0))


class TestConditionalUnitaries:
    def test_zero_time(self):
        model = kp.DephasingModel(2, 2, (SIGMA_Z, SIGMA_X), 0.0)
        for u in kp.conditional_unitaries(model):
            assert np.allclose(u, I2)

    def test_sigma_pair_quarter_period(self, sigma_model):
        u_up, u_dn = kp.conditional_unitaries(sigma_model)
        assert np.allclose(u_up, -1j * SIGMA_Z, atol=1e-12)
        assert np.allclose(u_dn, -1j * SIGMA_X, atol=1e-12)

    def test_equal_hamiltonians_give_equal_unitaries(self):
        h = random_hermitian(np.random.default_rng(0), 3)
        model = kp.DephasingModel(2, 3, (h, h), 0.8)
        u0, u1 = kp.conditional_unitaries(model)
        assert np.allclose(u0, u1)


class TestInducedKraus:
    def test_trivial_evolution(self):
        measurement = kp.induced_kraus(
            trivial_model(), kp.plus_x_preparation(), kp.xy_meter_basis("X")
        )
        assert np.allclose(measurement.kraus[0], I2)
        assert np.allclose(measurement.kraus[1], 0.0)
        assert np.allclose(measurement.effects[0], I2)
        assert np.allclose(measurement.effects[1], 0.0)

    def test_opposite_sign_dephasing(self):
        model = kp.DephasingModel(2, 2, (SIGMA_Z, -SIGMA_Z), np.pi / 4)
        measurement = kp.induced_kraus(model, kp.plus_x_preparation(), kp.xy_meter_basis("X"))
        assert np.allclose(measurement.effects[0], I2 / 2, atol=1e-12)

    def test_anticommuting_pair_degenerate_effects(self, sigma_model):
        measurement = kp.induced_kraus(
            sigma_model, kp.plus_x_preparation(), kp.xy_meter_basis("X")
        )
        assert np.allclose(measurement.effects[0], I2 / 2, atol=1e-12)
        assert np.allclose(measurement.effects[1], I2 / 2, atol=1e-12)

    def test_meter_orthonormality_is_enforced(self):
        s = 1.0 / np.sqrt(2.0)
        with pytest.raises(InvariantViolation):
            kp.MeterBasis(np.array([[s, s], [s, 0.9 * s]], dtype=complex), ("+", "-"))


class TestQubitXYProtocol:
    def test_kraus_forms_match_unitary_combinations(self, sigma_model):
        u_up, u_dn = kp.conditional_unitaries(sigma_model)
        protocol = kp.qubit_xy_protocol(sigma_model, "XY")
        kx = protocol.step_measurements[0].kraus
        assert frobenius(kx[0] - (u_up + u_dn) / 2) <= 1e-12
        assert frobenius(kx[1] - (u_up - u_dn) / 2) <= 1e-12
        ky = protocol.step_measurements[1].kraus
        assert frobenius(ky[0] - (u_up + 1j * u_dn) / 2) <= 1e-12
        assert frobenius(ky[1] - (u_up - 1j * u_dn) / 2) <= 1e-12

    def test_trivial_evolution_x_axis(self):
        protocol = kp.qubit_xy_protocol(trivial_model(), "X")
        assert np.allclose(protocol.step_measurements[0].kraus[0], I2)
        assert np.allclose(protocol.step_measurements[0].kraus[1], 0.0)

    def test_y_effects_of_sigma_pair(self, sigma_model):
        protocol = kp.qubit_xy_protocol(sigma_model, "Y")
        effects = protocol.step_measurements[0].effects
        assert np.allclose(effects[0], (I2 - SIGMA_Y) / 2, atol=1e-12)
        assert np.allclose(effects[1], (I2 + SIGMA_Y) / 2, atol=1e-12)
        ok, gap = kp.effect_nondegenerate(effects[0])
        assert ok and gap == pytest.approx(1.0)

    def test_multi_axis_structure(self, sigma_model):
        protocol = kp.qubit_xy_protocol(sigma_model, "XYX")
        assert protocol.n_steps == 3
        assert protocol.axes == ("X", "Y", "X")

    def test_requires_qubit_probe(self):
        model = kp.random_model(0, 3, 2, commuting=True)
        with pytest.raises(DimensionError):
            kp.qubit_xy_protocol(model, "XX")


class TestNonselectiveApply:
    def test_identity_fixed_both_directions(self, sigma_model):
        prep = kp.plus_x_preparation()
        for direction in ("state", "observable"):
            out = kp.nonselective_apply(sigma_model, prep, I2, direction)
            assert np.allclose(out, I2, atol=1e-12)

    def test_observable_direction_flips_effect(self, sigma_model):
        prep = kp.plus_x_preparation()
        e_plus = (I2 - SIGMA_Y) / 2
        out = kp.nonselective_apply(sigma_model, prep, e_plus, "observable")
        assert np.allclose(out, (I2 + SIGMA_Y) / 2, atol=1e-12)

    def test_commuting_model_effects_are_fixed_points(self):
        model = kp.random_model(7, 2, 3, commuting=True)
        protocol = kp.qubit_xy_protocol(model, "X")
        for effect in protocol.step_measurements[0].effects:
            out = kp.nonselective_apply(model, protocol.preparation, effect, "observable")
            assert frobenius(out - effect) <= 1e-10

    def test_trace_preserving_and_unital_on_random_inputs(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            model = kp.random_model(int(rng.integers(1 << 30)), 2, 4, commuting=False)
            prep = kp.plus_x_preparation()
            a = random_hermitian(rng, 4)
            out_state = kp.nonselective_apply(model, prep, a, "state")
            assert abs(np.trace(out_state) - np.trace(a)) <= 1e-12 * max(1.0, abs(np.trace(a)))
            out_obs = kp.nonselective_apply(model, prep, np.eye(4), "observable")
            assert frobenius(out_obs - np.eye(4)) <= 1e-12

    def test_direction_is_validated(self, sigma_model):
        with pytest.raises(ProtocolError):
            kp.nonselective_apply(sigma_model, kp.plus_x_preparation(), I2, "sideways")


class TestProtocolShape:
    def test_prefix_and_drop_step(self, sigma_model):
        protocol = kp.qubit_xy_protocol(sigma_model, "XYX")
        assert protocol.prefix(2).axes == ("X", "Y")
        assert protocol.drop_step(2).axes == ("X", "X")
        with pytest.raises(ProtocolError):
            protocol.drop_step(4)

    def test_step_times_override(self, sigma_model):
        basis = kp.xy_meter_basis("X")
        protocol = kp.MeasurementProtocol(
            sigma_model, kp.plus_x_preparation(), (basis, basis), (0.3, 0.9)
        )
        assert protocol.effective_step_times() == (0.3, 0.9)
        # per-step measurements really use their own durations
        u_fast = kp.conditional_unitaries(sigma_model, 0.3)
        expected = (u_fast[0] + u_fast[1]) / 2
        assert frobenius(protocol.step_measurements[0].kraus[0] - expected) <= 1e-12


class TestFourierBasis:
    def test_reduces_to_x_basis_for_qubits(self):
        fourier = kp.fourier_meter_basis(2)
        x_basis = kp.xy_meter_basis("X")
        assert np.allclose(fourier.states, x_basis.states)

    def test_orthonormal_for_larger_probes(self):
        for d in (3, 4):
            basis = kp.fourier_meter_basis(d)
            gram = basis.states @ basis.states.conj().T
            assert np.allclose(gram, np.eye(d), atol=1e-12)

    def test_fourier_protocol_shape(self):
        model = kp.random_model(1, 3, 2, commuting=True)
        protocol = kp.fourier_protocol(model, 3)
        assert protocol.n_steps == 3
        assert protocol.probe_dim == 3


class TestPovmInvariants:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 4), st.integers(2, 5))
    def test_random_meter_bases_give_complete_povms(self, seed, d_p, d_s):
        rng = np.random.default_rng(seed)
        hams = tuple(random_hermitian(rng, d_s) for _ in range(d_p))
        model = kp.DephasingModel(d_p, d_s, hams, float(rng.uniform(0.1, 2.0)))
        basis = kp.MeterBasis(kp.haar_unitary(d_p, rng), tuple(map(str, range(d_p))))
        amps = rng.standard_normal(d_p) + 1j * rng.standard_normal(d_p)
        prep = kp.PreparationState(amps / np.linalg.norm(amps))
        measurement = kp.induced_kraus(model, prep, basis)
        total = sum(measurement.effects)
        assert frobenius(total - np.eye(d_s)) <= 1e-10
        for k, effect in zip(measurement.kraus, measurement.effects):
            assert np.linalg.eigvalsh(effect)[0] >= -1e-10
            assert frobenius(effect - k.conj().T @ k) <= 1e-12

    def test_xy_effect_pairs_are_antisymmetric_about_half(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            model = kp.DephasingModel(
                2, 3, (random_hermitian(rng, 3), random_hermitian(rng, 3)), 0.7
            )
            for axis in "XY":
                effects = kp.qubit_xy_protocol(model, axis).step_measurements[0].effects
                eye = np.eye(3)
                assert frobenius(effects[0] + effects[1] - eye) <= 1e-12
                assert frobenius((effects[0] - eye / 2) + (effects[1] - eye / 2)) <= 1e-12

    def test_commuting_hamiltonians_give_commuting_kraus_and_effects(self):
        rng = np.random.default_rng(3)
        for seed in rng.integers(0, 1 << 30, size=10):
            model = kp.random_model(int(seed), 2, 4, commuting=True)
            measurement = kp.induced_kraus(
                model, kp.plus_x_preparation(), kp.xy_meter_basis("Y")
            )
            for k in measurement.kraus:
                for e in measurement.effects:
                    assert frobenius(kp.commutator(k, e)) <= 1e-10
