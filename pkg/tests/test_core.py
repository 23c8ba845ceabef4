import math

import numpy as np
import pytest

from rotbath import (
    BathSpec,
    Classification,
    LocalTemperatureError,
    Mode,
    Statistics,
    classify,
    flat_spectrum,
    local_beta,
    ohmic_spectrum,
    rates,
    shifted_kms_residual,
    shifted_spectrum,
)

BOSE = Statistics.BOSE
FERMI = Statistics.FERMI


def ohmic_bath(beta=1.0, omega_rot=1.0, A=1.0, s=1.0, x_c=10.0):
    return BathSpec(beta, omega_rot, ohmic_spectrum(A, s, x_c, beta))


class TestShiftedSpectrum:
    def test_zero_rotation_is_identity(self):
        bath = ohmic_bath(omega_rot=0.0)
        mode = Mode(1.0, 3, BOSE)
        for x in [-2.0, -0.5, 0.0, 0.7, 4.0]:
            assert shifted_spectrum(bath, mode, x) == bath.spectrum(x)

    def test_axisymmetric_mode_is_identity(self):
        bath = ohmic_bath(omega_rot=2.3)
        mode = Mode(1.0, 0, BOSE)
        for x in [-1.0, 0.2, 5.0]:
            assert shifted_spectrum(bath, mode, x) == bath.spectrum(x)

    def test_ohmic_worked_value(self):
        # m=2, Omega=1, x=1 lands on gamma0(3) = 3*exp(-0.3)
        bath = ohmic_bath(beta=1.0, omega_rot=1.0)
        mode = Mode(1.0, 2, BOSE)
        assert shifted_spectrum(bath, mode, 1.0) == pytest.approx(
            3.0 * math.exp(-0.3), rel=1e-15
        )


class TestRates:
    def test_marginal_rates_equal(self):
        bath = ohmic_bath(beta=2.0, omega_rot=1.0)
        rs = rates(bath, Mode(1.0, 1, BOSE))
        assert rs.gamma_up == rs.gamma_down > 0.0

    def test_zero_temperature_stable_has_no_pumping(self):
        bath = ohmic_bath(beta=math.inf, omega_rot=1.0)
        rs = rates(bath, Mode(2.0, 1, BOSE))
        assert rs.gamma_up == 0.0
        assert rs.gamma_down > 0.0

    def test_zero_temperature_superradiant_pumping(self):
        bath = ohmic_bath(beta=math.inf, omega_rot=1.0)
        mode = Mode(0.5, 2, BOSE)
        rs = rates(bath, mode)
        # pumping samples the bare spectrum at m*Omega - omega and stays positive
        assert rs.gamma_up == pytest.approx(1.5 * math.exp(-0.15), rel=1e-15)
        assert rs.gamma_down == 0.0

    def test_detailed_balance_ratio_across_draws(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            beta = rng.uniform(0.2, 4.0)
            omega_rot = rng.uniform(0.0, 2.0)
            bath = ohmic_bath(beta=beta, omega_rot=omega_rot)
            mode = Mode(rng.uniform(0.01, 4.0), int(rng.integers(-3, 4)),
                        BOSE if rng.random() < 0.5 else FERMI)
            rs = rates(bath, mode)
            if rs.gamma_down > 0.0:
                expected = math.exp(-beta * (mode.omega - mode.m * omega_rot))
                assert rs.gamma_up / rs.gamma_down == pytest.approx(expected, rel=1e-12)

    def test_rates_defined_at_omega_zero(self):
        bath = ohmic_bath(beta=1.0, omega_rot=1.0)
        rs = rates(bath, Mode(0.0, 2, BOSE))
        assert rs.classification is Classification.SUPERRADIANT
        assert rs.beta_loc == -math.inf


class TestLocalBeta:
    def test_axisymmetric_is_bath_beta(self):
        bath = ohmic_bath(beta=1.7, omega_rot=3.0)
        assert local_beta(bath, Mode(2.0, 0, BOSE)) == 1.7

    def test_worked_values(self):
        bath = ohmic_bath(beta=1.0, omega_rot=1.0)
        assert local_beta(bath, Mode(1.0, 2, BOSE)) == pytest.approx(-1.0)
        assert local_beta(bath, Mode(2.0, 1, BOSE)) == pytest.approx(0.5)

    def test_undefined_at_omega_zero(self):
        bath = ohmic_bath(beta=1.0, omega_rot=1.0)
        with pytest.raises(LocalTemperatureError):
            local_beta(bath, Mode(0.0, 2, BOSE))
        # but classification does not go through beta_loc
        assert classify(bath, Mode(0.0, 2, BOSE)) is Classification.SUPERRADIANT

    def test_sign_tracks_superradiance(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            bath = ohmic_bath(beta=rng.uniform(0.1, 5.0), omega_rot=rng.uniform(0.0, 2.0))
            mode = Mode(rng.uniform(0.01, 3.0), int(rng.integers(-4, 5)), BOSE)
            inverted = local_beta(bath, mode) < 0.0
            assert inverted == (classify(bath, mode) is Classification.SUPERRADIANT)


class TestClassify:
    def test_fermi_always_stable(self):
        bath = ohmic_bath(beta=1.0, omega_rot=1.0)
        assert classify(bath, Mode(0.1, 5, FERMI)) is Classification.STABLE

    def test_bose_superradiant(self):
        bath = ohmic_bath(beta=1.0, omega_rot=1.0)
        assert classify(bath, Mode(0.5, 1, BOSE)) is Classification.SUPERRADIANT

    def test_bose_marginal(self):
        bath = ohmic_bath(beta=1.0, omega_rot=1.0)
        assert classify(bath, Mode(1.0, 1, BOSE)) is Classification.MARGINAL

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            omega = rng.uniform(0.01, 3.0)
            omega_rot = rng.uniform(0.0, 2.0)
            m = int(rng.integers(-4, 5))
            c = rng.uniform(0.01, 50.0)
            a = classify(ohmic_bath(omega_rot=omega_rot), Mode(omega, m, BOSE))
            b = classify(ohmic_bath(omega_rot=c * omega_rot), Mode(c * omega, m, BOSE))
            assert a is b


class TestShiftedKms:
    def test_residual_vanishes_for_built_models(self):
        rng = np.random.default_rng(5)
        grid = np.logspace(-2, 1.5, 40)
        for _ in range(30):
            bath = ohmic_bath(beta=rng.uniform(0.2, 4.0), omega_rot=rng.uniform(0.0, 2.0))
            m = int(rng.integers(-3, 4))
            assert shifted_kms_residual(bath, m, grid) <= 1e-12

    def test_requires_finite_beta(self):
        bath = ohmic_bath(beta=math.inf)
        with pytest.raises(ValueError):
            shifted_kms_residual(bath, 1, [1.0])


class TestValidation:
    def test_mode_rejects_negative_energy(self):
        with pytest.raises(ValueError):
            Mode(-0.1, 0, BOSE)

    def test_bath_rejects_nonpositive_beta(self):
        spec = ohmic_spectrum(1.0, 1.0, 10.0, 1.0)
        with pytest.raises(ValueError):
            BathSpec(0.0, 0.0, spec)

    def test_bath_rejects_mismatched_spectrum_temperature(self):
        spec = ohmic_spectrum(1.0, 1.0, 10.0, 2.0)
        with pytest.raises(ValueError):
            BathSpec(1.0, 0.0, spec)

    def test_flat_spectrum_accepted(self):
        bath = BathSpec(2.0, 0.5, flat_spectrum(0.7, 2.0))
        rs = rates(bath, Mode(1.0, 1, BOSE))
        assert rs.gamma_down == 0.7
