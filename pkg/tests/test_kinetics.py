import math

import numpy as np
import pytest

from rotbath import (
    BathSpec,
    Classification,
    Mode,
    NoStationaryPopulationError,
    RateSet,
    Statistics,
    asymptotic_population,
    classify,
    closed_form_mean,
    decay_constant,
    emission_spectrum,
    evolve_mean,
    mean_rhs,
    ohmic_spectrum,
    rates,
)

BOSE = Statistics.BOSE
FERMI = Statistics.FERMI


def ohmic_bath(beta=1.0, omega_rot=1.0):
    return BathSpec(beta, omega_rot, ohmic_spectrum(1.0, 1.0, 10.0, beta))


def rate_set(gamma_down, gamma_up, cls=Classification.STABLE):
    return RateSet(gamma_down, gamma_up, 1.0, cls)


class TestMeanRhs:
    def test_vanishes_at_asymptote(self):
        bath = ohmic_bath(beta=1.5, omega_rot=0.5)
        for statistics in (BOSE, FERMI):
            mode = Mode(2.0, 1, statistics)
            rs = rates(bath, mode)
            n_inf = asymptotic_population(bath, mode)
            assert mean_rhs(rs, statistics, n_inf) == pytest.approx(0.0, abs=1e-15)

    def test_marginal_is_constant_growth(self):
        bath = ohmic_bath()
        rs = rates(bath, Mode(1.0, 1, BOSE))
        for nbar in [0.0, 1.0, 17.5]:
            assert mean_rhs(rs, BOSE, nbar) == pytest.approx(rs.gamma_down, rel=1e-13)

    def test_zero_temperature_superradiant_form(self):
        bath = ohmic_bath(beta=math.inf)
        rs = rates(bath, Mode(0.5, 2, BOSE))
        for nbar in [0.0, 3.0, 10.0]:
            assert mean_rhs(rs, BOSE, nbar) == rs.gamma_up * (1.0 + nbar)


class TestClosedForm:
    def test_initial_condition(self):
        rs = rate_set(1.0, 0.4)
        for statistics in (BOSE, FERMI):
            assert closed_form_mean(rs, statistics, 0.37, 0.0) == 0.37

    def test_fermi_long_time_is_fermi_dirac(self):
        bath = ohmic_bath(beta=2.0, omega_rot=0.5)
        mode = Mode(1.5, 1, FERMI)
        rs = rates(bath, mode)
        expected = 1.0 / (math.exp(2.0 * (1.5 - 0.5)) + 1.0)
        assert closed_form_mean(rs, FERMI, 0.9, 200.0) == pytest.approx(expected, rel=1e-12)

    def test_zero_temperature_growth_value(self):
        rs = rate_set(0.0, 1.0, Classification.SUPERRADIANT)
        assert closed_form_mean(rs, BOSE, 0.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-15)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            closed_form_mean(rate_set(1.0, 0.1), BOSE, 0.0, -1.0)


class TestEvolveMean:
    def test_matches_closed_form_across_regimes(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            beta = rng.uniform(0.3, 3.0)
            omega_rot = rng.uniform(0.2, 1.5)
            bath = ohmic_bath(beta=beta, omega_rot=omega_rot)
            statistics = BOSE if rng.random() < 0.5 else FERMI
            mode = Mode(rng.uniform(0.05, 3.0), int(rng.integers(0, 3)), statistics)
            rs = rates(bath, mode)
            lam = decay_constant(rs, statistics)
            scale = abs(lam) if lam != 0.0 else max(rs.gamma_down, 1e-3)
            t = np.linspace(0.0, 10.0 / scale, 33)
            nbar0 = rng.uniform(0.0, 1.0 if statistics is FERMI else 2.0)
            traj = evolve_mean(rs, statistics, nbar0, t)
            exact = [closed_form_mean(rs, statistics, nbar0, x) for x in t]
            assert np.max(np.abs(traj.nbar - exact)) <= 1e-8

    def test_decoupled_mode_is_constant(self):
        rs = rate_set(0.0, 0.0)
        traj = evolve_mean(rs, BOSE, 1.5, np.linspace(0, 10, 11))
        assert np.all(traj.nbar == 1.5)

    def test_superradiant_log_slope(self):
        bath = ohmic_bath(beta=1.0, omega_rot=1.0)
        mode = Mode(0.5, 2, BOSE)
        rs = rates(bath, mode)
        growth = rs.gamma_down * (math.exp(-1.0 * (0.5 - 2.0)) - 1.0)
        t = np.linspace(0.0, 8.0 / growth, 200)
        traj = evolve_mean(rs, BOSE, 0.0, t)
        lam = decay_constant(rs, BOSE)
        n_inf = rs.gamma_up / lam
        logged = np.log(traj.nbar[100:] - n_inf)
        slopes = np.diff(logged) / np.diff(t[100:])
        assert np.allclose(slopes, growth, rtol=1e-6)
        assert growth == pytest.approx(-lam, rel=1e-12)

    def test_monotone_growth_when_pumped(self):
        rs = rate_set(0.2, 0.5, Classification.SUPERRADIANT)
        traj = evolve_mean(rs, BOSE, 0.0, np.linspace(0, 20, 50))
        assert np.all(np.diff(traj.nbar) > 0.0)

    def test_fermi_stays_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            rs = rate_set(rng.uniform(0.01, 2.0), rng.uniform(0.0, 2.0))
            nbar0 = rng.uniform(0.0, 1.0)
            traj = evolve_mean(rs, FERMI, nbar0, np.linspace(0, 30, 40))
            assert np.all(traj.nbar >= 0.0) and np.all(traj.nbar <= 1.0)

    def test_fermi_rejects_overfilled_start(self):
        with pytest.raises(ValueError):
            evolve_mean(rate_set(1.0, 0.1), FERMI, 1.2, np.linspace(0, 1, 5))

    def test_convergence_bound_at_five_lifetimes(self):
        bath = ohmic_bath(beta=1.0, omega_rot=0.5)
        for statistics in (BOSE, FERMI):
            mode = Mode(2.0, 1, statistics)
            rs = rates(bath, mode)
            lam = decay_constant(rs, statistics)
            n_inf = asymptotic_population(bath, mode)
            T = 5.0 / lam
            traj = evolve_mean(rs, statistics, 0.0 if statistics is BOSE else 0.9,
                               np.array([0.0, T]))
            bound = math.exp(-lam * T) * abs(traj.nbar[0] - n_inf)
            assert abs(traj.nbar[-1] - n_inf) <= bound + 1e-10

    def test_runaway_status_at_ceiling(self):
        rs = rate_set(0.0, 1.0, Classification.SUPERRADIANT)
        traj = evolve_mean(rs, BOSE, 0.0, np.linspace(0, 40, 81), ceiling=1e6)
        assert traj.status == "exponential-runaway"
        assert traj.times[-1] < 40.0
        assert traj.nbar[-1] <= 1e6 * (1 + 1e-9)


class TestAsymptoticPopulation:
    def test_fermi_half_at_marginal(self):
        bath = ohmic_bath(beta=3.0, omega_rot=1.0)
        assert asymptotic_population(bath, Mode(1.0, 1, FERMI)) == 0.5

    def test_bose_unit_occupation_at_ln2(self):
        bath = BathSpec(math.log(2.0), 0.0, ohmic_spectrum(1, 1, 10, math.log(2.0)))
        assert asymptotic_population(bath, Mode(1.0, 0, BOSE)) == pytest.approx(1.0, rel=1e-14)

    def test_bose_two_at_ln_three_halves(self):
        beta = math.log(1.5)
        bath = BathSpec(beta, 0.0, ohmic_spectrum(1, 1, 10, beta))
        assert asymptotic_population(bath, Mode(1.0, 0, BOSE)) == pytest.approx(2.0, rel=1e-14)

    def test_no_stationary_population_for_inverted_bose(self):
        bath = ohmic_bath()
        with pytest.raises(NoStationaryPopulationError):
            asymptotic_population(bath, Mode(0.5, 1, BOSE))
        with pytest.raises(NoStationaryPopulationError):
            asymptotic_population(bath, Mode(1.0, 1, BOSE))

    def test_zero_temperature_limits(self):
        bath = ohmic_bath(beta=math.inf)
        assert asymptotic_population(bath, Mode(2.0, 1, FERMI)) == 0.0
        assert asymptotic_population(bath, Mode(0.5, 1, FERMI)) == 1.0
        assert asymptotic_population(bath, Mode(2.0, 1, BOSE)) == 0.0

    def test_detailed_balance_recomputation(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            bath = ohmic_bath(beta=rng.uniform(0.2, 3.0), omega_rot=rng.uniform(0.0, 1.0))
            statistics = BOSE if rng.random() < 0.5 else FERMI
            omega = rng.uniform(0.05, 4.0)
            m = int(rng.integers(-2, 3))
            mode = Mode(omega, m, statistics)
            if statistics is BOSE and classify(bath, mode) is not Classification.STABLE:
                continue
            rs = rates(bath, mode)
            n_inf = asymptotic_population(bath, mode)
            if statistics is BOSE:
                again = rs.gamma_up / (rs.gamma_down - rs.gamma_up)
            else:
                again = rs.gamma_up / (rs.gamma_down + rs.gamma_up)
            assert n_inf == pytest.approx(again, rel=1e-12)


class TestEmissionSpectrum:
    def test_zero_temperature_support(self):
        bath = ohmic_bath(beta=math.inf, omega_rot=1.0)
        modes = [Mode(w, m, BOSE) for w in np.linspace(0.1, 3.0, 12) for m in range(3)]
        for mode, rate, cls in emission_spectrum(bath, modes):
            if mode.omega < mode.m * bath.omega_rot:
                assert rate > 0.0
                assert cls is Classification.SUPERRADIANT
            else:
                assert rate == 0.0

    def test_zero_temperature_rate_value(self):
        bath = ohmic_bath(beta=math.inf, omega_rot=1.0)
        [(mode, rate, _)] = emission_spectrum(bath, [Mode(0.25, 1, BOSE)])
        assert rate == pytest.approx(0.75 * math.exp(-0.075), rel=1e-15)

    def test_static_bath_gives_thermal_spectrum(self):
        beta = 1.5
        bath = BathSpec(beta, 0.0, ohmic_spectrum(1.0, 1.0, 10.0, beta))
        modes = [Mode(w, 0, BOSE) for w in [0.2, 1.0, 2.0]]
        for mode, rate, _ in emission_spectrum(bath, modes):
            expected = bath.spectrum(mode.omega) * math.exp(-beta * mode.omega)
            assert rate == pytest.approx(expected, rel=1e-13)
