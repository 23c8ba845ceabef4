import math

import numpy as np
import pytest

from rotbath import (
    CorrelationFunction,
    PositivityError,
    custom_spectrum,
    flat_spectrum,
    hawking_spectrum,
    kms_check,
    kms_extend,
    load_correlation,
    ohmic_spectrum,
    spectrum_from_correlation,
    spectrum_from_correlation_model,
)
from rotbath.bathmodels import default_kms_grid


class TestOhmic:
    def test_vanishes_at_origin(self):
        spec = ohmic_spectrum(1.0, 1.0, 10.0, 1.0)
        assert spec(0.0) == 0.0

    def test_kms_value_on_negative_side(self):
        spec = ohmic_spectrum(1.0, 1.0, 10.0, 1.0)
        assert spec(-2.0) == pytest.approx(math.exp(-2.0) * 2.0 * math.exp(-0.2), rel=1e-15)

    def test_zero_temperature_negative_side(self):
        spec = ohmic_spectrum(1.0, 1.0, 10.0, math.inf)
        assert spec(-2.0) == 0.0
        assert spec(2.0) > 0.0

    def test_parameters_validated(self):
        with pytest.raises(ValueError):
            ohmic_spectrum(-1.0, 1.0, 10.0, 1.0)


class TestKmsExtend:
    def test_flat_negative_side(self):
        beta = 1.3
        spec = kms_extend(lambda x: 0.5, beta)
        for x in [0.2, 1.0, 7.0]:
            assert spec(-x) == pytest.approx(0.5 * math.exp(-beta * x), rel=1e-15)

    def test_zero_temperature_kills_negative_side(self):
        spec = kms_extend(lambda x: x * x, math.inf)
        assert spec(-0.3) == 0.0
        assert spec(0.3) == pytest.approx(0.09)

    def test_linear_profile_worked_value(self):
        spec = kms_extend(lambda x: x, 2.0)
        assert spec(-1.0) == pytest.approx(math.exp(-2.0), rel=1e-15)

    def test_negative_profile_raises(self):
        spec = kms_extend(lambda x: x - 1.0, 1.0)
        with pytest.raises(PositivityError):
            spec(0.5)

    def test_origin_uses_profile_value_when_finite(self):
        assert kms_extend(lambda x: 0.7, 1.0)(0.0) == 0.7
        assert kms_extend(lambda x: 1.0 / x, 1.0)(0.0) == 0.0


class TestHawking:
    def test_emission_to_absorption_ratio(self):
        spec = hawking_spectrum(1.0, 1.0)
        for omega in [0.3, 1.0, 2.5]:
            assert spec(-omega) / spec(omega) == pytest.approx(math.exp(-omega), rel=1e-14)

    def test_zero_temperature_limit(self):
        spec = hawking_spectrum(1.0, math.inf)
        assert spec(-1.0) == 0.0

    def test_construction_matches_kms_extend_pointwise(self):
        ff = lambda x: 1.0 + 0.2 * x  # noqa: E731
        a = hawking_spectrum(ff, 1.7)
        b = kms_extend(ff, 1.7)
        for x in np.linspace(-5, 5, 101):
            assert a(x) == b(x)

    def test_kms_check_is_exact(self):
        spec = hawking_spectrum(1.0, 1.0)
        assert kms_check(spec, 1.0, default_kms_grid()) <= 1e-14


class TestKmsCheck:
    def test_built_models_pass(self):
        grid = default_kms_grid()
        for spec, beta in [
            (ohmic_spectrum(2.0, 1.0, 5.0, 0.7), 0.7),
            (flat_spectrum(0.3, 2.0), 2.0),
            (ohmic_spectrum(1.0, 2.0, 8.0, 3.0), 3.0),
        ]:
            assert kms_check(spec, beta, grid) <= 1e-14

    def test_detects_injected_fault(self):
        base = ohmic_spectrum(1.0, 1.0, 10.0, 1.0)

        def corrupted(x):
            v = base(x)
            return v * 1.1 if x == -1.0 else v

        residual = kms_check(custom_spectrum(corrupted), 1.0, [0.5, 1.0, 2.0])
        assert residual == pytest.approx(0.1 * math.exp(-1.0), rel=1e-10)

    def test_rejects_bad_input(self):
        spec = flat_spectrum(1.0, 1.0)
        with pytest.raises(ValueError):
            kms_check(spec, math.inf, [1.0])
        with pytest.raises(ValueError):
            kms_check(spec, 1.0, [])
        with pytest.raises(ValueError):
            kms_check(spec, 1.0, [-1.0])

    def test_shipped_models_everywhere_nonnegative(self):
        specs = [
            ohmic_spectrum(1.0, 0.5, 4.0, 1.5),
            flat_spectrum(2.0, 0.4),
            hawking_spectrum(0.9, 2.0),
            ohmic_spectrum(1.0, 1.0, 10.0, math.inf),
        ]
        for spec in specs:
            for x in np.linspace(-20, 20, 201):
                assert spec(x) >= 0.0


def exporting_correlation(dt, tau_max, fn):
    tau = np.arange(-round(tau_max / dt), round(tau_max / dt) + 1) * dt
    return CorrelationFunction(fn(tau).astype(complex), dt)


class TestCorrelationQuadrature:
    def test_exponential_decay_oracle(self):
        # analytic transform of exp(-|tau|) is 2/(1+w^2); trapezoid with
        # dt=1e-3 on [-30, 30] must match to 1e-6
        corr = exporting_correlation(1e-3, 30.0, lambda t: np.exp(-np.abs(t)))
        for omega in [0.0, 0.3, 1.0, 2.0, 3.0]:
            got = spectrum_from_correlation(corr, omega)
            assert got.value == pytest.approx(2.0 / (1.0 + omega**2), abs=1e-6)
            assert not got.flagged

    def test_gaussian_cosine_oracle(self):
        w0 = 2.0
        corr = exporting_correlation(0.01, 15.0,
                                     lambda t: np.cos(w0 * t) * np.exp(-t * t))
        for omega in [-3.0, -2.0, 0.0, 2.0, 3.0]:
            exact = 0.5 * math.sqrt(math.pi) * (
                math.exp(-((omega - w0) ** 2) / 4) + math.exp(-((omega + w0) ** 2) / 4)
            )
            got = spectrum_from_correlation(corr, omega)
            assert got.value == pytest.approx(exact, abs=1e-12)

    def test_narrow_peak_integrates_to_area(self):
        s = 0.05
        corr = exporting_correlation(
            1e-3, 1.0, lambda t: np.exp(-t * t / (2 * s * s)) / (s * math.sqrt(2 * math.pi))
        )
        assert spectrum_from_correlation(corr, 0.0).value == pytest.approx(1.0, abs=1e-9)

    def test_model_wrapper_clamps_and_matches(self):
        corr = exporting_correlation(1e-2, 30.0, lambda t: np.exp(-np.abs(t)))
        model = spectrum_from_correlation_model(corr)
        assert model(1.0) == pytest.approx(1.0, abs=1e-4)
        assert model.family == "correlation"
        for x in np.linspace(-4, 4, 41):
            assert model(x) >= 0.0


class TestCorrelationValidation:
    def test_hermiticity_enforced(self):
        tau = np.arange(-100, 101) * 0.01
        bad = np.exp(-np.abs(tau)) + 1j * np.where(tau > 0, 0.5, 0.0)
        with pytest.raises(ValueError, match="conj"):
            CorrelationFunction(bad, 0.01)

    def test_tail_decay_enforced(self):
        corr = np.full(201, 1.0, dtype=complex)
        with pytest.raises(ValueError, match="window"):
            CorrelationFunction(corr, 0.01)

    def test_even_sample_count_rejected(self):
        with pytest.raises(ValueError):
            CorrelationFunction(np.ones(10, dtype=complex), 0.1)


class TestCorrelationImport:
    def test_two_column_file(self, tmp_path):
        dt, n = 0.01, 2000
        tau = np.arange(-n, n + 1) * dt
        values = np.exp(-np.abs(tau))
        path = tmp_path / "corr.csv"
        lines = ["# tau, re_f"] + [f"{t:.10g}, {v:.17g}" for t, v in zip(tau, values)]
        path.write_text("\n".join(lines) + "\n")
        corr = load_correlation(path)
        assert corr.dt == pytest.approx(dt)
        assert spectrum_from_correlation(corr, 0.5).value == pytest.approx(
            2.0 / 1.25, abs=1e-3
        )

    def test_three_column_file_whitespace(self, tmp_path):
        dt, n = 0.02, 400
        tau = np.arange(-n, n + 1) * dt
        values = np.exp(-(tau**2))
        path = tmp_path / "corr.dat"
        lines = [f"{t:.10g} {v:.17g} 0.0" for t, v in zip(tau, values)]
        path.write_text("\n".join(lines) + "\n")
        corr = load_correlation(path)
        assert corr.samples.size == 2 * n + 1

    def test_nonuniform_grid_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("-1.0, 0.0\n-0.4, 0.5\n0.0, 1.0\n0.4, 0.5\n1.0, 0.0\n")
        with pytest.raises(ValueError, match="uniform"):
            load_correlation(path)
