import numpy as np
import pytest

from dualwave.core import ConfigurationError, field_norm
from dualwave.scenarios import (
    DEFAULT_GRID,
    ExpandedHJ,
    ExpandedOscillator,
    ExpandedWave,
    Integration,
    ScenarioSpec,
    builtin_by_name,
    builtin_names,
    builtin_suite,
    expand,
)


class TestBuiltinSuite:
    def test_contains_required_scenarios(self):
        names = set(builtin_names())
        required = {
            "free_gaussian_symmetric", "harmonic_ground_symmetric",
            "plane_wave_dispersion", "norm_drift_constant_Vg1",
            "residual_mass_plane_wave", "interference_two_gaussian",
            "bateman_damped", "ck_damped", "dekker_damped",
            "hj_free_particle", "hj_caustic",
        }
        assert required <= names
        assert len(builtin_suite()) >= 11

    def test_names_unique(self):
        names = builtin_names()
        assert len(names) == len(set(names))

    def test_every_scenario_expands_on_default_grid(self):
        for spec in builtin_suite():
            expanded = expand(spec, DEFAULT_GRID)
            assert isinstance(expanded,
                              (ExpandedWave, ExpandedHJ, ExpandedOscillator))

    def test_unknown_name_lists_available(self):
        with pytest.raises(ConfigurationError) as info:
            builtin_by_name("not_a_scenario")
        assert "free_gaussian_symmetric" in str(info.value)


class TestExpansion:
    def test_gaussian_unit_norm(self):
        spec = builtin_by_name("free_gaussian_symmetric")
        psi = expand(spec, DEFAULT_GRID).scenario.psi0
        assert abs(field_norm(psi) - 1.0) < 1e-10

    def test_expansion_is_deterministic(self):
        spec = builtin_by_name("interference_two_gaussian")
        a = expand(spec, DEFAULT_GRID).scenario.psi0.values
        b = expand(spec, DEFAULT_GRID).scenario.psi0.values
        assert np.array_equal(a, b)

    def test_two_gaussian_centered(self):
        spec = builtin_by_name("interference_two_gaussian")
        psi = expand(spec, DEFAULT_GRID).scenario.psi0
        rho = np.abs(psi.values) ** 2
        mean = float(np.sum(DEFAULT_GRID.x * rho) / np.sum(rho))
        assert abs(mean) < 1e-8

    def test_super_nyquist_plane_wave_rejected(self):
        spec = ScenarioSpec(name="bad", kind="wave",
                            integration=Integration(1e-3, 10),
                            initial={"type": "plane_wave", "mode": 300})
        with pytest.raises(ConfigurationError):
            expand(spec, DEFAULT_GRID)

    def test_non_harmonic_wavenumber_rejected(self):
        spec = ScenarioSpec(name="bad", kind="wave",
                            integration=Integration(1e-3, 10),
                            initial={"type": "plane_wave", "k": 3.0})
        with pytest.raises(ConfigurationError):
            expand(spec, DEFAULT_GRID)

    def test_under_resolved_packet_rejected(self):
        spec = ScenarioSpec(name="bad", kind="wave",
                            integration=Integration(1e-3, 10),
                            initial={"type": "gaussian", "sigma": 0.01})
        with pytest.raises(ConfigurationError) as info:
            expand(spec, DEFAULT_GRID)
        assert "sigma" in str(info.value)

    def test_unknown_kind_rejected(self):
        spec = ScenarioSpec(name="bad", kind="mystery",
                            integration=Integration(1e-3, 10))
        with pytest.raises(ConfigurationError):
            expand(spec, DEFAULT_GRID)

    def test_oscillator_expansion_columns(self):
        exp = expand(builtin_by_name("ck_damped"), DEFAULT_GRID)
        assert exp.state_columns == ("x", "xdot")
        assert exp.state0.shape == (2,)
        exp4 = expand(builtin_by_name("bateman_damped"), DEFAULT_GRID)
        assert exp4.state_columns == ("x", "xdot", "y", "ydot")

    def test_hj_expansion_slopes(self):
        exp = expand(builtin_by_name("hj_free_particle"), DEFAULT_GRID)
        assert exp.channels.slopes == (1.0, 0.0)
        caustic = expand(builtin_by_name("hj_caustic"), DEFAULT_GRID)
        assert np.allclose(caustic.channels.channels[0].values,
                           -0.5 * DEFAULT_GRID.x ** 2, rtol=0, atol=0)
