import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualwave.core import DualParams, RealField
from dualwave.diagnostics import (
    continuity_residual_l2,
    fringe_visibility,
    quantum_potential,
    report,
    rms_width,
    summarize_run,
    tau_dual,
    tau_dual_from_density,
)
from dualwave.scenarios import DEFAULT_GRID, builtin_by_name, expand
from dualwave.wavesolver import evolve

GRID = DEFAULT_GRID


class TestQuantumPotential:
    def test_uniform_density_gives_zero(self):
        rho = RealField(np.full(GRID.n_points, 3.0), GRID)
        q = quantum_potential(rho, 1.0, 1.0)
        assert np.max(np.abs(q.values)) < 1e-12

    def test_gaussian_closed_form(self):
        sigma = 0.5
        rho = RealField(np.exp(-GRID.x ** 2 / (2 * sigma ** 2)), GRID)
        q = quantum_potential(rho, 1.0, 1.0)
        exact = -0.5 * (GRID.x ** 2 / (4 * sigma ** 4) - 1 / (2 * sigma ** 2))
        mask = rho.values >= 1e-3
        dev = np.abs(q.values - exact) / np.maximum(1.0, np.abs(exact))
        assert np.max(dev[mask]) < 1e-8

    def test_harmonic_ground_state_balance(self):
        # rho of the unit-oscillator ground state; Q + V should equal E0
        rho = RealField(np.exp(-GRID.x ** 2), GRID)
        q = quantum_potential(rho, 1.0, 1.0)
        balance = q.values + 0.5 * GRID.x ** 2 - 0.5
        mask = rho.values >= 1e-3
        assert np.max(np.abs(balance[mask])) < 1e-7

    @given(st.floats(0.1, 100.0))
    @settings(max_examples=20, deadline=None)
    def test_scale_invariance(self, c):
        rho = RealField(np.exp(-GRID.x ** 2), GRID)
        q1 = quantum_potential(rho, 1.0, 1.0)
        q2 = quantum_potential(RealField(c * rho.values, GRID), 1.0, 1.0)
        mask = rho.values >= 1e-3
        assert np.max(np.abs(q1.values - q2.values)[mask]) < 1e-10

    def test_rejects_zero_and_negative(self):
        with pytest.raises(ValueError):
            quantum_potential(RealField.zeros(GRID), 1.0, 1.0)
        bad = np.ones(GRID.n_points)
        bad[3] = -0.5
        with pytest.raises(ValueError):
            quantum_potential(RealField(bad, GRID), 1.0, 1.0)


class TestFringeVisibility:
    def test_full_contrast(self):
        kappa = 2 * math.pi * 10 / GRID.length
        rho = RealField(1.0 + np.cos(kappa * GRID.x), GRID)
        assert abs(fringe_visibility(rho, (0, GRID.n_points)) - 1.0) < 1e-10

    def test_two_beam_intensity_ratio(self):
        r = 0.25
        a, b = 1.0, math.sqrt(r)
        kappa = 2 * math.pi * 10 / GRID.length
        rho = RealField(a ** 2 + b ** 2 + 2 * a * b * np.cos(kappa * GRID.x),
                        GRID)
        vis = fringe_visibility(rho, (0, GRID.n_points))
        assert abs(vis - 2 * math.sqrt(r) / (1 + r)) < 1e-6

    def test_gaussian_bump_window_pinned(self):
        rho = RealField(np.exp(-GRID.x ** 2), GRID)
        window = (GRID.n_points // 2 - 64, GRID.n_points // 2 + 64)
        vis = fringe_visibility(rho, window)
        lo = math.exp(-GRID.x[window[0]] ** 2)
        assert vis == pytest.approx((1 - lo) / (1 + lo), rel=1e-12)

    def test_bounds_and_errors(self):
        rho = RealField(np.random.default_rng(7).uniform(0.1, 1.0,
                                                         GRID.n_points), GRID)
        assert 0.0 <= fringe_visibility(rho, (10, 500)) <= 1.0
        assert fringe_visibility(
            RealField(np.full(GRID.n_points, 2.0), GRID), (0, 100)) == 0.0
        with pytest.raises(ValueError):
            fringe_visibility(rho, (5, 5))
        with pytest.raises(ValueError):
            fringe_visibility(RealField.zeros(GRID), (0, 100))


class TestTauDual:
    def test_unit_plug_in(self):
        # residual mass 1 needs 1/m0 - 1/m1 = 1
        p = DualParams(masses=(0.5, 1.0))
        assert tau_dual(p, 1.0) == pytest.approx(1.0)

    def test_symmetric_masses_give_infinity(self):
        assert tau_dual(DualParams(masses=(1.0, 1.0)), 5.0) == math.inf

    def test_arithmetic_example(self):
        p = DualParams(masses=(1.0, 2.0))
        assert tau_dual(p, 3.0) == pytest.approx(18.0)

    @given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
    @settings(max_examples=25, deadline=None)
    def test_monotone_in_length(self, l1, l2):
        p = DualParams(masses=(1.0, 2.0))
        lo, hi = sorted((l1, l2))
        assert tau_dual(p, lo) <= tau_dual(p, hi)

    def test_monotone_in_residual_mass(self):
        taus = [tau_dual(DualParams(masses=(1.0, m1)), 1.0)
                for m1 in (2.0, 1.5, 1.25)]
        assert taus[0] < taus[1] < taus[2]

    def test_default_length_scale_from_density(self):
        sigma = 0.7
        rho = RealField(np.exp(-GRID.x ** 2 / (2 * sigma ** 2)), GRID)
        assert rms_width(rho) == pytest.approx(sigma, rel=1e-6)
        p = DualParams(masses=(1.0, 2.0))
        assert tau_dual_from_density(p, rho) == pytest.approx(
            2.0 * sigma ** 2, rel=1e-6)


class TestReports:
    def test_symmetric_free_run_has_tiny_drift(self):
        run = evolve(expand(builtin_by_name("free_gaussian_symmetric"),
                            GRID).scenario)
        reports = summarize_run(run, 1.0, 1.0)
        assert max(abs(r.norm_drift_rate) for r in reports[1:]) < 1e-9

    def test_drift_rate_matches_imaginary_potential(self):
        lam = 0.5
        run = evolve(expand(builtin_by_name("norm_drift_constant_Vg1"),
                            GRID).scenario)
        reports = summarize_run(run, 1.0, 1.0)
        for r in reports[1:]:
            assert abs(r.norm_drift_rate + 2 * lam) / (2 * lam) < 1e-4

    def test_harmonic_ground_energy_reported(self):
        run = evolve(expand(builtin_by_name("harmonic_ground_symmetric"),
                            GRID).scenario)
        reports = summarize_run(run, 1.0, 1.0)
        for r in reports:
            assert abs(r.energy - 0.5) < 1e-7

    def test_first_snapshot_report_is_finite(self):
        run = evolve(expand(builtin_by_name("free_gaussian_symmetric"),
                            GRID).scenario)
        first = report(None, run.snapshots[0], 1.0, 1.0)
        assert first.norm_drift_rate == 0.0
        assert first.continuity_residual_l2 == 0.0

    def test_interference_run_visibility_pinned(self):
        # equal-amplitude two-path collision: near-unit fringe contrast in
        # the central window; value frozen from a verified run
        exp = expand(builtin_by_name("interference_two_gaussian"), GRID)
        run = evolve(exp.scenario)
        rho = RealField(np.abs(run.final.psi.values) ** 2, GRID)
        frac = exp.spec.extras["visibility_window"]
        window = (int(frac[0] * GRID.n_points), int(frac[1] * GRID.n_points))
        vis = fringe_visibility(rho, window)
        assert vis == pytest.approx(0.9998778077192557, rel=1e-9)

    def test_continuity_residual_second_order(self):
        # difference over a 50-step window starting at a fixed time t0, so
        # halving dt halves the differencing interval: the residual must
        # drop roughly fourfold
        base = expand(builtin_by_name("free_gaussian_symmetric"), GRID).scenario
        t0 = 0.2
        resids = []
        for dt in (1e-3, 5e-4):
            n0 = int(round(t0 / dt))
            scenario = dataclasses.replace(
                base, dt=dt, n_steps=n0 + 50, snapshot_every=25)
            run = evolve(scenario)
            by_step = {round(s.t / dt): s for s in run.snapshots}
            a, b = by_step[n0], by_step[n0 + 50]
            resids.append(continuity_residual_l2(
                a.psi.values, b.psi.values, GRID, b.t - a.t, 1.0, 1.0))
        ratio = resids[0] / resids[1]
        assert 3.0 <= ratio <= 5.0
