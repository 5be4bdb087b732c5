"""Coupled system/environment Hamilton-Jacobi field dynamics on the grid.

The system action S0 and N >= 1 environment actions S1..SN evolve under

    dS0/dt = -[ (grad S0)^2/2m0 - sum_n (grad Sn)^2/2m_n + Vg0 + Vc0 ]
    dSn/dt = -[ grad S0 . grad Sn/2m0 + grad S0 . grad Sn/2m_n + Vgn + Vcn ]

Each channel is stored as a periodic sample array plus an optional linear
slope, S_i(x) = slope_i * x + periodic_i(x). Only the periodic part is
differentiated spectrally (a bare linear ramp is not representable on a
periodic grid), and since every right-hand side above is periodic in x the
slopes are constants of the motion. Smooth flow only: when characteristics
cross, gradients blow up and evolve_hj aborts with the partial trajectory
instead of switching to a viscosity solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dualwave.core import (
    BlowUpError,
    DualParams,
    Grid1D,
    RealField,
    spectral_derivative_values,
)

EXPLICIT = "explicit"
SYMMETRIC_CLOSURE = "symmetric_closure"

GRADIENT_BLOWUP_THRESHOLD = 1e6


class FieldBlowUpError(RuntimeError):
    """A right-hand-side evaluation produced a non-finite field value."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class ActionChannels:
    """Action fields S0..SN with per-channel masses and optional linear slopes.

    channels[0] is the system action, channels[1:] the environment
    participation fields. All fields live on one grid; slopes default to
    zero and carry the non-periodic (mean-gradient) part of each channel.
    """

    channels: tuple
    masses: tuple
    slopes: tuple = ()

    def __post_init__(self):
        channels = tuple(self.channels)
        masses = tuple(float(m) for m in self.masses)
        if len(channels) < 2:
            raise ValueError("need at least two channels (system + environment)")
        if len(channels) != len(masses):
            raise ValueError(
                f"channel count {len(channels)} != mass count {len(masses)}")
        if any(m <= 0 for m in masses):
            raise ValueError(f"masses must be positive, got {masses}")
        grid = channels[0].grid
        if any(ch.grid != grid for ch in channels):
            raise ValueError("all channels must share one grid")
        slopes = tuple(float(s) for s in self.slopes) if self.slopes else (
            (0.0,) * len(channels))
        if len(slopes) != len(channels):
            raise ValueError(
                f"slope count {len(slopes)} != channel count {len(channels)}")
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "slopes", slopes)

    @property
    def grid(self) -> Grid1D:
        return self.channels[0].grid

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def n_environment(self) -> int:
        return len(self.channels) - 1

    def values_stack(self) -> np.ndarray:
        return np.stack([ch.values for ch in self.channels])

    def gradient(self, i: int) -> np.ndarray:
        """Total gradient of channel i: slope + spectral d/dx of the periodic part."""
        return self.slopes[i] + spectral_derivative_values(
            self.channels[i].values, self.grid, 1)

    def total_samples(self, i: int) -> np.ndarray:
        """Channel samples including the linear ramp, slope*x + periodic part."""
        return self.slopes[i] * self.grid.x + self.channels[i].values

    def with_values(self, values_2d: np.ndarray) -> "ActionChannels":
        return ActionChannels(
            tuple(RealField(values_2d[i], self.grid) for i in range(self.n_channels)),
            self.masses, self.slopes)


@dataclass(frozen=True)
class PotentialSet:
    """Guiding potentials per channel plus coupling potentials or a closure rule.

    In `symmetric_closure` mode the coupling potentials are recomputed from
    the current action fields on every evaluation (Vc0 = (hbar/4m) lap S1,
    Vc1 = -(hbar/4m) lap S0, zero for higher channels); any stored vc arrays
    are ignored. In `explicit` mode the stored vc arrays are used as given
    (missing vc means zero coupling).
    """

    vg: tuple
    vc: tuple | None = None
    mode: str = EXPLICIT

    def __post_init__(self):
        if self.mode not in (EXPLICIT, SYMMETRIC_CLOSURE):
            raise ValueError(f"unknown potential mode {self.mode!r}")
        object.__setattr__(self, "vg", tuple(self.vg))
        if self.vc is not None:
            object.__setattr__(self, "vc", tuple(self.vc))

    @classmethod
    def zeros(cls, grid, n_channels, mode=EXPLICIT) -> "PotentialSet":
        return cls(tuple(RealField.zeros(grid) for _ in range(n_channels)),
                   None, mode)

    def vg_values(self, i: int, grid) -> np.ndarray:
        if i < len(self.vg):
            return self.vg[i].values
        return np.zeros(grid.n_points)

    def vc_values(self, i: int, grid) -> np.ndarray:
        if self.vc is not None and i < len(self.vc):
            return self.vc[i].values
        return np.zeros(grid.n_points)


def _closure_couplings(values_2d, grid, p: DualParams):
    """Coupling potentials that cancel the wave equation's Laplacian terms."""
    coeff = p.hbar / (4.0 * p.reduced_mass)
    lap_s1 = spectral_derivative_values(values_2d[1], grid, 2)
    lap_s0 = spectral_derivative_values(values_2d[0], grid, 2)
    vc = [coeff * lap_s1, -coeff * lap_s0]
    for _ in range(values_2d.shape[0] - 2):
        vc.append(np.zeros(grid.n_points))
    return vc


def _hj_rhs_values(values_2d: np.ndarray, slopes, masses, pot: PotentialSet,
                   p: DualParams, grid: Grid1D) -> np.ndarray:
    n_ch = values_2d.shape[0]
    grads = [slopes[i] + spectral_derivative_values(values_2d[i], grid, 1)
             for i in range(n_ch)]
    if pot.mode == SYMMETRIC_CLOSURE:
        vc = _closure_couplings(values_2d, grid, p)
    else:
        vc = [pot.vc_values(i, grid) for i in range(n_ch)]
    out = np.empty_like(values_2d)
    env_kinetic = np.zeros(grid.n_points)
    for n in range(1, n_ch):
        env_kinetic = env_kinetic + grads[n] * grads[n] / (2.0 * masses[n])
    out[0] = -(grads[0] * grads[0] / (2.0 * masses[0]) - env_kinetic
               + pot.vg_values(0, grid) + vc[0])
    for n in range(1, n_ch):
        cross = grads[0] * grads[n]
        out[n] = -(cross / (2.0 * masses[0]) + cross / (2.0 * masses[n])
                   + pot.vg_values(n, grid) + vc[n])
    return out


def _check_finite(values_2d: np.ndarray):
    if not np.all(np.isfinite(values_2d)):
        bad = np.argwhere(~np.isfinite(values_2d))
        ch, idx = int(bad[0][0]), int(bad[0][1])
        raise FieldBlowUpError(
            f"field blow-up in channel {ch} at index {idx}", index=idx)


def hj_rhs_multi(S: ActionChannels, pot: PotentialSet, p: DualParams):
    """Time derivatives of all channels; list of RealField."""
    out = _hj_rhs_values(S.values_stack(), S.slopes, S.masses, pot, p, S.grid)
    _check_finite(out)
    return [RealField(out[i], S.grid) for i in range(S.n_channels)]


def hj_rhs_dual(S: ActionChannels, pot: PotentialSet, p: DualParams):
    """Two-channel special case; identical arithmetic to hj_rhs_multi."""
    if S.n_channels != 2:
        raise ValueError(f"dual form needs exactly 2 channels, got {S.n_channels}")
    ds0, ds1 = hj_rhs_multi(S, pot, p)
    return ds0, ds1


@dataclass
class HJTrajectory:
    """Time series of channel states at the snapshot cadence."""

    times: list
    states: list  # list of ActionChannels


def evolve_hj(S0: ActionChannels, pot: PotentialSet, p: DualParams,
              dt: float, n_steps: int, snapshot_every: int = 1,
              grad_threshold: float = GRADIENT_BLOWUP_THRESHOLD) -> HJTrajectory:
    """RK4 time integration of the coupled channel equations.

    Aborts with BlowUpError("caustic/blow-up detected at step s") when any
    channel gradient exceeds `grad_threshold` or fields go non-finite; the
    exception carries the partial HJTrajectory collected so far.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = S0.grid
    slopes, masses = S0.slopes, S0.masses

    def rhs(v):
        return _hj_rhs_values(v, slopes, masses, pot, p, grid)

    v = S0.values_stack()
    traj = HJTrajectory(times=[0.0], states=[S0])
    for step in range(1, n_steps + 1):
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * dt * k1)
        k3 = rhs(v + 0.5 * dt * k2)
        k4 = rhs(v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        bad = not np.all(np.isfinite(v))
        if not bad:
            max_grad = max(
                float(np.max(np.abs(slopes[i] + spectral_derivative_values(
                    v[i], grid, 1)))) for i in range(v.shape[0]))
            bad = max_grad > grad_threshold
        if bad:
            raise BlowUpError(f"caustic/blow-up detected at step {step}",
                              step=step, partial=traj)
        if step % snapshot_every == 0 or step == n_steps:
            traj.times.append(step * dt)
            traj.states.append(S0.with_values(v))
    return traj


def participation_metric(S: ActionChannels) -> RealField:
    """Gram field of environment-channel gradients, W(x) = sum_{mu>=1} (dS_mu)^2.

    In 1D the metric is a single non-negative scalar field; the system
    channel (index 0) is excluded from the sum.
    """
    if S.n_environment < 1:
        raise ValueError("need at least one environment channel")
    w = np.zeros(S.grid.n_points)
    for mu in range(1, S.n_channels):
        g = S.gradient(mu)
        w += g * g
    return RealField(w, S.grid)
