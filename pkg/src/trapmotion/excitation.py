"""Excitation amplitude of the moving trap and its closed-form special cases.

The central object is the dimensionless complex amplitude

    u(t) = -i sqrt(M / (2 hbar omega)) * integral_0^t b''(tau) e^{-i omega tau} d tau,

the Fourier component of the center acceleration at the trap frequency. Its
squared magnitude gamma = |u|^2 is the mean number of quanta excited from the
ground state in the frame moving with the trap, and feeds the Fock transition
probabilities in :mod:`trapmotion.transitions`.

The fixed-frame counterpart

    delta(t) = -i (2 M hbar omega)^{-1/2} * integral_0^t f(tau) e^{+i omega tau} d tau,

with effective force f = M omega^2 b, measures excitation relative to the
non-moving oscillator center; |delta|^2 and gamma agree whenever the moving
and fixed centers coincide (b = b' = 0), and disagree otherwise - the classic
pitfall of applying the forced-oscillator formula to a moving trap.

The phase

    phi(t) = integral_0^t { Im[u'(tau) u*(tau)] + M b(tau) b''(tau) / hbar } d tau

completes the coherent-state transition amplitude; it is only meaningful for
trajectories starting from the origin at rest and is reported as None
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Axis, OscillatorParams, Trajectory
from .quadrature import (
    SCHEMES,
    composite_simpson,
    cumulative_simpson,
    filon_exponential,
    oscillatory_integral,
    piece_grids,
)
from .errors import NumericalError, ResonanceError

#: Relative detuning below which the sinusoidal/circular closed forms are
#: treated as singular and the resonance expression must be used instead.
RESONANCE_DETUNING = 1e-9


@dataclass(frozen=True)
class QuadratureConfig:
    """Controls for the oscillatory quadratures.

    ``steps_per_period`` sets the base resolution per oscillation period (or
    per trajectory feature time, whichever is shorter); grids are then
    doubled until u is stable to ``tol`` relative to the integrand's L1 size.
    The composite Filon scheme is worthwhile once omega * t is very large
    (~1e4 periods) and f varies slowly.
    """

    steps_per_period: int = 64
    scheme: str = "adaptive-simpson"
    tol: float = 1e-8
    max_doublings: int = 14

    def __post_init__(self):
        if self.steps_per_period < 16:
            raise ValueError(f"steps_per_period must be >= 16, got {self.steps_per_period}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not (self.tol > 0.0):
            raise ValueError("tol must be positive")
        if self.max_doublings < 1:
            raise ValueError("max_doublings must be >= 1")


@dataclass(frozen=True)
class ExcitationResult:
    """Amplitude u(t), excitation parameter gamma = |u|^2, and phase phi.

    ``phi`` is None when the trajectory does not start from the origin at
    rest (the phase formula does not apply) or when the caller skipped the
    phase integral.
    """

    u: complex
    gamma: float
    phi: float | None
    t: float


def _resolve_axis(traj, axis: int) -> tuple[Axis, float | None]:
    if isinstance(traj, Trajectory):
        return traj.axes[axis], traj.duration
    if isinstance(traj, Axis):
        return traj, None
    raise TypeError(f"expected Trajectory or Axis, got {type(traj).__name__}")


def _check_time(t: float, duration: float | None) -> None:
    if not math.isfinite(t) or t < 0.0:
        raise ValueError(f"time must be finite and >= 0, got {t!r}")
    if duration is not None and t > duration * (1.0 + 1e-12):
        raise ValueError(f"time {t!r} exceeds trajectory duration {duration!r}")


def _amplitude_prefactor(params: OscillatorParams) -> complex:
    return -1j * math.sqrt(params.mass / (2.0 * params.hbar * params.omega))


def excitation_amplitude(traj, params: OscillatorParams, t: float,
                         cfg: QuadratureConfig | None = None, *,
                         axis: int = 0, with_phase: bool = True) -> ExcitationResult:
    """Moving-frame excitation amplitude u(t) by oscillatory quadrature.

    ``traj`` may be a :class:`Trajectory` (with ``axis`` selecting the
    component) or a bare :class:`Axis`. Set ``with_phase=False`` to skip the
    cumulative phase integral when only gamma is needed (e.g. inside
    optimizer loops).
    """
    ax, duration = _resolve_axis(traj, axis)
    cfg = cfg or QuadratureConfig()
    _check_time(t, duration)
    flags_ok = ax.starts_at_zero and ax.starts_at_rest
    if t == 0.0:
        return ExcitationResult(0.0 + 0.0j, 0.0, 0.0 if (flags_ok and with_phase) else None, 0.0)

    pref = _amplitude_prefactor(params)
    omega = params.omega
    if not (with_phase and flags_ok):
        res = oscillatory_integral(
            ax.bddot, 0.0, t, -omega,
            steps_per_period=cfg.steps_per_period, feature_time=ax.feature_time,
            tol=cfg.tol, scheme=cfg.scheme, max_doublings=cfg.max_doublings,
            breakpoints=ax.breakpoints,
        )
        u = pref * res.value
        return ExcitationResult(u, u.real ** 2 + u.imag ** 2, None, t)

    # Joint refinement: the cumulative u(tau) profile feeds the phase
    # integrand, so both are evaluated on the same doubling grids (split at
    # any acceleration breakpoints). Raw kernel integrals (no prefactor) are
    # compared against the L1 size of b'' so the stopping rule is invariant
    # under rescaling the trajectory.
    prev_raw = prev_phi = None
    diff_raw = diff_phi = math.inf
    mass_over_hbar = params.mass / params.hbar
    for level in range(cfg.max_doublings + 1):
        raw = 0.0 + 0.0j
        phi_val = 0.0
        scale_raw = scale_phi = 0.0
        for ts, te in piece_grids(0.0, t, omega, ax.feature_time,
                                  cfg.steps_per_period, level, ax.breakpoints):
            dx = ts[1] - ts[0]
            acc = np.asarray(ax.bddot(te), dtype=float)
            kernel = acc * np.exp(-1j * omega * te)
            cum = raw + cumulative_simpson(kernel, dx)
            if cfg.scheme == "composite-filon":
                raw = raw + filon_exponential(acc, ts, -omega)
            else:
                raw = complex(cum[-1])
            u_tau = pref * cum
            udot_tau = pref * kernel
            pos = np.asarray(ax.b(te), dtype=float)
            g = np.imag(udot_tau * np.conj(u_tau)) + mass_over_hbar * pos * acc
            phi_val += float(composite_simpson(g, dx))
            scale_raw += float(np.trapezoid(np.abs(acc), dx=dx))
            scale_phi += float(np.trapezoid(np.abs(g), dx=dx))
        if prev_raw is not None:
            diff_raw = abs(raw - prev_raw)
            diff_phi = abs(phi_val - prev_phi)
            if diff_raw <= cfg.tol * scale_raw and diff_phi <= cfg.tol * scale_phi:
                u_val = pref * raw
                return ExcitationResult(u_val, u_val.real ** 2 + u_val.imag ** 2, phi_val, t)
        prev_raw, prev_phi = raw, phi_val
    raise NumericalError(
        f"excitation quadrature did not stabilize after {cfg.max_doublings} "
        f"doublings (last changes: u-kernel {diff_raw:.3e}, phi {diff_phi:.3e})",
        residual=max(diff_raw, diff_phi),
    )


def fixed_frame_delta(traj, params: OscillatorParams, t: float,
                      cfg: QuadratureConfig | None = None, *, axis: int = 0) -> complex:
    """Fixed-frame amplitude delta(t) from the effective force M omega^2 b."""
    ax, duration = _resolve_axis(traj, axis)
    cfg = cfg or QuadratureConfig()
    _check_time(t, duration)
    if t == 0.0:
        return 0.0 + 0.0j
    omega = params.omega
    pref = -1j * params.mass * omega ** 2 / math.sqrt(2.0 * params.mass * params.hbar * omega)
    res = oscillatory_integral(
        ax.b, 0.0, t, +omega,
        steps_per_period=cfg.steps_per_period, feature_time=ax.feature_time,
        tol=cfg.tol, scheme=cfg.scheme, max_doublings=cfg.max_doublings,
        breakpoints=ax.breakpoints,
    )
    return pref * res.value


# --- closed forms -----------------------------------------------------------

def closed_form_constant_accel(a: float, params: OscillatorParams, t: float) -> float:
    """gamma(t) for b'' = a: (2 M a^2 / hbar omega^3) sin^2(omega t / 2).

    Vanishes at every full period, so uniform acceleration never heats the
    oscillator permanently.
    """
    w = params.omega
    return (2.0 * params.mass * a * a / (params.hbar * w ** 3)) * math.sin(0.5 * w * t) ** 2


def closed_form_kick_G(v: float, params: OscillatorParams) -> float:
    """Steady excitation G = M v^2 / (2 hbar omega) after a short velocity ramp.

    Holds for any ramp profile once the ramp time is well under one trap
    period.
    """
    return params.mass * v * v / (2.0 * params.hbar * params.omega)


def closed_form_kick_stop(v: float, params: OscillatorParams, T: float) -> float:
    """Excitation 4 G sin^2(omega T / 2) after a sudden stop at time T."""
    return 4.0 * closed_form_kick_G(v, params) * math.sin(0.5 * params.omega * T) ** 2


def _guard_resonance(Omega: float, params: OscillatorParams) -> None:
    if abs(Omega - params.omega) < RESONANCE_DETUNING * params.omega:
        raise ResonanceError(
            "drive frequency is at the trap resonance; the generic closed form "
            "is singular there - use closed_form_sinusoidal_resonance for the "
            "return-instant value"
        )


def closed_form_sinusoidal(R: float, Omega: float, params: OscillatorParams, t: float) -> float:
    """gamma(t) for b = R (1 - cos(Omega t)), away from resonance.

    At return instants t = 2 pi s / Omega this reduces to
    4 G (Omega omega)^2 / (Omega^2 - omega^2)^2 * sin^2(s pi omega / Omega)
    with G = M (R Omega)^2 / (2 hbar omega).
    """
    _guard_resonance(Omega, params)
    w = params.omega
    G = params.mass * (R * Omega) ** 2 / (2.0 * params.hbar * w)
    wm = w - Omega
    wp = w + Omega
    sm = math.sin(0.5 * wm * t)
    sp = math.sin(0.5 * wp * t)
    bracket = (sm / wm) ** 2 + (sp / wp) ** 2 + 2.0 * math.cos(Omega * t) * sm * sp / (wm * wp)
    return G * Omega ** 2 * bracket


def closed_form_sinusoidal_resonance(R: float, params: OscillatorParams, s: float) -> float:
    """Resonant drive (Omega = omega) after s full drive periods: G (pi s)^2."""
    G = params.mass * (R * params.omega) ** 2 / (2.0 * params.hbar * params.omega)
    return G * (math.pi * s) ** 2


def closed_form_circular(R: float, Omega: float, params: OscillatorParams, s: float) -> float:
    """Total excitation w_s after s revolutions of a circularly driven 2-D trap.

    w_s = 2 M (R Omega omega)^2 (omega^2 + Omega^2)
          / [hbar omega (omega^2 - Omega^2)^2] * sin^2(s pi omega / Omega),
    assuming the rotation starts and stops over windows much shorter than the
    trap period.
    """
    _guard_resonance(Omega, params)
    w = params.omega
    num = 2.0 * params.mass * (R * Omega * w) ** 2 * (w ** 2 + Omega ** 2)
    den = params.hbar * w * (w ** 2 - Omega ** 2) ** 2
    return (num / den) * math.sin(s * math.pi * w / Omega) ** 2


def closed_form_circular_G(R: float, Omega: float, params: OscillatorParams) -> float:
    """Slow-rotation excitation scale G = 2 M R^2 Omega^2 / (hbar omega)."""
    return 2.0 * params.mass * R * R * Omega * Omega / (params.hbar * params.omega)


def closed_form_circular_slow(R: float, Omega: float, params: OscillatorParams, s: float) -> float:
    """Slow-rotation (Omega << omega) limit: w_s = G sin^2(s pi omega / Omega)."""
    return closed_form_circular_G(R, Omega, params) * math.sin(s * math.pi * params.omega / Omega) ** 2


def uniform_motion_gamma(v: float, params: OscillatorParams, t: float) -> float:
    """Fixed-frame gamma(t) for a uniformly moving center b = v t.

    Grows without bound: the t^2 term is just the potential energy of the
    displaced fixed-frame origin in units of hbar omega, which is why the
    fixed-frame formula must not be read as trap heating.
    """
    w = params.omega
    wt = w * t
    bracket = wt ** 2 + 4.0 * math.sin(0.5 * wt) ** 2 - 2.0 * wt * math.sin(wt)
    return params.mass * v * v / (2.0 * params.hbar * w) * bracket
