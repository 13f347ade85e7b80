"""Quadrature primitives for oscillatory Fourier-type integrals.

Two schemes are provided for integrals of the form

    I = integral_a^b f(t) exp(i * omega * t) dt,   f real-valued and smooth:

* refined composite Simpson ("adaptive-simpson"): a uniform grid resolving
  both the oscillation period and the trajectory's own feature time, doubled
  until the value is stable;
* composite Filon ("composite-filon"): parabolic fit of f per panel pair,
  integrated exactly against the oscillation. Useful when omega*(b-a) is so
  large that resolving every period is wasteful.

Convergence is judged against the L1 size of f (times the unit-modulus
oscillation), so the stopping rule is invariant under rescaling f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

SCHEMES = ("adaptive-simpson", "composite-filon")

#: Hard cap on the per-level grid size; refinement beyond this aborts rather
#: than exhausting memory.
MAX_TOTAL_INTERVALS = 1 << 25


def composite_simpson(y: np.ndarray, dx: float):
    """Composite Simpson rule over a uniform grid with an even interval count."""
    n = len(y) - 1
    if n < 2 or n % 2:
        raise ValueError(f"need an even number of intervals >= 2, got {n}")
    return (dx / 3.0) * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-1:2]))


def cumulative_simpson(y: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral on the sample grid; exact for cubics panel-wise.

    Even nodes get the composite Simpson partial sums; odd nodes use the
    (5, 8, -1)/12 half-panel rule on the enclosing panel.
    """
    n = len(y) - 1
    if n < 2 or n % 2:
        raise ValueError(f"need an even number of intervals >= 2, got {n}")
    f0, f1, f2 = y[:-2:2], y[1:-1:2], y[2::2]
    full = dx * (f0 + 4.0 * f1 + f2) / 3.0
    half = dx * (5.0 * f0 + 8.0 * f1 - f2) / 12.0
    out = np.empty(len(y), dtype=np.result_type(y.dtype, float))
    even = np.concatenate(([0.0], np.cumsum(full)))
    out[0::2] = even
    out[1::2] = even[:-1] + half
    return out


def _filon_weights(theta: float) -> tuple[float, float, float]:
    # Classic Filon weights; Taylor series below theta ~ 1/6 to dodge
    # catastrophic cancellation in the closed forms.
    if theta < 1.0 / 6.0:
        t2 = theta * theta
        alpha = theta * t2 * (2.0 / 45.0 + t2 * (-2.0 / 315.0 + t2 * (2.0 / 4725.0)))
        beta = 2.0 / 3.0 + t2 * (2.0 / 15.0 + t2 * (-4.0 / 105.0 + t2 * (2.0 / 567.0)))
        gamma = 4.0 / 3.0 + t2 * (-2.0 / 15.0 + t2 * (1.0 / 210.0 + t2 * (-1.0 / 11340.0)))
        return alpha, beta, gamma
    sin_t, cos_t = math.sin(theta), math.cos(theta)
    t3 = theta ** 3
    alpha = (theta ** 2 + theta * sin_t * cos_t - 2.0 * sin_t ** 2) / t3
    beta = 2.0 * (theta * (1.0 + cos_t ** 2) - 2.0 * sin_t * cos_t) / t3
    gamma = 4.0 * (sin_t - theta * cos_t) / t3
    return alpha, beta, gamma


def filon_exponential(fvals: np.ndarray, ts: np.ndarray, omega: float) -> complex:
    """Composite Filon value of integral f(t) e^{i omega t} dt on a uniform grid.

    ``fvals`` must be real samples on ``ts`` with an even interval count.
    """
    n = len(ts) - 1
    if n < 2 or n % 2:
        raise ValueError(f"need an even number of intervals >= 2, got {n}")
    h = ts[1] - ts[0]
    w = abs(omega)
    if w == 0.0:
        return complex(composite_simpson(np.asarray(fvals, dtype=float), h))
    sign = 1.0 if omega > 0.0 else -1.0
    alpha, beta, gamma = _filon_weights(w * h)
    c = np.cos(w * ts)
    s = np.sin(w * ts)
    fc = fvals * c
    fs = fvals * s
    c_even = np.sum(fc[0::2]) - 0.5 * (fc[0] + fc[-1])
    c_odd = np.sum(fc[1::2])
    s_even = np.sum(fs[0::2]) - 0.5 * (fs[0] + fs[-1])
    s_odd = np.sum(fs[1::2])
    i_cos = h * (alpha * (fvals[-1] * s[-1] - fvals[0] * s[0]) + beta * c_even + gamma * c_odd)
    i_sin = h * (-alpha * (fvals[-1] * c[-1] - fvals[0] * c[0]) + beta * s_even + gamma * s_odd)
    return complex(i_cos, sign * i_sin)


def initial_intervals(span: float, omega: float, feature_time: float | None,
                      steps_per_period: int) -> int:
    """Even interval count resolving the oscillation and the trajectory feature.

    The step is min(oscillation period, feature time, span) / steps_per_period,
    so short pieces (ramps isolated by breakpoints) are resolved on their own
    scale without inflating the grid elsewhere.
    """
    dt = span / steps_per_period
    if omega != 0.0:
        dt = min(dt, (2.0 * math.pi / abs(omega)) / steps_per_period)
    if feature_time is not None and feature_time > 0.0:
        dt = min(dt, feature_time / steps_per_period)
    n = max(32, int(math.ceil(span / dt)))
    return n + (n % 2)


@dataclass(frozen=True)
class OscillatoryResult:
    value: complex
    n_intervals: int
    error_estimate: float
    scale: float


def piece_bounds(a: float, b: float, breakpoints=()) -> list[tuple[float, float]]:
    """Split [a, b] at the interior breakpoints that fall strictly inside it."""
    cuts = sorted(p for p in breakpoints if a < p < b)
    bounds = [a, *cuts, b]
    return list(zip(bounds[:-1], bounds[1:]))


def piece_grids(a: float, b: float, omega: float, feature_time: float | None,
                steps_per_period: int, level: int, breakpoints=()):
    """Per-piece (nodes, sample_times) grids for refinement ``level``.

    Interval counts double with ``level``. Grid nodes land exactly on the
    breakpoints; the sample times are identical except that endpoints sitting
    on a breakpoint are inset into the piece by a 1e-9 fraction of the local
    step, so a discontinuous integrand is only ever sampled one-sidedly. The
    integrand is smooth within each piece, restoring clean Simpson/Filon
    convergence.
    """
    cuts = set(p for p in breakpoints if a < p < b)
    grids = []
    total = 0
    for lo, hi in piece_bounds(a, b, breakpoints):
        n = initial_intervals(hi - lo, omega, feature_time, steps_per_period) << level
        total += n
        if total > MAX_TOTAL_INTERVALS:
            raise NumericalError(
                f"refinement level {level} would need more than "
                f"{MAX_TOTAL_INTERVALS} quadrature intervals"
            )
        ts = np.linspace(lo, hi, n + 1)
        if cuts:
            inset = 1e-9 * (hi - lo) / n
            te = ts.copy()
            if lo in cuts:
                te[0] = lo + inset
            if hi in cuts:
                te[-1] = hi - inset
            grids.append((ts, te))
        else:
            grids.append((ts, ts))
    return grids


def oscillatory_integral(f, a: float, b: float, omega: float, *,
                         steps_per_period: int = 64,
                         feature_time: float | None = None,
                         tol: float = 1e-8,
                         scheme: str = "adaptive-simpson",
                         max_doublings: int = 14,
                         breakpoints=()) -> OscillatoryResult:
    """Integrate f(t) e^{i omega t} over [a, b] to a scale-relative tolerance.

    The grid is doubled until successive values agree within ``tol`` times
    the L1 norm of f; failure to converge raises :class:`NumericalError`
    carrying the last observed difference as the residual estimate. Known
    discontinuity locations of f can be passed as ``breakpoints``; the
    integral is then assembled piecewise so the jumps never sit inside a
    Simpson panel.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    span = b - a
    if span == 0.0:
        return OscillatoryResult(0.0 + 0.0j, 0, 0.0, 0.0)
    if span < 0.0:
        raise ValueError(f"integration bounds must be ordered, got [{a!r}, {b!r}]")
    prev = None
    diff = math.inf
    scale = 0.0
    for level in range(max_doublings + 1):
        value = 0.0 + 0.0j
        scale = 0.0
        n_total = 0
        for ts, te in piece_grids(a, b, omega, feature_time, steps_per_period,
                                  level, breakpoints):
            fv = np.asarray(f(te), dtype=float)
            dx = ts[1] - ts[0]
            scale += float(np.trapezoid(np.abs(fv), dx=dx))
            if scheme == "composite-filon":
                value += filon_exponential(fv, ts, omega)
            else:
                value += complex(composite_simpson(fv * np.exp(1j * omega * te), dx))
            n_total += len(ts) - 1
        if prev is not None:
            diff = abs(value - prev)
            if diff <= tol * scale:
                return OscillatoryResult(value, n_total, diff / 15.0, scale)
        prev = value
    raise NumericalError(
        f"oscillatory quadrature did not stabilize after {max_doublings} grid "
        f"doublings (last change {diff:.3e}, scale {scale:.3e})",
        residual=diff,
    )
