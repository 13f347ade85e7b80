"""Trajectory optimization for excitation-free trap transport.

Move the trap center by a displacement d in time T while leaving the
oscillator in its initial internal state: the heating measure is the
residual excitation gamma(T) = |u(T)|^2, which vanishes exactly when the
Fourier component of b'' at the trap frequency over [0, T] is zero.

Trajectory families handle the four boundary conditions
b(0) = b'(0) = 0, b(T) = d, b'(T) = 0 by exact elimination: the conditions
fix a subset of the family coefficients and the remaining ones are free
optimization parameters, so every candidate is exactly feasible. The search
is a deterministic Nelder-Mead simplex (the objective is cheap and smooth;
gradients through the quadrature are not worth the machinery at this scale)
with a few restarts from perturbed seeds on stagnation.

The implementation is deliberately scale-equivariant: doubling d doubles
every trajectory and every simplex vertex exactly, so optimized residuals
scale by exactly 4. This is what makes the quadratic-scaling check sharp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .excitation import QuadratureConfig, excitation_amplitude
from .model import Axis, OscillatorParams, Trajectory

#: Residual gamma below which a solution counts as converged (mean phonon
#: number; dimensionless).
DEFAULT_THRESHOLD = 1e-8


@dataclass(frozen=True)
class PolynomialFamily:
    """b(t) = sum_k c_k t^k of the given degree.

    The boundary conditions force c_0 = c_1 = 0 and determine (c_2, c_3)
    from the remaining coefficients; the free parameters are (c_4 .. c_k).
    Degree 3 has no freedom and describes the unique cubic ramp.
    """

    degree: int

    def __post_init__(self):
        if self.degree < 3:
            raise ValueError("polynomial transport needs degree >= 3 to meet the boundary conditions")

    @property
    def n_free(self) -> int:
        return self.degree - 3

    def coefficients(self, problem: "TransportProblem", free_params) -> np.ndarray:
        free = np.asarray(free_params, dtype=float)
        if free.shape != (self.n_free,):
            raise ValueError(
                f"degree-{self.degree} family expects {self.n_free} free "
                f"parameters, got shape {free.shape}"
            )
        if free.size and not np.all(np.isfinite(free)):
            raise ValueError("free parameters must be finite")
        T = problem.duration
        d = problem.displacement
        # position and velocity carried by the free tail c_4..c_k at t = T
        pos_tail = 0.0
        vel_tail = 0.0
        for j, c in enumerate(free, start=4):
            pos_tail += c * T ** j
            vel_tail += j * c * T ** (j - 1)
        # solve c2 T^2 + c3 T^3 = d - pos_tail ; 2 c2 T + 3 c3 T^2 = -vel_tail
        rhs_pos = d - pos_tail
        rhs_vel = -vel_tail
        c3 = (rhs_vel - 2.0 * rhs_pos / T) / (T * T)
        c2 = (rhs_pos - c3 * T ** 3) / (T * T)
        return np.concatenate(([0.0, 0.0, c2, c3], free))

    def build(self, problem: "TransportProblem", free_params) -> Trajectory:
        from .model import make_polynomial

        return make_polynomial(self.coefficients(problem, free_params), problem.duration)

    def seed(self, problem: "TransportProblem") -> np.ndarray:
        """Free parameters of the quintic smoothstep displacement (its
        (c_4, c_5) tail), truncated to the family size."""
        T = problem.duration
        d = problem.displacement
        full = [-15.0 * d / T ** 4, 6.0 * d / T ** 5]
        out = np.zeros(self.n_free)
        out[: min(2, self.n_free)] = full[: min(2, self.n_free)]
        return out

    def param_scales(self, problem: "TransportProblem") -> np.ndarray:
        d_scale = abs(problem.displacement) or 1.0
        return np.array([d_scale / problem.duration ** j for j in range(4, self.degree + 1)])


@dataclass(frozen=True)
class PiecewiseAccelerationFamily:
    """b'' piecewise constant on equal-length segments of [0, T].

    The velocity and position conditions at T eliminate the last two segment
    accelerations; the first (segments - 2) are free.
    """

    segments: int

    def __post_init__(self):
        if self.segments < 2:
            raise ValueError("need at least 2 segments to meet the boundary conditions")

    @property
    def n_free(self) -> int:
        return self.segments - 2

    def accelerations(self, problem: "TransportProblem", free_params) -> np.ndarray:
        free = np.asarray(free_params, dtype=float)
        if free.shape != (self.n_free,):
            raise ValueError(
                f"{self.segments}-segment family expects {self.n_free} free "
                f"parameters, got shape {free.shape}"
            )
        if free.size and not np.all(np.isfinite(free)):
            raise ValueError("free parameters must be finite")
        n = self.segments
        dt = problem.duration / n
        # velocity:  sum_i a_i = 0  (common factor dt dropped)
        # position:  sum_i a_i (n - i - 1/2) dt^2 = d,  i = 0-based segment
        s_vel = -math.fsum(free)
        s_pos = problem.displacement / dt ** 2 - math.fsum(
            a * (n - i - 0.5) for i, a in enumerate(free)
        )
        # remaining unknowns at i = n-2 (weight 1.5) and i = n-1 (weight 0.5)
        a_penult = s_pos - 0.5 * s_vel
        a_last = s_vel - a_penult
        return np.concatenate((free, [a_penult, a_last]))

    def build(self, problem: "TransportProblem", free_params) -> Trajectory:
        accel = self.accelerations(problem, free_params)
        n = self.segments
        dt = problem.duration / n
        edges = dt * np.arange(n + 1)
        interior = edges[1:-1]
        v_start = np.concatenate(([0.0], np.cumsum(accel * dt)))
        b_start = np.concatenate(([0.0], np.cumsum(v_start[:-1] * dt + 0.5 * accel * dt ** 2)))

        def locate(t):
            t = np.asarray(t, dtype=float)
            idx = np.clip((t / dt).astype(int), 0, n - 1)
            return t, idx, t - edges[idx]

        def b(t):
            _, idx, tau = locate(t)
            return b_start[idx] + v_start[idx] * tau + 0.5 * accel[idx] * tau ** 2

        def bdot(t):
            _, idx, tau = locate(t)
            return v_start[idx] + accel[idx] * tau

        def bddot(t):
            # mean of the one-sided limits exactly at a segment edge; the
            # quadratures sample inside the pieces, this is for direct callers
            t, idx, _ = locate(t)
            scalar = t.ndim == 0
            flat = np.atleast_1d(t)
            vals = accel[np.atleast_1d(idx)].astype(float)
            if interior.size:
                pos = np.searchsorted(interior, flat)
                safe = np.minimum(pos, interior.size - 1)
                hit = (pos < interior.size) & (interior[safe] == flat)
                if np.any(hit):
                    j = pos[hit]
                    vals[hit] = 0.5 * (accel[j] + accel[j + 1])
            return float(vals[0]) if scalar else vals

        axis = Axis(b=b, bdot=bdot, bddot=bddot, starts_at_zero=True,
                    starts_at_rest=True, breakpoints=tuple(interior))
        return Trajectory((axis,), problem.duration)

    def seed(self, problem: "TransportProblem") -> np.ndarray:
        d_scale = abs(problem.displacement) or 1.0
        amp = d_scale / problem.duration ** 2
        return amp * np.sin(math.pi * (np.arange(self.n_free) + 1) / (self.n_free + 1)) \
            if self.n_free else np.zeros(0)

    def param_scales(self, problem: "TransportProblem") -> np.ndarray:
        d_scale = abs(problem.displacement) or 1.0
        return np.full(self.n_free, d_scale / problem.duration ** 2)


@dataclass(frozen=True)
class TransportProblem:
    """Carry the oscillator by ``displacement`` in ``duration`` without heating."""

    displacement: float
    duration: float
    params: OscillatorParams
    family: PolynomialFamily | PiecewiseAccelerationFamily

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ValueError(f"duration must be finite and positive, got {self.duration!r}")
        if not math.isfinite(self.displacement):
            raise ValueError(f"displacement must be finite, got {self.displacement!r}")


@dataclass(frozen=True)
class TransportSolution:
    trajectory: Trajectory
    residual: float
    evaluations: int
    converged: bool
    free_params: np.ndarray


def objective(problem: TransportProblem, free_params,
              cfg: QuadratureConfig | None = None) -> float:
    """Residual excitation gamma(T) of the constrained trajectory."""
    traj = problem.family.build(problem, free_params)
    result = excitation_amplitude(traj, problem.params, problem.duration,
                                  cfg, with_phase=False)
    return result.gamma


def verify_boundaries(traj: Trajectory, problem: TransportProblem,
                      rtol: float = 1e-9) -> None:
    """Independently re-check the four boundary conditions."""
    ax = traj.axes[0]
    d = problem.displacement
    T = problem.duration
    len_scale = max(abs(d), 1e-300)
    vel_scale = max(abs(d) / T, 1e-300)
    checks = (
        ("b(0)", float(ax.b(0.0)), 0.0, len_scale),
        ("b'(0)", float(ax.bdot(0.0)), 0.0, vel_scale),
        ("b(T)", float(ax.b(T)), d, len_scale),
        ("b'(T)", float(ax.bdot(T)), 0.0, vel_scale),
    )
    for name, got, want, scale in checks:
        if abs(got - want) > rtol * scale:
            raise NumericalError(
                f"boundary condition {name} violated: got {got!r}, want {want!r}"
            )


class _BudgetExhausted(Exception):
    pass


class _ThresholdReached(Exception):
    pass


class _CountedObjective:
    def __init__(self, problem, cfg, budget, threshold):
        self.problem = problem
        self.cfg = cfg
        self.budget = budget
        self.threshold = threshold
        self.count = 0
        self.best_f = math.inf
        self.best_x = None

    def __call__(self, x) -> float:
        if self.count >= self.budget:
            raise _BudgetExhausted
        self.count += 1
        f = objective(self.problem, x, self.cfg)
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x, dtype=float)
        if self.best_f < self.threshold:
            raise _ThresholdReached
        return f


def _nelder_mead(fn, x0, steps, fatol=0.0, xatol=0.0):
    """Standard Nelder-Mead on fn from x0 with per-coordinate initial steps.

    Runs until the budget inside ``fn`` is exhausted or the simplex collapses
    below the tolerances. Ties are broken stably, so the walk is
    deterministic.
    """
    n = len(x0)
    simplex = [np.array(x0, dtype=float)]
    for i in range(n):
        vertex = np.array(x0, dtype=float)
        vertex[i] += steps[i]
        simplex.append(vertex)
    fvals = [fn(v) for v in simplex]

    while True:
        order = sorted(range(n + 1), key=lambda i: (fvals[i], i))
        simplex = [simplex[i] for i in order]
        fvals = [fvals[i] for i in order]
        if fvals[-1] - fvals[0] <= fatol:
            break
        if max(float(np.max(np.abs(v - simplex[0]))) for v in simplex[1:]) <= xatol:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        f_r = fn(reflected)
        if f_r < fvals[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_e = fn(expanded)
            if f_e < f_r:
                simplex[-1], fvals[-1] = expanded, f_e
            else:
                simplex[-1], fvals[-1] = reflected, f_r
        elif f_r < fvals[-2]:
            simplex[-1], fvals[-1] = reflected, f_r
        else:
            if f_r < fvals[-1]:
                contracted = centroid + 0.5 * (reflected - centroid)
                f_c = fn(contracted)
                accept = f_c <= f_r
            else:
                contracted = centroid + 0.5 * (worst - centroid)
                f_c = fn(contracted)
                accept = f_c < fvals[-1]
            if accept:
                simplex[-1], fvals[-1] = contracted, f_c
            else:
                best = simplex[0]
                for i in range(1, n + 1):
                    simplex[i] = best + 0.5 * (simplex[i] - best)
                    fvals[i] = fn(simplex[i])
    return simplex[0], fvals[0]


def optimize(problem: TransportProblem, seed_params=None, budget: int = 2000, *,
             cfg: QuadratureConfig | None = None,
             threshold: float = DEFAULT_THRESHOLD,
             max_restarts: int = 5, rng_seed: int = 0) -> TransportSolution:
    """Minimize the residual excitation over the family's free parameters.

    Deterministic given ``seed_params`` and ``rng_seed``. Runs the simplex
    search, restarting from multiplicatively perturbed seeds (up to
    ``max_restarts`` times) while the best residual stays above ``threshold``
    and budget remains. Exhausting the budget without reaching the threshold
    is reported through ``converged=False``, not an error. The returned
    residual is never worse than the seed's.
    """
    if budget < 50:
        raise ValueError(f"budget must be >= 50 evaluations, got {budget}")
    family = problem.family
    if seed_params is None:
        seed_params = family.seed(problem)
    seed = np.asarray(seed_params, dtype=float)
    if seed.shape != (family.n_free,):
        raise ValueError(
            f"seed has shape {seed.shape}, family expects ({family.n_free},)"
        )

    counted = _CountedObjective(problem, cfg, budget, threshold)
    scales = family.param_scales(problem)
    rng = np.random.default_rng(rng_seed)

    if family.n_free == 0:
        # fully constrained: the single feasible trajectory is the answer
        try:
            counted(seed)
        except _ThresholdReached:
            pass
        residual = counted.best_f
    else:
        start = seed
        for _ in range(max_restarts + 1):
            steps = 0.05 * np.maximum(np.abs(start), scales)
            try:
                _nelder_mead(counted, start, steps)
            except (_BudgetExhausted, _ThresholdReached):
                break
            if counted.best_f < threshold:
                break
            # stagnated above threshold: restart from a perturbed best point
            factors = 1.0 + 0.25 * rng.standard_normal(family.n_free)
            start = counted.best_x * factors + 0.05 * scales * rng.standard_normal(family.n_free)
        residual = counted.best_f

    best_x = counted.best_x if counted.best_x is not None else seed
    trajectory = family.build(problem, best_x)
    verify_boundaries(trajectory, problem)
    return TransportSolution(
        trajectory=trajectory,
        residual=residual,
        evaluations=counted.count,
        converged=residual < threshold,
        free_params=np.array(best_x),
    )
