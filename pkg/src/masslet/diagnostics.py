"""Conservation ledgers, transparency metrics and refinement studies."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .analytic import (
    PhysicalParams,
    Regime,
    TransparencySolution,
    eval_field,
    phases,
    trajectory,
    wrap_phase,
)
from .grid import Grid, centered_gradient, forward_gradient, laplacian
from .solver import (
    FieldState,
    RunOutput,
    SimConfig,
    SimState,
    bead_kinematics,
    init_from_analytic,
    run,
)

__all__ = [
    "Densities",
    "Ledger",
    "DiagnosticsRecord",
    "TransparencyResidual",
    "RefinementResult",
    "ConvergenceStudy",
    "energy_momentum_densities",
    "energy_ledger",
    "global_invariants",
    "field_power_balance",
    "make_record",
    "transparency_residual",
    "phase_lock_error",
    "trajectory_error",
    "relative_drift",
    "observed_order",
    "spatial_convergence",
    "temporal_convergence",
    "convergence_study",
]


class Densities(NamedTuple):
    eps: np.ndarray
    g: np.ndarray
    S: np.ndarray
    Txx: np.ndarray


def energy_momentum_densities(field: FieldState, grid: Grid, params: PhysicalParams) -> Densities:
    """Per-node energy density, momentum density and their fluxes.

    The elastic part of the energy averages the squared slopes of the two
    adjacent cells, so ``sum(eps) * dx`` is the midpoint-rule energy whose
    time derivative matches the discrete Laplacian exactly.  The momentum
    density uses the centered slope.
    """
    u, v = field.u, field.v
    lam, T, c2 = params.density, params.tension, params.c**2
    edge = forward_gradient(u, grid) ** 2
    if grid.periodic:
        slope2 = 0.5 * (edge + np.roll(edge, 1))
    else:
        slope2 = np.zeros_like(u)
        slope2[:-1] += 0.5 * edge
        slope2[1:] += 0.5 * edge
    eps = 0.5 * lam * v**2 + 0.5 * T * slope2
    g = -(T / c2) * v * centered_gradient(u, grid)
    return Densities(eps, g, c2 * g, eps)


class Ledger(NamedTuple):
    """The five transparency constants of motion plus the potential energy."""

    E_field: float
    E_kin: float
    E_clock: float
    P_field: float
    P_particle: float
    E_potential: float = 0.0

    @property
    def E_total(self) -> float:
        return self.E_field + self.E_kin + self.E_clock + self.E_potential

    @property
    def P_total(self) -> float:
        return self.P_field + self.P_particle


def energy_ledger(state: SimState, config: SimConfig, t: float = 0.0) -> Ledger:
    p, grid = config.params, config.grid
    dens = energy_momentum_densities(state.field, grid, p)
    kin = bead_kinematics(state, config, t)
    m, vx = p.m_p, state.masslet.vx_p
    E_pot = config.potential.value(state.masslet.x_p, t) if config.potential else 0.0
    return Ledger(
        E_field=float(dens.eps.sum() * grid.dx),
        E_kin=0.5 * m * vx**2,
        E_clock=0.5 * m * (kin.zdot**2 + p.omega_p**2 * kin.z**2),
        P_field=float(dens.g.sum() * grid.dx),
        P_particle=m * vx,
        E_potential=E_pot,
    )


def global_invariants(state: SimState, config: SimConfig, t: float = 0.0) -> tuple[float, float]:
    """(total energy, total momentum) of string plus bead."""
    led = energy_ledger(state, config, t)
    return led.E_total, led.P_total


def field_power_balance(state: SimState, config: SimConfig, t: float = 0.0) -> tuple[float, float]:
    """(d/dt of the string energy, -N * u_t at the bead).

    The two agree to round-off for the source-split scheme: the string gains
    exactly the power the bead's reaction force injects.
    """
    from .solver import _evaluate

    p, grid = config.params, config.grid
    u, v = state.field.u, state.field.v
    ev = _evaluate(u, v, state.masslet.x_p, state.masslet.vx_p, t, config)
    edge_u = forward_gradient(u, grid)
    edge_v = forward_gradient(v, grid)
    dE = grid.dx * float(p.density * v @ ev.a_field + p.tension * edge_u @ edge_v)
    return dE, -ev.N * ev.u_t


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    N: float
    E_field: float
    E_kin: float
    E_clock: float
    P_field: float
    P_particle: float
    Ma: float
    constraint_residual: float
    phase_lock_error: float = math.nan
    E_potential: float = 0.0

    @property
    def E_total(self) -> float:
        return self.E_field + self.E_kin + self.E_clock + self.E_potential

    @property
    def P_total(self) -> float:
        return self.P_field + self.P_particle


FIELDS = ("t", "N", "E_field", "E_kin", "E_clock", "E_potential", "E_total",
          "P_field", "P_particle", "P_total", "Ma", "constraint_residual",
          "phase_lock_error")


def make_record(state: SimState, config: SimConfig, t: float,
                reference: TransparencySolution | None = None,
                N: float | None = None, x_unwrapped: float | None = None) -> DiagnosticsRecord:
    from .grid import interpolate

    led = energy_ledger(state, config, t)
    kin = bead_kinematics(state, config, t)
    u_at, _, _ = interpolate(state.field.u, None, state.masslet.x_p, config.grid,
                             config.kernel_width, config.gradient, config.kernel_shape)
    ple = math.nan
    if reference is not None and reference.regime is not Regime.SURFER:
        x = state.masslet.x_p if x_unwrapped is None else x_unwrapped
        S = phases(reference, t, x).S
        ple = abs(wrap_phase(S - (reference.clock_pulsation * t + reference.phi)))
    return DiagnosticsRecord(
        t=t, N=kin.N if N is None else N,
        E_field=led.E_field, E_kin=led.E_kin, E_clock=led.E_clock,
        P_field=led.P_field, P_particle=led.P_particle, Ma=kin.Ma,
        constraint_residual=abs(kin.z - u_at), phase_lock_error=ple,
        E_potential=led.E_potential,
    )


class TransparencyResidual(NamedTuple):
    max_abs_N_normalized: float
    velocity_drift: float


def transparency_residual(run_output: RunOutput, params: PhysicalParams | None = None,
                          sol: TransparencySolution | None = None) -> TransparencyResidual:
    """Normalized normal force and horizontal velocity drift over a run.

    The force is scaled by ``m_p omega_p**2 A`` (``B`` when the clock
    amplitude vanishes).  The drift is relative to the initial velocity, or
    absolute when the bead starts at rest.
    """
    params = run_output.config.params if params is None else params
    sol = run_output.reference if sol is None else sol
    N = np.abs(run_output.N)
    maxN = float(N.max()) if N.size else 0.0
    if maxN == 0.0:
        nN = 0.0
    else:
        if sol is None:
            raise ValueError("transparency_residual needs a reference solution for A")
        amp = abs(sol.A) if sol.A != 0 else abs(sol.B)
        scale = params.m_p * params.omega_p**2 * amp
        if scale == 0:
            raise ValueError("normalization m_p omega_p**2 A vanishes")
        nN = maxN / scale
    v = run_output.vx_p
    drift = np.abs(v - v[0]).max() if v.size else 0.0
    if v.size and v[0] != 0:
        drift /= abs(v[0])
    return TransparencyResidual(nN, float(drift))


def phase_lock_error(run_output: RunOutput, sol: TransparencySolution | None = None) -> float:
    """Largest wrapped |S(t, x_p(t)) - (clock t + phi)| along the run."""
    if sol is None:
        sol = run_output.reference
    if sol is None:
        raise ValueError("phase_lock_error needs an analytic reference")
    ref = run_output.reference
    if ref is not None and ref.regime is not sol.regime:
        raise ValueError(f"run was seeded as {ref.regime.value}, reference is {sol.regime.value}")
    if sol.regime is Regime.SURFER:
        raise ValueError("phase locking is defined for bradyon and tachyon solutions")
    t = run_output.t
    S = phases(sol, t, run_output.x_unwrapped).S
    err = wrap_phase(S - (sol.clock_pulsation * t + sol.phi))
    return float(np.max(np.abs(err)))


def trajectory_error(run_output: RunOutput, sol: TransparencySolution | None = None) -> float:
    """Largest |x_p(t) - (x_init + speed t)| along the run."""
    sol = run_output.reference if sol is None else sol
    return float(np.max(np.abs(run_output.x_unwrapped - trajectory(sol, run_output.t))))


def relative_drift(run_output: RunOutput) -> tuple[float, float]:
    """Largest relative excursion of total energy and total momentum."""
    E = np.array([r.E_total for r in run_output.diagnostics])
    P = np.array([r.P_total for r in run_output.diagnostics])

    def rel(a):
        scale = abs(a[0])
        dev = float(np.max(np.abs(a - a[0])))
        return dev / scale if scale > 0 else dev

    return rel(E), rel(P)


def observed_order(h, err) -> float | None:
    """Least-squares slope of log(err) against log(h).

    Returns None (with a warning) when the errors do not decrease
    monotonically with h.
    """
    h, err = np.asarray(h, dtype=float), np.asarray(err, dtype=float)
    order = np.argsort(h)
    h, err = h[order], err[order]
    if np.any(err <= 0) or np.any(np.diff(err) <= 0):
        warnings.warn(f"non-monotone error sequence {err.tolist()}; no order claimed",
                      RuntimeWarning, stacklevel=2)
        return None
    slope, _ = np.polyfit(np.log(h), np.log(err), 1)
    return float(slope)


@dataclass(frozen=True)
class RefinementResult:
    h: tuple
    errors: tuple
    order: float | None
    kind: str
    metric: str


@dataclass(frozen=True)
class ConvergenceStudy:
    spatial: RefinementResult
    temporal: RefinementResult


def _field_error(out: RunOutput, sol: TransparencySolution) -> float:
    snap = out.snapshots[-1]
    exact = eval_field(sol, snap.t, out.config.grid.x)
    return float(np.max(np.abs(snap.u - exact)) / sol.B)


def spatial_convergence(base_config: SimConfig, sol: TransparencySolution,
                        levels: int = 4, metric: str = "trajectory") -> RefinementResult:
    """Halve dx ``levels - 1`` times at fixed Courant number.

    ``metric`` is ``"trajectory"`` (max bead position error) or ``"field"``
    (max string error at the final time, in units of B).
    """
    if levels < 3:
        raise ValueError("a refinement study needs at least 3 levels")
    cfl = base_config.cfl
    hs, errs = [], []
    for level in range(levels):
        grid = replace(base_config.grid, n=base_config.grid.n * 2**level)
        cfg = SimConfig.from_cfl(base_config.params, grid, base_config.t_end, cfl,
                                 **_numerics(base_config))
        out = run(cfg, init_from_analytic(sol, cfg), reference=sol)
        hs.append(grid.dx)
        errs.append(trajectory_error(out, sol) if metric == "trajectory" else _field_error(out, sol))
    return RefinementResult(tuple(hs), tuple(errs), observed_order(hs, errs), "space", metric)


def temporal_convergence(base_config: SimConfig, init: SimState, levels: int = 4,
                         reference_factor: int = 8, metric: str = "field") -> RefinementResult:
    """Halve dt at fixed dx; errors against a run with a much smaller step."""
    if levels < 3:
        raise ValueError("a refinement study needs at least 3 levels")

    def final(dt):
        cfg = base_config.with_(dt=dt, output_stride=0)
        out = run(cfg, init)
        return out

    dts = [base_config.dt / 2**level for level in range(levels)]
    ref = final(dts[-1] / reference_factor)
    errs = []
    for dt in dts:
        out = final(dt)
        if metric == "field":
            errs.append(float(np.max(np.abs(out.final.field.u - ref.final.field.u))))
        else:
            errs.append(abs(out.x_unwrapped[-1] - ref.x_unwrapped[-1]))
    return RefinementResult(tuple(dts), tuple(errs), observed_order(dts, errs), "time", metric)


def convergence_study(base_config: SimConfig, sol: TransparencySolution,
                      levels: int = 4) -> ConvergenceStudy:
    """Spatial (trajectory) and temporal (field) observed orders."""
    spatial = spatial_convergence(base_config, sol, levels)
    temporal = temporal_convergence(base_config, init_from_analytic(sol, base_config), levels)
    return ConvergenceStudy(spatial, temporal)


def _numerics(cfg: SimConfig) -> dict:
    return dict(cfl_target=cfg.cfl_target, kernel_width=cfg.kernel_width,
                kernel_shape=cfg.kernel_shape,
                scheme=cfg.scheme, gradient=cfg.gradient, coupling=cfg.coupling,
                coupled=cfg.coupled, potential=cfg.potential,
                output_stride=cfg.output_stride,
                energy_abort_factor=cfg.energy_abort_factor)
