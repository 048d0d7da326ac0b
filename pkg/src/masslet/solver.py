"""Time integration of the coupled string-masslet system.

The string is discretized by second-order finite differences (method of
lines) and the bead couples to it through the kernel of :mod:`masslet.grid`.
The concatenated state ``(u, du/dt, x_p, dx_p/dt)`` is advanced with the
classical four-stage Runge-Kutta scheme.

The bead height is never stored: ``z_p`` is always the interpolated string
displacement, and ``dz_p/dt`` its material derivative.  The normal force
``N`` follows from eliminating the bead accelerations between the
horizontal and vertical equations of motion.  Because the string
acceleration at the bead itself contains ``-N/lambda * kernel``, the
elimination yields an added-mass term in the denominator::

    N = m (a_free + 2 v u_tx + v**2 u_xx + omega_p**2 z - s V'/m)
        / (1 + s**2 + m kappa / lambda)

with ``a_free`` the interpolated string acceleration without the bead and
``kappa = sum(phi_i * w_i)``.  No iteration is needed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .analytic import (
    PhysicalParams,
    Regime,
    TransparencySolution,
    eval_field,
    eval_field_dt,
    plane_wavenumbers,
)
from .grid import (
    KERNEL_RADIUS,
    KERNEL_SHAPES,
    Grid,
    laplacian,
    local_centered,
    stencil,
)

__all__ = [
    "Scheme",
    "ExternalPotential",
    "SimConfig",
    "FieldState",
    "MassletState",
    "SimState",
    "BeadKinematics",
    "RunOutput",
    "Snapshot",
    "ConfigError",
    "InstabilityError",
    "bead_kinematics",
    "normal_force",
    "kink_force_estimate",
    "rhs",
    "step_rk4",
    "init_from_analytic",
    "init_pulse",
    "init_zero",
    "commensurate_lengths",
    "run",
]

MAX_CFL = 0.9


class ConfigError(ValueError):
    """Invalid simulation configuration."""


class InstabilityError(RuntimeError):
    """Integration aborted; ``output`` holds everything recorded so far."""

    def __init__(self, message, output=None):
        super().__init__(message)
        self.output = output


class Scheme(str, enum.Enum):
    SOURCE_SPLIT = "source_split"
    VARIABLE_DENSITY = "variable_density"


@dataclass(frozen=True)
class ExternalPotential:
    """Longitudinal potential V(x) acting on the bead only.

    ``harmonic``: ``amplitude * (x - center)**2``.
    ``cosine``: ``amplitude * cos(2 pi x / period + phase)``.
    """

    profile: str = "none"
    amplitude: float = 0.0
    center: float = 0.0
    period: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.profile not in ("none", "harmonic", "cosine"):
            raise ConfigError(f"unknown potential profile {self.profile!r}")
        if self.profile == "cosine" and not self.period > 0:
            raise ConfigError("cosine potential needs period > 0")

    def value(self, x: float, t: float = 0.0) -> float:
        if self.profile == "harmonic":
            return self.amplitude * (x - self.center) ** 2
        if self.profile == "cosine":
            return self.amplitude * math.cos(2 * math.pi * x / self.period + self.phase)
        return 0.0

    def gradient(self, x: float, t: float = 0.0) -> float:
        if self.profile == "harmonic":
            return 2 * self.amplitude * (x - self.center)
        if self.profile == "cosine":
            k = 2 * math.pi / self.period
            return -self.amplitude * k * math.sin(k * x + self.phase)
        return 0.0


@dataclass(frozen=True)
class SimConfig:
    """Everything that defines a run.

    ``gradient`` selects how the slope and curvature at the bead are
    estimated: kernel-weighted centered differences (``"centered"``) or
    exact derivatives of the kernel interpolant (``"kernel"``, width 2 or
    3 only).  The kernel variant derives from a discrete Lagrangian, so the
    semi-discrete system conserves energy exactly; it is the default.  ``coupling="alternating"`` advances string and bead
    one after the other instead of as one flow.  ``kernel_shape`` picks the
    width-3 kernel, see :mod:`masslet.grid`.  ``coupled=False`` forces
    N = 0 (free string, inertial bead).
    """

    params: PhysicalParams
    grid: Grid
    dt: float
    t_end: float
    cfl_target: float = 0.5
    kernel_width: int = 3
    scheme: Scheme = Scheme.SOURCE_SPLIT
    gradient: str = "kernel"
    kernel_shape: str = "bspline"
    coupling: str = "monolithic"
    coupled: bool = True
    potential: ExternalPotential | None = None
    output_stride: int = 0
    energy_abort_factor: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not 0 < self.cfl_target <= MAX_CFL:
            raise ConfigError(f"cfl_target must lie in (0, {MAX_CFL}], got {self.cfl_target}")
        if self.kernel_width not in KERNEL_RADIUS:
            raise ConfigError(f"kernel_width must be 1, 2 or 3, got {self.kernel_width}")
        if self.kernel_shape not in KERNEL_SHAPES:
            raise ConfigError(f"unknown kernel shape {self.kernel_shape!r}")
        if self.kernel_shape == "balanced" and self.kernel_width != 3:
            raise ConfigError("the balanced kernel exists for kernel_width 3 only")
        if self.gradient not in ("centered", "kernel"):
            raise ConfigError(f"unknown gradient mode {self.gradient!r}")
        if self.gradient == "kernel" and self.kernel_width == 1:
            raise ConfigError("kernel gradients need a kernel width of 2 or 3")
        if self.coupling not in ("monolithic", "alternating"):
            raise ConfigError(f"unknown coupling mode {self.coupling!r}")
        if not (math.isfinite(self.dt) and self.dt != 0):
            raise ConfigError(f"dt must be finite and nonzero, got {self.dt}")
        if self.t_end * self.dt < 0:
            raise ConfigError("dt and t_end must have the same sign")
        if self.cfl > self.cfl_target * (1 + 1e-12):
            raise ConfigError(
                f"CFL number {self.cfl:.6g} exceeds the target {self.cfl_target:.6g} "
                f"(dt={self.dt:.6g}, dx={self.grid.dx:.6g}, c={self.params.c:.6g})")
        if self.output_stride < 0:
            raise ConfigError("output_stride must be >= 0")

    @property
    def cfl(self) -> float:
        return abs(self.dt) * self.params.c / self.grid.dx

    @property
    def n_steps(self) -> int:
        return max(0, math.ceil(self.t_end / self.dt - 1e-9))

    @classmethod
    def from_cfl(cls, params: PhysicalParams, grid: Grid, t_end: float,
                 cfl: float = 0.5, **kw) -> "SimConfig":
        """Largest time step at Courant number ``cfl`` that lands on ``t_end``."""
        dt = cfl * grid.dx / params.c
        if t_end > 0:
            dt = t_end / math.ceil(t_end / dt - 1e-9)
        kw.setdefault("cfl_target", max(cfl, kw.get("cfl_target", cfl)))
        return cls(params=params, grid=grid, dt=dt, t_end=t_end, **kw)

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass
class FieldState:
    u: np.ndarray
    v: np.ndarray


@dataclass
class MassletState:
    x_p: float
    vx_p: float


@dataclass
class SimState:
    field: FieldState
    masslet: MassletState

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.field.u, self.field.v,
                               [self.masslet.x_p, self.masslet.vx_p]])

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "SimState":
        m = (len(y) - 2) // 2
        return cls(FieldState(y[:m].copy(), y[m:2 * m].copy()),
                   MassletState(float(y[-2]), float(y[-1])))

    def copy(self) -> "SimState":
        return SimState(FieldState(self.field.u.copy(), self.field.v.copy()),
                        MassletState(self.masslet.x_p, self.masslet.vx_p))


class BeadKinematics(NamedTuple):
    """Bead quantities read through the constraint z_p = u(t, x_p)."""

    z: float
    zdot: float
    slope: float
    u_t: float
    N: float
    ax: float
    Ma: float


class _Coupled(NamedTuple):
    a_field: np.ndarray
    ax: float
    N: float
    z: float
    slope: float
    u_t: float


def _evaluate(u, v, x, vx, t, cfg: SimConfig) -> _Coupled:
    """String and bead accelerations for one state."""
    p, grid = cfg.params, cfg.grid
    c2, lam, m = p.c**2, p.density, p.m_p
    lap = c2 * laplacian(u, grid)
    st = stencil(x, grid, cfg.kernel_width, cfg.kernel_shape)
    J, phi = st.nodes, st.phi
    z = float(phi @ u[J])
    u_t = float(phi @ v[J])
    if cfg.gradient == "centered":
        d1u, d2u = local_centered(u, J, grid)
        d1v, _ = local_centered(v, J, grid)
        s, utx, uxx = float(phi @ d1u), float(phi @ d1v), float(phi @ d2u)
    else:
        s = float(st.dphi @ u[J])
        utx = float(st.dphi @ v[J])
        uxx = float(st.d2phi @ u[J])
    Vp = cfg.potential.gradient(x, t) if cfg.potential is not None else 0.0

    if not cfg.coupled:
        return _Coupled(lap, -Vp / m, 0.0, z, s, u_t)

    if grid.periodic:
        phi_a = phi
    else:
        phi_a = np.where((J == 0) | (J == grid.n), 0.0, phi)
    w = phi_a / grid.dx
    R0 = 2 * vx * utx + vx**2 * uxx + p.omega_p**2 * z

    if cfg.scheme is Scheme.SOURCE_SPLIT:
        kappa = float(phi_a @ w)
        a_free = float(phi @ lap[J])
        N = m * (a_free + R0 - s * Vp / m) / (1 + s**2 + m * kappa / lam)
        a = lap
        a[J] -= (N / lam) * w
        ax = -(s * N + Vp) / m
    else:
        alpha = 1.0 / (lam + m * w)
        A0 = float(phi @ (alpha * lam * lap[J]))
        beta = float(phi @ (alpha * m * w))
        ax = -(s * (A0 + (1 - beta) * R0) + Vp / m) / (1 + s**2 * (1 - beta))
        G = R0 + ax * s
        a = lap
        a[J] = alpha * (lam * lap[J] - m * w * G)
        N = m * (float(phi @ a[J]) + G)
    return _Coupled(a, ax, N, z, s, u_t)


def bead_kinematics(state: SimState, config: SimConfig, t: float = 0.0) -> BeadKinematics:
    f, b = state.field, state.masslet
    ev = _evaluate(f.u, f.v, b.x_p, b.vx_p, t, config)
    zdot = ev.u_t + b.vx_p * ev.slope
    return BeadKinematics(ev.z, zdot, ev.slope, ev.u_t, ev.N, ev.ax,
                          abs(b.vx_p) / config.params.c)


def normal_force(state: SimState, config: SimConfig, t: float = 0.0) -> float:
    """Normal (constraint) force N between string and bead."""
    f, b = state.field, state.masslet
    return _evaluate(f.u, f.v, b.x_p, b.vx_p, t, config).N


def kink_force_estimate(state: SimState, config: SimConfig) -> float:
    """N from the slope jump T (u_x+ - u_x-) measured just outside the kernel.

    Independent of :func:`normal_force`; it converges to the same value as
    the grid is refined because the inertia of the string segment spanned
    by the kernel vanishes with it.
    """
    grid = config.grid
    dx = grid.dx
    radius = KERNEL_RADIUS[config.kernel_width]
    s = state.masslet.x_p / dx
    lo = math.floor(s - radius) + 1
    hi = math.ceil(s + radius) - 1
    left = (lo - 2, lo - 1)
    right = (hi + 1, hi + 2)
    if not grid.periodic and (left[0] < 0 or right[1] > grid.n):
        raise ValueError("bead too close to a clamped end for the kink estimator")
    u = state.field.u
    n = grid.num_nodes

    def at(i):
        return u[i % n]

    slope_left = (at(left[1]) - at(left[0])) / dx
    slope_right = (at(right[1]) - at(right[0])) / dx
    return config.params.tension * (slope_right - slope_left)


def _vector_rhs(y, t, cfg: SimConfig, part: str = "all"):
    m = (len(y) - 2) // 2
    u, v = y[:m], y[m:2 * m]
    x, vx = y[-2], y[-1]
    ev = _evaluate(u, v, x, vx, t, cfg)
    dy = np.empty_like(y)
    if part == "particle":
        dy[:2 * m] = 0.0
    else:
        dy[:m] = v
        dy[m:2 * m] = ev.a_field
    if part == "field":
        dy[-2:] = 0.0
    else:
        dy[-2] = vx
        dy[-1] = ev.ax
    return dy, ev


def rhs(state: SimState, t: float, config: SimConfig) -> SimState:
    """Time derivatives, packed in a :class:`SimState` of rates."""
    y = state.to_vector()
    dy, _ = _vector_rhs(y, t, config)
    if not np.all(np.isfinite(dy)):
        raise InstabilityError(f"non-finite time derivative at t={t}")
    return SimState.from_vector(dy)


def _rk4(y, t, dt, cfg, part="all", k1=None):
    if k1 is None:
        k1, _ = _vector_rhs(y, t, cfg, part)
    k2, _ = _vector_rhs(y + 0.5 * dt * k1, t + 0.5 * dt, cfg, part)
    k3, _ = _vector_rhs(y + 0.5 * dt * k2, t + 0.5 * dt, cfg, part)
    k4, _ = _vector_rhs(y + dt * k3, t + dt, cfg, part)
    return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _step_vector(y, t, dt, cfg, k1=None):
    if cfg.coupling == "monolithic":
        y = _rk4(y, t, dt, cfg, "all", k1)
    else:
        y = _rk4(y, t, dt, cfg, "field")
        y = _rk4(y, t, dt, cfg, "particle")
    if cfg.grid.periodic:
        y[-2] = cfg.grid.wrap(y[-2])
    return y


def step_rk4(state: SimState, t: float, dt: float, config: SimConfig) -> SimState:
    """One classical Runge-Kutta step of the coupled state."""
    y = _step_vector(state.to_vector(), t, dt, config)
    if not np.all(np.isfinite(y)):
        raise InstabilityError(f"non-finite state after step at t={t}")
    return SimState.from_vector(y)


def commensurate_lengths(sol: TransparencySolution, L: float) -> tuple[float, float]:
    """Periodic domain lengths bracketing ``L`` that hold the solution exactly."""
    if sol.regime is Regime.SURFER:
        L0 = 2 * math.pi / abs(sol.k_lab)
    else:
        ratio = Fraction(abs(sol.speed) / sol.c).limit_denominator(10**6)
        lam_group = 2 * math.pi * sol.c / sol.omega_lab
        L0 = max(ratio.denominator, 1) * lam_group
    below = max(1, math.floor(L / L0)) * L0
    above = max(1, math.ceil(L / L0)) * L0
    return below, above


def _check_commensurate(sol, grid, rtol=1e-8):
    bad = []
    for k in plane_wavenumbers(sol):
        q = grid.L * k / (2 * math.pi)
        if abs(q - round(q)) > rtol * max(1.0, q):
            bad.append(q)
    if bad:
        lo, hi = commensurate_lengths(sol, grid.L)
        raise ConfigError(
            f"domain L={grid.L!r} holds {', '.join(f'{q:.6g}' for q in bad)} wavelengths "
            f"of the solution; nearest commensurate lengths are {lo!r} and {hi!r}")


def init_from_analytic(sol: TransparencySolution, config: SimConfig) -> SimState:
    """Sample a closed-form solution and place the bead on its trajectory."""
    grid = config.grid
    if grid.periodic:
        _check_commensurate(sol, grid)
    x = grid.x
    u = np.asarray(eval_field(sol, 0.0, x), dtype=float)
    v = np.asarray(eval_field_dt(sol, 0.0, x), dtype=float)
    if not grid.periodic:
        u[0] = u[-1] = v[0] = v[-1] = 0.0
    return SimState(FieldState(u, v), MassletState(grid.wrap(sol.x_init), sol.speed))


def init_pulse(config: SimConfig, center: float, width: float, amplitude: float,
               x_bead: float, v_bead: float = 0.0, direction: int = 1) -> SimState:
    """Gaussian pulse travelling towards ``direction`` and a bead at ``x_bead``."""
    grid = config.grid
    x = grid.x
    if grid.periodic:
        d = (x - center + grid.L / 2) % grid.L - grid.L / 2
    else:
        d = x - center
    u = amplitude * np.exp(-((d / width) ** 2))
    ux = -2 * d / width**2 * u
    v = -direction * config.params.c * ux
    if not grid.periodic:
        u[0] = u[-1] = v[0] = v[-1] = 0.0
    return SimState(FieldState(u, v), MassletState(grid.wrap(x_bead), float(v_bead)))


def init_zero(config: SimConfig, x_bead: float, v_bead: float = 0.0) -> SimState:
    m = config.grid.num_nodes
    return SimState(FieldState(np.zeros(m), np.zeros(m)),
                    MassletState(config.grid.wrap(x_bead), float(v_bead)))


@dataclass
class Snapshot:
    t: float
    u: np.ndarray
    v: np.ndarray


@dataclass
class RunOutput:
    """Trajectory (every step), snapshots and diagnostics (every stride)."""

    config: SimConfig
    t: np.ndarray
    x_p: np.ndarray
    x_unwrapped: np.ndarray
    vx_p: np.ndarray
    z_p: np.ndarray
    N: np.ndarray
    Ma: np.ndarray
    snapshots: list[Snapshot] = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    final: SimState | None = None
    reference: TransparencySolution | None = None
    status: str = "ok"
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.status == "ok"


def _total_energy(y, ev: _Coupled, cfg: SimConfig, t: float) -> float:
    p, grid = cfg.params, cfg.grid
    m = grid.num_nodes
    u, v = y[:m], y[m:2 * m]
    du = np.diff(u)
    if grid.periodic:
        du = np.append(du, u[0] - u[-1])
    E = 0.5 * grid.dx * (p.density * float(v @ v) + p.tension * float(du @ du) / grid.dx**2)
    x, vx = y[-2], y[-1]
    zdot = ev.u_t + vx * ev.slope
    E += 0.5 * p.m_p * (vx**2 + zdot**2 + p.omega_p**2 * ev.z**2)
    if cfg.potential is not None:
        E += cfg.potential.value(x, t)
    return E


def run(config: SimConfig, init: SimState,
        reference: TransparencySolution | None = None) -> RunOutput:
    """Fixed-step integration from t = 0 to ``config.t_end``.

    Diagnostics and snapshots are taken at step 0, every ``output_stride``
    steps (0 means first and last only) and at the final step.  Raises
    :class:`InstabilityError` if the total energy grows beyond
    ``energy_abort_factor`` times its initial value or the state stops being
    finite; the partial :class:`RunOutput` is attached to the exception.
    """
    from . import diagnostics

    grid = config.grid
    n_steps = config.n_steps
    stride = config.output_stride
    y = init.to_vector()
    y[-2] = grid.wrap(y[-2])

    ts, xs, xu, vs, zs, Ns, Mas = ([] for _ in range(7))
    snaps: list[Snapshot] = []
    records = []
    out = RunOutput(config, np.empty(0), np.empty(0), np.empty(0), np.empty(0),
                    np.empty(0), np.empty(0), np.empty(0), snaps, records,
                    reference=reference)

    def finish(status="ok", message=""):
        out.t, out.x_p, out.x_unwrapped = np.array(ts), np.array(xs), np.array(xu)
        out.vx_p, out.z_p, out.N, out.Ma = np.array(vs), np.array(zs), np.array(Ns), np.array(Mas)
        out.final = SimState.from_vector(y)
        out.status, out.message = status, message
        return out

    E0 = None
    x_unwrapped = float(y[-2])
    t = 0.0
    for step in range(n_steps + 1):
        k1, ev = _vector_rhs(y, t, config)
        ts.append(t)
        xs.append(float(y[-2]))
        xu.append(x_unwrapped)
        vs.append(float(y[-1]))
        zs.append(ev.z)
        Ns.append(ev.N)
        Mas.append(abs(float(y[-1])) / config.params.c)

        E = _total_energy(y, ev, config, t)
        if E0 is None:
            E0 = E
        if not (np.all(np.isfinite(k1)) and math.isfinite(E)):
            finish("unstable", f"non-finite state at t={t}")
            raise InstabilityError(out.message, out)
        if E0 > 0 and E > config.energy_abort_factor * E0:
            finish("unstable", f"energy grew from {E0:.6g} to {E:.6g} by t={t:.6g}")
            raise InstabilityError(out.message, out)

        last = step == n_steps
        if step == 0 or last or (stride and step % stride == 0):
            snaps.append(Snapshot(t, y[:grid.num_nodes].copy(),
                                  y[grid.num_nodes:2 * grid.num_nodes].copy()))
            state = SimState.from_vector(y)
            records.append(diagnostics.make_record(state, config, t, reference, ev.N,
                                                   x_unwrapped))
        if last:
            break

        dt = config.dt
        if (step + 1) * config.dt * np.sign(config.dt) > abs(config.t_end):
            dt = config.t_end - t
        x_before = y[-2]
        k1_use = k1 if config.coupling == "monolithic" else None
        y = _step_vector(y, t, dt, config, k1_use)
        if grid.periodic:
            d = y[-2] - x_before
            d -= grid.L * round(d / grid.L)
            x_unwrapped += d
        else:
            x_unwrapped = float(y[-2])
        t = (step + 1) * config.dt if dt == config.dt else config.t_end

    return finish()
