"""Closed-form transparency solutions of the string-masslet system.

In the transparency regime the normal force between string and bead
vanishes, the bead moves inertially and the string carries a free
(d'Alembert) field.  Two families of such fields are built here from a
standing wave in a Lorentz-boosted frame:

* bradyons, ``|v| < c``: ``u = B cos(S) cos(Phi)`` with a superluminal
  carrier ``S`` and an envelope ``Phi`` co-moving with the bead;
* tachyons, ``|w| > c``: the same field with carrier and envelope swapped.

A third, simpler family (the "surfer") rides a single travelling wave.

Everything here is a pure function of immutable records.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "Regime",
    "PhysicalParams",
    "TransparencySolution",
    "PhasePair",
    "DopplerPair",
    "DeBroglieQuantities",
    "ClockMismatchWarning",
    "gamma_factor",
    "tachyon_gamma",
    "omega_prime_from_lab",
    "make_bradyon",
    "make_tachyon",
    "make_surfer",
    "eval_field",
    "eval_field_dt",
    "eval_field_dx",
    "trajectory",
    "phases",
    "dispersion_residual",
    "velocities",
    "doppler_decompose",
    "guidance_velocity",
    "debroglie_quantities",
    "plane_wavenumbers",
    "wrap_phase",
]

# relative tolerance for flagging a clock/spring mismatch
CLOCK_RTOL = 1e-9


class Regime(str, enum.Enum):
    BRADYON = "bradyon"
    TACHYON = "tachyon"
    SURFER = "surfer"


class ClockMismatchWarning(UserWarning):
    """The spring pulsation differs from the one the field phase-locks to."""


@dataclass(frozen=True)
class PhysicalParams:
    """String and bead constants.

    ``density`` is the linear density (lambda) and ``tension`` the string
    tension.  The sound speed ``c`` is derived; ``tension`` is re-stored as
    ``c * c * density`` so that identity holds bit for bit.
    """

    density: float = 1.0
    tension: float = 1.0
    m_p: float = 1.0
    omega_p: float = 0.0
    c: float = field(init=False)

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError(f"density must be > 0, got {self.density}")
        if not self.tension > 0:
            raise ValueError(f"tension must be > 0, got {self.tension}")
        if not self.m_p > 0:
            raise ValueError(f"m_p must be > 0, got {self.m_p}")
        if not self.omega_p >= 0:
            raise ValueError(f"omega_p must be >= 0, got {self.omega_p}")
        c = math.sqrt(self.tension / self.density)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "tension", c * c * self.density)

    @property
    def k_p(self) -> float:
        """Spring stiffness m_p * omega_p**2."""
        return self.m_p * self.omega_p**2

    def with_(self, **changes) -> "PhysicalParams":
        base = dict(density=self.density, tension=self.tension,
                    m_p=self.m_p, omega_p=self.omega_p)
        base.update(changes)
        return PhysicalParams(**base)


@dataclass(frozen=True)
class TransparencySolution:
    """A closed-form transparent field plus the bead motion it carries.

    ``speed`` is v_p (bradyon, surfer) or w_p (tachyon).  ``omega_lab`` and
    ``k_lab`` are the carrier pulsation and wavenumber (omega, k for a
    bradyon; Omega, K for a tachyon; the travelling-wave pulsation for a
    surfer).  ``clock_pulsation`` is the spring pulsation the bead must have
    for the motion to be transparent, ``A`` and ``phi`` its clock amplitude
    and phase.
    """

    regime: Regime
    B: float
    omega_prime: float
    eta: float
    xi: float
    speed: float
    x_init: float
    c: float
    gamma: float
    omega_lab: float
    k_lab: float
    A: float
    phi: float
    clock_pulsation: float
    Q: float = 1.0
    orientation: int = 1
    clock_matched: bool | None = None

    @property
    def omega_p_required(self) -> float:
        return self.clock_pulsation


class PhasePair(NamedTuple):
    S: np.ndarray | float
    Phi: np.ndarray | float


class DopplerPair(NamedTuple):
    omega_plus: float
    omega_minus: float
    amp: float
    phase_plus: float
    phase_minus: float
    c: float

    def plus(self, t, x):
        """Forward wave B/2 cos(omega_+ (t - x/c) + eta - xi)."""
        t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
        return self.amp * np.cos(self.omega_plus * (t - x / self.c) + self.phase_plus)

    def minus(self, t, x):
        """Backward wave B/2 cos(omega_- (t + x/c) + eta + xi)."""
        t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
        return self.amp * np.cos(self.omega_minus * (t + x / self.c) + self.phase_minus)

    def evaluate(self, t, x):
        return self.plus(t, x) + self.minus(t, x)


class DeBroglieQuantities(NamedTuple):
    H_p: float
    P_p: float
    lambda_phase: float
    T_phase: float
    lambda_group: float
    T_group: float


def wrap_phase(phase):
    """Map angles onto (-pi, pi]."""
    wrapped = -np.remainder(-np.asarray(phase, dtype=float) + math.pi, 2 * math.pi) + math.pi
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def gamma_factor(v: float, c: float) -> float:
    """Lorentz factor 1/sqrt(1 - v**2/c**2) for a subsonic speed."""
    if not abs(v) < c:
        raise ValueError(f"gamma_factor needs |v| < c (got v={v}, c={c}); use tachyon_gamma")
    beta = v / c
    return 1.0 / math.sqrt((1.0 - beta) * (1.0 + beta))


def tachyon_gamma(w: float, c: float) -> float:
    """Supersonic factor (w**2/c**2 - 1)**-1/2."""
    if not abs(w) > c:
        raise ValueError(f"tachyon_gamma needs |w| > c (got w={w}, c={c})")
    beta = w / c
    return 1.0 / math.sqrt((beta - 1.0) * (beta + 1.0))


def omega_prime_from_lab(omega_lab: float, speed: float, c: float) -> float:
    """Co-moving pulsation from the laboratory carrier pulsation.

    Works for both regimes: omega' = omega / gamma for a bradyon and
    omega' = Omega / Gamma for a tachyon.
    """
    if abs(speed) < c:
        return omega_lab / gamma_factor(speed, c)
    return omega_lab / tachyon_gamma(speed, c)


def _check_clock(params: PhysicalParams | None, required: float) -> bool | None:
    if params is None:
        return None
    matched = math.isclose(params.omega_p, required, rel_tol=CLOCK_RTOL, abs_tol=0.0)
    if not matched:
        warnings.warn(
            f"spring pulsation {params.omega_p!r} differs from the phase-locked "
            f"clock pulsation {required!r}; the field is not transparent for this bead",
            ClockMismatchWarning,
            stacklevel=3,
        )
    return matched


def _c_of(params: PhysicalParams | None, c: float | None) -> float:
    if c is not None:
        return float(c)
    if params is None:
        return 1.0
    return params.c


def make_bradyon(params: PhysicalParams | None, B: float, omega_prime: float,
                 eta: float = 0.0, xi: float = 0.0, v_p: float = 0.0,
                 x_init: float = 0.0, Q: float = 1.0, *,
                 c: float | None = None) -> TransparencySolution:
    """Subsonic transparency solution.

    The carrier pulsation is ``omega = omega' * gamma``, the wavenumber
    ``k = omega v_p / c**2`` and the bead clock must tick at
    ``omega' / gamma``.  If ``params`` carries a different spring pulsation a
    :class:`ClockMismatchWarning` is issued and ``clock_matched`` is False.
    """
    c = _c_of(params, c)
    if not 0 <= v_p < c:
        raise ValueError(f"bradyon needs 0 <= v_p < c (got v_p={v_p}, c={c})")
    if not B > 0:
        raise ValueError(f"B must be > 0, got {B}")
    if not Q > 0:
        raise ValueError(f"Q must be > 0, got {Q}")
    g = gamma_factor(v_p, c)
    omega = omega_prime * g
    k = omega * v_p / c**2
    clock = omega_prime / g
    A = B * math.cos(omega_prime * g * x_init / c + xi)
    phi = wrap_phase(eta - omega_prime * g * x_init * v_p / c**2)
    return TransparencySolution(
        regime=Regime.BRADYON, B=float(B), omega_prime=float(omega_prime),
        eta=float(eta), xi=float(xi), speed=float(v_p), x_init=float(x_init),
        c=c, gamma=g, omega_lab=omega, k_lab=k, A=A, phi=phi,
        clock_pulsation=clock, Q=float(Q),
        clock_matched=_check_clock(params, clock),
    )


def make_tachyon(params: PhysicalParams | None, B: float, omega_prime: float,
                 eta: float = 0.0, xi: float = 0.0, w_p: float = 2.0,
                 x_init: float = 0.0, Q: float = 1.0, *,
                 c: float | None = None) -> TransparencySolution:
    """Supersonic transparency solution.

    ``Omega = omega' * Gamma``, ``K = Omega w_p / c**2`` and the clock
    pulsation is ``omega' / Gamma``.  The clock phase is the one that makes
    the field on the trajectory equal ``A cos(Omega_p t + phi)``, i.e.
    ``phi = xi + omega' Gamma X w_p / c**2``.
    """
    c = _c_of(params, c)
    if not w_p > c:
        raise ValueError(f"tachyon needs w_p > c (got w_p={w_p}, c={c})")
    if not B > 0:
        raise ValueError(f"B must be > 0, got {B}")
    if not Q > 0:
        raise ValueError(f"Q must be > 0, got {Q}")
    G = tachyon_gamma(w_p, c)
    Omega = omega_prime * G
    K = Omega * w_p / c**2
    clock = omega_prime / G
    A = B * math.cos(omega_prime * G * x_init / c - eta)
    phi = wrap_phase(xi + omega_prime * G * x_init * w_p / c**2)
    return TransparencySolution(
        regime=Regime.TACHYON, B=float(B), omega_prime=float(omega_prime),
        eta=float(eta), xi=float(xi), speed=float(w_p), x_init=float(x_init),
        c=c, gamma=G, omega_lab=Omega, k_lab=K, A=A, phi=phi,
        clock_pulsation=clock, Q=float(Q),
        clock_matched=_check_clock(params, clock),
    )


def make_surfer(A: float, omega_p: float, phi: float, v_p: float,
                x_init: float = 0.0, c: float = 1.0, orientation: int = 1,
                params: PhysicalParams | None = None) -> TransparencySolution:
    """Bead riding a single travelling wave.

    ``orientation=+1`` is a +x travelling wave
    ``A cos[omega_p/(1 - v_p/c) (t - x/c + x_init/c) + phi]``;
    ``orientation=-1`` is its mirror image travelling towards -x.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    beta = orientation * v_p / c
    if not beta < 1:
        raise ValueError(
            f"surfer needs {'v_p < c' if orientation == 1 else 'v_p > -c'} "
            f"(got v_p={v_p}, c={c})")
    carrier = omega_p / (1.0 - beta)
    g = gamma_factor(v_p, c) if abs(v_p) < c else math.nan
    return TransparencySolution(
        regime=Regime.SURFER, B=float(A), omega_prime=math.nan, eta=0.0, xi=0.0,
        speed=float(v_p), x_init=float(x_init), c=float(c), gamma=g,
        omega_lab=carrier, k_lab=orientation * carrier / c, A=float(A),
        phi=float(phi), clock_pulsation=float(omega_p), Q=1.0,
        orientation=orientation,
        clock_matched=_check_clock(params, omega_p),
    )


def trajectory(sol: TransparencySolution, t):
    """Inertial bead abscissa x_init + speed * t."""
    return sol.x_init + sol.speed * np.asarray(t, dtype=float)


def phases(sol: TransparencySolution, t, x) -> PhasePair:
    """Carrier phase S and envelope phase Phi at (t, x)."""
    t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
    c, wp = sol.c, sol.omega_prime
    if sol.regime is Regime.BRADYON:
        S = sol.omega_lab * t - sol.k_lab * x + sol.eta
        Phi = sol.omega_lab / c * (x - sol.speed * t) + sol.xi
    elif sol.regime is Regime.TACHYON:
        G, w = sol.gamma, sol.speed
        Phi = -wp / c * G * (x - w * t) + sol.eta
        S = -wp * G * (t - w / c**2 * x) + sol.xi
    else:
        raise ValueError("phases are defined for bradyon and tachyon solutions only")
    return PhasePair(S, Phi)


def _surfer_arg(sol, t, x):
    o = sol.orientation
    return sol.omega_lab * (t - o * x / sol.c + o * sol.x_init / sol.c) + sol.phi


def eval_field(sol: TransparencySolution, t, x):
    """String displacement u(t, x)."""
    t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
    if sol.regime is Regime.SURFER:
        return sol.A * np.cos(_surfer_arg(sol, t, x))
    S, Phi = phases(sol, t, x)
    return sol.B * np.cos(S) * np.cos(Phi)


def _phase_rates(sol):
    """(dS/dt, dS/dx, dPhi/dt, dPhi/dx), all constants."""
    c = sol.c
    if sol.regime is Regime.BRADYON:
        return (sol.omega_lab, -sol.k_lab,
                -sol.omega_lab * sol.speed / c, sol.omega_lab / c)
    G, w, wp = sol.gamma, sol.speed, sol.omega_prime
    return (-wp * G, wp * G * w / c**2, wp / c * G * w, -wp / c * G)


def eval_field_dt(sol: TransparencySolution, t, x):
    """Analytic time derivative of :func:`eval_field`."""
    t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
    if sol.regime is Regime.SURFER:
        return -sol.A * sol.omega_lab * np.sin(_surfer_arg(sol, t, x))
    S, Phi = phases(sol, t, x)
    St, _, Pt, _ = _phase_rates(sol)
    return -sol.B * (St * np.sin(S) * np.cos(Phi) + Pt * np.cos(S) * np.sin(Phi))


def eval_field_dx(sol: TransparencySolution, t, x):
    """Analytic space derivative of :func:`eval_field`."""
    t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
    if sol.regime is Regime.SURFER:
        o = sol.orientation
        return sol.A * sol.omega_lab * o / sol.c * np.sin(_surfer_arg(sol, t, x))
    S, Phi = phases(sol, t, x)
    _, Sx, _, Px = _phase_rates(sol)
    return -sol.B * (Sx * np.sin(S) * np.cos(Phi) + Px * np.cos(S) * np.sin(Phi))


def dispersion_residual(sol: TransparencySolution) -> float:
    """(omega**2 - k**2 c**2 -+ omega'**2) / omega'**2, zero for an exact solution."""
    if sol.regime is Regime.SURFER:
        raise ValueError("no dispersion relation for a surfer solution")
    sign = 1.0 if sol.regime is Regime.BRADYON else -1.0
    w2 = sol.omega_prime**2
    return (sol.omega_lab**2 - (sol.k_lab * sol.c) ** 2 - sign * w2) / w2


def velocities(sol: TransparencySolution) -> tuple[float, float]:
    """(phase velocity, group velocity); the phase velocity is inf at rest."""
    if sol.regime is Regime.SURFER:
        raise ValueError("velocities are defined for bradyon and tachyon solutions only")
    v_phase = math.inf if sol.speed == 0 else sol.c**2 / sol.speed
    return v_phase, sol.speed


def doppler_decompose(sol: TransparencySolution) -> DopplerPair:
    """Split a bradyonic field into its two counter-propagating plane waves."""
    if sol.regime is not Regime.BRADYON:
        raise ValueError("Doppler decomposition is only available for bradyons")
    beta = sol.speed / sol.c
    return DopplerPair(
        omega_plus=sol.omega_lab * (1 + beta),
        omega_minus=sol.omega_lab * (1 - beta),
        amp=sol.B / 2,
        phase_plus=sol.eta - sol.xi,
        phase_minus=sol.eta + sol.xi,
        c=sol.c,
    )


def guidance_velocity(sol: TransparencySolution, t=0.0, x=0.0) -> float:
    """Pilot-wave velocity -c**2 dS/dx / dS/dt of the carrier phase.

    The carrier of a bradyon is a plane wave, so the result does not depend
    on (t, x); the arguments are kept for the general signature.
    """
    if sol.regime is not Regime.BRADYON:
        raise ValueError("guidance formula applies to the bradyonic carrier")
    St, Sx, _, _ = _phase_rates(sol)
    if St == 0:
        raise ZeroDivisionError("dS/dt vanishes; guidance velocity undefined")
    return -sol.c**2 * Sx / St


def debroglie_quantities(sol: TransparencySolution, Q: float | None = None) -> DeBroglieQuantities:
    """Energy/momentum identification and phase/group periods.

    Uses ``H = Q omega_lab`` and ``P = Q k_lab``.  Lengths and periods that
    blow up at zero speed are returned as ``inf``.
    """
    if sol.regime is Regime.SURFER:
        raise ValueError("de Broglie quantities need a bradyon or tachyon solution")
    Q = sol.Q if Q is None else Q
    if not Q > 0:
        raise ValueError(f"Q must be > 0, got {Q}")
    w, k, c = sol.omega_lab, sol.k_lab, sol.c
    T_phase = 2 * math.pi / w
    lam_phase = math.inf if k == 0 else 2 * math.pi / k
    lam_group = T_phase * c
    T_group = math.inf if sol.speed == 0 else lam_group / sol.speed
    return DeBroglieQuantities(Q * w, Q * k, lam_phase, T_phase, lam_group, T_group)


def plane_wavenumbers(sol: TransparencySolution) -> tuple[float, ...]:
    """Wavenumbers of the plane waves whose sum is the field.

    A periodic domain reproduces the solution exactly iff it holds an
    integer number of each of these wavelengths.
    """
    if sol.regime is Regime.SURFER:
        return (abs(sol.k_lab),)
    return (abs(sol.k_lab + sol.omega_lab / sol.c), abs(sol.k_lab - sol.omega_lab / sol.c))
