"""INI run configuration: schema, layering, resolution and serialization.

A configuration is a mapping ``section -> key -> value``.  Layers are merged
in the order defaults < seed scenario < file < ``--override`` flags, then
*resolved*: every ``auto`` entry is replaced by the number it stands for and
the result is turned into a :class:`~masslet.solver.SimConfig`, an initial
state and, for closed-form initial data, the reference solution.

Resolution is idempotent.  Writing a resolved configuration with
:func:`dumps` and reading it back gives the same resolved configuration, so
every output directory carries a config that reproduces it exactly.  Floats
are written with ``repr`` (shortest string that reads back to the same
double).

Units are natural: ``c = sqrt(tension / lambda)`` and ``c = 1`` with the
defaults.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Any

from .analytic import (
    PhysicalParams,
    TransparencySolution,
    debroglie_quantities,
    make_bradyon,
    make_surfer,
    make_tachyon,
    omega_prime_from_lab,
)
from .grid import BoundaryCondition, Grid
from .solver import (
    ConfigError,
    ExternalPotential,
    SimConfig,
    SimState,
    commensurate_lengths,
    init_from_analytic,
    init_pulse,
    init_zero,
)

__all__ = [
    "AUTO",
    "SCHEMA",
    "SEEDS",
    "Resolved",
    "defaults",
    "merge",
    "parse_text",
    "read_file",
    "apply_overrides",
    "resolve",
    "dumps",
    "numeric_keys",
]

AUTO = "auto"


@dataclass(frozen=True)
class Key:
    kind: type
    default: Any
    auto: bool = False
    choices: tuple[str, ...] | None = None


SCHEMA: dict[str, dict[str, Key]] = {
    "string": {
        "lambda": Key(float, 1.0),
        "tension": Key(float, 1.0),
        "length": Key(float, AUTO, auto=True),
        "nodes": Key(int, 4096),
        "bc": Key(str, "periodic", choices=("periodic", "fixed_ends")),
    },
    "particle": {
        "mass": Key(float, 1.0),
        "omega_p": Key(float, AUTO, auto=True),
        "detune": Key(float, 1.0),
        "x_init": Key(float, 0.0),
        "speed": Key(float, 0.0),
    },
    "init": {
        "mode": Key(str, "zero", choices=("analytic_bradyon", "analytic_tachyon",
                                          "surfer", "pulse", "zero")),
        "B": Key(float, 0.1),
        "omega_prime": Key(float, AUTO, auto=True),
        "omega_lab": Key(float, AUTO, auto=True),
        "eta": Key(float, 0.0),
        "xi": Key(float, 0.0),
        "A": Key(float, 0.01),
        "phi": Key(float, 0.0),
        "orientation": Key(int, 1),
        "pulse_center": Key(float, 0.3),
        "pulse_width": Key(float, 0.03),
        "pulse_amplitude": Key(float, 0.005),
        "pulse_direction": Key(int, 1),
    },
    "numerics": {
        "dt": Key(float, AUTO, auto=True),
        "cfl": Key(float, 0.5),
        "cfl_target": Key(float, 0.5),
        "t_end": Key(float, AUTO, auto=True),
        "periods": Key(float, 1.0),
        "kernel_width": Key(int, 3),
        "kernel_shape": Key(str, "bspline", choices=("bspline", "balanced")),
        "gradient": Key(str, "kernel", choices=("kernel", "centered")),
        "scheme": Key(str, "source_split", choices=("source_split", "variable_density")),
        "coupling": Key(str, "monolithic", choices=("monolithic", "alternating")),
        "output_stride": Key(int, 0),
        "energy_abort_factor": Key(float, 10.0),
    },
    "potential": {
        "profile": Key(str, "none", choices=("none", "harmonic", "cosine")),
        "amplitude": Key(float, 0.0),
        "center": Key(float, 0.0),
        "period": Key(float, 1.0),
        "phase": Key(float, 0.0),
    },
    "output": {
        "directory": Key(str, "out"),
        "snapshots": Key(int, 20),
    },
}

Config = dict[str, dict[str, Any]]

SEEDS: dict[str, Config] = {
    "bradyon_fig2": {
        "particle": {"speed": 0.1, "x_init": 0.1},
        "init": {"mode": "analytic_bradyon", "B": 0.1, "omega_lab": 2 * math.pi / 10},
    },
    "tachyon_fig3": {
        "particle": {"speed": 10.0, "x_init": 0.0},
        "init": {"mode": "analytic_tachyon", "B": 0.001, "omega_lab": 2 * math.pi},
    },
    "scattering": {
        "string": {"length": 1.0, "bc": "fixed_ends"},
        "particle": {"mass": 0.05, "omega_p": 20.0, "x_init": 0.5},
        "init": {"mode": "pulse"},
        "numerics": {"t_end": 0.35, "kernel_shape": "balanced"},
    },
    "surfer": {
        "string": {"nodes": 1024},
        "particle": {"speed": 0.5, "omega_p": 2 * math.pi},
        "init": {"mode": "surfer", "A": 0.01},
    },
}


def defaults() -> Config:
    return {sec: {k: spec.default for k, spec in keys.items()} for sec, keys in SCHEMA.items()}


def _lookup(section: str, key: str) -> Key:
    if section not in SCHEMA:
        raise ConfigError(f"unknown section [{section}]; known: {', '.join(SCHEMA)}")
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown key {key!r} in [{section}]; known: "
                          f"{', '.join(SCHEMA[section])}")
    return SCHEMA[section][key]


def _coerce(section: str, key: str, value: Any) -> Any:
    spec = _lookup(section, key)
    where = f"[{section}] {key}"
    if isinstance(value, str):
        value = value.strip()
        if spec.auto and value.lower() == AUTO:
            return AUTO
    try:
        if spec.kind is float:
            out = float(value)
            if not math.isfinite(out):
                raise ValueError
        elif spec.kind is int:
            # "128.0" is accepted (sweeps write floats), "1.5" is not
            f = float(value)
            if not f.is_integer():
                raise ValueError
            out = int(f)
        else:
            out = str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: cannot read {value!r} as {spec.kind.__name__}") from None
    if spec.choices is not None and out not in spec.choices:
        raise ConfigError(f"{where}: {out!r} is not one of {', '.join(spec.choices)}")
    return out


def merge(base: Config, layer: Config) -> Config:
    """Copy of ``base`` with every entry of ``layer`` checked and applied."""
    out = {sec: dict(vals) for sec, vals in base.items()}
    for sec, vals in layer.items():
        for key, value in vals.items():
            out.setdefault(sec, {})[key] = _coerce(sec, key, value)
    return out


def parse_text(text: str) -> Config:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    layer: Config = {}
    for sec in parser.sections():
        for key, value in parser.items(sec):
            layer.setdefault(sec, {})[key] = _coerce(sec, key, value)
    return layer


def read_file(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_text(text)


def apply_overrides(cfg: Config, overrides: list[str]) -> Config:
    """Apply ``section.key=value`` strings."""
    layer: Config = {}
    for item in overrides:
        name, sep, value = item.partition("=")
        section, dot, key = name.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        layer.setdefault(section, {})[key] = value
    return merge(cfg, layer)


def numeric_keys() -> list[str]:
    return [f"{sec}.{k}" for sec, keys in SCHEMA.items()
            for k, spec in keys.items() if spec.kind in (int, float)]


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps(cfg: Config) -> str:
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for key in keys:
            lines.append(f"{key} = {_fmt(cfg[sec][key])}")
        lines.append("")
    return "\n".join(lines)


@dataclass
class Resolved:
    """A fully resolved configuration and the objects built from it."""

    values: Config
    config: SimConfig
    init: SimState
    reference: TransparencySolution | None
    snapshots: int

    @property
    def text(self) -> str:
        return dumps(self.values)


def _need(value, what):
    if value == AUTO:
        raise ConfigError(f"{what} must be given for this init mode")
    return value


def _solution(cfg: Config, c: float) -> TransparencySolution | None:
    init, part = cfg["init"], cfg["particle"]
    mode = init["mode"]
    if mode in ("analytic_bradyon", "analytic_tachyon"):
        speed = part["speed"]
        wp, wlab = init["omega_prime"], init["omega_lab"]
        if wp == AUTO and wlab == AUTO:
            raise ConfigError("[init] needs omega_prime or omega_lab")
        try:
            if wp == AUTO:
                wp = omega_prime_from_lab(wlab, speed, c)
            make = make_bradyon if mode == "analytic_bradyon" else make_tachyon
            sol = make(None, init["B"], wp, init["eta"], init["xi"], speed,
                       part["x_init"], c=c)
        except ValueError as exc:
            raise ConfigError(f"[init] {mode}: {exc}") from None
        if wlab != AUTO and not math.isclose(sol.omega_lab, wlab, rel_tol=1e-12):
            raise ConfigError(f"[init] omega_prime={wp!r} and omega_lab={wlab!r} disagree "
                              f"(omega_prime implies omega_lab={sol.omega_lab!r})")
        init["omega_prime"], init["omega_lab"] = float(wp), float(sol.omega_lab)
        return sol
    if mode == "surfer":
        omega_p = _need(part["omega_p"], "[particle] omega_p")
        try:
            return make_surfer(init["A"], omega_p, init["phi"], part["speed"],
                               part["x_init"], c=c, orientation=init["orientation"])
        except ValueError as exc:
            raise ConfigError(f"[init] surfer: {exc}") from None
    return None


def resolve(cfg: Config) -> Resolved:
    """Fill in ``auto`` entries and build the run objects."""
    cfg = {sec: dict(vals) for sec, vals in cfg.items()}
    s, part, num, init = cfg["string"], cfg["particle"], cfg["numerics"], cfg["init"]
    if not (s["lambda"] > 0 and s["tension"] > 0):
        raise ConfigError("[string] lambda and tension must be > 0")
    c = math.sqrt(s["tension"] / s["lambda"])
    sol = _solution(cfg, c)

    if part["omega_p"] == AUTO:
        if sol is None:
            raise ConfigError("[particle] omega_p must be given for this init mode")
        part["omega_p"] = float(sol.clock_pulsation)
    omega_p = part["omega_p"] * part["detune"]

    bc = BoundaryCondition(s["bc"])
    if s["length"] == AUTO:
        if sol is None or bc is not BoundaryCondition.PERIODIC:
            raise ConfigError("[string] length = auto needs a periodic string and "
                              "closed-form initial data")
        s["length"] = float(commensurate_lengths(sol, 0.0)[1])

    if num["t_end"] == AUTO:
        if sol is None:
            raise ConfigError("[numerics] t_end must be given for this init mode")
        if sol.regime.value == "surfer":
            period = 2 * math.pi / sol.clock_pulsation
        else:
            period = debroglie_quantities(sol).T_group
        if not math.isfinite(period):
            raise ConfigError("[numerics] t_end = auto needs a moving bead")
        num["t_end"] = float(num["periods"] * period)

    try:
        params = PhysicalParams(density=s["lambda"], tension=s["tension"],
                                m_p=part["mass"], omega_p=omega_p)
        grid = Grid(s["length"], s["nodes"], bc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    potential = None
    pot = cfg["potential"]
    if pot["profile"] != "none":
        potential = ExternalPotential(pot["profile"], pot["amplitude"], pot["center"],
                                      pot["period"], pot["phase"])
    numerics = dict(cfl_target=num["cfl_target"], kernel_width=num["kernel_width"],
                    kernel_shape=num["kernel_shape"], gradient=num["gradient"],
                    scheme=num["scheme"], coupling=num["coupling"], potential=potential,
                    energy_abort_factor=num["energy_abort_factor"])
    if num["dt"] == AUTO:
        if not 0 < num["cfl"] <= num["cfl_target"] * (1 + 1e-12):
            raise ConfigError(f"[numerics] cfl={num['cfl']!r} must lie in "
                              f"(0, cfl_target={num['cfl_target']!r}]")
        if not num["t_end"] > 0:
            raise ConfigError("[numerics] t_end must be > 0 when dt is derived from cfl")
        num["dt"] = float(num["cfl"] * grid.dx / params.c)
        num["dt"] = float(num["t_end"] / math.ceil(num["t_end"] / num["dt"] - 1e-9))
    if num["output_stride"] < 0 or cfg["output"]["snapshots"] < 1:
        raise ConfigError("output_stride must be >= 0 and snapshots >= 1")
    sim = SimConfig(params=params, grid=grid, dt=num["dt"], t_end=num["t_end"],
                    output_stride=num["output_stride"], **numerics)
    if num["output_stride"] == 0:
        stride = max(1, math.ceil(sim.n_steps / cfg["output"]["snapshots"]))
        num["output_stride"] = stride
        sim = sim.with_(output_stride=stride)

    try:
        if sol is not None:
            state = init_from_analytic(sol, sim)
        elif init["mode"] == "pulse":
            state = init_pulse(sim, init["pulse_center"], init["pulse_width"],
                               init["pulse_amplitude"], part["x_init"], part["speed"],
                               init["pulse_direction"])
        else:
            state = init_zero(sim, part["x_init"], part["speed"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return Resolved(cfg, sim, state, sol, cfg["output"]["snapshots"])
