"""Named pass/fail check suites behind ``masslet validate``.

Each suite returns a list of :class:`Check` rows carrying the measured value
and its threshold, so a failing row still says by how much it failed.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, NamedTuple

import numpy as np

from . import diagnostics as dg
from . import scenarios as sc
from .analytic import (
    debroglie_quantities,
    dispersion_residual,
    doppler_decompose,
    eval_field,
    guidance_velocity,
    make_bradyon,
    make_tachyon,
    phases,
    wrap_phase,
)
from .solver import run

__all__ = ["Check", "SUITES", "run_suite", "DEFAULT_NODES"]

DEFAULT_NODES = 4096


class Check(NamedTuple):
    suite: str
    name: str
    value: float
    threshold: float
    relation: str  # "<", ">=" or "~" (within threshold of the target in name)
    target: float = math.nan

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.relation == "<":
            return self.value < self.threshold
        if self.relation == ">=":
            return self.value >= self.threshold
        return abs(self.value - self.target) <= self.threshold


def _dispersion(nodes: int | None, seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    brad, tach = sc.bradyon_solution(), sc.tachyon_solution()
    rows = [
        Check("dispersion", "bradyon residual", abs(dispersion_residual(brad)), 1e-12, "<"),
        Check("dispersion", "tachyon residual", abs(dispersion_residual(tach)), 1e-12, "<"),
    ]
    t = rng.uniform(-10, 10, 1000)
    x = rng.uniform(-10, 10, 1000)
    for v in (0.1, 0.5, 0.9):
        wp, eta, xi = rng.uniform(0.5, 5), rng.uniform(-3, 3), rng.uniform(-3, 3)
        b = make_bradyon(None, 1.0, wp, eta, xi, v, 0.0)
        ta = make_tachyon(None, 1.0, wp, eta, xi, 1 / v, 0.0)
        pb, pt = phases(b, t, x), phases(ta, t, x)
        dev = max(np.abs(wrap_phase(pt.S - pb.Phi)).max(),
                  np.abs(wrap_phase(pt.Phi - pb.S)).max())
        rows.append(Check("dispersion", f"phase/group swap v/c={v}", float(dev), 1e-12, "<"))
    B = brad.B
    dp = doppler_decompose(brad)
    rec = np.abs(dp.evaluate(t, x) - eval_field(brad, t, x)).max() / B
    rows.append(Check("dispersion", "Doppler reconstruction / B", float(rec), 1e-12, "<"))
    beta = brad.speed / brad.c
    rows.append(Check("dispersion", "omega+ - omega(1+v/c)",
                      abs(dp.omega_plus - brad.omega_lab * (1 + beta)), 0.0, "~", 0.0))
    rows.append(Check("dispersion", "omega- - omega(1-v/c)",
                      abs(dp.omega_minus - brad.omega_lab * (1 - beta)), 0.0, "~", 0.0))
    g = abs(guidance_velocity(brad) - brad.speed) / brad.speed
    rows.append(Check("dispersion", "guidance velocity rel. error", g, 1e-14, "<"))
    return rows


def _transparency(suite: str, build: Callable, nodes: int | None, seed: int) -> list[Check]:
    s = build(nodes or DEFAULT_NODES)
    out = run(s.config, s.init, s.reference)
    lam_group = debroglie_quantities(s.reference).lambda_group
    res = dg.transparency_residual(out)
    dE, dP = dg.relative_drift(out)
    rows = [
        Check(suite, "max|N|/(m omega_p^2 A)", res.max_abs_N_normalized, 1e-3, "<"),
        Check(suite, "trajectory error / lambda_group",
              dg.trajectory_error(out) / lam_group, 1e-4, "<"),
        Check(suite, "phase-lock error [rad]", dg.phase_lock_error(out), 1e-2, "<"),
        Check(suite, "energy drift (relative)", dE, 1e-6, "<"),
        Check(suite, "momentum drift (relative)", dP, 1e-6, "<"),
    ]
    return rows


def _bradyon(nodes, seed):
    return _transparency("bradyon_fig2", sc.bradyon_fig2, nodes, seed)


def _tachyon(nodes, seed):
    rows = _transparency("tachyon_fig3", sc.tachyon_fig3, nodes, seed)
    dq = debroglie_quantities(sc.tachyon_solution())
    rows.append(Check("tachyon_fig3", "lambda_phase", dq.lambda_phase, 1e-15, "~", 0.1))
    rows.append(Check("tachyon_fig3", "lambda_group", dq.lambda_group, 1e-15, "~", 1.0))
    return rows


def _conservation(nodes: int | None, seed: int) -> list[Check]:
    n = nodes or DEFAULT_NODES
    ns = sorted({max(16, n // 8), max(16, n // 4), max(16, n // 2), n})
    hs, dEs, dPs = [], [], []
    for level in ns:
        s = sc.scattering(n=level, output_stride=max(1, level // 256))
        out = run(s.config, s.init)
        dE, dP = dg.relative_drift(out)
        hs.append(s.config.grid.dx)
        dEs.append(dE)
        dPs.append(dP)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        oE, oP = dg.observed_order(hs, dEs), dg.observed_order(hs, dPs)
    return [
        Check("conservation", f"energy drift at n={n}", dEs[-1], 1e-4, "<"),
        Check("conservation", f"momentum drift at n={n}", dPs[-1], 1e-4, "<"),
        Check("conservation", "energy drift order", math.nan if oE is None else oE, 1.9, ">="),
        Check("conservation", "momentum drift order", math.nan if oP is None else oP, 1.9, ">="),
    ]


def _convergence(nodes: int | None, seed: int) -> list[Check]:
    n = nodes or DEFAULT_NODES
    base = sc.bradyon_fig2(max(16, n // 8), output_stride=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        spatial = dg.spatial_convergence(base.config, base.reference, levels=4)
        ff = sc.free_field()
        temporal = dg.temporal_convergence(ff.config, ff.init, levels=4)
    so = math.nan if spatial.order is None else spatial.order
    to = math.nan if temporal.order is None else temporal.order
    return [
        Check("convergence", "spatial order (bradyon trajectory)", so, 1.9, ">="),
        Check("convergence", "temporal order (free field)", to, 0.3, "~", 4.0),
    ]


SUITES: dict[str, Callable[[int | None, int], list[Check]]] = {
    "bradyon_fig2": _bradyon,
    "tachyon_fig3": _tachyon,
    "dispersion": _dispersion,
    "conservation": _conservation,
    "convergence": _convergence,
}


def run_suite(name: str, nodes: int | None = None, seed: int = 0) -> list[Check]:
    try:
        suite = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SUITES)}") from None
    return suite(nodes, seed)
