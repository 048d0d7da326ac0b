import math

import numpy as np
import pytest

from masslet import scenarios as sc
from masslet.analytic import PhysicalParams, make_bradyon
from masslet.diagnostics import global_invariants, relative_drift
from masslet.grid import Grid, stencil
from masslet.solver import (
    ConfigError,
    ExternalPotential,
    FieldState,
    InstabilityError,
    MassletState,
    SimConfig,
    SimState,
    bead_kinematics,
    init_from_analytic,
    init_zero,
    kink_force_estimate,
    normal_force,
    rhs,
    run,
    step_rk4,
)

PARAMS = PhysicalParams(density=1.0, tension=1.0, m_p=1.0, omega_p=2.0)


def config(n=64, L=1.0, bc="periodic", t_end=1.0, cfl=0.5, params=PARAMS, **kw):
    return SimConfig.from_cfl(params, Grid(L, n, bc), t_end, cfl, **kw)


class TestConfig:
    def test_from_cfl_lands_on_t_end(self):
        cfg = config(t_end=0.7, cfl=0.45)
        assert cfg.n_steps * cfg.dt == pytest.approx(0.7, rel=1e-14)
        assert cfg.cfl <= 0.45

    def test_cfl_violation(self):
        g = Grid(1.0, 64)
        with pytest.raises(ConfigError, match="CFL"):
            SimConfig(PARAMS, g, dt=2 * g.dx, t_end=1.0)

    @pytest.mark.parametrize("kw", [
        dict(kernel_width=4), dict(kernel_width=2, kernel_shape="balanced"),
        dict(kernel_width=1, gradient="kernel"), dict(gradient="spectral"),
        dict(coupling="staggered"), dict(kernel_shape="gauss"), dict(output_stride=-1),
        dict(cfl_target=3.0)])
    def test_invalid_numerics(self, kw):
        with pytest.raises(ConfigError):
            config(**kw)

    def test_sign_mismatch(self):
        with pytest.raises(ConfigError):
            SimConfig(PARAMS, Grid(1.0, 64), dt=-1e-3, t_end=1.0)

    def test_noncommensurate_domain(self):
        sol = sc.bradyon_solution()
        cfg = config(n=256, L=97.0, t_end=1.0)
        with pytest.raises(ConfigError, match="commensurate"):
            init_from_analytic(sol, cfg)

    def test_unknown_potential(self):
        with pytest.raises(ConfigError):
            ExternalPotential("quartic")


class TestNormalForce:
    def test_zero_state_is_at_rest(self):
        cfg = config()
        state = init_zero(cfg, 0.4)
        assert normal_force(state, cfg) == 0.0
        d = rhs(state, 0.0, cfg)
        assert not d.field.u.any() and not d.field.v.any()
        assert d.masslet.x_p == 0.0 and d.masslet.vx_p == 0.0

    @pytest.mark.parametrize("width, shape", [(3, "bspline"), (3, "balanced"), (2, "bspline")])
    def test_standing_wave_at_antinode(self, width, shape):
        # the closure includes the added mass of the string under the kernel:
        # N (1 + m kappa / lambda) = m (omega_p**2 - omega**2) z
        n, omega, B = 256, 2 * np.pi, 0.01
        cfg = config(n=n, kernel_width=width, kernel_shape=shape)
        g = cfg.grid
        u = B * np.cos(2 * np.pi * g.x)
        state = SimState(FieldState(u, np.zeros_like(u)), MassletState(0.0, 0.0))
        st = stencil(0.0, g, width, shape)
        kappa = float(st.phi @ st.phi) / g.dx
        z = float(st.phi @ u[st.nodes])
        lhs = normal_force(state, cfg) * (1 + kappa)
        expected = PARAMS.m_p * (PARAMS.omega_p**2 - omega**2) * z
        assert lhs == pytest.approx(expected, rel=1e-3)

    def test_added_mass_vanishes_with_refinement(self):
        # a smooth field carries no kink, so N -> 0 as the kernel shrinks
        Ns = []
        for n in (64, 128, 256):
            cfg = config(n=n)
            u = 0.01 * np.cos(2 * np.pi * cfg.grid.x)
            Ns.append(abs(normal_force(SimState(FieldState(u, 0 * u), MassletState(0.0, 0.0)), cfg)))
        assert Ns[0] / Ns[1] == pytest.approx(2, rel=0.05)
        assert Ns[1] / Ns[2] == pytest.approx(2, rel=0.05)

    def test_static_kink_estimator(self):
        cfg = config(n=128, L=2.0, params=PhysicalParams(1.0, 3.0, 1.0, 1.0))
        theta = 0.02
        x_p = 1.0 + 0.3 * cfg.grid.dx
        u = math.tan(theta) * np.abs(cfg.grid.x - x_p)
        state = SimState(FieldState(u, 0 * u), MassletState(x_p, 0.0))
        assert kink_force_estimate(state, cfg) == pytest.approx(2 * 3.0 * math.tan(theta),
                                                                rel=1e-12)

    def test_kinematics_on_analytic_state(self):
        sol = sc.bradyon_solution()
        s = sc.transparency(sol, n=1024)
        kin = bead_kinematics(s.init, s.config)
        # kernel smoothing error is O(dx**2 k**2) relative to B
        k = max(abs(kw) for kw in (1.1 * sol.omega_lab, 0.9 * sol.omega_lab))
        tol = (k * s.config.grid.dx) ** 2 * sol.B
        assert kin.z == pytest.approx(sol.A * math.cos(sol.phi), abs=tol)
        assert kin.Ma == pytest.approx(0.1)
        assert abs(kin.N) / (sol.clock_pulsation**2 * sol.A) < 1e-3


class TestIntegration:
    def test_step_matches_run(self):
        cfg = config(n=64, t_end=0.1, cfl=0.5)
        init = sc.free_field(n=64).init
        state = init.copy()
        t = 0.0
        for _ in range(cfg.n_steps):
            state = step_rk4(state, t, cfg.dt, cfg)
            t += cfg.dt
        out = run(cfg, init)
        np.testing.assert_allclose(out.final.field.u, state.field.u, atol=1e-14)
        assert out.final.masslet.x_p == pytest.approx(state.masslet.x_p, abs=1e-14)

    def test_free_field_matches_semidiscrete_oracle(self):
        s = sc.free_field()
        out = run(s.config, s.init)
        exact = sc.free_field_exact(s, s.config.t_end)
        assert np.abs(out.final.field.u - exact).max() < 1e-3

    def test_harmonic_bead_on_flat_string(self):
        # no slope, no normal force: the bead oscillates in the potential alone
        pot = ExternalPotential("harmonic", amplitude=2.0, center=0.5)
        errs = []
        for n in (64, 128, 256):
            cfg = config(n=n, t_end=1.3, potential=pot)
            out = run(cfg, init_zero(cfg, 0.55))
            exact = 0.5 + 0.05 * np.cos(2.0 * out.t)
            errs.append(np.abs(out.x_unwrapped - exact).max())
        assert not out.N.any()
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders > 3.8)

    def test_time_reversal(self):
        # RK4 is not symmetric, so the return trip misses by O(dt**4) only
        errs = []
        for n in (256, 512):
            s = sc.bradyon_fig2(n=n, periods=0.05)
            fwd = run(s.config, s.init)
            back_cfg = s.config.with_(dt=-s.config.dt, t_end=-s.config.t_end)
            back = run(back_cfg, fwd.final)
            errs.append(np.abs(back.final.field.u - s.init.field.u).max())
            assert back.final.masslet.x_p == pytest.approx(s.init.masslet.x_p, abs=1e-6)
        assert errs[1] < 1e-6 * s.reference.B
        assert errs[0] / errs[1] > 8

    def test_alternating_coupling_runs(self):
        s = sc.bradyon_fig2(n=256, periods=0.1, coupling="alternating")
        out = run(s.config, s.init, s.reference)
        assert out.completed
        assert abs(out.x_unwrapped[-1] - (0.1 + 0.1 * out.t[-1])) < 1e-3

    def test_free_bead_is_inertial(self):
        cfg = config(coupled=False, t_end=0.5)
        out = run(cfg, init_zero(cfg, 0.2, 0.3))
        assert out.x_unwrapped[-1] == pytest.approx(0.35, abs=1e-14)

    def test_instability_is_reported_with_partial_output(self):
        cfg = config()
        state = init_zero(cfg, 0.4)
        state.field.u[3] = np.nan
        with pytest.raises(InstabilityError) as exc:
            run(cfg, state)
        assert exc.value.output.status == "unstable"
        assert len(exc.value.output.t) == 1

    def test_energy_abort(self):
        # a light, stiff clock is far outside the RK4 stability region
        stiff = PhysicalParams(1.0, 1.0, 1e-3, 1e4)
        cfg = config(params=stiff, t_end=0.5)
        state = init_zero(cfg, 0.4)
        state.field.u[:] = 1e-3 * np.sin(2 * np.pi * cfg.grid.x)
        with pytest.raises(InstabilityError, match="energy grew") as exc:
            run(cfg, state)
        assert exc.value.output.status == "unstable"
        assert exc.value.output.t[-1] < cfg.t_end


class TestConservation:
    def test_bradyon_invariants(self):
        s = sc.bradyon_fig2(n=1024, output_stride=32)
        out = run(s.config, s.init, s.reference)
        dE, dP = relative_drift(out)
        assert dE < 1e-7 and dP < 1e-7

    def test_scattering_exchanges_momentum(self):
        s = sc.scattering(n=512, output_stride=8)
        out = run(s.config, s.init)
        dE, dP = relative_drift(out)
        assert dE < 1e-5
        assert dP < 1e-2
        assert abs(out.vx_p[-1]) > 0

    def test_initial_invariants(self):
        sol = make_bradyon(None, 0.01, 2 * np.pi, v_p=0.0, x_init=0.5)
        cfg = config(n=128, params=PhysicalParams(1.0, 1.0, 1.0, sol.clock_pulsation))
        E, P = global_invariants(init_from_analytic(sol, cfg), cfg)
        assert E > 0 and P == pytest.approx(0.0, abs=1e-16)
