import math

import numpy as np
import pytest

from masslet import diagnostics as dg
from masslet import scenarios as sc
from masslet.analytic import PhysicalParams, make_surfer
from masslet.grid import Grid
from masslet.solver import FieldState, SimConfig, init_zero, run


def travelling(n=256, c=1.0, fixed=False):
    g = Grid(1.0, n, "fixed_ends" if fixed else "periodic")
    params = PhysicalParams(density=1.0, tension=c**2, m_p=1.0, omega_p=1.0)
    k = 2 * np.pi
    u = 0.01 * np.sin(k * g.x)
    v = -c * 0.01 * k * np.cos(k * g.x)
    return g, params, FieldState(u, v)


class TestDensities:
    @pytest.mark.parametrize("c", [1.0, 2.5])
    def test_right_going_wave_momentum_is_energy_over_c(self, c):
        g, params, f = travelling(c=c)
        d = dg.energy_momentum_densities(f, g, params)
        E, P = d.eps.sum() * g.dx, d.g.sum() * g.dx
        assert P == pytest.approx(E / c, rel=(2 * np.pi / g.n) ** 2)
        np.testing.assert_allclose(d.S, c**2 * d.g)
        np.testing.assert_array_equal(d.Txx, d.eps)

    def test_left_going_wave_has_negative_momentum(self):
        g, params, f = travelling()
        d = dg.energy_momentum_densities(FieldState(f.u, -f.v), g, params)
        assert d.g.sum() < 0

    def test_zero_state(self):
        g, params, f = travelling()
        d = dg.energy_momentum_densities(FieldState(0 * f.u, 0 * f.v), g, params)
        assert not d.eps.any() and not d.g.any()

    def test_fixed_ends_energy(self):
        g, params, _ = travelling(fixed=True)
        # a clamped mode, displacement and velocity both vanish at the ends
        k = 2 * np.pi
        f = FieldState(0.01 * np.sin(k * g.x), 0.01 * k * np.sin(k * g.x))
        d = dg.energy_momentum_densities(f, g, params)
        assert len(d.eps) == g.num_nodes
        # 0.5 * (lambda v**2 + T u_x**2) integrated over one wavelength
        assert d.eps.sum() * g.dx == pytest.approx(0.5 * (0.01 * 2 * np.pi) ** 2, rel=1e-3)


class TestLedger:
    def test_components(self):
        s = sc.bradyon_fig2(n=512)
        led = dg.energy_ledger(s.init, s.config)
        p = s.config.params
        assert led.E_kin == pytest.approx(0.5 * p.m_p * 0.1**2)
        assert led.P_particle == pytest.approx(p.m_p * 0.1)
        assert led.E_total == pytest.approx(led.E_field + led.E_kin + led.E_clock)
        assert dg.global_invariants(s.init, s.config) == (led.E_total, led.P_total)

    def test_power_balance(self):
        s = sc.scattering(n=256)
        out = run(s.config.with_(t_end=0.2), s.init)
        dE, inj = dg.field_power_balance(out.final, s.config, 0.2)
        assert inj != 0
        assert dE == pytest.approx(inj, rel=1e-9, abs=1e-14)

    def test_record_fields(self):
        s = sc.bradyon_fig2(n=512)
        rec = dg.make_record(s.init, s.config, 0.0, s.reference)
        assert rec.constraint_residual == 0.0
        assert rec.phase_lock_error == pytest.approx(0.0, abs=1e-12)
        assert rec.Ma == pytest.approx(0.1)
        assert set(dg.FIELDS) <= set(dir(rec))

    def test_record_without_reference(self):
        s = sc.scattering(n=256)
        assert math.isnan(dg.make_record(s.init, s.config, 0.0).phase_lock_error)


class TestTransparencyMetrics:
    @pytest.fixture(scope="class")
    @classmethod
    def bradyon_run(cls):
        s = sc.bradyon_fig2(n=512, output_stride=16)
        return run(s.config, s.init, s.reference)

    def test_residual_small(self, bradyon_run):
        res = dg.transparency_residual(bradyon_run)
        assert res.max_abs_N_normalized < 1e-2
        assert res.velocity_drift < 1e-3
        assert dg.trajectory_error(bradyon_run) < 1e-2
        assert dg.phase_lock_error(bradyon_run) < 1e-2

    def test_zero_force_run(self):
        cfg = SimConfig.from_cfl(PhysicalParams(1, 1, 1, 1), Grid(1.0, 32), 0.1, 0.5)
        out = run(cfg, init_zero(cfg, 0.3))
        res = dg.transparency_residual(out)
        assert res == (0.0, 0.0)

    def test_phase_lock_rejects_surfer(self, bradyon_run):
        with pytest.raises(ValueError):
            dg.phase_lock_error(bradyon_run, make_surfer(0.1, 1.0, 0.0, 0.5))

    def test_drift_of_constant_series(self, bradyon_run):
        dE, dP = dg.relative_drift(bradyon_run)
        assert 0 <= dE < 1e-6 and 0 <= dP < 1e-6


class TestObservedOrder:
    def test_exact_power_law(self):
        h = [0.1, 0.05, 0.025]
        assert dg.observed_order(h, [3 * x**2 for x in h]) == pytest.approx(2.0)
        assert dg.observed_order(h, [x**4 for x in h]) == pytest.approx(4.0)

    def test_non_monotone_claims_nothing(self):
        with pytest.warns(RuntimeWarning):
            assert dg.observed_order([0.1, 0.05, 0.025], [1.0, 2.0, 0.5]) is None

    def test_study_needs_three_levels(self):
        s = sc.bradyon_fig2(n=64)
        with pytest.raises(ValueError):
            dg.spatial_convergence(s.config, s.reference, levels=2)

    def test_temporal_fourth_order(self):
        s = sc.free_field()
        res = dg.temporal_convergence(s.config, s.init, levels=4)
        assert res.order == pytest.approx(4.0, abs=0.3)

    def test_temporal_matches_oracle(self):
        # errors against the exact semi-discrete solution fall by 16 per halving
        s = sc.free_field()
        errs = []
        for level in range(3):
            cfg = s.config.with_(dt=s.config.dt / 2**level)
            out = run(cfg, s.init)
            errs.append(np.abs(out.final.field.u - sc.free_field_exact(s, cfg.t_end)).max())
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        np.testing.assert_allclose(ratios, 16, rtol=0.1)
