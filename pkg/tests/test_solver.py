import dataclasses

import numpy as np
import pytest

from hpchem.grid import make_grid, spectral_l2
from hpchem.kernels import propagate_heat, propagate_hyperbolic
from hpchem.model import BlowUpError, ModelParams, SourceSpec
from hpchem.solver import (
    FieldInit,
    HyperbolicStepper,
    InitSpec,
    SolverConfig,
    build_initial_state,
    default_dt,
    duhamel_oracle,
    run,
    run_comparison,
    run_pks,
)


def _state_l2(grid, w_hat, phi_hat):
    total = sum(spectral_l2(grid, w_hat[c]) ** 2 for c in range(grid.dim + 1))
    return np.sqrt(total + spectral_l2(grid, phi_hat) ** 2)


def small_config(**overrides):
    grid = overrides.pop("grid", None) or make_grid(1, 256, 50.0)
    defaults = dict(
        grid=grid,
        params=ModelParams(),
        sources=SourceSpec(),
        init=InitSpec(u=FieldInit("gaussian", amplitude=1e-2, width=1.0)),
        t_end=5.0,
    )
    defaults.update(overrides)
    return SolverConfig(**defaults)


class TestConfig:
    def test_default_dt_formula(self):
        g = make_grid(1, 256, 50.0)
        p = ModelParams(gamma=2.0, beta=4.0)
        assert default_dt(g, p) == pytest.approx(min(0.125, 0.1, 0.25 * g.spacing / 2.0))

    def test_validation(self):
        with pytest.raises(ValueError):
            small_config(regime="warp")
        with pytest.raises(ValueError):
            small_config(dt=-0.1)
        with pytest.raises(ValueError):
            small_config(regime="constant_state", u_bar=-0.5)
        with pytest.raises(ValueError):
            small_config(
                regime="constant_state",
                u_bar=0.1,
                sources=SourceSpec(fbar_kind="quad", fbar_c1=1.0),
            )

    def test_initial_state_splits_flux_by_gamma(self):
        g = make_grid(1, 64, 10.0)
        init = InitSpec(v=FieldInit("gaussian", amplitude=2.0, width=1.0))
        w_hat, _ = build_initial_state(g, init, gamma=2.0)
        v_phys = g.to_physical(w_hat[1]) * 2.0
        assert np.max(v_phys) == pytest.approx(2.0, rel=1e-6)

    def test_mode_init_populates_single_mode(self):
        g = make_grid(1, 64, 2.0 * np.pi)
        init = InitSpec(u=FieldInit("mode", mode_k=3, amplitude=0.5))
        w_hat, _ = build_initial_state(g, init, gamma=1.0)
        nonzero = np.nonzero(np.abs(w_hat[0]) > 1e-12)[0]
        assert list(nonzero) == [3]


class TestLinearExactness:
    def test_solver_matches_propagator_when_sources_off(self):
        grid = make_grid(1, 256, 50.0)
        params = ModelParams(a=0.0, b=1.0)
        cfg = small_config(
            grid=grid,
            params=params,
            sources=SourceSpec.zero(),
            init=InitSpec(
                u=FieldInit("gaussian", amplitude=0.1, width=1.5),
                v=FieldInit("gaussian", amplitude=0.05, width=2.0),
                phi=FieldInit("gaussian", amplitude=0.2, width=1.0),
            ),
            dt=0.025,
            t_end=10.0,
        )
        w0, phi0 = build_initial_state(grid, cfg.init, params.gamma)
        stepper = HyperbolicStepper(cfg)
        for _ in range(400):
            stepper.step()
        w_ref = propagate_hyperbolic(w0.copy(), grid, params, 10.0)
        phi_ref = propagate_heat(phi0.copy(), grid, 10.0, b_coeff=params.b)
        gap = _state_l2(grid, stepper.w_hat - w_ref, stepper.phi_hat - phi_ref)
        assert gap <= 1e-10 * _state_l2(grid, w_ref, phi_ref)


class TestRunBasics:
    def test_zero_data_stays_zero(self):
        traj = run(small_config(init=InitSpec(), t_end=1.0))
        for key in ("u_L2", "v_L2", "phi_L2"):
            assert np.all(traj.records[key] == 0.0)

    def test_mass_is_conserved(self):
        traj = run(small_config(t_end=20.0))
        assert traj.mass_drift <= 1e-9

    def test_records_monotone_times_and_finite(self):
        traj = run(small_config(t_end=2.0))
        assert np.all(np.diff(traj.times) > 0)
        for key, vals in traj.records.items():
            assert np.all(np.isfinite(vals)), key

    def test_series_accessor(self):
        traj = run(small_config(t_end=1.0))
        s = traj.series("u_L2")
        assert s.label == "u_L2" and s.times.shape == s.values.shape
        with pytest.raises(KeyError):
            traj.series("nope")

    def test_snapshots_kept_when_asked(self):
        traj = run(small_config(t_end=2.0, keep_snapshots=True, snapshot_stride=2,
                                record_every=5))
        assert traj.snapshots
        t, w_hat, phi_hat = traj.snapshots[0]
        assert w_hat.shape[0] == 2

    def test_blowup_raises_with_time(self):
        cfg = small_config(
            init=InitSpec(u=FieldInit("gaussian", amplitude=1e150, width=1.0)),
            sources=SourceSpec(chi=1e150),
            t_end=2.0,
        )
        with pytest.raises(BlowUpError):
            run(cfg)


class TestSelfConvergence:
    def _endpoint(self, dt):
        grid = make_grid(1, 128, 20.0)
        cfg = small_config(
            grid=grid,
            init=InitSpec(u=FieldInit("gaussian", amplitude=0.2, width=1.0)),
            sources=SourceSpec(chi=1.0),
            dt=dt,
            t_end=0.8,
        )
        stepper = HyperbolicStepper(cfg)
        for _ in range(round(0.8 / dt)):
            stepper.step()
        return stepper

    def test_strang_order_at_least_19(self):
        grid = make_grid(1, 128, 20.0)
        s1 = self._endpoint(0.04)
        s2 = self._endpoint(0.02)
        s3 = self._endpoint(0.01)
        e12 = _state_l2(grid, s1.w_hat - s2.w_hat, s1.phi_hat - s2.phi_hat)
        e23 = _state_l2(grid, s2.w_hat - s3.w_hat, s2.phi_hat - s3.phi_hat)
        order = np.log2(e12 / e23)
        assert order >= 1.9

    def test_pks_order_at_least_19(self):
        grid = make_grid(1, 128, 20.0)

        def endpoint(dt):
            cfg = small_config(
                grid=grid,
                init=InitSpec(u=FieldInit("gaussian", amplitude=0.2, width=1.0)),
                dt=dt,
                t_end=0.8,
            )
            from hpchem.solver import ParabolicStepper

            st = ParabolicStepper(cfg)
            for _ in range(round(0.8 / dt)):
                st.step()
            return st

        s1, s2, s3 = endpoint(0.04), endpoint(0.02), endpoint(0.01)
        e12 = np.sqrt(
            spectral_l2(grid, s1.u_hat - s2.u_hat) ** 2
            + spectral_l2(grid, s1.phi_hat - s2.phi_hat) ** 2
        )
        e23 = np.sqrt(
            spectral_l2(grid, s2.u_hat - s3.u_hat) ** 2
            + spectral_l2(grid, s2.phi_hat - s3.phi_hat) ** 2
        )
        assert np.log2(e12 / e23) >= 1.9


class TestConstantState:
    def test_zero_perturbation_is_stationary(self):
        cfg = small_config(regime="constant_state", u_bar=0.05, init=InitSpec(), t_end=2.0)
        traj = run(cfg)
        for key in ("u_L2", "v_L2", "phi_L2"):
            assert np.all(traj.records[key] == 0.0)

    def test_coupling_term_active(self):
        # a phi-only perturbation must excite the flux through u_bar * grad(phi)
        cfg = small_config(
            regime="constant_state",
            u_bar=0.1,
            init=InitSpec(phi=FieldInit("gaussian", amplitude=1e-3, width=1.5)),
            t_end=1.0,
        )
        traj = run(cfg)
        assert traj.records["v_L2"][-1] > 0.0
        cfg0 = dataclasses.replace(cfg, u_bar=0.0)
        traj0 = run(cfg0)
        assert traj.records["v_L2"][-1] > 10.0 * traj0.records["v_L2"][-1]


class TestPKS:
    def test_pure_heat_single_mode(self):
        # transport off, production off: u follows exp(-|xi|^2 t / beta) exactly
        grid = make_grid(1, 64, 2.0 * np.pi)
        beta = 2.0
        cfg = SolverConfig(
            grid=grid,
            params=ModelParams(beta=beta, a=0.0, b=1.0),
            sources=SourceSpec(h_kind="zero"),
            init=InitSpec(u=FieldInit("mode", mode_k=2, amplitude=1.0)),
            dt=0.01,
            t_end=1.0,
        )
        traj = run_pks(cfg)
        expected = 1.0 / np.sqrt(2.0) * np.sqrt(2.0 * np.pi) * np.exp(-4.0 * 1.0 / beta)
        assert traj.records["u_L2"][-1] == pytest.approx(expected, rel=1e-8)

    def test_mass_conserved_with_transport(self):
        cfg = small_config(t_end=10.0)
        traj = run_pks(cfg)
        m = traj.records["mass_u"]
        assert np.max(np.abs(m - m[0])) <= 1e-9 * abs(m[0])


class TestComparison:
    def test_zero_data_zero_difference(self):
        traj = run_comparison(small_config(init=InitSpec(), t_end=1.0))
        assert np.all(traj.records["diff_u_L2"] == 0.0)
        assert np.all(traj.records["diff_phi_L2"] == 0.0)

    def test_difference_columns_present_and_smaller(self):
        traj = run_comparison(small_config(t_end=10.0))
        assert "pks_u_L2" in traj.records
        # by mid-run the two dynamics agree to leading order
        assert traj.records["diff_u_L2"][-1] < 0.2 * traj.records["u_L2"][-1]


class TestDuhamelOracle:
    def test_linear_case_matches_propagator_exactly(self):
        grid = make_grid(1, 128, 25.0)
        params = ModelParams(a=0.0, b=1.0)
        cfg = SolverConfig(
            grid=grid,
            params=params,
            sources=SourceSpec.zero(),
            init=InitSpec(
                u=FieldInit("gaussian", amplitude=0.1, width=1.0),
                phi=FieldInit("gaussian", amplitude=0.1, width=1.5),
            ),
            t_end=0.5,
        )
        res = duhamel_oracle(cfg, n_picard=3, quadrature_nodes=16)
        w0, phi0 = build_initial_state(grid, cfg.init, params.gamma)
        w_ref = propagate_hyperbolic(w0, grid, params, 0.5)
        phi_ref = propagate_heat(phi0, grid, 0.5, b_coeff=1.0)
        gap = _state_l2(grid, res.w_hat - w_ref, res.phi_hat - phi_ref)
        assert gap <= 1e-12 * _state_l2(grid, w_ref, phi_ref)

    def test_gaps_decrease_geometrically(self):
        grid = make_grid(1, 128, 25.0)
        cfg = SolverConfig(
            grid=grid,
            params=ModelParams(),
            sources=SourceSpec(),
            init=InitSpec(u=FieldInit("gaussian", amplitude=1e-2, width=1.0)),
            t_end=0.5,
        )
        res = duhamel_oracle(cfg, n_picard=5, quadrature_nodes=32)
        assert res.contracting
        meaningful = [d for d in res.deltas if d > 1e-15]
        for a, b in zip(meaningful[2:], meaningful[3:]):
            assert b < 0.5 * a

    def test_divergence_is_diagnosed(self):
        grid = make_grid(1, 128, 25.0)
        cfg = SolverConfig(
            grid=grid,
            params=ModelParams(),
            sources=SourceSpec(chi=80.0),
            init=InitSpec(
                u=FieldInit("gaussian", amplitude=2.0, width=1.0),
                phi=FieldInit("gaussian", amplitude=2.0, width=1.0),
            ),
            t_end=1.0,
        )
        with pytest.raises(RuntimeError, match="contraction"):
            duhamel_oracle(cfg, n_picard=8, quadrature_nodes=32)

    def test_horizon_and_argument_checks(self):
        cfg = small_config(t_end=2.0)
        with pytest.raises(ValueError):
            duhamel_oracle(cfg)
        cfg = small_config(t_end=0.5)
        with pytest.raises(ValueError):
            duhamel_oracle(cfg, n_picard=2)


class TestSourceConsistency:
    def test_stepper_rhs_matches_public_source_evaluation(self, rng):
        """The stepper's fused source path must equal evaluate_sources."""
        from hpchem.grid import ScalarField, VectorField, forward
        from hpchem.model import evaluate_sources

        grid = make_grid(1, 64, 12.0)
        params = ModelParams(gamma=1.7, beta=0.9, a=0.8, b=1.1)
        spec = SourceSpec(
            h_kind="grad_sat",
            chi=0.7,
            bbar_kind="linear",
            bbar_coeff=0.3,
            fbar_kind="quad",
            fbar_c1=0.2,
            fbar_c2=-0.1,
        )
        cfg = SolverConfig(grid=grid, params=params, sources=spec,
                           init=InitSpec(), t_end=1.0)
        stepper = HyperbolicStepper(cfg)

        u_vals = 0.1 * rng.standard_normal(grid.shape)
        v_vals = 0.1 * rng.standard_normal(grid.shape)
        phi_vals = 0.1 * rng.standard_normal(grid.shape)
        w_hat = np.stack([np.fft.rfftn(u_vals), np.fft.rfftn(v_vals / params.gamma)])
        phi_hat = np.fft.rfftn(phi_vals).astype(complex)

        dw, dphi = stepper._source_rhs(w_hat, phi_hat)

        u = ScalarField(grid, grid.to_physical(w_hat[0]))
        v = VectorField.from_arrays(grid, [v_vals])
        phi = ScalarField(grid, grid.to_physical(phi_hat))
        rhs_v, rhs_phi = evaluate_sources(u, v, phi, spec, params)

        expected_dw1 = forward(rhs_v.components[0]) / params.gamma
        assert np.max(np.abs(dw[1] - expected_dw1)) < 1e-10 * max(1.0, np.max(np.abs(expected_dw1)))
        expected_dphi = forward(rhs_phi)
        assert np.max(np.abs(dphi - expected_dphi)) < 1e-10 * max(1.0, np.max(np.abs(expected_dphi)))
