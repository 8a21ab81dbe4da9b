import numpy as np
import pytest

from hpchem.analysis import fit_decay
from hpchem.grid import make_grid, norm
from hpchem.kernels import (
    KernelSplit,
    closed_form_matrix,
    crosscheck_expm,
    damped_wave_eigen,
    damped_wave_entries,
    gaussian_probe,
    generic_expm_matrix,
    heat_block_apply,
    measure_kernel_decay,
    probe_state,
    propagate_heat,
    propagate_hyperbolic,
    refined_remainder_decay,
    split_kernel,
)
from hpchem.model import ModelParams


class TestDampedWaveEigen:
    def test_real_branch_example(self):
        lp, lm = damped_wave_eigen(0.25, gamma=1.0, beta=1.0)
        assert lp == pytest.approx((-1.0 + np.sqrt(0.75)) / 2.0, rel=1e-12)
        assert lm == pytest.approx((-1.0 - np.sqrt(0.75)) / 2.0, rel=1e-12)

    def test_complex_branch_example(self):
        lp, lm = damped_wave_eigen(1.0, gamma=1.0, beta=1.0)
        assert lp == pytest.approx(complex(-0.5, np.sqrt(3.0) / 2.0), rel=1e-12)
        assert lm == pytest.approx(complex(-0.5, -np.sqrt(3.0) / 2.0), rel=1e-12)

    def test_zero_frequency(self):
        lp, lm = damped_wave_eigen(0.0, gamma=2.0, beta=0.7)
        assert lp == 0.0 and lm == pytest.approx(-0.7)

    def test_against_polynomial_roots(self, rng):
        # independent oracle: numpy root finder on the characteristic polynomial
        for _ in range(50):
            gamma, beta, rho = rng.uniform(0.2, 3.0, size=3)
            lp, lm = damped_wave_eigen(rho, gamma, beta)
            roots = sorted(np.roots([1.0, beta, gamma**2 * rho**2]), key=lambda z: (z.real, z.imag))
            assert lm == pytest.approx(roots[0], rel=1e-9, abs=1e-12)
            assert lp == pytest.approx(roots[1], rel=1e-9, abs=1e-12)

    def test_negative_rho_rejected(self):
        with pytest.raises(ValueError):
            damped_wave_eigen(-0.1, 1.0, 1.0)


class TestModeSymbol:
    def test_conjugate_symmetry(self, rng):
        from hpchem.kernels import mode_symbol

        p = ModelParams(gamma=1.7, beta=0.4)
        for dim in (1, 2, 3):
            xi = rng.standard_normal(dim)
            M_pos = mode_symbol(xi, p)
            M_neg = mode_symbol(-xi, p)
            assert np.allclose(M_neg, np.conj(M_pos), atol=1e-15)

    def test_eigenvalues_never_grow(self, rng):
        from hpchem.kernels import mode_symbol

        p = ModelParams(gamma=0.9, beta=1.3)
        for dim in (1, 2, 3):
            for _ in range(20):
                xi = rng.uniform(-4, 4, size=dim)
                eig = np.linalg.eigvals(mode_symbol(xi, p))
                assert np.all(eig.real <= 1e-12)


class TestBlockEntries:
    def test_identity_at_t0(self, rng):
        rho = rng.uniform(0.0, 5.0, size=32)
        e11, e22, e12 = damped_wave_entries(rho, 1.2, 0.9, 0.0)
        assert np.allclose(e11, 1.0) and np.allclose(e22, 1.0) and np.allclose(e12, 0.0)

    def test_mean_mode_values(self):
        e11, e22, e12 = damped_wave_entries(np.array([0.0]), 1.0, 0.8, 2.0)
        assert e11[0] == 1.0
        assert e22[0] == pytest.approx(np.exp(-0.8 * 2.0), rel=1e-14)
        assert e12[0] == 0.0

    def test_matches_generic_exponential_across_branches(self):
        # includes near-degenerate modes around the branch point
        p = ModelParams(gamma=1.0, beta=1.0)
        for rho in (0.0, 0.1, 0.499999, 0.5, 0.5000001, 0.75, 3.0):
            E = closed_form_matrix(np.array([rho]), p, 1.7)
            R = generic_expm_matrix(np.array([rho]), p, 1.7)
            assert np.max(np.abs(E - R)) < 1e-10

    def test_spectral_radius_above_cutoff(self):
        p = ModelParams(gamma=1.0, beta=1.0)
        t = 3.0
        for rho in (0.6, 1.0, 4.0):
            E = closed_form_matrix(np.array([rho]), p, t)
            radius = np.max(np.abs(np.linalg.eigvals(E)))
            assert radius == pytest.approx(np.exp(-p.beta * t / 2.0), rel=1e-10)


class TestPropagateHyperbolic:
    def test_t0_identity(self, grid2d, rng):
        p = ModelParams()
        w = rng.standard_normal((3,) + grid2d.spectral_shape) * (1 + 0j)
        out = propagate_hyperbolic(w.copy(), grid2d, p, 0.0)
        assert np.allclose(out, w, atol=1e-15)

    def test_mean_mode_behavior(self, grid1d, rng):
        p = ModelParams(beta=0.6)
        w = np.zeros((2,) + grid1d.spectral_shape, dtype=complex)
        w[0, 0] = 2.0
        w[1, 0] = 1.5
        out = propagate_hyperbolic(w, grid1d, p, 1.3)
        assert out[0, 0] == pytest.approx(2.0)
        assert out[1, 0] == pytest.approx(1.5 * np.exp(-0.6 * 1.3), rel=1e-12)

    def test_transverse_mode_damps(self, grid2d):
        # mode xi along axis 0, flux along axis 1: pure exp(-beta t) damping
        p = ModelParams(beta=0.9)
        w = np.zeros((3,) + grid2d.spectral_shape, dtype=complex)
        w[2, 1, 0] = 1.0  # v_y on a mode with xi = (xi_x, 0)
        out = propagate_hyperbolic(w.copy(), grid2d, p, 0.7)
        assert out[2, 1, 0] == pytest.approx(np.exp(-0.9 * 0.7), rel=1e-12)
        assert abs(out[0, 1, 0]) < 1e-14 and abs(out[1, 1, 0]) < 1e-14

    @pytest.mark.parametrize("t,s", [(0.1, 0.1), (0.1, 0.7), (0.7, 1.3), (1.3, 1.3)])
    def test_semigroup(self, grid2d, rng, t, s):
        p = ModelParams(gamma=1.4, beta=0.7)
        w = rng.standard_normal((3,) + grid2d.spectral_shape) + 1j * rng.standard_normal(
            (3,) + grid2d.spectral_shape
        )
        once = propagate_hyperbolic(w.copy(), grid2d, p, t + s)
        twice = propagate_hyperbolic(propagate_hyperbolic(w.copy(), grid2d, p, t), grid2d, p, s)
        scale = np.max(np.abs(once))
        assert np.max(np.abs(once - twice)) < 1e-9 * max(scale, 1.0)

    def test_mass_invariance(self, grid1d, rng):
        p = ModelParams(beta=1.1)
        w = rng.standard_normal((2,) + grid1d.spectral_shape) * (1 + 0j)
        dc = w[0, 0]
        out = propagate_hyperbolic(w, grid1d, p, 5.0)
        assert out[0, 0] == dc

    def test_verify_mode_passes(self, grid1d, rng):
        w = rng.standard_normal((2,) + grid1d.spectral_shape) * (1 + 0j)
        propagate_hyperbolic(w, grid1d, ModelParams(), 0.5, verify=True, rng=rng)

    def test_crosscheck_random_modes(self, rng):
        for dim in (1, 2, 3):
            gap = crosscheck_expm(dim, ModelParams(gamma=0.7, beta=1.9), t=0.9,
                                  n_samples=100, rng=rng)
            assert gap < 1e-10

    def test_negative_time_rejected(self, grid1d):
        w = np.zeros((2,) + grid1d.spectral_shape, dtype=complex)
        with pytest.raises(ValueError):
            propagate_hyperbolic(w, grid1d, ModelParams(), -1.0)


class TestPropagateHeat:
    def test_single_mode_multiplier(self):
        g = make_grid(1, 64, 2.0 * np.pi)
        phi = np.zeros(g.spectral_shape, dtype=complex)
        phi[1] = 1.0  # |xi| = 1
        out = propagate_heat(phi, g, t=0.5, b_coeff=1.0)
        assert out[1] == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_identity_at_t0(self, grid1d, rng):
        phi = rng.standard_normal(grid1d.spectral_shape) * (1 + 0j)
        out = propagate_heat(phi.copy(), grid1d, 0.0, b_coeff=2.0)
        assert np.allclose(out, phi)

    def test_mean_mode_preserved_without_decay(self, grid1d):
        phi = np.zeros(grid1d.spectral_shape, dtype=complex)
        phi[0] = 3.0
        out = propagate_heat(phi, grid1d, t=10.0, b_coeff=0.0)
        assert out[0] == pytest.approx(3.0)

    def test_rejects_bad_diffusion(self, grid1d):
        phi = np.zeros(grid1d.spectral_shape, dtype=complex)
        with pytest.raises(ValueError):
            propagate_heat(phi, grid1d, 1.0, b_coeff=0.0, diffusion=0.0)


class TestKernelSplit:
    def test_default_cutoff(self):
        g = make_grid(1, 64, 10.0)
        split = split_kernel(g, ModelParams(gamma=1.0, beta=1.0))
        assert split.cutoff_radius == pytest.approx(0.5)
        split2 = split_kernel(g, ModelParams(gamma=2.0, beta=1.0))
        assert split2.cutoff_radius == pytest.approx(0.25)

    def test_parts_reconstruct_exactly(self, rng):
        g = make_grid(2, 16, 6.0)
        split = split_kernel(g, ModelParams())
        w = rng.standard_normal((3,) + g.spectral_shape) + 1j * rng.standard_normal(
            (3,) + g.spectral_shape
        )
        for t in (0.0, 0.4, 2.0):
            full = split.apply(w, t, part="full")
            low = split.apply(w, t, part="diffusive")
            high = split.apply(w, t, part="fast")
            assert np.array_equal(low + high, full)

    def test_high_frequency_modes_have_no_diffusive_part(self):
        g = make_grid(1, 64, 2.0 * np.pi)  # |xi| >= 1 except the mean mode
        split = split_kernel(g, ModelParams())  # cutoff 0.5
        w = np.zeros((2,) + g.spectral_shape, dtype=complex)
        w[0, 2] = 1.0  # |xi| = 2 = 4 * cutoff
        out = split.apply(w, 1.0, part="diffusive")
        assert np.all(out == 0.0)

    def test_invalid_part_rejected(self, rng):
        g = make_grid(1, 16, 5.0)
        split = split_kernel(g, ModelParams())
        w = np.zeros((2,) + g.spectral_shape, dtype=complex)
        with pytest.raises(ValueError):
            split.apply(w, 1.0, part="sideways")


class TestMeasureKernelDecay:
    def test_full_part_at_t0_returns_probe_norm(self):
        g = make_grid(1, 256, 50.0)
        split = split_kernel(g, ModelParams())
        probe = gaussian_probe(g, normalize="L1")
        s = measure_kernel_decay(split, "cons", "cons", 2, np.array([1e-12, 1.0]),
                                 probe, part="full")
        assert s.values[0] == pytest.approx(norm(probe, "L2"), rel=1e-8)

    def test_reentry_guard(self):
        g = make_grid(1, 64, 10.0)
        split = split_kernel(g, ModelParams(gamma=1.0))
        with pytest.raises(ValueError):
            measure_kernel_decay(split, "cons", "cons", 2, np.array([2.0, 6.0]))

    def test_small_scale_rate_sanity(self):
        # coarse check; the desk-scale bands live in the acceptance suite
        g = make_grid(1, 1024, 200.0)
        split = split_kernel(g, ModelParams())
        tg = np.geomspace(8.0, 80.0, 24)
        s = measure_kernel_decay(split, "cons", "cons", 2, tg)
        f = fit_decay(s, (8.0, 80.0))
        assert f.exponent == pytest.approx(-0.25, abs=0.05)

    def test_probe_normalization(self):
        g = make_grid(1, 256, 50.0)
        assert norm(gaussian_probe(g, normalize="L1"), "L1") == pytest.approx(1.0, rel=1e-12)
        assert norm(gaussian_probe(g, normalize="L2"), "L2") == pytest.approx(1.0, rel=1e-12)

    def test_bad_p_rejected(self):
        g = make_grid(1, 64, 10.0)
        split = split_kernel(g, ModelParams())
        with pytest.raises(ValueError):
            measure_kernel_decay(split, "cons", "cons", 3, np.array([1.0]))


class TestRefinedRemainder:
    def test_remainder_plus_block_matrix_is_diffusive_part(self, rng):
        g = make_grid(1, 128, 40.0)
        p = ModelParams(gamma=1.3, beta=0.9)
        split = split_kernel(g, p)
        w = rng.standard_normal((2,) + g.spectral_shape) + 1j * rng.standard_normal(
            (2,) + g.spectral_shape
        )
        t = 1.7
        kt = split.apply(w, t, part="diffusive")
        gt = heat_block_apply(w, g, p, t)
        rt = kt - gt
        assert np.array_equal(rt + gt, kt)

    def test_finite_at_t0(self):
        g = make_grid(1, 128, 40.0)
        split = split_kernel(g, ModelParams())
        probe = gaussian_probe(g, normalize="L1")
        w0 = probe_state(g, probe, "cons")
        r0 = split.apply(w0, 0.0, part="diffusive") - heat_block_apply(w0, g, ModelParams(), 0.0)
        assert np.all(np.isfinite(r0))

    def test_leading_ratio_decreases(self):
        g = make_grid(1, 1024, 200.0)
        split = split_kernel(g, ModelParams())
        tg = np.geomspace(8.0, 80.0, 12)
        out = refined_remainder_decay(split, tg)
        assert np.all(np.diff(out.leading_ratio.values) < 0)
        assert set(out.block_series) == {"cons_cons", "cons_diss", "diss_cons", "diss_diss"}
