"""Weighted mode functionals, the composite functional, and rate fitting."""

import numpy as np
import pytest

from pkshear.grid import Grid, Field, SpectralSlice, slice_at
from pkshear.hypo import (
    DecayFit,
    HypoMultipliers,
    fit_decay_rate,
    functional_F,
    multipliers,
    phi_k,
    scaling_slope,
)
from pkshear.model import ModelParams, PKSState, build_shear


def phi_oracle(profile, k, u1, y, A, eps):
    """All four terms of the slice energy, assembled independently.

    Uses its own one-sided/centered derivative stencil and its own trapezoid
    weights; the 2*pi factor is the x-measure of one Fourier mode.
    """
    dy = y[1] - y[0]
    w = np.full(y.size, dy)
    w[0] = w[-1] = dy / 2
    dprof = np.empty_like(profile)
    dprof[1:-1] = (profile[2:] - profile[:-2]) / (2 * dy)
    dprof[0] = (-3 * profile[0] + 4 * profile[1] - profile[2]) / (2 * dy)
    dprof[-1] = (3 * profile[-1] - 4 * profile[-2] + profile[-3]) / (2 * dy)
    alpha, beta, gamma = multipliers(A, k, eps)
    kk = abs(k)
    norm2 = 2 * np.pi * (w @ np.abs(profile) ** 2)
    dnorm2 = 2 * np.pi * (w @ np.abs(dprof) ** 2)
    cross = 2 * np.pi * (w @ (u1 * np.imag(np.conj(profile) * dprof)))
    weighted2 = 2 * np.pi * (w @ (u1**2 * np.abs(profile) ** 2))
    return norm2 + alpha * dnorm2 + 2 * kk * beta * cross + kk**2 * gamma * weighted2


def random_slice(grid, k, rng):
    prof = rng.standard_normal(grid.ny) + 1j * rng.standard_normal(grid.ny)
    return SpectralSlice(grid, k, prof)


class TestMultipliers:
    def test_reference_values(self):
        a, b, g = multipliers(1000.0, 1)
        assert a == pytest.approx(1e-4, rel=1e-12)
        assert b == pytest.approx(3e-4, rel=1e-12)
        assert g == pytest.approx(1e-2, rel=1e-12)
        assert 8 * b**2 == pytest.approx(7.2e-7, rel=1e-12)
        assert 8 * b**2 <= a * g

    def test_second_wavenumber(self):
        a, _, _ = multipliers(1000.0, 2)
        assert a == pytest.approx(0.01 * 1000 ** (-2 / 3) * 2 ** (-2 / 3), rel=1e-12)
        assert a == pytest.approx(6.2996e-5, rel=1e-4)

    def test_negative_wavenumber_uses_magnitude(self):
        assert multipliers(500.0, -3) == multipliers(500.0, 3)

    def test_constraint_violation(self):
        with pytest.raises(ValueError, match="8"):
            HypoMultipliers(eps_beta=0.004)

    def test_zero_mode_rejected(self):
        with pytest.raises(ValueError):
            multipliers(1000.0, 0)

    def test_nonpositive_amplitude_rejected(self):
        with pytest.raises(ValueError):
            multipliers(-5.0, 1)

    def test_positive_eps_required(self):
        with pytest.raises(ValueError):
            HypoMultipliers(eps_alpha=0.0)


class TestDecayFitType:
    def test_window_ordering(self):
        with pytest.raises(ValueError):
            DecayFit(rate=1.0, window=(2.0, 1.0), r_squared=0.5, n_samples=10)

    def test_r_squared_range(self):
        with pytest.raises(ValueError):
            DecayFit(rate=1.0, window=(0.0, 1.0), r_squared=1.5, n_samples=10)


class TestPhiK:
    def test_constant_profile_closed_form(self, grid_medium):
        g = grid_medium
        shear = build_shear(g, "couette")
        prof = np.full(g.ny, 2.0 - 1.0j)
        slc = SpectralSlice(g, 1, prof)
        A = 1000.0
        _, _, gamma = multipliers(A, 1)
        norm2 = 2 * np.pi * (g.wy @ np.abs(prof) ** 2)
        assert phi_k(slc, shear, A) == pytest.approx((1 + gamma) * norm2, rel=1e-12)

    def test_matches_quadrature_oracle(self, grid_default):
        g = grid_default
        shear = build_shear(g, "couette")
        prof = np.exp(-g.y**2) * (1.0 + 0.5j) + 0.2j * np.sin(g.y)
        slc = SpectralSlice(g, 1, prof)
        eps = HypoMultipliers()
        expected = phi_oracle(prof, 1, shear.u1, g.y, 1000.0, eps)
        assert phi_k(slc, shear, 1000.0, eps) == pytest.approx(expected, rel=1e-10)

    def test_zero_mode_rejected(self, grid_medium, rng):
        shear = build_shear(grid_medium, "couette")
        with pytest.raises(ValueError):
            phi_k(random_slice(grid_medium, 0, rng), shear, 100.0)

    def test_quadratic_homogeneity(self, grid_medium, rng):
        g = grid_medium
        shear = build_shear(g, "couette")
        slc = random_slice(g, 2, rng)
        scaled = SpectralSlice(g, 2, 3.0 * slc.profile)
        assert phi_k(scaled, shear, 200.0) == pytest.approx(
            9.0 * phi_k(slc, shear, 200.0), rel=1e-12
        )

    def test_negative_wavenumber_equals_positive_for_real_fields(self, grid_medium, rng):
        g = grid_medium
        shear = build_shear(g, "couette")
        f = Field(g, rng.standard_normal((g.nx, g.ny)))
        plus = phi_k(slice_at(f, 2), shear, 300.0)
        minus = phi_k(slice_at(f, -2), shear, 300.0)
        assert minus == pytest.approx(plus, rel=1e-12)

    def test_lower_bound_property(self, grid_medium, rng):
        g = grid_medium
        shear = build_shear(g, "couette")
        for _ in range(100):
            A = 10 ** rng.uniform(0, 5)
            k = int(rng.integers(1, g.nx // 2 + 1))
            slc = random_slice(g, k, rng)
            val = phi_k(slc, shear, A)
            norm2 = 2 * np.pi * (g.wy @ np.abs(slc.profile) ** 2)
            assert val >= 0.5 * norm2

    def test_h1_equivalence_band(self, grid_medium, rng):
        g = grid_medium
        shear = build_shear(g, "couette")
        eps = HypoMultipliers()
        for _ in range(50):
            A = 10 ** rng.uniform(1, 4)
            k = int(rng.integers(1, g.nx // 2 + 1))
            slc = random_slice(g, k, rng)
            alpha, _, gamma = multipliers(A, k, eps)
            prof = slc.profile
            dprof = np.gradient(prof, g.dy)
            ref = 2 * np.pi * (
                g.wy @ np.abs(prof) ** 2
                + alpha * (g.wy @ np.abs(dprof) ** 2)
                + k**2 * gamma * (g.wy @ (shear.u1**2 * np.abs(prof) ** 2))
            )
            ratio = phi_k(slc, shear, A, eps) / ref
            assert 0.5 <= ratio <= 1.5


class TestFunctionalF:
    def test_x_independent_state_is_exactly_zero(self, grid_medium):
        g = grid_medium
        shear = build_shear(g, "couette")
        n = Field(g, np.tile(1 + np.exp(-g.y**2), (g.nx, 1)))
        c = Field(g, np.tile(0.5 * np.exp(-g.y**2), (g.nx, 1)))
        out = functional_F(PKSState(0.0, n, c), shear, ModelParams(A=1e4))
        assert out["total"] == 0.0

    def test_single_mode_density_matches_slice_sum(self, grid_medium):
        g = grid_medium
        shear = build_shear(g, "couette")
        params = ModelParams(A=1000.0)
        n = Field(g, np.cos(g.x)[:, None] * np.exp(-g.y**2)[None, :])
        c = Field(g, np.zeros((g.nx, g.ny)))
        state = PKSState(0.0, n, c, negativity_tol=np.inf)
        out = functional_F(state, shear, params)
        expected = 2 * phi_k(slice_at(n, 1), shear, params.A)
        assert out["total"] == pytest.approx(expected, rel=1e-12)
        assert out["n"] == pytest.approx(expected, rel=1e-12)
        assert out["dyc"] == 0.0 and out["dxc"] == 0.0 and out["Akc"] == 0.0

    def test_component_sums_match_manual_slice_loop(self, grid_medium, rng):
        g = grid_medium
        shear = build_shear(g, "couette")
        params = ModelParams(A=500.0)
        n = Field(g, rng.standard_normal((g.nx, g.ny)))
        c = Field(g, rng.standard_normal((g.nx, g.ny)))
        state = PKSState(0.0, n, c, negativity_tol=np.inf)
        out = functional_F(state, shear, params)
        total = 0.0
        for k in range(1, g.nx // 2 + 1):
            mult = 1.0 if k == g.nx // 2 else 2.0
            dyc = np.gradient(c.values, g.dy, axis=1, edge_order=2)
            dyc_slice = SpectralSlice(g, k, np.fft.rfft(dyc, axis=0, norm="forward")[k])
            dxc_slice = SpectralSlice(g, k, 1j * k * slice_at(c, k).profile)
            total += mult * (
                phi_k(slice_at(n, k), shear, params.A)
                + phi_k(dyc_slice, shear, params.A)
                + phi_k(dxc_slice, shear, params.A)
                + params.A * k * phi_k(slice_at(c, k), shear, params.A)
            )
        assert out["total"] == pytest.approx(total, rel=1e-6)
        parts = out["n"] + out["dyc"] + out["dxc"] + out["Akc"]
        assert out["total"] == pytest.approx(parts, rel=1e-12)

    def test_dominates_fluctuation_energy(self, grid_medium, rng):
        from pkshear.grid import lp_norm, mode_split, ddx, ddy

        g = grid_medium
        shear = build_shear(g, "couette")
        params = ModelParams(A=2000.0)
        for _ in range(20):
            n = Field(g, rng.standard_normal((g.nx, g.ny)))
            c = Field(g, rng.standard_normal((g.nx, g.ny)))
            state = PKSState(0.0, n, c, negativity_tol=np.inf)
            out = functional_F(state, shear, params)
            _, n_neq = mode_split(n)
            _, c_neq = mode_split(c)
            dyc_neq = ddy(c_neq, order=1)
            energy = (
                lp_norm(n_neq, 2) ** 2
                + lp_norm(ddx(c), 2) ** 2
                + lp_norm(dyc_neq, 2) ** 2
            )
            assert out["total"] >= energy - 1e-8


class TestFitDecayRate:
    def test_exact_exponential(self):
        t = np.linspace(0, 10, 50)
        fit = fit_decay_rate(t, np.exp(-0.5 * t))
        assert fit.rate == pytest.approx(0.5, abs=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.n_samples == 50

    def test_modulated_exponential(self):
        t = np.linspace(0, 25, 400)
        fit = fit_decay_rate(t, np.exp(-0.5 * t) * (2 + np.cos(t)), window=(0.0, 25.0))
        assert fit.rate == pytest.approx(0.5, abs=0.05)

    def test_constant_series(self):
        t = np.linspace(0, 5, 20)
        fit = fit_decay_rate(t, np.full(20, 3.7))
        assert fit.rate == 0.0
        assert fit.r_squared == 1.0

    def test_window_restricts_samples(self):
        t = np.linspace(0, 10, 101)
        v = np.exp(-t)
        v[t < 5] = 1e6
        fit = fit_decay_rate(t, v, window=(5.0, 10.0))
        assert fit.rate == pytest.approx(1.0, abs=1e-9)
        assert fit.window == (5.0, 10.0)

    def test_too_few_samples(self):
        t = np.linspace(0, 1, 5)
        with pytest.raises(ValueError, match="insufficient data"):
            fit_decay_rate(t, np.exp(-t))

    def test_nonpositive_values(self):
        t = np.linspace(0, 1, 20)
        v = np.exp(-t)
        v[3] = 0.0
        with pytest.raises(ValueError):
            fit_decay_rate(t, v)

    def test_bad_window(self):
        t = np.linspace(0, 1, 20)
        with pytest.raises(ValueError):
            fit_decay_rate(t, np.exp(-t), window=(1.0, 0.0))


class TestScalingSlope:
    def test_inverse_cube_root(self):
        A = np.array([1e2, 1e3, 1e4])
        assert scaling_slope(A, A ** (-1 / 3)) == pytest.approx(-1 / 3, abs=1e-12)

    def test_inverse_law(self):
        A = np.array([1e2, 1e3, 1e4, 1e5])
        assert scaling_slope(A, 10.0 / A) == pytest.approx(-1.0, abs=1e-12)

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            scaling_slope(np.array([1e2, 1e3]), np.array([0.1, 0.05]))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            scaling_slope(np.array([1e2, 1e3, 1e4]), np.array([0.1, -0.05, 0.01]))
