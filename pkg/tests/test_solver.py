import json

import numpy as np
import pytest

from hslab import (
    Field,
    SolverOptions,
    euler_lagrange_residual,
    fixed_point_minimize,
    gaussian,
    gradient_flow_minimize,
    make_exponents,
    make_grid,
    make_plan,
    rayleigh_quotient,
    sd_rearrangement,
    sharp_sobolev_constant,
    weighted_q_norm,
)
from hslab.solver import default_init, seminorm_squared

from conftest import smooth_random_field

CFG = make_exponents(1, 0.3, 3.0)


@pytest.fixture(scope="module")
def small():
    g = make_grid(1, 2048, 40.0)
    return g, make_plan(g)


class TestSharpConstant:
    def test_value(self):
        assert sharp_sobolev_constant(1, 0.25) == pytest.approx(0.8472, abs=1e-4)

    def test_three_dim_laplacian(self):
        # s = 1, n = 3: the classical constant 3 (pi/2)^(4/3)
        assert sharp_sobolev_constant(3, 1.0) == pytest.approx(3 * (np.pi / 2) ** (4 / 3), rel=1e-12)


class TestRayleighQuotient:
    def test_scale_invariant(self, small, rng):
        g, plan = small
        u = smooth_random_field(g, rng)
        q0 = rayleigh_quotient(u, CFG, plan)
        for lam in (-2.0, 1e-3, 50.0):
            assert rayleigh_quotient(lam * u, CFG, plan) == pytest.approx(q0, rel=1e-12)

    def test_dilation_invariant(self):
        g = make_grid(1, 16384, 80.0)
        plan = make_plan(g)
        q0 = rayleigh_quotient(gaussian(g, 1.0), CFG, plan)
        for t in (1.5, 2.0):
            assert rayleigh_quotient(gaussian(g, t), CFG, plan) == pytest.approx(q0, rel=2e-3)

    def test_numerator_matches_multiplier_for_decayed_fields(self):
        # the box energy is the |xi|^(2s) energy of the cheapest extension; for a
        # field far from the box edge it is close to the periodic multiplier sum
        from hslab.fracops import multiplier_l2_norm

        g = make_grid(1, 8192, 80.0)
        plan = make_plan(g)
        u = gaussian(g, 1.0)
        assert seminorm_squared(u, 0.3, plan) == pytest.approx(multiplier_l2_norm(u, 0.3, plan) ** 2, rel=2e-3)

    def test_zero_field(self, small):
        g, plan = small
        with pytest.raises(ValueError):
            rayleigh_quotient(Field(g, np.zeros(g.shape)), CFG, plan)

    def test_mismatch(self, small):
        g, plan = small
        with pytest.raises(ValueError):
            rayleigh_quotient(gaussian(g, 1.0), make_exponents(2, 0.3, 3.0), plan)
        with pytest.raises(ValueError):
            rayleigh_quotient(gaussian(make_grid(1, 1024, 40.0), 1.0), CFG, plan)

    def test_two_dimensional(self):
        g = make_grid(2, 64, 10.0)
        cfg = make_exponents(2, 0.5, 3.0)
        q = rayleigh_quotient(gaussian(g, 1.0), cfg, make_plan(g))
        assert q > 0 and np.isfinite(q)


class TestGradientFlow:
    def test_report_invariants(self, subcritical):
        cfg, plan, init, gf, fp = subcritical
        assert gf.converged
        assert gf.s_q_estimate > 0
        h = np.asarray(gf.quotient_history)
        assert np.all(np.diff(h) <= 1e-12 * h[:-1])
        assert weighted_q_norm(gf.minimizer, cfg) == pytest.approx(1.0, abs=1e-12)
        assert gf.s_q_estimate == pytest.approx(rayleigh_quotient(gf.minimizer, cfg, plan), rel=1e-10)

    def test_symmetrizes_off_center_start(self, subcritical):
        cfg, plan, init, gf, fp = subcritical
        u = gf.minimizer
        us = sd_rearrangement(u.abs())
        res = np.linalg.norm(u.values - us.values) / np.linalg.norm(u.values)
        assert res <= 1e-3

    def test_restart_at_minimizer(self, subcritical):
        cfg, plan, init, gf, fp = subcritical
        again = gradient_flow_minimize(gf.minimizer, cfg, plan)
        assert again.converged
        assert again.iterations <= SolverOptions().stall_window
        assert again.accepted_steps <= 2
        assert again.s_q_estimate == pytest.approx(gf.s_q_estimate, rel=1e-9)

    def test_residual_small(self, subcritical):
        assert subcritical[3].residual <= 1e-4

    def test_sign_and_scale_of_init(self, small):
        g, plan = small
        init = gaussian(g, 5.0, center=3.0)
        ref = gradient_flow_minimize(init, CFG, plan).s_q_estimate
        for lam in (-1.0, 250.0, -0.01):
            assert gradient_flow_minimize(lam * init, CFG, plan).s_q_estimate == pytest.approx(ref, rel=1e-9)

    def test_max_iters_reports_unconverged(self, small):
        g, plan = small
        rep = gradient_flow_minimize(default_init(g), CFG, plan, SolverOptions(max_iters=1))
        assert not rep.converged
        assert rep.stop_reason == "max_iters"

    def test_bad_options(self, small):
        g, plan = small
        with pytest.raises(ValueError):
            gradient_flow_minimize(default_init(g), CFG, plan, SolverOptions(tol_q=0.0))
        with pytest.raises(ValueError):
            gradient_flow_minimize(default_init(g), CFG, plan, SolverOptions(tol_u=-1.0))
        with pytest.raises(ValueError):
            gradient_flow_minimize(Field(g, np.zeros(g.shape)), CFG, plan)

    def test_minimum_beats_trial_fields(self, subcritical, rng):
        cfg, plan, init, gf, fp = subcritical
        g = plan.grid
        for _ in range(20):
            trial = smooth_random_field(g, rng, bumps=int(rng.integers(1, 4)), signed=False)
            assert gf.s_q_estimate <= rayleigh_quotient(trial, cfg, plan)

    def test_refinement_non_increasing(self):
        vals = []
        for N in (512, 1024, 2048, 4096):
            g = make_grid(1, N, 30.0)
            vals.append(gradient_flow_minimize(default_init(g), CFG, make_plan(g)).s_q_estimate)
        assert np.all(np.diff(vals) <= 1e-6)

    def test_json(self, subcritical, tmp_path):
        gf = subcritical[3]
        gf.write_json(tmp_path / "r.json", minimizer_path="m.field")
        doc = json.loads((tmp_path / "r.json").read_text())
        assert doc["method"] == "gradient_flow"
        assert doc["minimizer_file"] == "m.field"
        assert doc["s_q_estimate"] == gf.s_q_estimate
        assert len(doc["quotient_history"]) == len(gf.quotient_history)


class TestFixedPoint:
    def test_agrees_with_gradient_flow(self, subcritical):
        cfg, plan, init, gf, fp = subcritical
        assert fp.converged
        assert fp.s_q_estimate == pytest.approx(gf.s_q_estimate, rel=1e-3)
        assert weighted_q_norm(fp.minimizer, cfg) == pytest.approx(1.0, abs=1e-12)

    def test_started_at_gradient_flow_minimizer(self, subcritical):
        cfg, plan, init, gf, fp = subcritical
        one = fixed_point_minimize(gf.minimizer, cfg, plan, SolverOptions(max_iters=1))
        u0 = gf.minimizer.values
        change = np.max(np.abs(one.minimizer.values - u0)) / np.max(np.abs(u0))
        assert change < 1e-4
        full = fixed_point_minimize(gf.minimizer, cfg, plan)
        assert full.s_q_estimate == pytest.approx(gf.s_q_estimate, rel=1e-3)

    def test_positive_from_compact_start(self, small):
        g, plan = small
        init = Field(g, (np.abs(g.axis - 4.0) < 1.0).astype(float))
        u = init
        for _ in range(3):
            u = fixed_point_minimize(u, CFG, plan, SolverOptions(max_iters=1)).minimizer
            assert np.all(u.values > 0)

    def test_sign_and_scale_of_init(self, small):
        g, plan = small
        init = gaussian(g, 5.0, center=3.0)
        ref = fixed_point_minimize(init, CFG, plan).s_q_estimate
        for lam in (-1.0, 250.0):
            assert fixed_point_minimize(lam * init, CFG, plan).s_q_estimate == pytest.approx(ref, rel=1e-9)

    def test_errors(self, small):
        g, plan = small
        with pytest.raises(ValueError):
            fixed_point_minimize(Field(g, np.zeros(g.shape)), CFG, plan)
        g2 = make_grid(2, 16, 3.0)
        cfg2 = make_exponents(2, 0.5, 3.0)
        rep = fixed_point_minimize(gaussian(g2, 1.0), cfg2, make_plan(g2), SolverOptions(max_iters=2))
        assert rep.iterations == 2


class TestEulerLagrangeResidual:
    def test_exact_fixed_point(self, small):
        g, plan = small
        rep = fixed_point_minimize(default_init(g), CFG, plan, SolverOptions(tol_u=1e-14, max_iters=1000))
        assert euler_lagrange_residual(rep.minimizer, CFG, plan) < 1e-12

    def test_random_field_is_not_a_solution(self, small, rng):
        g, plan = small
        u = Field(g, rng.random(g.shape) + 0.1)
        assert euler_lagrange_residual(u, CFG, plan) > 0.1

    def test_zero_field(self, small):
        g, plan = small
        with pytest.raises(ValueError):
            euler_lagrange_residual(Field(g, np.zeros(g.shape)), CFG, plan)
