import math

import numpy as np
import pytest

from hslab import (
    DecayWarning,
    Field,
    FieldFormatError,
    gaussian,
    l2_norm,
    load_field,
    lp_norm,
    make_exponents,
    make_grid,
    radial_profile,
    save_field,
    sd_rearrangement,
    singular_weight,
    weighted_q_norm,
)
from hslab.core import boundary_ratio, check_decay


class TestExponents:
    def test_critical_case(self):
        cfg = make_exponents(1, 0.25, 4, allow_critical=True)
        assert cfg.beta == 0.0
        assert cfg.q_crit == 4.0
        assert cfg.critical

    def test_subcritical_beta(self):
        cfg = make_exponents(1, 0.3, 3)
        assert cfg.beta == pytest.approx(1 / 3 - 0.5 + 0.3, rel=1e-12)
        assert cfg.q_crit == pytest.approx(5.0)

    @pytest.mark.parametrize("n,s,q", [(1, 0.6, 3), (1, 0.5, 3), (1, 0.0, 3), (2, 1.0, 3), (3, -0.1, 3)])
    def test_bad_order(self, n, s, q):
        with pytest.raises(ValueError, match="s="):
            make_exponents(n, s, q)

    def test_q_too_small(self):
        with pytest.raises(ValueError, match="q > 2"):
            make_exponents(1, 0.3, 2.0)

    def test_q_above_critical(self):
        with pytest.raises(ValueError, match="2\\*_s"):
            make_exponents(1, 0.3, 6.0)

    def test_critical_needs_flag(self):
        with pytest.raises(ValueError, match="allow_critical"):
            make_exponents(1, 0.25, 4)

    @pytest.mark.parametrize("n", [0, 4, 1.5, True])
    def test_bad_dimension(self, n):
        with pytest.raises(ValueError):
            make_exponents(n, 0.2, 3)

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            make_exponents(1, float("nan"), 3)

    def test_relation_holds_everywhere(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 4))
            s = rng.uniform(0.01, n / 2 - 0.01)
            qc = 2 * n / (n - 2 * s)
            q = rng.uniform(2 + 1e-6, qc - 1e-6)
            cfg = make_exponents(n, s, q)
            assert abs(cfg.beta - (n / q - n / 2 + s)) <= 1e-12
            assert 0 <= cfg.beta < s
            assert cfg.weight_power < n


class TestGrid:
    def test_cell_centered(self):
        g = make_grid(1, 8, 2.0)
        assert g.spacing == 0.5
        np.testing.assert_allclose(g.axis, -2 + (np.arange(8) + 0.5) * 0.5)
        assert g.radius.min() == pytest.approx(0.25)

    @pytest.mark.parametrize("ndim", [1, 2, 3])
    def test_measure(self, ndim):
        g = make_grid(ndim, 8, 3.0)
        assert g.cell_volume * g.size == pytest.approx(6.0 ** ndim)
        assert np.all(g.radius >= g.spacing / 2)

    @pytest.mark.parametrize("n_cells", [0, 3, 100, 1.5])
    def test_power_of_two(self, n_cells):
        with pytest.raises(ValueError):
            make_grid(1, n_cells, 1.0)

    def test_bad_width(self):
        with pytest.raises(ValueError):
            make_grid(1, 8, -1.0)

    def test_radius_matches_coordinates(self):
        g = make_grid(2, 16, 3.0)
        x, y = g.mesh()
        np.testing.assert_allclose(g.radius, np.hypot(x, y), rtol=1e-14)


class TestField:
    def test_values_read_only_and_copied(self):
        g = make_grid(1, 8, 1.0)
        raw = np.arange(8.0)
        f = Field(g, raw)
        raw[0] = 99
        assert f.values[0] == 0
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_rejects_nonfinite(self):
        g = make_grid(1, 4, 1.0)
        with pytest.raises(ValueError):
            Field(g, [0, 1, np.nan, 2])

    def test_rejects_wrong_size(self):
        with pytest.raises(ValueError):
            Field(make_grid(1, 4, 1.0), [1, 2, 3])


class TestNorms:
    def test_zero_field(self):
        g = make_grid(1, 64, 5.0)
        cfg = make_exponents(1, 0.3, 3)
        z = Field(g, np.zeros(g.shape))
        assert weighted_q_norm(z, cfg) == 0.0
        assert l2_norm(z) == 0.0

    @pytest.mark.parametrize("ndim", [1, 2, 3])
    def test_indicator_of_box(self, ndim):
        g = make_grid(ndim, 16, 2.5)
        cfg = make_exponents(ndim, 0.4 * ndim / 2, 2 * ndim / (ndim - 0.8 * ndim / 2), allow_critical=True)
        one = Field(g, np.ones(g.shape))
        assert cfg.beta == 0.0
        assert weighted_q_norm(one, cfg) == pytest.approx((5.0 ** ndim) ** (1 / cfg.q), rel=1e-13)
        assert l2_norm(one) == pytest.approx(5.0 ** (ndim / 2), rel=1e-13)

    def test_weighted_indicator_closed_form(self):
        cfg = make_exponents(1, 0.3, 3)
        g = make_grid(1, 1 << 16, 4.0)
        u = Field(g, (np.abs(g.axis) <= 1.0).astype(float))
        exact = (2 / 0.6) ** (1 / 3)
        assert exact == pytest.approx(1.4938, abs=1e-4)
        assert weighted_q_norm(u, cfg) == pytest.approx(exact, rel=1e-4)

    def test_weighted_norm_converges(self):
        cfg = make_exponents(1, 0.3, 3)
        exact = (2 / 0.6) ** (1 / 3)
        errs = []
        for N in (1 << 10, 1 << 12, 1 << 14):
            g = make_grid(1, N, 4.0)
            u = Field(g, (np.abs(g.axis) <= 1.0).astype(float))
            errs.append(abs(weighted_q_norm(u, cfg) - exact))
        assert errs[0] > errs[1] > errs[2]

    def test_beta_zero_is_plain_q_norm(self, rng):
        cfg = make_exponents(1, 0.25, 4, allow_critical=True)
        g = make_grid(1, 128, 3.0)
        for _ in range(50):
            u = Field(g, rng.normal(size=g.shape))
            assert weighted_q_norm(u, cfg) == pytest.approx(lp_norm(u, 4), rel=1e-13)

    def test_homogeneity(self, rng):
        cfg = make_exponents(2, 0.5, 3)
        g = make_grid(2, 32, 3.0)
        u = Field(g, rng.normal(size=g.shape))
        for lam in (-3.5, 0.01, 7.0):
            assert weighted_q_norm(lam * u, cfg) == pytest.approx(abs(lam) * weighted_q_norm(u, cfg), rel=1e-13)

    def test_l2_matches_summation(self, rng):
        g = make_grid(2, 32, 3.0)
        v = rng.normal(size=g.shape)
        ref = math.sqrt(math.fsum(x * x for x in v.ravel()) * g.cell_volume)
        assert l2_norm(Field(g, v)) == pytest.approx(ref, rel=1e-13)

    def test_dimension_mismatch(self):
        cfg = make_exponents(2, 0.5, 3)
        with pytest.raises(ValueError):
            weighted_q_norm(Field(make_grid(1, 8, 1.0), np.ones(8)), cfg)

    def test_singular_weight_near_origin_is_cell_average(self):
        g = make_grid(1, 64, 4.0)
        w = singular_weight(g, 0.4)
        h = g.spacing
        i = 32  # first cell right of the origin, [0, h]
        exact = (h ** 0.6 / 0.6) / h
        midpoints = (np.arange(16) + 0.5) / 16 * h
        assert w[i] == pytest.approx(np.mean(midpoints ** -0.4), rel=1e-14)
        # sub-cell averaging is much closer to the true cell mean than the center value
        assert abs(w[i] - exact) < 0.3 * abs((h / 2) ** -0.4 - exact)
        far = 60
        assert w[far] == pytest.approx(abs(g.axis[far]) ** -0.4, rel=1e-15)


class TestRadialProfile:
    def test_constant(self):
        g = make_grid(2, 32, 4.0)
        p = radial_profile(Field(g, np.full(g.shape, 2.5)))
        np.testing.assert_allclose(p.bin_means[p.nonempty], 2.5)
        assert p.bin_counts.sum() == g.size

    @pytest.mark.parametrize("ndim", [1, 2, 3])
    def test_radius_increasing(self, ndim):
        g = make_grid(ndim, 16, 4.0)
        p = radial_profile(Field(g, g.radius))
        assert np.all(np.diff(p.bin_means[p.nonempty]) > 0)

    def test_brute_force(self, rng):
        g = make_grid(2, 32, 4.0)
        u = Field(g, rng.normal(size=g.shape))
        p = radial_profile(u)
        r = np.hypot(*g.mesh())
        for k in range(len(p.bin_means)):
            sel = (r >= k * g.spacing) & (r < (k + 1) * g.spacing)
            assert sel.sum() == p.bin_counts[k]
            if sel.any():
                assert p.bin_means[k] == pytest.approx(u.values[sel].mean(), rel=1e-12)

    def test_rearranged_fields_have_nonincreasing_profile(self, rng):
        for ndim in (1, 2, 3):
            g = make_grid(ndim, 16, 2.0)
            f = sd_rearrangement(Field(g, rng.random(g.shape)))
            m = radial_profile(f).bin_means
            m = m[~np.isnan(m)]
            assert np.all(np.diff(m) <= 0)


class TestDecay:
    def test_gaussian_decays(self):
        g = make_grid(1, 256, 10.0)
        assert check_decay(gaussian(g, 1.0))

    def test_warns_on_slow_decay(self):
        g = make_grid(1, 256, 10.0)
        u = Field(g, 1 / (1 + g.axis ** 2) ** 0.1)
        assert boundary_ratio(u) > 1e-3
        with pytest.warns(DecayWarning):
            assert not check_decay(u)


class TestFieldFiles:
    @pytest.mark.parametrize("ndim", [1, 2, 3])
    def test_round_trip(self, tmp_path, rng, ndim):
        g = make_grid(ndim, 8, 1.7)
        u = Field(g, rng.normal(size=g.shape) * 10.0 ** rng.integers(-300, 300, size=g.shape))
        p = tmp_path / "u.field"
        save_field(u, p)
        v = load_field(p)
        assert v.grid == g
        assert np.array_equal(u.values, v.values)

    def test_format(self, tmp_path):
        g = make_grid(2, 2, 1.0)
        save_field(Field(g, [[1, 2], [3, 4]]), tmp_path / "u.field")
        lines = (tmp_path / "u.field").read_text().splitlines()
        assert lines == ["2 2 1.0", "1.0", "2.0", "3.0", "4.0"]

    def test_wrong_count(self, tmp_path):
        p = tmp_path / "u.field"
        p.write_text("1 4 1.0\n1\n2\n3\n")
        with pytest.raises(FieldFormatError, match="expected 4"):
            load_field(p)

    def test_nan_token(self, tmp_path):
        p = tmp_path / "u.field"
        p.write_text("1 2 1.0\n1.0\nnan\n")
        with pytest.raises(FieldFormatError):
            load_field(p)

    @pytest.mark.parametrize("header", ["", "1 4", "1 3 1.0", "x 4 1.0", "1 4 -1"])
    def test_bad_header(self, tmp_path, header):
        p = tmp_path / "u.field"
        p.write_text(header + "\n1\n2\n3\n")
        with pytest.raises(FieldFormatError):
            load_field(p)

    def test_garbage_token(self, tmp_path):
        p = tmp_path / "u.field"
        p.write_text("1 2 1.0\n1.0\nabc\n")
        with pytest.raises(FieldFormatError):
            load_field(p)
