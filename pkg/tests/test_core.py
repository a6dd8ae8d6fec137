import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rdch import Field, Grid, GrowthLaw, ModelParams, norm, quadrature

from conftest import random_field


def _finite_fields(n=32):
    return arrays(np.float64, (n,), elements=st.floats(-1e3, 1e3, allow_nan=False))


class TestGrid:
    def test_measure_and_spacing(self):
        g = Grid.interval(2.5, 10)
        assert g.dim == 1
        assert g.measure == 2.5
        assert g.spacings == (0.25,)
        assert np.allclose(g.centers(0)[0], 0.125)

    def test_2d(self):
        g = Grid.rectangle((2.0, 3.0), (8, 6))
        assert g.dim == 2
        assert g.measure == 6.0
        assert g.cell_volume == pytest.approx(0.25 * 0.5)

    @pytest.mark.parametrize("cells", [0, 1, 3])
    def test_too_few_cells(self, cells):
        with pytest.raises(ValueError):
            Grid.interval(1.0, cells)

    def test_bad_extent(self):
        with pytest.raises(ValueError):
            Grid.interval(-1.0, 8)


class TestField:
    def test_shape_mismatch(self, unit_grid):
        with pytest.raises(ValueError):
            Field(unit_grid, np.zeros(5))

    def test_rejects_nan(self, unit_grid):
        vals = np.zeros(unit_grid.shape)
        vals[3] = np.nan
        with pytest.raises(ValueError):
            Field(unit_grid, vals)

    def test_from_function(self, unit_grid):
        f = Field.from_function(unit_grid, lambda x: x**2)
        assert f.values.shape == unit_grid.shape


class TestQuadrature:
    def test_constant_unit_square(self, square_grid):
        assert quadrature(Field.constant(square_grid, 1.0)) == pytest.approx(1.0, abs=0)

    def test_constant_interval(self):
        g = Grid.interval(3.0, 7)
        assert quadrature(Field.constant(g, 2.5)) == pytest.approx(7.5, rel=1e-15)

    def test_affine_exact(self):
        # midpoint rule is exact for affine integrands on symmetric cells
        g = Grid.interval(1.0, 128)
        f = Field.from_function(g, lambda x: x)
        assert quadrature(f) == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(f=_finite_fields(), g=_finite_fields(),
           a=st.floats(-10, 10), b=st.floats(-10, 10))
    def test_linearity(self, f, g, a, b):
        grid = Grid.interval(1.0, 32)
        lhs = quadrature(Field(grid, a * f + b * g))
        rhs = a * quadrature(Field(grid, f)) + b * quadrature(Field(grid, g))
        scale = max(1.0, abs(lhs), abs(rhs))
        assert abs(lhs - rhs) <= 1e-13 * scale

    def test_refinement_second_order(self):
        # exp has mismatched endpoint slopes, so the midpoint error is O(h^2)
        exact = math.e - 1.0
        errs = []
        for n in (64, 128):
            g = Grid.interval(1.0, n)
            errs.append(abs(quadrature(Field.from_function(g, np.exp)) - exact))
        assert 3.5 <= errs[0] / errs[1] <= 4.5


class TestNorms:
    def test_constant_l2(self):
        g = Grid.interval(1.0, 16)
        assert norm(Field.constant(g, 2.0), "L2") == pytest.approx(2.0, rel=1e-14)

    def test_zero(self, unit_grid):
        z = Field.constant(unit_grid, 0.0)
        for kind in ("L1", "L2", "Linf"):
            assert norm(z, kind) == 0.0
        assert norm(z, "Lp", p=3) == 0.0

    def test_l2_against_two_pass_oracle(self, unit_grid, rng):
        f = random_field(unit_grid, rng)
        oracle = math.sqrt(math.fsum(float(v) ** 2 for v in f.values)
                           * unit_grid.cell_volume)
        assert norm(f, "L2") == pytest.approx(oracle, rel=1e-13)

    def test_linf(self, unit_grid, rng):
        f = random_field(unit_grid, rng)
        assert norm(f, "Linf") == np.max(np.abs(f.values))

    def test_lp_requires_exponent(self, unit_grid):
        with pytest.raises(ValueError):
            norm(Field.constant(unit_grid, 1.0), "Lp")
        with pytest.raises(ValueError):
            norm(Field.constant(unit_grid, 1.0), "Lp", p=0.5)

    @settings(max_examples=50, deadline=None)
    @given(f=_finite_fields(), g=_finite_fields())
    def test_hoelder(self, f, g):
        grid = Grid.interval(1.0, 32)
        fg = norm(Field(grid, f * g), "L1")
        bound = norm(Field(grid, f), "L2") * norm(Field(grid, g), "L2")
        assert fg <= bound + 1e-13 * max(1.0, bound)


class TestGrowthLaw:
    def test_zero_law(self):
        G = GrowthLaw.none()
        assert G(0.7) == 0.0
        assert G.sup_abs() == 0.0

    def test_support_and_positivity(self):
        G = GrowthLaw.homeostatic(2.0, 1.5)
        assert G(0.0) > 0.0
        assert G(1.5) == 0.0
        assert G(-1.5) == 0.0
        assert G(2.0) == 0.0
        assert G(-7.0) == 0.0

    def test_continuity_at_support_edge(self):
        G = GrowthLaw.homeostatic(1.0, 1.0)
        eps = 1e-8
        assert abs(G(1.0 - eps)) < 1e-6
        assert abs(G(-1.0 + eps)) < 1e-6

    def test_sup_abs_matches_dense_sampling(self):
        G = GrowthLaw.homeostatic(1.7, 0.8)
        mu = np.linspace(-0.8, 0.8, 400001)
        assert G.sup_abs() == pytest.approx(np.max(np.abs(G(mu))), rel=1e-8)

    def test_weighted_sup_finite(self):
        G = GrowthLaw.homeostatic(3.0, 2.0)
        mu = np.linspace(-10, 10, 100001)
        weighted = (1.0 + np.abs(mu)) * np.abs(G(mu))
        assert np.all(np.isfinite(weighted))
        assert np.max(weighted) < math.inf

    def test_vectorized(self):
        G = GrowthLaw.homeostatic(1.0, 1.0)
        out = G(np.array([-2.0, 0.0, 2.0]))
        assert out.shape == (3,)
        assert out[0] == out[2] == 0.0


class TestModelParams:
    def test_defaults_valid(self):
        p = ModelParams()
        assert p.is_relaxed

    def test_degenerate_limit(self):
        assert not ModelParams(sigma=0.0).is_relaxed

    @pytest.mark.parametrize("kwargs", [
        {"sigma": -1.0},
        {"delta": 0.0},
        {"gamma": 1.0},
        {"eps_mobility": 1.0},
        {"eps_mobility": -0.1},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            ModelParams(**kwargs)
