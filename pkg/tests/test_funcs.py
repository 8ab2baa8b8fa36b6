import json
import math

import numpy as np
import pytest

from hardylab.funcs import (
    Bump,
    BumpMixture,
    DilatedFunction,
    PowerInside,
    PowerOutside,
    ProductPoint,
    RadialProduct,
    RadializedFunction,
    UnsupportedFamilyError,
    closed_lp_norm_power,
    evaluate,
    parse_test_function,
    radialize,
    random_bump_mixture,
)
from hardylab.hgroup import HPoint, ProductSpec, koranyi_norm
from hardylab.measure import lp_norm

SPEC1 = ProductSpec.of_orders(1)
SPEC2 = ProductSpec.of_orders(1, 1)


def point_at(spec, *radii):
    return ProductPoint.from_radii(spec, radii)


class TestEvaluate:
    def test_indicator(self):
        f = PowerInside(SPEC1, (0.0,))
        assert evaluate(f, point_at(SPEC1, 0.5)) == 1.0
        assert evaluate(f, point_at(SPEC1, 1.5)) == 0.0

    def test_inside_power_value(self):
        f = PowerInside(SPEC1, (-1.9,))
        assert evaluate(f, point_at(SPEC1, 0.5)) == pytest.approx(0.5**-1.9, rel=1e-13)

    def test_outside_power_support(self):
        f = PowerOutside(SPEC1, (3.0,))
        assert evaluate(f, point_at(SPEC1, 0.5)) == 0.0
        assert evaluate(f, point_at(SPEC1, 2.0)) == pytest.approx(2.0**-3, rel=1e-13)

    def test_product_structure(self):
        f = PowerInside(SPEC2, (-1.0, -0.5))
        x = point_at(SPEC2, 0.5, 0.25)
        assert evaluate(f, x) == pytest.approx(0.5**-1 * 0.25**-0.5, rel=1e-13)
        # one factor outside kills the product
        assert evaluate(f, point_at(SPEC2, 0.5, 1.25)) == 0.0

    def test_bump_at_center(self):
        c = HPoint.of(0.3, -0.2, 0.1)
        f = BumpMixture(SPEC1, (Bump((c.coords,), (0.7,), 2.0),))
        x = ProductPoint.of(c)
        assert evaluate(f, x) == pytest.approx(2.0 * math.exp(-1.0), rel=1e-13)
        far = point_at(SPEC1, 3.0)
        assert evaluate(f, far) == 0.0

    def test_power_homogeneity(self):
        f = PowerInside(SPEC2, (-1.2, -0.3))
        lam = (0.5, 0.7)
        x = point_at(SPEC2, 0.6, 0.9)
        scaled = ProductPoint.from_radii(SPEC2, [l * r for l, r in zip(lam, x.radii)])
        want = evaluate(f, x) * lam[0] ** -1.2 * lam[1] ** -0.3
        assert evaluate(f, scaled) == pytest.approx(want, rel=1e-12)

    def test_spec_mismatch(self):
        f = PowerInside(SPEC1, (0.0,))
        with pytest.raises(ValueError):
            evaluate(f, point_at(SPEC2, 0.5, 0.5))


class TestClosedNorms:
    def test_extremal_inside(self):
        f = PowerInside.extremal(SPEC2, 2.0, 0.1)
        assert closed_lp_norm_power(f, SPEC2, 2.0) ** 2 == pytest.approx(100 * math.pi**4, rel=1e-13)

    def test_extremal_outside(self):
        f = PowerOutside.extremal(SPEC2, 2.0, 0.1)
        assert closed_lp_norm_power(f, SPEC2, 2.0) ** 2 == pytest.approx(100 * math.pi**4, rel=1e-13)

    def test_indicator_is_volume(self):
        f = PowerInside(SPEC1, (0.0,))
        assert closed_lp_norm_power(f, SPEC1, 2.0) ** 2 == pytest.approx(math.pi**2 / 2, rel=1e-14)

    def test_infinite_norm_rejected(self):
        f = PowerInside(SPEC1, (-2.5,))  # alpha*p + Q = -1 < 0
        with pytest.raises(ValueError, match="norm infinite"):
            closed_lp_norm_power(f, SPEC1, 2.0)
        g = PowerOutside(SPEC1, (1.5,))  # beta*p - Q = -1 < 0
        with pytest.raises(ValueError, match="norm infinite"):
            closed_lp_norm_power(g, SPEC1, 2.0)

    def test_unsupported_family(self):
        f = RadialProduct(SPEC1, (lambda r: r,), ((0.0, 1.0),))
        with pytest.raises(UnsupportedFamilyError):
            closed_lp_norm_power(f, SPEC1, 2.0)

    def test_agreement_with_quadrature_and_mc(self):
        f = PowerInside(SPEC1, (-1.3,))
        want = closed_lp_norm_power(f, SPEC1, 2.5)
        rad = lp_norm(f, SPEC1, 2.5, "radial")
        assert rad.value == pytest.approx(want, rel=1e-8)
        mc = lp_norm(f, SPEC1, 2.5, "mc", samples=60_000, seed=3)
        assert mc.within(want, sigmas=3.0)


class TestRadialize:
    def test_fixes_radial_functions(self):
        f = RadialProduct(SPEC1, (lambda r: r,), ((0.0, math.inf),))
        x = point_at(SPEC1, 0.7)
        est = radialize(f, x, samples=5_000, seed=1)
        assert est.within(0.7, sigmas=3.0, atol=1e-12)

    def test_kills_odd_parts(self):
        def f(pts):
            X = pts[0]
            return 1.0 + X[:, 0] * np.cos(koranyi_norm(X))

        est = radialize(f, point_at(SPEC1, 0.9), samples=60_000, seed=2)
        assert est.within(1.0, sigmas=3.0)

    def test_radialized_function_is_deterministic(self):
        f = random_bump_mixture(SPEC1, np.random.default_rng(5))
        gf = RadializedFunction(f, inner_samples=16, seed=9)
        pts = [np.random.default_rng(0).normal(size=(64, 3))]
        a = gf([p.copy() for p in pts])
        b = gf([p.copy() for p in pts])
        assert np.array_equal(a, b)

    def test_product_space_radialization(self):
        f = RadialProduct(SPEC2, (lambda r: r, lambda r: r**2), ((0.0, math.inf),) * 2)
        x = point_at(SPEC2, 0.5, 2.0)
        est = radialize(f, x, samples=4_000, seed=3)
        assert est.within(0.5 * 4.0, sigmas=3.0, atol=1e-10)


class TestDilatedFunction:
    def test_support_scaling(self):
        f = PowerInside(SPEC1, (0.0,))
        g = DilatedFunction(f, (2.0,))
        assert g.support_radii() == (0.5,)
        assert evaluate(g, point_at(SPEC1, 0.4)) == 1.0
        assert evaluate(g, point_at(SPEC1, 0.6)) == 0.0


class TestParsing:
    def test_power_forms(self):
        f = parse_test_function("power-inside:-1.9,-1.9", SPEC2)
        assert isinstance(f, PowerInside) and f.alphas == (-1.9, -1.9)
        g = parse_test_function("power-outside:2.1,2.1", SPEC2)
        assert isinstance(g, PowerOutside) and g.betas == (2.1, 2.1)

    def test_bumps_file(self, tmp_path):
        data = [
            {"centers": [[0.1, 0.0, 0.0]], "radii": [0.5], "coefficient": 0.7},
            {"centers": [[0.0, 0.2, 0.0]], "radii": [0.3], "coefficient": 0.2},
        ]
        path = tmp_path / "bumps.json"
        path.write_text(json.dumps(data))
        f = parse_test_function(f"bumps:{path}", SPEC1)
        assert isinstance(f, BumpMixture) and len(f.bumps) == 2
        assert f.bumps[0].coefficient == 0.7

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            parse_test_function("wavelet:3", SPEC1)

    def test_bump_radii_validation(self):
        with pytest.raises(ValueError):
            Bump((np.zeros(3),), (0.0,), 1.0)


class TestRandomMixtures:
    def test_generator_ranges(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            f = random_bump_mixture(SPEC2, rng)
            assert 1 <= len(f.bumps) <= 5
            for b in f.bumps:
                assert all(0.1 <= r <= 1.0 for r in b.radii)
                assert 0.1 <= b.coefficient <= 1.0
                assert all(koranyi_norm(c) < 2.0 for c in b.centers)

    def test_support_bound_holds(self):
        rng = np.random.default_rng(12)
        f = random_bump_mixture(SPEC1, rng)
        S = f.support_radii()[0]
        pts = [np.random.default_rng(1).normal(scale=3.0, size=(5_000, 3))]
        vals = f(pts)
        outside = koranyi_norm(pts[0]) > S
        assert np.all(vals[outside] == 0.0)
