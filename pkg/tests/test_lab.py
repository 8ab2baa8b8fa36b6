import math

import pytest

from hardylab import closedform as cf
from hardylab import lab
from hardylab.hgroup import ProductSpec
from hardylab.operators import MonomialWeight

SPEC1 = ProductSpec.of_orders(1)
SPEC2 = ProductSpec.of_orders(1, 1)


def verdicts_ok(report):
    assert all(r.verdict in ("PASS", "FAIL", "INFO") for r in report.rows)
    assert all(v in ("PASS", "FAIL", "INFO") for v in report.summary.values())
    for r in report.rows:
        if r.oracle is not None:
            assert r.deviation is not None and r.sigma_multiple is not None


class TestSharpnessSweep:
    def test_closed_m1(self):
        rep = lab.sharpness_sweep(2.0, SPEC1, method="closed", seed=0)
        assert rep.summary["C1:extrapolation-2pct"] == "PASS"
        assert rep.summary["C4:bound-chain"] == "PASS"
        verdicts_ok(rep)
        quot = {r.input: r.estimate for r in rep.rows}
        assert quot["quotient eps=0.1"] == pytest.approx(
            cf.power_family_quotient(0.1, 2.0, SPEC1), rel=1e-14
        )

    def test_closed_m2_extrapolates_to_four(self):
        rep = lab.sharpness_sweep(2.0, SPEC2, method="closed", seed=0)
        assert rep.summary["C2:extrapolation-2pct"] == "PASS"
        ext = [r for r in rep.rows if r.input.startswith("extrapolated")][0]
        assert abs(ext.estimate - 4.0) <= 0.08

    def test_radial_method(self):
        rep = lab.sharpness_sweep(2.0, SPEC1, eps_grid=(0.2, 0.1), method="radial", seed=0)
        assert all(r.verdict != "FAIL" for r in rep.rows)

    def test_reproducible(self):
        a = lab.sharpness_sweep(2.0, SPEC1, eps_grid=(0.2, 0.1), method="mc",
                                samples=20_000, inner_samples=128, seed=5)
        b = lab.sharpness_sweep(2.0, SPEC1, eps_grid=(0.2, 0.1), method="mc",
                                samples=20_000, inner_samples=128, seed=5)
        assert [r.estimate for r in a.rows] == [r.estimate for r in b.rows]

    def test_bad_method(self):
        with pytest.raises(ValueError):
            lab.sharpness_sweep(2.0, SPEC1, method="secret")


class TestBoundFuzz:
    def test_small_run_passes(self):
        rep = lab.bound_fuzz(6, 2.0, SPEC1, samples=30_000, seed=2)
        assert rep.summary["C5:no-quotient-exceeds-bound"] == "PASS"
        verdicts_ok(rep)
        assert any("zero mixture rejected" in r.input for r in rep.rows)
        control = [r for r in rep.rows if r.input.startswith("control: centered")][0]
        assert control.estimate < 2.0

    def test_m2(self):
        rep = lab.bound_fuzz(4, 1.5, SPEC2, samples=30_000, seed=3)
        assert rep.summary["C5:no-quotient-exceeds-bound"] == "PASS"


class TestRadialization:
    def test_m1(self):
        rep = lab.radialization_check(5, 2.0, SPEC1, seed=4)
        assert rep.summary["C6:radialization"] == "PASS"
        verdicts_ok(rep)
        contraction = [r for r in rep.rows if "contraction" in r.input]
        assert contraction and all(r.estimate <= r.oracle * 1.2 for r in contraction)

    def test_m2(self):
        rep = lab.radialization_check(3, 2.0, SPEC2, samples=3_000, seed=5)
        assert rep.summary["C6:radialization"] == "PASS"


class TestDuality:
    def test_indicator_and_pairs(self):
        rep = lab.duality_check(MonomialWeight((4.0,)), 2.0, SPEC1,
                                pairs=4, samples=15_000, seed=6)
        assert rep.summary["C8:duality"] == "PASS"
        assert rep.summary["cesaro-norm-conjecture"] == "INFO"
        quad_rows = [r for r in rep.rows if "quadrature" in r.input]
        for r in quad_rows:
            assert abs(r.deviation) <= 1e-8

    def test_unbounded_dual_exponent_rejected(self):
        import hardylab.operators as ops

        with pytest.raises(ops.UnboundedOperatorError):
            lab.duality_check(MonomialWeight((0.0,)), 2.0, SPEC1, pairs=1, samples=2_000, seed=0)


class TestWeightedSharpness:
    def test_bounded_case(self):
        rep = lab.weighted_sharpness(MonomialWeight((3.0,)), 2.0, SPEC1, seed=7)
        assert rep.summary["C7:weighted-bounds"] == "PASS"
        rows = {r.input: r.estimate for r in rep.rows}
        assert rows["rigorous-bound eps=0.1"] == pytest.approx(0.41281, abs=5e-5)
        assert rows["rigorous-bound eps=0.001"] == pytest.approx(0.49681, abs=5e-5)
        assert rep.params["characteristic"] == 0.5

    def test_product_case(self):
        rep = lab.weighted_sharpness(MonomialWeight((3.0, 3.0)), 2.0, SPEC2, seed=8)
        assert rep.summary["C7:weighted-bounds"] == "PASS"
        assert rep.params["characteristic"] == 0.25

    def test_unbounded_case_is_info(self):
        rep = lab.weighted_sharpness(MonomialWeight((0.0,)), 2.0, SPEC1, seed=9)
        assert rep.summary["C7:unbounded-demonstrated"] == "INFO"
        bounds = [r.estimate for r in rep.rows if r.input.startswith("rigorous-bound")]
        assert bounds[-1] > 100 * bounds[0]


class TestGeometry:
    def test_selftest(self):
        rep = lab.geometry_selftest(seed=10, samples=200_000, triples=20_000)
        assert rep.summary["C9:geometry"] == "PASS"
        verdicts_ok(rep)
        ratios = [r.estimate for r in rep.rows if "alternative normalization" in r.input]
        assert all(abs(v - 0.5) < 0.01 for v in ratios)

    def test_volume_check(self):
        rep = lab.volume_check(1, samples=300_000, seed=42)
        assert rep.summary["C9:volume"] == "PASS"
        assert rep.rows[0].estimate == pytest.approx(math.pi**2 / 2, rel=5e-3)

    def test_volume_reproducible(self):
        a = lab.volume_check(2, samples=100_000, seed=1)
        b = lab.volume_check(2, samples=100_000, seed=1)
        assert a.rows[0].estimate == b.rows[0].estimate
