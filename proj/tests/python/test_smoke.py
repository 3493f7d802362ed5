import math

import pytest

import oscint


def test_flop_formulas():
    assert oscint.flop_cost("trapezoid", 8) == 17
    assert oscint.flop_cost("midpoint", 8) == 25
    assert oscint.flop_cost("simpson", 3) == 16
    assert oscint.nn_flops(5, 3, 7) == 13200
    assert oscint.nn_flops(5, 3, 7, mode="exact") == 211
    assert oscint.memory_bytes(3, 5) == 180


def test_quadrature():
    xs = oscint.make_grid("simpson", 0.0, 1.0, 4)
    assert len(xs) == 5
    assert oscint.integrate_values("simpson", [x**3 for x in xs], 0.25) == pytest.approx(0.25, rel=1e-14)
    assert oscint.integrate("trapezoid", math.exp, 0.0, 1.0, 1024) == pytest.approx(math.e - 1, rel=1e-6)


def test_integrands():
    assert oscint.bessel_j0(0.0) == 1.0
    assert oscint.bessel_j0(1.0) == pytest.approx(0.7651976865579666, abs=1e-12)
    assert oscint.eval("sine", [7.0], 0.3) == math.sin(2.1)
    assert oscint.surrogate_truth("exponential", [1.0]) == pytest.approx(math.e - 1, rel=1e-7)
    with pytest.raises(oscint.OscintError):
        oscint.eval("sine", [7.0], 1.5)


def test_dataset_and_metrics():
    d = oscint.build_dataset("sine", 50, 8, 3)
    assert len(d["truths"]) == 50
    assert len(d["inputs"][0]) == 8
    assert d == oscint.build_dataset("sine", 50, 8, 3)
    assert oscint.normalized_mse(d["truths"], d["truths"]) == 0.0
    assert oscint.alpha(100, 300) == 2.0


def test_rp_solve():
    r = oscint.rp_solve(rho=750.0)
    assert r["R"][0] == 2.6e-6
    assert min(r["R"]) > 0.0
    assert r["radius_integral"] > 0.0


def test_train():
    r = oscint.train("exponential", 300, 8, 1, 4, seed=1, max_epochs=200)
    assert r["epochs"] > 0
    assert math.isfinite(r["test_nmse"])


def test_cli():
    rc, out, err = oscint.cli(["flops", "--memory", "-N", "3", "-L", "5"])
    assert (rc, out) == (0, "180\n")
    rc, out, err = oscint.cli(["frobnicate"])
    assert rc == 1
    assert "frobnicate" in err
