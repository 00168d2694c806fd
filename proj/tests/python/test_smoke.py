import math
from fractions import Fraction

import pytest

coalweb = pytest.importorskip("coalweb")


def test_laws():
    law = coalweb.lazy_uniform_law()
    assert law.variance == pytest.approx(2 / 3)
    assert law.support() == {-1: Fraction(1, 3), 0: Fraction(1, 3), 1: Fraction(1, 3)}
    assert coalweb.parse_law(law.text) == law
    with pytest.raises(coalweb.InvalidArgument):
        coalweb.parse_law("-1:0.5,1:0.4")


def test_exact_occupancy():
    single, pair = coalweb.enumerate_exact(coalweb.lazy_uniform_law(), 5, 1)
    assert single == [Fraction(19, 27)] * 5
    assert pair[1][3] <= single[1] * single[3]


def test_overshoot_limit_sums_to_one():
    limit = coalweb.overshoot_limit(coalweb.two_step_law())
    assert sum(limit) == pytest.approx(1.0)
    z = coalweb.ladder_pmf(coalweb.two_step_law())
    assert limit[0] == pytest.approx(1 / (z[0] + 2 * z[1]))


def test_density_guard():
    with pytest.raises(coalweb.GuardViolation):
        coalweb.density(coalweb.lazy_uniform_law(), 2500, 300, 1, 1)
    p, se = coalweb.density(coalweb.lazy_uniform_law(), 1, 5, 2000, 3)
    assert abs(p - 19 / 27) < 4 * se


def test_paths_and_maps():
    a = coalweb.Path("step", [(0.0, 0.0)], 0.0)
    b = coalweb.Path("step", [(0.0, 1.0)], 0.0)
    d, err = coalweb.path_distance(a, b)
    assert d == pytest.approx(math.tanh(1.0))
    h, _ = coalweb.hausdorff([a], [a, b])
    assert h == pytest.approx(math.tanh(1.0))
    p0 = coalweb.Path("interpolated", [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)])
    p1 = coalweb.Path("interpolated", [(0, 1), (1, -1), (2, 1), (3, 0), (4, 2)])
    _, reps, log = coalweb.coalesce([p0, p1], "g")
    assert reps == [0, 0]
    assert log[0][0] == pytest.approx(0.5)
    _, _, flog = coalweb.coalesce([p0, p1], "f")
    assert flog[0][0] == 3.0


def test_voter():
    samples, alpha = coalweb.interface_trace(coalweb.two_step_law(), 10.0, [0.0, 10.0], 4)
    assert samples[0] == (0.0, 1, 0)
    t, l, r = samples[-1]
    assert len(alpha) == r - l + 1
    assert coalweb.dual_check(coalweb.lazy_uniform_law(), "discrete", 0, [1, 0, 1, 1, 0, 0], 3.0, 5,
                              [(2, 3.0), (4, 1.0)])


def test_experiment_report():
    report = coalweb.run_experiment("etahat", 1, "--trials", "20", "--delta", "0.1")
    assert report["config"]["seed"] == 1
    names = {c["name"] for c in report["cells"]}
    assert "etahat" in names
    assert coalweb.etahat_reference(0, 1, 1) == pytest.approx(1 / math.sqrt(math.pi))
    code, out, _ = coalweb.cli_main(["oracle", "--law", "-1:1/3,0:1/3,1:1/3", "--width", "5", "--t", "1"])
    assert code == 0 and "19/27" in out
