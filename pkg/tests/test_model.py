import math
from fractions import Fraction as F

import numpy as np
import pytest

from cusplab.model import (ConfigError, Grid, end_volume, parse_spec,
                           radial_coordinate, serialize_spec)
from oracles import invert_radial, quadrature_end_volume

TWO_CUSPS = """
n = 2
p = 1
x0 = 1/10

[end.a]
kind = circle
length = 1
flux = 1/2

[end.b]
kind = circle
length = 2
flux = 0
"""


def test_parse_two_cusp_surface():
    spec, pot = parse_spec(TWO_CUSPS)
    assert spec.n == 2 and spec.p == 1
    assert len(spec.ends) == 2
    assert all(e.kind == "circle" for e in spec.ends)
    assert pot.components[0].flux == (F(1, 2),)
    assert pot.components[1].flux == (F(0),)


def test_parse_serialize_roundtrip():
    spec, pot = parse_spec(TWO_CUSPS)
    text = serialize_spec(spec, pot)
    spec2, pot2 = parse_spec(text)
    assert (spec2, pot2) == (spec, pot)
    assert serialize_spec(spec2, pot2) == text


def test_flux_length_mismatch_rejected():
    bad = TWO_CUSPS.replace("flux = 1/2", "flux = 1/2, 1/3")
    with pytest.raises(ConfigError, match="flux length"):
        parse_spec(bad)


def test_gram_not_positive_definite_rejected():
    bad = """
n = 3
p = 1
x0 = 1/10

[end.t]
kind = torus
gram = [[1, 2], [2, 1]]
"""
    with pytest.raises(ConfigError, match="not positive definite"):
        parse_spec(bad)


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_spec("n = 2\np = 1\nwhat is this\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_spec(TWO_CUSPS + "\nbogus = 1\n")


def test_circle_needs_dimension_two():
    bad = TWO_CUSPS.replace("n = 2", "n = 3")
    with pytest.raises(ConfigError, match="dimension"):
        parse_spec(bad)


def test_end_volume_circle_matches_quadrature():
    spec, _ = parse_spec(TWO_CUSPS)
    v = end_volume(spec, spec.ends[0])
    # n=2, p=1, x0=1/10, circle of length 2 pi
    assert v == pytest.approx(2.0 * math.pi / 10.0, rel=1e-12)
    assert v == pytest.approx(
        quadrature_end_volume(2, 1.0, 0.1, 2.0 * math.pi), rel=1e-6)


def test_end_volume_divergent_for_small_np():
    spec, _ = parse_spec(TWO_CUSPS.replace("p = 1", "p = 1/2"))
    assert math.isinf(end_volume(spec, spec.ends[0]))


def test_end_volume_torus():
    spec, _ = parse_spec("""
n = 3
p = 1
x0 = 1/10

[end.t]
kind = torus
gram = [[1, 0], [0, 1]]
flux = 0, 0
""")
    v = end_volume(spec, spec.ends[0])
    assert v == pytest.approx(4.0 * math.pi ** 2 * (1.0 / 100.0) / 2.0, rel=1e-12)
    assert v == pytest.approx(
        quadrature_end_volume(3, 1.0, 0.1, 4.0 * math.pi ** 2), rel=1e-6)


def test_end_volume_monotone_and_additive():
    spec, pot = parse_spec(TWO_CUSPS)
    bigger, _ = parse_spec(TWO_CUSPS.replace("x0 = 1/10", "x0 = 1/5"))
    for e_small, e_big in zip(spec.ends, bigger.ends):
        assert end_volume(bigger, e_big) > end_volume(spec, e_small)
    total = sum(end_volume(spec, e) for e in spec.ends)
    assert total == pytest.approx(
        end_volume(spec, spec.ends[0]) + end_volume(spec, spec.ends[1]))


def test_radial_coordinate_values():
    spec, _ = parse_spec(TWO_CUSPS.replace("x0 = 1/10", "x0 = 1"))
    x = F(math.exp(-3.0))  # exact dyadic of the float
    assert radial_coordinate(spec, x) == pytest.approx(3.0, abs=1e-12)
    assert radial_coordinate(spec, F(1)) == 0.0
    spec_half, _ = parse_spec(
        TWO_CUSPS.replace("p = 1", "p = 1/2").replace("x0 = 1/10", "x0 = 1"))
    assert radial_coordinate(spec_half, F(1, 4)) == pytest.approx(4.0, rel=1e-14)


def test_radial_coordinate_monotone_and_invertible():
    spec, _ = parse_spec(TWO_CUSPS)
    xs = [F(1, 10), F(1, 20), F(1, 100), F(3, 40)]
    rs = [radial_coordinate(spec, x) for x in xs]
    order = np.argsort([float(x) for x in xs])
    assert all(rs[order[i]] > rs[order[i + 1]] for i in range(len(xs) - 1))
    for x, r in zip(xs, rs):
        assert invert_radial(spec.p, r, 0.1) == pytest.approx(float(x), rel=1e-12)
    spec_half, _ = parse_spec(TWO_CUSPS.replace("p = 1", "p = 1/2"))
    for x in xs:
        r = radial_coordinate(spec_half, x)
        assert invert_radial(spec_half.p, r, 0.1) == pytest.approx(float(x), rel=1e-12)


def test_radial_coordinate_domain_checked():
    spec, _ = parse_spec(TWO_CUSPS)
    with pytest.raises(ValueError):
        radial_coordinate(spec, F(1, 5))  # above x0
    with pytest.raises(ValueError):
        radial_coordinate(spec, F(0))


def test_grid_invariants():
    g = Grid(r0=F(0), r_max=F(10), h=F(1, 100))
    assert g.steps == 1000 and g.n_interior == 999
    with pytest.raises(ValueError):
        Grid(r0=F(0), r_max=F(1), h=F(1, 3))  # non-integer step count
    with pytest.raises(ValueError):
        Grid(r0=F(0), r_max=F(1), h=F(1, 4))  # fewer than 8 steps
    with pytest.raises(ValueError):
        Grid(r0=F(1), r_max=F(1), h=F(1, 16))


def test_defaults_echoed():
    spec, pot = parse_spec("""
n = 2
p = 1
x0 = 1/10

[end.c]
kind = circle
length = 1
""")
    text = serialize_spec(spec, pot)
    assert "flux = 0" in text
    assert "phi0 = 0" in text
    assert "closed = true" in text
    assert "core_volume = 0" in text


def test_incomplete_flag():
    spec, _ = parse_spec(TWO_CUSPS)
    assert spec.complete
    spec2, _ = parse_spec(TWO_CUSPS.replace("p = 1", "p = 3/2"))
    assert not spec2.complete
