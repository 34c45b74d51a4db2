import math
from fractions import Fraction as F

import numpy as np
import pytest

from cusplab.model import ComponentPotential, PotentialSpec, parse_spec
from cusplab.transverse import kernel_dimension, mode_spectrum, spectral_zeta
from oracles import circle_fd_modes, hurwitz_zeta_circle, torus_enumeration

CIRCLE = """
n = 2
p = 1
x0 = 1/10

[end.cusp]
kind = circle
length = 1
"""

TORUS = """
n = 3
p = 1
x0 = 1/10

[end.t]
kind = torus
gram = [[1, 0], [0, 1]]
flux = 1/2, 0
"""


def entries_as_multiset(ms):
    return [(mu, mult) for mu, mult, _ in ms.entries]


def test_circle_integer_flux_modes():
    spec, _ = parse_spec(CIRCLE)
    ms = mode_spectrum(spec.ends[0], (F(0),), 10.0)
    assert entries_as_multiset(ms) == [(0.0, 1), (1.0, 2), (4.0, 2), (9.0, 2)]


def test_circle_half_flux_vs_fd_oracle():
    spec, _ = parse_spec(CIRCLE)
    ms = mode_spectrum(spec.ends[0], (F(1, 2),), 3.0)
    assert entries_as_multiset(ms) == [(0.25, 2), (2.25, 2)]
    fd = circle_fd_modes(0.5)
    flat = [mu for mu, mult, _ in ms.entries for _ in range(mult)]
    assert np.allclose(flat, fd[:4], atol=1e-6)


def test_torus_modes_vs_enumeration_oracle():
    spec, _ = parse_spec(TORUS)
    ms = mode_spectrum(spec.ends[0], (F(1, 2), F(0)), 1.5)
    assert entries_as_multiset(ms) == [(0.25, 2), (1.25, 4)]
    oracle = torus_enumeration([[1, 0], [0, 1]], (F(1, 2), F(0)), 1.5, box=2)
    assert entries_as_multiset(ms) == [(mu, m) for mu, m in oracle]


def test_completeness_against_ball_oracle():
    spec, _ = parse_spec(TORUS)
    ms = mode_spectrum(spec.ends[0], (F(1, 3), F(2, 5)), 40.0)
    oracle = torus_enumeration([[1, 0], [0, 1]], (F(1, 3), F(2, 5)), 40.0, box=9)
    assert entries_as_multiset(ms) == [(mu, m) for mu, m in oracle]


def test_zero_mode_iff_integral_flux():
    spec, _ = parse_spec(CIRCLE)
    for a, has_zero in [(F(0), True), (F(3), True), (F(1, 2), False), (F(2, 3), False)]:
        ms = mode_spectrum(spec.ends[0], (a,), 5.0)
        assert (ms.entries[0][0] == 0.0) == has_zero


def test_integer_shift_and_reflection_invariance():
    spec, _ = parse_spec(CIRCLE)
    for a in [F(1, 2), F(1, 3), F(2, 5)]:
        base = entries_as_multiset(mode_spectrum(spec.ends[0], (a,), 20.0))
        for m in (-2, 1, 3):
            shifted = entries_as_multiset(mode_spectrum(spec.ends[0], (a + m,), 20.0))
            assert shifted == base
        reflected = entries_as_multiset(mode_spectrum(spec.ends[0], (-a,), 20.0))
        assert reflected == base
    spec_t, _ = parse_spec(TORUS)
    a = (F(1, 3), F(2, 5))
    base = entries_as_multiset(mode_spectrum(spec_t.ends[0], a, 8.0))
    shifted = entries_as_multiset(
        mode_spectrum(spec_t.ends[0], (a[0] + 2, a[1] - 1), 8.0))
    assert shifted == base
    reflected = entries_as_multiset(
        mode_spectrum(spec_t.ends[0], (-a[0], -a[1]), 8.0))
    assert reflected == base


def test_weyl_on_cross_section():
    # counting law on M: #{mu <= m}/m^{(n-1)/2} -> Vol(M) vol(B_{n-1})/(2 pi)^{n-1}
    spec, _ = parse_spec(CIRCLE)
    ms = mode_spectrum(spec.ends[0], (F(1, 2),), 1e4)
    count = ms.total_multiplicity()
    target = 2.0 * math.pi * 2.0 / (2.0 * math.pi)  # Vol(S^1) * vol(B_1)/(2pi)
    assert abs(count / 1e2 - target) / target < 0.05
    spec_t, _ = parse_spec(TORUS)
    ms = mode_spectrum(spec_t.ends[0], (F(1, 2), F(0)), 1e4)
    target = (2.0 * math.pi) ** 2 * math.pi / (2.0 * math.pi) ** 2  # Vol(T^2) vol(B_2)/(2pi)^2
    assert abs(ms.total_multiplicity() / 1e4 - target) / target < 0.05


def test_kernel_dimension_examples():
    spec, _ = parse_spec(CIRCLE + """
[end.second]
kind = circle
length = 1
""")

    def pot(f1, f2):
        return PotentialSpec(components=(
            ComponentPotential((F(0),), (F(f1),)),
            ComponentPotential((F(0),), (F(f2),))))

    assert kernel_dimension(spec, pot(1, F(1, 2))) == 1
    assert kernel_dimension(spec, pot(2, -3)) == 2
    assert kernel_dimension(spec, pot(F(1, 3), F(1, 2))) == 0


def test_spectral_zeta_hurwitz_oracle():
    spec, _ = parse_spec(CIRCLE)
    val = spectral_zeta(spec.ends[0], (F(1, 2),), 2.0, 1e-8)
    assert abs(val - math.pi ** 4 / 3.0) < 1e-8
    assert abs(val - hurwitz_zeta_circle(2.0, F(1, 2))) < 1e-8
    val0 = spectral_zeta(spec.ends[0], (F(0),), 2.0, 1e-8)
    assert abs(val0 - math.pi ** 4 / 45.0) < 1e-8
    assert abs(val0 - 2.0 * sum(1.0 / k ** 4 for k in range(1, 4000))) < 1e-8


def test_spectral_zeta_divergence_error():
    spec, _ = parse_spec(CIRCLE)
    with pytest.raises(ValueError, match="divergent"):
        spectral_zeta(spec.ends[0], (F(1, 2),), 0.25, 1e-6)
    with pytest.raises(ValueError, match="divergent"):
        spectral_zeta(spec.ends[0], (F(0),), -1.0, 1e-6)


def test_spectral_zeta_matches_direct_summation():
    spec, _ = parse_spec(CIRCLE)
    for a, s, tol in [(F(1, 2), 2.0, 1e-6), (F(1, 3), 1.5, 1e-4)]:
        val = spectral_zeta(spec.ends[0], (a,), s, tol)
        direct = math.fsum(abs(float(k) + float(a)) ** (-2 * s)
                           for k in range(-300000, 300000))
        assert abs(val - direct) < 2 * tol
    spec_t, _ = parse_spec(TORUS)
    val = spectral_zeta(spec_t.ends[0], (F(1, 2), F(0)), 2.0, 1e-3)
    direct = 0.0
    for k1 in range(-400, 401):
        for k2 in range(-400, 401):
            mu = (k1 + 0.5) ** 2 + k2 ** 2
            if mu > 0:
                direct += mu ** (-2.0)
    assert abs(val - direct) < 2e-3


def test_spectral_zeta_torus_abscissa():
    spec_t, _ = parse_spec(TORUS)
    with pytest.raises(ValueError, match="divergent"):
        spectral_zeta(spec_t.ends[0], (F(1, 2), F(0)), 1.0, 1e-4)
