import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from koblab.expr import (
    ParseError,
    ScalarField,
    SegmentDistance,
    SingularLocusError,
    interleave,
    deinterleave,
    parse_field,
)

EXPRESSIONS = [
    "+ re(2) * -1 abs2(1)",
    "+ re(2) ^ abs2(1) 2",
    "+ + abs2(1) abs2(2) const(-1)",
    "+ re(2) * -1 + absp(1,2) * norm absp(2,1)",
    "+ im(1,2) re(1,1)",
    "seg(1,-1.0+0j,0.0+0j)",
]


@pytest.mark.parametrize("text", EXPRESSIONS)
def test_prefix_round_trip(text):
    dim = 1 if text.startswith("seg") else 2
    f = parse_field(text, dim)
    g = parse_field(f.prefix(), dim)
    rng = np.random.default_rng(0)
    z = rng.normal(size=(16, dim)) + 1j * rng.normal(size=(16, dim))
    np.testing.assert_allclose(f(z), g(z), rtol=0, atol=1e-14)


def test_direct_substitution():
    f = parse_field("+ re(2) * -1 abs2(1)", 2)
    assert f(np.array([0, 0], dtype=complex)) == 0.0
    assert f(np.array([1, 0], dtype=complex)) == -1.0
    ball = parse_field("+ + abs2(1) abs2(2) const(-1)", 2)
    assert ball(np.array([0.6, 0.8j])) == pytest.approx(0.0, abs=1e-15)


def test_unknown_token_reports_column():
    with pytest.raises(ParseError) as exc:
        parse_field("+ re(2) abz2(1)", 2)
    assert exc.value.column == 9
    assert "abz2" in str(exc.value)


@pytest.mark.parametrize("text", ["+ re(2)", "* abs2(1) abs2(2) abs2(1)", "^ abs2(1) 1.5", "absp(1,0.5)"])
def test_malformed_expressions_rejected(text):
    with pytest.raises((ParseError, ValueError)):
        parse_field(text, 2)


def test_dimension_mismatch():
    f = parse_field("re(2)", 2)
    with pytest.raises(ValueError):
        f(np.zeros(3, dtype=complex))


def test_odd_modulus_power_flags_singular_locus():
    f = parse_field("absp(1,1)", 1)
    jet = f.jet(np.array([0j]))
    assert jet.sing[0]
    assert not f.jet(np.array([0.5 + 0j])).sing[0]


def test_segment_distance_has_no_derivatives():
    f = ScalarField(SegmentDistance(1, -1.0, 0.0), 1)
    assert f(np.array([0.5 + 0j])) == pytest.approx(-0.5)
    with pytest.raises(SingularLocusError):
        f.jet(np.array([0.5 + 0j]))


def test_interleave_round_trip():
    z = np.array([1 + 2j, -3 + 0.5j])
    np.testing.assert_array_equal(interleave(z), [1, 2, -3, 0.5])
    np.testing.assert_array_equal(deinterleave(interleave(z)), z)


coords = st.floats(-1.5, 1.5, allow_nan=False)


@given(st.lists(coords, min_size=4, max_size=4), st.sampled_from(EXPRESSIONS[:5]))
def test_jet_matches_central_differences(xs, text):
    f = parse_field(text, 2)
    z = deinterleave(np.array(xs))
    jet = f.jet(z)
    if jet.sing[0]:
        return
    x0 = np.array(xs, dtype=float)
    h1, h2 = 1e-5, 1e-4
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1
        fd = (f(deinterleave(x0 + h1 * e)) - f(deinterleave(x0 - h1 * e))) / (2 * h1)
        assert jet.g[0][k] == pytest.approx(fd, rel=1e-5, abs=1e-6)
        gp = f.jet(deinterleave(x0 + h2 * e)).g[0]
        gm = f.jet(deinterleave(x0 - h2 * e)).g[0]
        np.testing.assert_allclose(jet.H[0][:, k], (gp - gm) / (2 * h2), rtol=1e-5, atol=1e-5)
