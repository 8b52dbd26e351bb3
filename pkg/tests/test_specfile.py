import numpy as np
import pytest

from koblab import models
from koblab.geometry import signed_distance
from koblab.specfile import SpecError, domain_from_text, domain_to_text, load_domain, map_from_text

SADDLE = """\
name: saddle
dimension: 2
defining_function: "+ re(2) * -1 abs2(1)"
enclosing_radius: 2
regularity: real-analytic
witness_point: ["0", "-0.5"]
tubular_radius: 0.25
"""


def test_saddle_file_matches_builtin():
    dom = domain_from_text(SADDLE)
    ref = models.saddle()
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(50, 2)) * 0.5 + 1j * rng.normal(size=(50, 2)) * 0.5
    np.testing.assert_allclose(dom.values(Z), ref.values(Z), atol=1e-14)
    assert dom.regularity == "real-analytic" and dom.enclosing_radius == 2
    assert signed_distance(dom, [0, -1e-3]) == pytest.approx(signed_distance(ref, [0, -1e-3]), abs=1e-12)


@pytest.mark.parametrize("dom", [models.saddle(), models.flat_quartic(), models.ball(2)], ids=lambda d: d.name)
def test_round_trip(dom):
    back = domain_from_text(domain_to_text(dom))
    assert back.field.prefix() == dom.field.prefix()
    assert back.name == dom.name and back.dim == dom.dim
    assert back.pseudoconvex_known == dom.pseudoconvex_known
    np.testing.assert_allclose(back.witness_point, dom.witness_point)
    assert domain_to_text(back) == domain_to_text(dom)


def test_bad_token_reports_line_and_column():
    text = SADDLE.replace("abs2(1)", "abz2(1)")
    with pytest.raises(SpecError) as info:
        domain_from_text(text, path="bad.yaml")
    err = info.value
    assert err.line == 3
    # the quote opens at column 20; the bad token is the 14th character inside it
    assert err.column == 20 + 14
    assert "bad.yaml" in str(err) and "line 3" in str(err)


@pytest.mark.parametrize("edit, message", [
    (("enclosing_radius: 2", "enclosing_radius: -1"), "enclosing_radius"),
    (("dimension: 2", "dimension: zero"), "dimension"),
    (("regularity: real-analytic", "regularity: smooth"), "regularity"),
    (('witness_point: ["0", "-0.5"]', 'witness_point: ["0", "0.5"]'), "witness_point"),
    (('defining_function: "+ re(2) * -1 abs2(1)"\n', ""), "defining_function"),
])
def test_validation_errors(edit, message):
    with pytest.raises(SpecError, match=message):
        domain_from_text(SADDLE.replace(*edit))


def test_gradient_bound_too_small():
    with pytest.raises(SpecError, match="gradient_bound"):
        domain_from_text(SADDLE + "gradient_bound: 0.01\n")


def test_invalid_yaml_position():
    with pytest.raises(SpecError) as info:
        domain_from_text("name: x\ndimension: [2\n")
    assert info.value.line is not None


def test_missing_file(tmp_path):
    with pytest.raises(SpecError, match="file not found"):
        load_domain(tmp_path / "nope.yaml")


def test_load_from_disk(tmp_path):
    p = tmp_path / "saddle.yaml"
    p.write_text(SADDLE)
    assert load_domain(p).name == "saddle"


def test_map_file():
    h = map_from_text('name: swap\ndimension: 2\ncomponents: ["z(2)", "* c(0,1) z(1)"]\n')
    np.testing.assert_allclose(h(np.array([1 + 2j, 3j])), [3j, 1j * (1 + 2j)])
    with pytest.raises(SpecError) as info:
        map_from_text('dimension: 2\ncomponents:\n  - "z(1)"\n  - "+ z(1) q"\n')
    assert info.value.line == 4
    with pytest.raises(SpecError, match="z\\(3\\)"):
        map_from_text('dimension: 2\ncomponents: ["z(3)", "z(1)"]\n')


def test_shipped_example_files():
    from pathlib import Path

    from koblab.specfile import load_map

    root = Path(__file__).resolve().parent.parent / "domains"
    assert load_domain(root / "saddle.yaml").field.prefix() == models.saddle().field.prefix()
    assert load_domain(root / "flat4.yaml").pseudoconvex_known
    h = load_map(root / "swap.map.yaml")
    np.testing.assert_array_equal(h(np.array([1, 2j])), [2j, 1])
