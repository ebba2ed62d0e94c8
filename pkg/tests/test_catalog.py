import json
import pathlib

import numpy as np
import pytest

from tetradlab import catalog
from tetradlab.catalog import SpacetimeSpec, SpecError, UnknownSpacetimeError
from tetradlab.geometry import Frame, sample_points

SPECS = pathlib.Path(__file__).resolve().parent.parent / "specs"


@pytest.mark.parametrize("name", catalog.BUILTIN_NAMES)
def test_json_round_trip_is_exact(name):
    spec = catalog.builtin(name)
    text = spec.to_json()
    again = SpacetimeSpec.from_json(text)
    assert again.to_json() == text
    assert again == spec


@pytest.mark.parametrize("name", catalog.BUILTIN_NAMES)
def test_shipped_spec_files_match_builtins(name):
    spec = SpacetimeSpec.load(SPECS / f"{name}.json")
    assert spec.to_dict() == catalog.builtin(name).to_dict()


@pytest.mark.parametrize("name,count", [
    ("minkowski_cartesian", 10), ("minkowski_spherical", 10), ("schwarzschild", 4),
    ("schwarzschild_isotropic", 4), ("desitter_inner", 10), ("desitter_outer", 10), ("friedmann", 6),
])
def test_candidate_counts(name, count):
    assert len(catalog.builtin(name).killing) == count


def test_candidate_rows():
    assert catalog.builtin("minkowski_cartesian").killing[3]["components"] == ["0", "0", "0", "1"]
    assert catalog.builtin("desitter_inner").killing[6]["components"] == ["sqrt(alpha)", "0", "0", "0"]


def test_unknown_name():
    with pytest.raises(UnknownSpacetimeError, match="nope"):
        catalog.resolve("nope")
    with pytest.raises(UnknownSpacetimeError):
        catalog.builtin("kerr")


def test_parameter_override():
    spec = catalog.builtin("schwarzschild").with_params({"k": 3.0})
    assert spec.parameters["k"] == 3.0
    lo, hi = spec.domain_box()
    assert (lo[1], hi[1]) == (9.0, 30.0)
    with pytest.raises(SpecError, match="unknown parameter"):
        spec.with_params({"q": 1})


def test_friedmann_scale_factor_override():
    spec = catalog.builtin("friedmann", scale_factor="exp(t)")
    assert "ricci_scalar" not in spec.metadata
    fr = Frame(spec, sample_points(spec, 8))
    # de Sitter slicing: R = -12 H^2 with H = 1 in this signature
    assert np.allclose(fr.ricci_scalar(), -12.0, rtol=1e-12)


@pytest.mark.parametrize("bad,msg", [
    ({"coordinates": ["t", "x", "y"]}, "4 distinct"),
    ({"connection": "weitzenbock"}, "connection"),
    ({"coframe": [["1", "0", "0", "0"]] * 3}, "4x4"),
    ({"domain": {"t": [1, 0], "x": [0, 1], "y": [0, 1], "z": [0, 1]}}, "empty domain"),
])
def test_invalid_specs(bad, msg):
    d = catalog.builtin("minkowski_cartesian").to_dict()
    d.update(bad)
    with pytest.raises(SpecError, match=msg):
        SpacetimeSpec.from_dict(d).validate()


def test_bad_expression_in_file(tmp_path):
    d = catalog.builtin("minkowski_cartesian").to_dict()
    d["coframe"][0][0] = "1 + * t"
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    with pytest.raises(Exception) as info:
        catalog.resolve(str(p))
    assert "coframe" in str(info.value) or str(p) in str(info.value)


def test_invalid_json_names_the_file(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(SpecError, match="broken.json"):
        SpacetimeSpec.load(p)


def test_perturbed_minkowski_is_deterministic_and_generic():
    a, b = catalog.perturbed_minkowski(4), catalog.perturbed_minkowski(4)
    assert a.to_json() == b.to_json()
    assert a.to_json() != catalog.perturbed_minkowski(5).to_json()
    fr = Frame(a, sample_points(a, 8))
    assert np.abs(fr.ricci_scalar()).max() > 1e-4
