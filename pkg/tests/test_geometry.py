"""Frame geometry against independent metric-only sympy oracles."""

import numpy as np
import pytest
import sympy as sp

import oracles
from tetradlab import catalog, suites
from tetradlab.catalog import SpacetimeSpec
from tetradlab.clifford import Multivector
from tetradlab.geometry import Frame, sample_points


@pytest.fixture(scope="module", params=catalog.BUILTIN_NAMES)
def frame(request):
    spec = catalog.builtin(request.param)
    return Frame(spec, sample_points(spec, 24, seed=5))


def test_ricci_scalar_against_coordinate_oracle(frame):
    spec = frame.spec
    R = frame.ricci_scalar()
    want = oracles.numeric(spec, oracles.ricci_scalar(spec))(frame.points)
    assert np.allclose(R, want, rtol=1e-10, atol=1e-10)


def test_metric_matches_oracle(frame):
    g = oracles.metric(frame.spec)
    got = frame.metric().value
    for m in range(4):
        for n in range(4):
            want = oracles.numeric(frame.spec, g[m, n])(frame.points)
            assert np.allclose(got[:, m, n], want, rtol=1e-12, atol=1e-12)


def test_analyze_suite_passes(frame):
    rep = suites.analyze(frame.spec, samples=24, seed=5)
    assert rep.ok, [(c.id, c.residual) for c in rep.failed()]


def test_desitter_ricci_scalar_scales_with_alpha():
    spec = catalog.builtin("desitter_inner").with_params({"alpha": 2.5})
    fr = Frame(spec, sample_points(spec, 16))
    assert np.allclose(fr.ricci_scalar(), -12 * 2.5, rtol=1e-12)


def test_structure_coefficients_antisymmetric(frame):
    c = frame.structure_coefficients.value
    assert np.abs(c + np.swapaxes(c, -1, -2)).max() == 0.0


def test_coordinate_round_trip(frame):
    rng = np.random.default_rng(0)
    A = Multivector(rng.normal(size=(frame.n, 16)))
    back = frame.from_coordinate_components(frame.coordinate_components(A))
    assert np.allclose(back.values, A.values, rtol=1e-12, atol=1e-12)


# -- a Lorentz-rotated Cartesian frame: flat, with torsion -------------------

BOOST = "0.4*sin(x) + 0.3*t*y"
ANGLE = "0.5*cos(t) + 0.2*z"


def rotated_minkowski():
    ch, sh = f"cosh({BOOST})", f"sinh({BOOST})"
    c, s = f"cos({ANGLE})", f"sin({ANGLE})"
    cof = [[ch, sh, "0", "0"], [sh, ch, "0", "0"], ["0", "0", c, s], ["0", "0", f"-{s}", c]]
    return SpacetimeSpec(name="rotated_minkowski", coordinates=["t", "x", "y", "z"], parameters={},
                         coframe=cof, domain={k: [-1.0, 1.0] for k in "txyz"},
                         connection="teleparallel").validate()


def test_rotated_frame_connection_is_pure_gauge():
    spec = rotated_minkowski()
    fr = Frame(spec, sample_points(spec, 20, seed=1))
    # oracle: omega' = Lambda d Lambda^-1, with Lambda the coframe matrix (theta' = Lambda dx)
    L = oracles.coframe(spec)
    Li = L.inv()
    x = oracles.coords(spec)
    w = fr.levi_civita
    for a in range(4):
        for b in range(4):
            for mu in range(4):
                comp = sum(L[a, c] * sp.diff(Li[c, b], x[mu]) for c in range(4))
                want = oracles.numeric(spec, comp)(fr.points)
                # frame component along theta^d is E^mu_d times the coordinate one
                got = fr.coordinate_components(w[a][b])[:, 1 << mu]
                assert np.allclose(got, want, atol=1e-12), (a, b, mu)
    R = fr.curvature_forms(mode="levi-civita")
    assert max(np.abs(R[a][b].values).max() for a in range(4) for b in range(4)) < 1e-12
    assert max(np.abs(t.values).max() for t in fr.torsion_forms("teleparallel")) > 0.1
