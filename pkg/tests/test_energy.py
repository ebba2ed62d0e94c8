import numpy as np
import pytest
import sympy as sp

from tetradlab import catalog, suites
from tetradlab import energy as en
from tetradlab.energy import EMFieldSpec, StressForms, UnsupportedChartError
from tetradlab.geometry import Frame, sample_points

COULOMB = EMFieldSpec.from_dict({"F": {"01": "-1/r^2"}, "J": ["0", "0", "0", "0"]})


def frame_of(name, n=24, seed=2, **params):
    spec = catalog.builtin(name)
    if params:
        spec = spec.with_params(params)
    return Frame(spec, sample_points(spec, n, seed=seed))


def test_coulomb_suite_passes():
    rep = suites.em(catalog.builtin("minkowski_spherical"), COULOMB, samples=48)
    assert rep.ok, [(c.id, c.residual) for c in rep.failed()]
    ids = {c.id for c in rep.checks}
    assert "d_t.current_closure" in ids or any(i.endswith(".current_closure") for i in ids)


def test_coulomb_energy_density_is_half_e_squared():
    fr = frame_of("minkowski_spherical")
    F = en.field_form(fr, COULOMB)
    T = en.em_stress_forms(fr, F).physical()
    r = fr.points[:, 1]
    assert np.allclose(T[:, 0, 0], 0.5 / r**4, rtol=1e-13)
    # radial pressure is negative (tension along the field lines), transverse positive
    assert np.allclose(T[:, 1, 1], -0.5 / r**4, rtol=1e-13)
    assert np.allclose(T[:, 2, 2], 0.5 / r**4, rtol=1e-13)


def test_stress_two_routes_on_generic_field():
    fr = frame_of("schwarzschild")
    field = EMFieldSpec.from_dict({"F": {"01": "sin(r)", "02": "cos(theta)", "03": "r*t",
                                         "12": "1/r", "13": "phi", "23": "exp(-r)"}})
    sc = en.stress_checks(fr, en.field_form(fr, field))
    assert sc["symmetry"] < 1e-12 and sc["trace"] < 1e-12 and sc["two_path"] < 1e-12


def _potential_field():
    """F = dA on Cartesian Minkowski with J_b = d^a F_ab worked out symbolically."""
    t, x, y, z = X = sp.symbols("t x y z", real=True)
    A = [t * x * y, sp.sin(y) * z, x**2 * t, sp.cos(t) * x + y * z**2]
    eta = [1, -1, -1, -1]
    F = {f"{a}{b}": sp.diff(A[b], X[a]) - sp.diff(A[a], X[b]) for a in range(4) for b in range(a + 1, 4)}

    def Fab(a, b):
        if a == b:
            return 0
        return F[f"{a}{b}"] if a < b else -F[f"{b}{a}"]

    J = [sp.expand(sum(eta[a] * sp.diff(Fab(a, b), X[a]) for a in range(4))) for b in range(4)]
    fmt = lambda e: str(e).replace("**", "^")
    return EMFieldSpec.from_dict({"F": {k: fmt(v) for k, v in F.items()}, "J": [fmt(j) for j in J]})


def test_potential_field_with_source():
    field = _potential_field()
    fr = frame_of("minkowski_cartesian")
    F, J = en.field_form(fr, field), en.current_form(fr, field)
    r_dF, r_src = en.maxwell_residual(fr, F, J)
    assert r_dF < 1e-12 and r_src < 1e-12
    st = en.em_stress_forms(fr, F)
    assert en.covariant_conservation_residual(fr, st, F=F, J=J) < 1e-10
    # without the Lorentz-force term the balance fails
    assert en.covariant_conservation_residual(fr, st) > 1e-3
    rep = suites.em(catalog.builtin("minkowski_cartesian"), field, samples=24)
    assert rep.ok


def test_wrong_source_is_detected():
    field = _potential_field()
    bad = EMFieldSpec(field.F, [f"-({j})" for j in field.J])
    rep = suites.em(catalog.builtin("minkowski_cartesian"), bad, samples=16)
    assert not next(c for c in rep.checks if c.id == "maxwell_source").passed


def test_angular_identity_detects_asymmetry():
    fr = frame_of("minkowski_cartesian")
    rng = np.random.default_rng(1)
    S = rng.normal(size=(4, 4))
    sym = StressForms.from_components(fr, np.broadcast_to(S + S.T, (fr.n, 4, 4)))
    asym = StressForms.from_components(fr, np.broadcast_to(S, (fr.n, 4, 4)))
    assert en.angular_identity_residual(fr, sym) < 1e-14
    assert en.angular_identity_residual(fr, asym) > 1e-2


@pytest.mark.parametrize("name", catalog.BUILTIN_NAMES)
def test_sparling_identity(name):
    fr = frame_of(name, n=16)
    assert en.sparling_residual(fr) < 1e-9
    assert en.einstein_two_route_residual(fr) < 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_sparling_on_perturbed_frames(seed):
    spec = catalog.perturbed_minkowski(seed)
    fr = Frame(spec, sample_points(spec, 16, seed=seed))
    assert en.sparling_residual(fr) < 1e-9


def test_sparling_negative_control():
    fr = frame_of("schwarzschild", n=16)
    g = en.grav_objects(fr)
    flipped = en.GravObjects(g.superpotential, [p * -1.0 for p in g.pseudo], g.einstein,
                             g.einstein_from_ricci)
    assert en.sparling_residual(fr, objs=flipped) > 1e-2


def test_sparling_with_cosmological_term():
    fr = frame_of("desitter_inner", n=16)
    assert en.sparling_residual(fr, m2=0.7) < 1e-9
    assert suites.grav(catalog.builtin("desitter_inner"), m2=0.7, samples=16).ok


def test_superpotential_gauge_freedom():
    fr = frame_of("friedmann", n=16)
    coeffs = {(0, 1): 0.3, (1, 2): -1.2, (2, 3): 2.0}
    g = en.grav_objects(fr)
    assert en.superpotential_gauge_residual(fr, coeffs, g) < 1e-10


@pytest.mark.parametrize("m", [1.0, 2.0])
def test_isotropic_mass(m):
    spec = catalog.builtin("schwarzschild_isotropic").with_params({"m": m})
    res = en.mass_integral(spec, [100, 300, 1000])
    assert res.extrapolated == pytest.approx(m, rel=1e-2)
    assert res.monotone


def test_flat_mass_vanishes():
    res = en.mass_integral(catalog.builtin("minkowski_cartesian"), [10, 20, 40])
    assert abs(res.extrapolated) < 1e-10


def test_mass_rejects_spherical_chart():
    with pytest.raises(UnsupportedChartError):
        en.mass_integral(catalog.builtin("minkowski_spherical"), [10, 20])


def test_stress_components_round_trip():
    fr = frame_of("schwarzschild", n=8)
    field = EMFieldSpec.from_dict({"F": {"01": "sin(r)", "02": "cos(theta)", "13": "r", "23": "1/r"}})
    st = en.em_stress_forms(fr, en.field_form(fr, field))
    back = StressForms.from_components(fr, st.components)
    for a in range(4):
        assert np.allclose(back.one_forms[a].values, st.one_forms[a].values, atol=1e-12)
