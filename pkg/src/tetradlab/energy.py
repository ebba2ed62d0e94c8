"""Energy-momentum 3-forms, Maxwell fields and gravitational superpotentials.

Units: 8 pi G / c^4 = 1. The Maxwell stress 1-forms are taken from the
Clifford sandwich

    T_a = -1/2 F theta_a reverse(F),     star T_a = hodge(T_a),

with the component form  T_ab = eta^cl F_ac F_bl - 1/4 F_cd F^cd eta_ab
computed separately. The physical (positive energy) tensor is -T.

Gravitational objects for a connection omega (Levi-Civita, or -kappa in a
teleparallel frame, which is the same 1-form):

    star S^c = 1/2 omega_ab ^ star(theta^a theta^b theta^c)
    star t^c = -1/2 omega_ab ^ [omega^c_d ^ star(theta^a theta^b theta^d)
                                + omega^b_d ^ star(theta^a theta^d theta^c)]
    star G^d = -1/2 R_ab ^ star(theta^a theta^b theta^d)

and the identity star G^a + star t^a + d star S^a = 0 holds off-shell.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import clifford as cl
from .catalog import SpecError, compile_expr
from .clifford import ETA, Multivector, contract, hodge_star, reverse, wedge
from .expr import ExprDomainError
from .geometry import Frame, GeometryError, theta, theta_lower
from .jet import Jet2, jinv, value_of
from .symmetry import VectorData


def _sup(x):
    if isinstance(x, Multivector):
        x = x.coeffs
    return float(np.max(np.abs(value_of(x)), initial=0.0))


def _rel(res, scale):
    """Residual relative to the size of the terms involved, with a unit floor."""
    return res / max(1.0, scale)


# ---------------------------------------------------------------------------
# fields


@dataclass
class EMFieldSpec:
    """F_ab (a < b keys like "01") and J_a, all orthonormal-frame components."""

    F: dict
    J: list

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "F" not in d:
            raise SpecError("field spec needs an 'F' object")
        F = {}
        for key, src in dict(d["F"]).items():
            if len(key) != 2 or not key.isdigit() or key[0] == key[1] or max(key) > "3":
                raise SpecError(f"bad F component key '{key}' (expected two distinct digits 0-3)")
            F[key] = str(src)
        J = [str(x) for x in d.get("J", ["0", "0", "0", "0"])]
        if len(J) != 4:
            raise SpecError("J needs 4 components")
        return cls(F, J)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: invalid JSON: {exc}") from exc
        except SpecError as exc:
            raise SpecError(f"{path}: {exc}") from exc

    def to_dict(self):
        return {"F": dict(self.F), "J": list(self.J)}


def field_form(frame: Frame, field: EMFieldSpec) -> Multivector:
    """F = sum_{a<b} F_ab theta^a ^ theta^b."""
    F = Multivector.zero()
    for key, src in field.F.items():
        a, b = int(key[0]), int(key[1])
        e = compile_expr(frame.spec, src, f"F[{key}]")
        F = F + Multivector.blade((a, b), frame.eval(e))
    return F


def current_form(frame: Frame, field: EMFieldSpec) -> Multivector:
    comps = [frame.eval(compile_expr(frame.spec, s, f"J[{i}]")) for i, s in enumerate(field.J)]
    return Multivector.vector(comps)


@dataclass
class StressForms:
    """T_a as 1-forms, their Hodge duals, and the component matrix T_ab."""

    one_forms: list
    star: list
    components: np.ndarray       # (N, 4, 4), T_ab = T_a . theta_b

    @classmethod
    def from_components(cls, frame: Frame, comps):
        """Build from an arbitrary T_ab array (used for asymmetric test tensors)."""
        comps = comps if isinstance(comps, Jet2) else np.asarray(comps, dtype=float)
        ones = []
        for a in range(4):
            f = Multivector.zero()
            for b in range(4):
                x = comps.index(slice(None), a, b) if isinstance(comps, Jet2) else comps[..., a, b]
                # T_ab = T_a . theta_b is the coefficient of theta^b
                f = f + theta(b) * x
            ones.append(f)
        return cls(ones, [hodge_star(f) for f in ones], value_of(comps))

    def physical(self):
        return -self.components


def em_stress_forms(frame: Frame, F: Multivector) -> StressForms:
    Ft = reverse(F)
    ones = [(F * theta_lower(a) * Ft) * -0.5 for a in range(4)]
    comps = np.stack([np.stack([np.broadcast_to(value_of(cl.scalar_product(ones[a], theta_lower(b))),
                                                (frame.n,)) for b in range(4)], -1)
                      for a in range(4)], -2)
    return StressForms(ones, [hodge_star(f) for f in ones], comps)


def field_matrix(frame: Frame, F: Multivector) -> np.ndarray:
    """F_ab (N, 4, 4) values from the 2-form."""
    v = np.broadcast_to(F.values, (frame.n, 16))
    out = np.zeros((frame.n, 4, 4))
    for a in range(4):
        for b in range(a + 1, 4):
            out[:, a, b] = v[:, (1 << a) | (1 << b)]
            out[:, b, a] = -out[:, a, b]
    return out


def stress_components_formula(Fab: np.ndarray) -> np.ndarray:
    """T_ab = eta^cl F_ac F_bl - 1/4 F_cd F^cd eta_ab."""
    first = np.einsum("c,nac,nbc->nab", ETA, Fab, Fab)
    inv = np.einsum("c,d,ncd,ncd->n", ETA, ETA, Fab, Fab)
    return first - 0.25 * inv[:, None, None] * np.diag(ETA)


def stress_checks(frame: Frame, F: Multivector, stress: StressForms | None = None):
    """(symmetry, trace, two-path) residuals of the EM stress tensor."""
    stress = stress or em_stress_forms(frame, F)
    T = stress.components
    scale = max(1.0, _sup(T))
    sym = _sup(T - np.swapaxes(T, -1, -2)) / scale
    tr = _sup(np.einsum("naa,a->n", T, ETA)) / scale
    two = _sup(T - stress_components_formula(field_matrix(frame, F))) / scale
    return {"symmetry": sym, "trace": tr, "two_path": two}


def maxwell_residual(frame: Frame, F: Multivector, J: Multivector | None = None):
    """(|dF|, |delta F + J|), each relative to the field scale with a unit floor."""
    scale = _sup(F) + _sup(frame.pfaff(F.coeffs))
    dF = frame.d(F)
    dl = frame.codifferential(F, 2)
    if J is not None:
        dl = dl + J
    return _rel(_sup(dF), scale), _rel(_sup(dl), scale + (_sup(J) if J is not None else 0.0))


# ---------------------------------------------------------------------------
# conservation laws


def covariant_derivative_3forms(frame: Frame, star_T, omega):
    """D star T_c = d star T_c - omega^b_c ^ star T_b."""
    return [frame.d(star_T[c]) - sum((wedge(omega[b][c], star_T[b]) for b in range(4)),
                                     Multivector.zero()) for c in range(4)]


def covariant_conservation_residual(frame: Frame, stress: StressForms, mode=None,
                                    F: Multivector | None = None, J: Multivector | None = None):
    """sup | D star T_c + star T_a ^ (theta_c _| Theta^a) |.

    With a source current J (and its field F) the Lorentz-force term
    -(theta_c _| F) ^ star J is included.
    """
    mode = mode or frame.connection_mode
    w = frame.connection(mode)
    Th = frame.torsion_forms(mode)
    D = covariant_derivative_3forms(frame, stress.star, w)
    worst, scale = 0.0, 0.0
    for c in range(4):
        r = D[c]
        for a in range(4):
            r = r + wedge(stress.star[a], contract(theta_lower(c), Th[a]))
        if J is not None:
            r = r - wedge(contract(theta_lower(c), F), hodge_star(J))
        worst = max(worst, _sup(r))
        scale = max(scale, _sup(stress.star[c]), _sup(frame.pfaff(stress.star[c].coeffs)))
    return _rel(worst, scale)


def angular_identity_residual(frame: Frame, stress: StressForms):
    """sup | 1/2 (star T^b ^ theta_a - star T_a ^ theta^b) |; zero iff T_ab is symmetric
    (no spin current)."""
    worst = 0.0
    for a in range(4):
        for b in range(4):
            r = (wedge(stress.star[b] * ETA[b], theta_lower(a))
                 - wedge(stress.star[a], theta(b))) * 0.5
            worst = max(worst, _sup(r))
    return _rel(worst, max(_sup(s) for s in stress.star))


def conserved_current(frame: Frame, xi, stress: StressForms):
    """(xi* . theta^a) star T_a, closed when xi is Killing and J = 0."""
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    cur = Multivector.zero()
    for a in range(4):
        cur = cur + stress.star[a] * v.comps.take(a, axis=-1)
    return cur


def current_closure_residual(frame: Frame, xi, stress: StressForms):
    cur = conserved_current(frame, xi, stress)
    return _rel(_sup(frame.d(cur)), _sup(cur) + _sup(frame.pfaff(cur.coeffs)))


# ---------------------------------------------------------------------------
# gravitational objects


def _trivector_star(a, b, c):
    if len({a, b, c}) < 3:
        return None
    return hodge_star(Multivector.blade((a, b, c)))


@dataclass
class GravObjects:
    superpotential: list     # star S^c, 2-forms
    pseudo: list             # star t^c (+ m2 star theta^c when m2 != 0)
    einstein: list           # star G^d from curvature
    einstein_from_ricci: list
    m2: float = 0.0


def grav_objects(frame: Frame, m2: float = 0.0, mode=None) -> GravObjects:
    """Superpotentials, gravitational pseudo-currents and Einstein 3-forms.

    The connection is the Levi-Civita one; in a teleparallel frame it is
    obtained as -kappa from the torsion.
    """
    mode = mode or frame.connection_mode
    if mode == "teleparallel":
        k = frame.contorsion
        w = [[-k[a][b] for b in range(4)] for a in range(4)]
    else:
        w = frame.levi_civita
    wl = [[w[a][b] * ETA[a] for b in range(4)] for a in range(4)]          # omega_ab
    stars = {}
    for a in range(4):
        for b in range(4):
            for c in range(4):
                s = _trivector_star(a, b, c)
                if s is not None:
                    stars[a, b, c] = s
    S, t = [], []
    for c in range(4):
        s_c = Multivector.zero()
        t_c = Multivector.zero()
        for a in range(4):
            for b in range(4):
                if (a, b, c) in stars:
                    s_c = s_c + wedge(wl[a][b], stars[a, b, c]) * 0.5
                for d in range(4):
                    inner = Multivector.zero()
                    if (a, b, d) in stars:
                        inner = inner + wedge(w[c][d], stars[a, b, d])
                    if (a, d, c) in stars:
                        inner = inner + wedge(w[b][d], stars[a, d, c])
                    t_c = t_c + wedge(wl[a][b], inner) * -0.5
        if m2:
            t_c = t_c + hodge_star(theta(c)) * m2
        S.append(s_c)
        t.append(t_c)
    curv = frame.curvature_forms(omega=w)
    Rl = [[curv[a][b] * ETA[a] for b in range(4)] for a in range(4)]
    G = []
    for d in range(4):
        g = Multivector.zero()
        for a in range(4):
            for b in range(4):
                if (a, b, d) in stars:
                    g = g + wedge(Rl[a][b], stars[a, b, d]) * -0.5
        G.append(g)
    ric = frame.ricci_tensor(curv)                           # R_bd
    Rs = np.einsum("nbb,b->n", ric, ETA)
    G2 = []
    for d in range(4):
        # Ricci 1-form R^d = R^d_b theta^b, R^d_b = eta^dd R_db
        one = Multivector.vector([ric[:, d, b] * ETA[d] for b in range(4)]) - theta(d) * (0.5 * Rs)
        G2.append(hodge_star(one))
    return GravObjects(S, t, G, G2, m2)


def sparling_residual(frame: Frame, m2: float = 0.0, mode=None, objs: GravObjects | None = None):
    """sup | star G^a - m2 star theta^a + star t^a + d star S^a |  (relative).

    With m2 = 0 this is the off-shell identity; for m2 != 0 the pseudo-current
    carries + m2 star theta^a and the Einstein side carries the matching term.
    """
    g = objs or grav_objects(frame, m2, mode)
    worst, scale = 0.0, 0.0
    for a in range(4):
        lhs = g.einstein[a] + g.pseudo[a] + frame.d(g.superpotential[a])
        if g.m2:
            lhs = lhs - hodge_star(theta(a)) * g.m2
        worst = max(worst, _sup(lhs))
        scale = max(scale, _sup(g.einstein[a]), _sup(g.pseudo[a]))
    return _rel(worst, scale)


def einstein_two_route_residual(frame: Frame, objs: GravObjects | None = None):
    g = objs or grav_objects(frame)
    worst = max(_sup(g.einstein[d] - g.einstein_from_ricci[d]) for d in range(4))
    return _rel(worst, max(_sup(x) for x in g.einstein))


def superpotential_gauge_residual(frame: Frame, coeffs: dict, objs: GravObjects | None = None):
    """Add a closed 2-form (constant coefficients on dx^mu ^ dx^nu) to every
    superpotential; returns the change in d star S^a."""
    g = objs or grav_objects(frame)
    dx = frame.coordinate_one_forms()
    alpha = Multivector.zero()
    for (mu, nu), c in coeffs.items():
        alpha = alpha + wedge(dx[mu], dx[nu]) * float(c)
    worst = 0.0
    for a in range(4):
        base = frame.d(g.superpotential[a])
        shifted = frame.d(g.superpotential[a] + alpha)
        worst = max(worst, _sup(shifted - base))
    return worst


# ---------------------------------------------------------------------------
# mass


class UnsupportedChartError(ValueError):
    pass


@dataclass
class MassResult:
    radii: list
    values: list
    extrapolated: float
    monotone: bool

    def to_dict(self):
        return {"radii": list(self.radii), "values": list(self.values),
                "extrapolated": self.extrapolated, "monotone_convergence": self.monotone}


def sphere_grid(n_theta=32, n_phi=64):
    """Gauss-Legendre in cos(theta) times uniform phi; returns unit vectors and weights."""
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    phi = (np.arange(n_phi) + 0.5) * 2 * np.pi / n_phi
    st = np.sqrt(1 - mu**2)
    nx = np.outer(st, np.cos(phi)).ravel()
    ny = np.outer(st, np.sin(phi)).ravel()
    nz = np.repeat(mu, n_phi)
    w = np.repeat(wmu, n_phi) * (2 * np.pi / n_phi)
    return np.stack([nx, ny, nz], axis=-1), w


def mass_at_radius(spec, r, grid=None, t=0.0):
    """m_I(r) = -(1/16 pi) oint (x_i / r) d_j(g11 g22 g33 g^ij) r^2 dOmega.

    Coordinates must be (t, x, y, z) with a diagonal spatial metric; x_i is
    lowered with the Riemannian spatial metric -g_ij.
    """
    if list(spec.coordinates[1:]) != ["x", "y", "z"]:
        raise UnsupportedChartError(
            f"mass integral needs Cartesian-like (t, x, y, z) coordinates, got {spec.coordinates}")
    n, w = grid if grid is not None else sphere_grid()
    pts = np.zeros((len(n), 4))
    pts[:, 0] = t
    pts[:, 1:] = r * n
    try:
        frame = Frame(spec, pts, order=1)
    except (ExprDomainError, GeometryError) as exc:
        raise UnsupportedChartError(
            f"mass integral needs Cartesian-like (t, x, y, z) coordinates: {exc}") from exc
    g = frame.metric()
    gv = g.value[:, 1:, 1:]
    off = np.abs(gv - np.einsum("nii->ni", gv)[:, :, None] * np.eye(3)).max()
    if off > 1e-12 * np.abs(gv).max():
        raise UnsupportedChartError("mass integral needs a diagonal spatial metric in (t, x, y, z)")
    ginv = jinv(g)
    prod = g.index(slice(None), 1, 1) * g.index(slice(None), 2, 2) * g.index(slice(None), 3, 3)
    div = np.zeros((len(n), 3))
    for i in range(3):
        for j in range(3):
            P = prod * ginv.index(slice(None), i + 1, j + 1)
            div[:, i] += P.grad[:, j + 1]
    x_low = -np.einsum("nij,nj->ni", gv, pts[:, 1:])
    integrand = np.einsum("ni,ni->n", x_low / r, div) * r**2
    return float(-np.sum(w * integrand) / (16 * np.pi))


def mass_integral(spec, radii, grid=None):
    grid = grid or sphere_grid()
    radii = [float(r) for r in radii]
    vals = [mass_at_radius(spec, r, grid) for r in radii]
    x = 1.0 / np.array(radii)
    if len(radii) == 1:
        ext = vals[0]
    else:
        coef = np.polyfit(x, np.array(vals), len(radii) - 1)
        ext = float(coef[-1])
    order = np.argsort(radii)
    errs = [abs(vals[i] - ext) for i in order]
    mono = all(errs[i + 1] <= errs[i] + 1e-15 for i in range(len(errs) - 1))
    return MassResult(radii, vals, ext, mono)


__all__ = [
    "EMFieldSpec", "StressForms", "GravObjects", "MassResult", "UnsupportedChartError",
    "field_form", "current_form", "em_stress_forms", "stress_checks", "field_matrix",
    "stress_components_formula", "maxwell_residual", "covariant_conservation_residual",
    "angular_identity_residual", "conserved_current", "current_closure_residual",
    "grav_objects", "sparling_residual", "einstein_two_route_residual",
    "superpotential_gauge_residual", "mass_at_radius", "mass_integral", "sphere_grid",
]
