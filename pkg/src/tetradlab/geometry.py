"""Orthonormal coframes and the Cartan calculus built on them.

Everything is evaluated on a batch of N sample points at once. The coframe
theta^a = h^a_mu dx^mu is held as a Jet2 of shape (N, 4, 4) indexed [a, mu];
the inverse frame e_a = E^mu_a d_mu as a Jet2 indexed [mu, a].

Differential forms are ``Multivector`` objects whose coefficients are in the
orthonormal basis theta^I. The exterior derivative is

    d A = theta^a ^ e_a(A_I) theta^I  +  A_I d(theta^I)

with d(theta^I) expanded from d theta^a by the Leibniz rule, and
d theta^a = (d_mu h^a_nu - d_nu h^a_mu) E^mu_m E^nu_n theta^m theta^n / 2
taken from coordinate derivatives of h. Structure coefficients come from an
independent route, the coordinate bracket of the frame vectors:

    [e_m, e_n] = c^a_mn e_a.

Index conventions: omega[a][b] is the connection 1-form omega^a_b, with
Cartan's equations

    Theta^a = d theta^a + omega^a_b ^ theta^b
    R^a_b   = d omega^a_b + omega^a_c ^ omega^c_b.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.stats import qmc

from . import clifford as cl
from .catalog import CompiledSpec, SpacetimeSpec, compile_spec
from .clifford import ETA, GRADE, Multivector, contract, wedge
from .expr import ExprDomainError, eval_jet, evaluate
from .jet import Jet2, jeinsum, jinv, stack, value_of


class GeometryError(ValueError):
    pass


class SingularFrameError(GeometryError):
    def __init__(self, point, det):
        super().__init__(f"coframe is singular (det h = {det:.3g}) at point {tuple(map(float, point))}")
        self.point = point


# ---------------------------------------------------------------------------
# sampling


def sample_points(spec: SpacetimeSpec | CompiledSpec, n: int = 64, seed: int = 42,
                  margin: float = 1e-3) -> np.ndarray:
    """Deterministic scrambled-Halton points in the domain box, kept at least
    ``margin`` (in value) away from every excluded locus."""
    cs = spec if isinstance(spec, CompiledSpec) else compile_spec(spec)
    lo, hi = cs.spec.domain_box()
    lo, hi = np.array(lo), np.array(hi)
    sampler = qmc.Halton(d=4, scramble=True, seed=seed)
    keep = []
    total = 0
    for _ in range(50):
        u = sampler.random(max(2 * n, 16))
        pts = lo + u * (hi - lo)
        ok = np.ones(len(pts), dtype=bool)
        for e in cs.excluded:
            try:
                v = evaluate(e, pts, cs.params)
            except ExprDomainError:
                v = np.array([evaluate(e, p[None], cs.params)[0] if _safe(e, p, cs.params) else 0.0
                              for p in pts])
            ok &= np.abs(v) > margin
        keep.append(pts[ok])
        total += int(ok.sum())
        if total >= n:
            break
    pts = np.concatenate(keep)
    if len(pts) < n:
        raise GeometryError("could not find enough sample points away from excluded loci")
    return pts[:n]


def _safe(e, p, params):
    try:
        evaluate(e, p[None], params)
        return True
    except ExprDomainError:
        return False


# ---------------------------------------------------------------------------
# coframe geometry


def _two_blade_index():
    """Masks of theta^m ^ theta^n for m < n, and the pairs themselves."""
    pairs = [(m, n) for m in range(4) for n in range(m + 1, 4)]
    masks = [(1 << m) | (1 << n) for m, n in pairs]
    return pairs, masks


PAIRS, PAIR_MASKS = _two_blade_index()


def theta(a):
    return cl.theta(a)


def theta_lower(a):
    return cl.theta_lower(a)


def zero_form_mv(f):
    return Multivector.scalar(f)


def one_form(comps):
    """sum_a comps[a] theta^a from a Jet2/array whose last axis is a."""
    return Multivector.vector([_take_last(comps, a) for a in range(4)])


def _take_last(x, a):
    return x.take(a, axis=-1) if isinstance(x, Jet2) else np.asarray(x)[..., a]


def two_form(comps):
    """sum_{m<n} X[..., m, n] theta^m ^ theta^n from an antisymmetric array."""
    out = Multivector.zero()
    for (m, n), mask in zip(PAIRS, PAIR_MASKS):
        x = comps.index(*([slice(None)] * (comps.ndim - 2)), m, n) if isinstance(comps, Jet2) \
            else np.asarray(comps)[..., m, n]
        out = out + Multivector.from_components({mask: x})
    return out


class Frame:
    """Coframe data and Cartan calculus on a batch of sample points."""

    def __init__(self, spec, points, order: int = 2):
        self.cspec = spec if isinstance(spec, CompiledSpec) else compile_spec(spec)
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.params = dict(self.cspec.params)
        self.order = order
        rows = [stack([eval_jet(self.cspec.coframe[a][m], self.points, self.params, order)
                       for m in range(4)], axis=-1) for a in range(4)]
        self.h = stack(rows, axis=-2)                    # [a, mu]
        det = np.linalg.det(self.h.value)
        bad = np.abs(det) < 1e-10
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise SingularFrameError(self.points[i], det[i])
        self.E = jinv(self.h)                            # [mu, a]

    @property
    def n(self):
        return len(self.points)

    @property
    def spec(self):
        return self.cspec.spec

    @property
    def connection_mode(self):
        return self.spec.connection

    # -- basic data -----------------------------------------------------
    def eval(self, e, order=None):
        return eval_jet(e, self.points, self.params, self.order if order is None else order)

    def metric(self):
        """g_{mu nu} = eta_ab h^a_mu h^b_nu (Jet2, (N,4,4))."""
        return jeinsum("...am,a,...an->...mn", self.h, ETA, self.h)

    def pfaff(self, f):
        """Frame derivatives e_a(f) appended as a new last axis."""
        if not isinstance(f, Jet2):
            f = np.asarray(f, dtype=float)
            return np.zeros(f.shape + (4,))
        return jeinsum("...m,...ma->...a", f.partial(), _bcast_E(self.E, f.ndim))

    def frame_vector(self, xi):
        """Frame components xi^a = h^a_mu xi^mu from coordinate components (list of Jet2)."""
        v = stack(xi, axis=-1)
        return jeinsum("...am,...m->...a", self.h, v)

    # -- exterior calculus ------------------------------------------------
    @cached_property
    def dtheta_components(self):
        """X[a, m, n] with d theta^a = 1/2 X^a_mn theta^m theta^n (coordinate route)."""
        dh = self.h.partial()                 # dh[a, nu, mu] = d_mu h^a_nu
        curl = _swap_last2(dh) - dh           # curl[a, mu, nu] = d_mu h^a_nu - d_nu h^a_mu
        return jeinsum("...amn,...mp,...nq->...apq", curl, self.E, self.E)

    @cached_property
    def dtheta(self):
        X = self.dtheta_components
        return [two_form(X.index(slice(None), a)) for a in range(4)]

    @cached_property
    def structure_coefficients(self):
        """c[a, m, n] with [e_m, e_n] = c^a_mn e_a (bracket route)."""
        pE = self.pfaff(self.E)               # pE[mu, n, m] = e_m(E^mu_n)
        br = _swap_last2(pE) - pE             # br[mu, m, n] = [e_m, e_n]^mu
        return jeinsum("...am,...mpq->...apq", self.h, br)

    @cached_property
    def _dtheta_blades(self):
        """d(theta^I) for every basis blade I, as a list indexed by mask."""
        out = [None] * 16
        out[0] = Multivector.zero()
        for mask in range(1, 16):
            low = (mask & -mask).bit_length() - 1
            rest = mask & ~(1 << low)
            if rest == 0:
                out[mask] = self.dtheta[low]
            else:
                # d(theta^low ^ R) = d theta^low ^ R - theta^low ^ dR
                R = Multivector.blade(cl.blade_indices(rest))
                out[mask] = wedge(self.dtheta[low], R) - wedge(theta(low), out[rest])
        return out

    @cached_property
    def _d_matrix(self):
        """D[k, I]: coefficient of theta^k in d(theta^I); Jet2 (N, 16, 16)."""
        cols = [self._dtheta_blades[m].coeffs for m in range(16)]
        cols = [c if isinstance(c, Jet2) else Jet2.constant(np.broadcast_to(c, (self.n, 16)), 1)
                for c in cols]
        return stack(cols, axis=-1)

    def d(self, A: Multivector) -> Multivector:
        c = A.coeffs
        if isinstance(c, Jet2) and c.ndim == 1:
            c = c.expand(0)
        pf = self.pfaff(c)                                  # [N, I, a]
        out = Multivector.zero()
        for a in range(4):
            out = out + wedge(theta(a), Multivector(_take_last(pf, a)))
        D = self._d_matrix
        if isinstance(c, Jet2):
            out = out + Multivector(jeinsum("...kI,...I->...k", D, c))
        else:
            cv = np.broadcast_to(np.asarray(c, dtype=float), (self.n, 16))
            out = out + Multivector(jeinsum("...kI,...I->...k", D, cv))
        return out

    def star(self, A):
        return cl.hodge_star(A)

    def codifferential(self, A: Multivector, p: int) -> Multivector:
        """delta A_p = (-1)^p star^{-1} d star A_p."""
        return cl.hodge_star_inverse(self.d(cl.hodge_star(A))) * ((-1.0) ** p)

    # -- connections -------------------------------------------------------
    def _connection_from(self, T, sign):
        """sign/2 [theta^d _| T^c - theta^c _| T^d + theta^c _| (theta^d _| T_a) theta^a].

        Returns omega[c][d] = omega^c_d (mixed indices)."""
        upper = [[None] * 4 for _ in range(4)]
        inner = [[contract(theta(d), T[c]) for c in range(4)] for d in range(4)]  # theta^d _| T^c
        for c in range(4):
            for d in range(4):
                if d < c:
                    upper[c][d] = -upper[d][c]
                    continue
                if c == d:
                    upper[c][d] = Multivector.zero((self.n,))
                    continue
                s = inner[d][c] - inner[c][d]
                for a in range(4):
                    # theta^c _| (theta^d _| T_a) is a scalar
                    sc = contract(theta(c), inner[d][a] * ETA[a])
                    s = s + wedge(sc, theta(a))
                upper[c][d] = s * (0.5 * sign)
        return [[upper[c][d] * ETA[d] for d in range(4)] for c in range(4)]

    @cached_property
    def levi_civita(self):
        """omega^c_d of the torsion-free metric connection in this frame."""
        return self._connection_from(self.dtheta, +1.0)

    @cached_property
    def levi_civita_from_structure(self):
        """Same connection from the bracket coefficients (independent route).

        With C_amn = eta_aa c^a_mn, omega_abm = (C_mab - C_abm - C_bma)/2 and
        omega^a_b = eta^aa omega_abm theta^m.
        """
        C = self.structure_coefficients * ETA[:, None, None]
        # batch axis first; transposes give C[m,a,b] and C[b,m,a] at [a,b,m]
        w = (C.transpose(0, 2, 3, 1) - C - C.transpose(0, 3, 1, 2)) * 0.5
        w = w * ETA[:, None, None]
        return [[one_form(w.index(slice(None), a, b)) for b in range(4)] for a in range(4)]

    @cached_property
    def contorsion(self):
        """kappa^c_d built from the teleparallel torsion Theta^a = d theta^a."""
        return self._connection_from(self.torsion_forms("teleparallel"), -1.0)

    def connection(self, mode=None):
        mode = mode or self.connection_mode
        if mode == "levi-civita":
            return self.levi_civita
        if mode == "teleparallel":
            return [[Multivector.zero((self.n,)) for _ in range(4)] for _ in range(4)]
        raise GeometryError(f"unknown connection mode '{mode}'")

    def torsion_forms(self, mode=None):
        mode = mode or self.connection_mode
        if mode == "teleparallel":
            return list(self.dtheta)
        w = self.connection(mode)
        return [self.dtheta[a] + sum((wedge(w[a][b], theta(b)) for b in range(4)),
                                     Multivector.zero()) for a in range(4)]

    def curvature_forms(self, omega=None, mode=None):
        """R^a_b = d omega^a_b + omega^a_c ^ omega^c_b."""
        w = omega if omega is not None else self.connection(mode)
        return [[self.d(w[a][b]) + sum((wedge(w[a][c], w[c][b]) for c in range(4)),
                                       Multivector.zero())
                 for b in range(4)] for a in range(4)]

    def riemann_components(self, curv):
        """R[a, b, c, d] with R^a_b = 1/2 R^a_bcd theta^c theta^d (values)."""
        R = np.zeros((self.n, 4, 4, 4, 4))
        for a in range(4):
            for b in range(4):
                v = np.broadcast_to(curv[a][b].values, (self.n, 16))
                for (c, d), mask in zip(PAIRS, PAIR_MASKS):
                    R[:, a, b, c, d] = v[:, mask]
                    R[:, a, b, d, c] = -v[:, mask]
        return R

    def ricci_tensor(self, curv):
        """R_bd = R^a_bad."""
        return np.einsum("nabad->nbd", self.riemann_components(curv))

    def ricci_scalar(self, curv=None):
        curv = curv if curv is not None else self.curvature_forms(mode="levi-civita")
        return np.einsum("nbb,b->n", self.ricci_tensor(curv), ETA)

    # -- torsion decomposition ---------------------------------------------
    def torsion_decomposition(self, T=None):
        """Split Theta^a into (remainder, trace, axial) pieces; sum reproduces Theta^a."""
        T = T if T is not None else self.torsion_forms("teleparallel")
        V = sum((contract(theta(b), T[b] * ETA[b]) for b in range(4)), Multivector.zero())
        W = sum((wedge(T[b] * ETA[b], theta(b)) for b in range(4)), Multivector.zero())
        trace = [wedge(theta(a), V) * (1.0 / 3.0) for a in range(4)]
        axial = [cl.hodge_star(wedge(theta(a), cl.hodge_star(W))) * (-1.0 / 3.0) for a in range(4)]
        rem = [T[a] - trace[a] - axial[a] for a in range(4)]
        return TorsionParts(rem, trace, axial)

    # -- covariant derivative / Dirac operator -----------------------------
    def nabla(self, A: Multivector, omega=None):
        """[nabla_{e_a} A for a in 0..3] with the spinor-style bivector action."""
        w = omega if omega is not None else self.levi_civita
        c = A.coeffs
        pf = self.pfaff(c)
        out = []
        for a in range(4):
            wa = Multivector.zero()
            for b in range(4):
                for c2 in range(4):
                    if b == c2:
                        continue
                    comp = w[b][c2][1 << a] * ETA[c2]        # omega^{b c2}(e_a)
                    wa = wa + wedge(theta_lower(b), theta_lower(c2)) * comp
            wa = wa * 0.5
            out.append(Multivector(_take_last(pf, a)) + cl.commutator(wa, A) * 0.5)
        return out

    def dirac_split(self, A: Multivector, p: int, omega=None):
        """Residuals of  d A = theta^a ^ nabla_a A  and  -delta A = theta^a _| nabla_a A."""
        nab = self.nabla(A, omega)
        outer = sum((wedge(theta(a), nab[a]) for a in range(4)), Multivector.zero())
        inner = sum((contract(theta(a), nab[a]) for a in range(4)), Multivector.zero())
        r1 = outer - self.d(A)
        r2 = inner + self.codifferential(A, p)
        return r1, r2

    # -- coordinate/orthonormal conversion ---------------------------------
    def coordinate_components(self, A: Multivector) -> np.ndarray:
        """Coefficients on dx^J (values): theta^I = sum_J det(h[I, J]) dx^J."""
        return np.einsum("nIJ,nI->nJ", _outermorphism(self.h.value),
                         np.broadcast_to(A.values, (self.n, 16)))

    def from_coordinate_components(self, a: np.ndarray) -> Multivector:
        return Multivector(np.einsum("nJI,nJ->nI", _outermorphism(self.E.value),
                                     np.broadcast_to(a, (self.n, 16))))

    def coordinate_one_forms(self):
        """dx^mu expressed on theta^a, as jets: dx^mu = E^mu_a theta^a."""
        return [one_form(self.E.index(slice(None), mu)) for mu in range(4)]


def _swap_last2(j):
    n = j.ndim
    axes = list(range(n))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return j.transpose(*axes)


def _bcast_E(E, fdim):
    """E with shape (N, 4, 4) broadcast against a partial() of rank fdim+1."""
    while E.ndim < fdim + 2:
        E = E.expand(1)
    return E


def _outermorphism(M):
    """Minor matrix O[I, J] = det(M[rows I, cols J]) for blades of equal grade."""
    n = M.shape[0]
    out = np.zeros((n, 16, 16))
    out[:, 0, 0] = 1.0
    for I in range(1, 16):
        rows = cl.blade_indices(I)
        for J in range(1, 16):
            if GRADE[I] != GRADE[J]:
                continue
            cols = cl.blade_indices(J)
            out[:, I, J] = np.linalg.det(M[:, rows][:, :, cols])
    return out


@dataclass
class TorsionParts:
    """Irreducible torsion pieces. ``remainder`` has 16 independent components,
    ``trace`` (vector) and ``axial`` have 4 each."""

    remainder: list
    trace: list
    axial: list

    def total(self, a):
        return self.remainder[a] + self.trace[a] + self.axial[a]


__all__ = [
    "Frame", "TorsionParts", "GeometryError", "SingularFrameError", "sample_points",
    "one_form", "two_form", "theta", "theta_lower", "value_of",
]
