"""Killing candidates and the torsion-preservation conditions.

For a vector field xi the frame-rotation matrix kappa is read off from

    L_xi theta^a = kappa^a_b theta^b,   kappa^a_b = e_b(xi^a) + xi^m c^a_bm,

and checked against the coordinate Lie derivative
(L_xi theta^a)_nu = xi^mu d_mu h^a_nu + h^a_mu d_nu xi^mu.

xi is Killing iff kappa_ab + kappa_ba = 0. The teleparallel torsion is
preserved iff d kappa^a_b ^ theta^b = 0; in components, with T^a_mn = -c^a_mn,

    T^m_bd e_m(xi^a) - e_d(xi^m T^a_bm) + e_b(xi^m T^a_dm) = 0.

The authoritative check is the coordinate Lie derivative of the torsion
tensor Theta = e_a (x) Theta^a.

All residuals are divided by a scale built from sup|xi| and sup|d xi| so that
rescaling xi leaves them unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import clifford as cl
from .clifford import ETA, Multivector, contract, scalar_product
from .geometry import Frame, one_form, theta
from .jet import Jet2, jeinsum, stack, value_of


@dataclass
class KillingCandidate:
    name: str
    components: list          # 4 Expr, coordinate components xi^mu

    def coordinate_jets(self, frame: Frame):
        return [frame.eval(e) for e in self.components]


@dataclass
class SymmetryVerdict:
    name: str
    killing_residual: float
    torsion_condition_residual: float
    lie_torsion_oracle_residual: float
    kappa_oracle_residual: float
    frame_constraint_residual: float
    curvature_constraint_residual: float | None
    killing_pass: bool
    torsion_pass: bool
    oracle_pass: bool
    swapped_sign_residual: float = float("nan")
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "name": self.name,
            "killing_residual": self.killing_residual,
            "torsion_condition_residual": self.torsion_condition_residual,
            "torsion_condition_swapped_sign_residual": self.swapped_sign_residual,
            "lie_torsion_oracle_residual": self.lie_torsion_oracle_residual,
            "kappa_oracle_residual": self.kappa_oracle_residual,
            "frame_constraint_residual": self.frame_constraint_residual,
            "curvature_constraint_residual": self.curvature_constraint_residual,
            "killing_pass": self.killing_pass,
            "torsion_pass": self.torsion_pass,
            "oracle_pass": self.oracle_pass,
            "notes": list(self.notes),
        }


class VectorData:
    """Coordinate and frame components of xi on a frame, with their derivatives."""

    def __init__(self, frame: Frame, xi):
        self.frame = frame
        if isinstance(xi, KillingCandidate):
            xi = xi.coordinate_jets(frame)
        self.coord = stack(xi, axis=-1)                    # xi^mu  (N, 4)
        self.comps = frame.frame_vector(xi)                # xi^a   (N, 4)
        self.pf = frame.pfaff(self.comps)                  # e_b(xi^a) at [a, b]

    @property
    def star(self):
        """xi* = eta_ab xi^b theta^a as a 1-form."""
        return one_form(self.comps * ETA)

    def scale(self):
        s = np.abs(self.comps.value).max() + np.abs(self.pf.value).max()
        return float(s)


def _sup(x):
    return float(np.max(np.abs(value_of(x)), initial=0.0))


def _ratio(num, den):
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return num / den


def frame_components(frame: Frame, xi):
    """xi^a = theta^a(xi) as a Jet2 (N, 4)."""
    return VectorData(frame, xi).comps


def kappa_matrix(frame: Frame, xi) -> Jet2:
    """kappa^a_b = e_b(xi^a) + xi^m c^a_bm, Jet2 indexed [a, b]."""
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    c = frame.structure_coefficients
    return v.pf + jeinsum("...abm,...m->...ab", c, v.comps)


def kappa_oracle(frame: Frame, xi) -> Jet2:
    """kappa^a_b from the coordinate Lie derivative of theta^a."""
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    dh = frame.h.partial()                                 # [a, nu, mu] = d_mu h^a_nu
    dxi = v.coord.partial()                                # [mu, nu] = d_nu xi^mu
    L = jeinsum("...anm,...m->...an", dh, v.coord) + jeinsum("...am,...mn->...an", frame.h, dxi)
    return jeinsum("...an,...nb->...ab", L, frame.E)


def killing_residual(frame: Frame, xi) -> float:
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    k = kappa_matrix(frame, v).value
    low = ETA[:, None] * k
    sym = low + np.swapaxes(low, -1, -2)
    return _ratio(_sup(sym), v.scale())


def _torsion_terms(frame, v):
    T = -frame.structure_coefficients                       # T^a_mn
    t1 = jeinsum("...mbd,...am->...abd", T, v.pf)          # T^m_bd e_m(xi^a)
    Y = jeinsum("...abm,...m->...ab", T, v.comps)           # xi^m T^a_bm
    eY = frame.pfaff(Y)                                     # [a, b, d] = e_d(Y^a_b)
    t2 = eY.value
    t3 = np.swapaxes(eY.value, -1, -2)                      # e_b(Y^a_d)
    return t1.value, t2, t3, T


def torsion_condition_residual(frame: Frame, xi, swapped_sign=False) -> float:
    """Component form of d kappa^a_b ^ theta^b = 0 (teleparallel torsion).

    ``swapped_sign=True`` evaluates the variant with the last two terms'
    signs exchanged, for comparison against the condition as sometimes quoted.
    """
    if frame.connection_mode != "teleparallel":
        return 0.0
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    t1, t2, t3, T = _torsion_terms(frame, v)
    res = t1 + t2 - t3 if swapped_sign else t1 - t2 + t3
    scale = v.scale() * (_sup(T) + _sup(frame.pfaff(T)))
    return _ratio(_sup(res), scale)


def lie_torsion_oracle(frame: Frame, xi) -> float:
    """sup |L_xi Theta| for the (1,2) torsion tensor, computed in coordinates."""
    if frame.connection_mode != "teleparallel":
        return 0.0
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    dh = frame.h.partial()
    curl = _swap(dh) - dh                                   # [a, nu, rho] = d_nu h_rho - d_rho h_nu
    T = jeinsum("...ma,...anr->...mnr", frame.E, curl)      # T^mu_{nu rho}
    dT = T.partial().value                                  # [mu, nu, rho, sigma]
    x = v.coord.value
    dx = v.coord.partial().value                            # [mu, sigma] = d_sigma xi^mu
    Tv = T.value
    L = (np.einsum("ns,nmars->nmar", x, dT)
         - np.einsum("nsar,nms->nmar", Tv, dx)
         + np.einsum("nmsr,nsa->nmar", Tv, dx)
         + np.einsum("nmas,nsr->nmar", Tv, dx))
    scale = v.scale() * (_sup(Tv) + _sup(dT))
    return _ratio(_sup(L), scale)


def _swap(j):
    axes = list(range(j.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return j.transpose(*axes)


def lie_theta_forms(frame: Frame, xi, mode=None):
    """L_xi theta^a = xi* _| Theta^a + D(xi* . theta^a), as 1-forms."""
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    mode = mode or frame.connection_mode
    w = frame.connection(mode)
    T = frame.torsion_forms(mode)
    xs = v.star
    out = []
    for a in range(4):
        xa = scalar_product(xs, theta(a))                   # xi* . theta^a = xi^a
        Dx = frame.d(Multivector.scalar(xa))
        for b in range(4):
            Dx = Dx + w[a][b] * v.comps.take(b, axis=-1)
        out.append(contract(xs, T[a]) + Dx)
    return out


def frame_constraint_residual(frame: Frame, xi, mode=None) -> float:
    """sup | D(xi* . theta^a) + xi* _| Theta^a | (vanishes iff L_xi theta^a = 0)."""
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    L = lie_theta_forms(frame, v, mode)
    return _ratio(max(_sup(f.coeffs) for f in L), v.scale())


def lie_matrix(frame: Frame, xi, mode=None) -> Jet2:
    """M^a_b = theta_b . L_xi theta^a (Jet2 [a, b])."""
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    L = lie_theta_forms(frame, v, mode)
    rows = [stack([scalar_product(cl.theta_lower(b), L[a]) for b in range(4)], axis=-1)
            for a in range(4)]
    return stack(rows, axis=-2)


def curvature_constraint_residual(frame: Frame, xi, mode=None) -> float:
    """sup | D M^a_b + xi* _| R^a_b | with M^a_b = theta_b . L_xi theta^a."""
    v = xi if isinstance(xi, VectorData) else VectorData(frame, xi)
    mode = mode or frame.connection_mode
    M = lie_matrix(frame, v, mode)
    w = frame.connection(mode)
    R = frame.curvature_forms(mode=mode) if mode == "levi-civita" else None
    xs = v.star
    worst = 0.0
    for a in range(4):
        for b in range(4):
            f = frame.d(Multivector.scalar(M.index(slice(None), a, b)))
            for c in range(4):
                f = f + w[a][c] * M.index(slice(None), c, b) - w[c][b] * M.index(slice(None), a, c)
            if R is not None:
                f = f + contract(xs, R[a][b])
            worst = max(worst, _sup(f.coeffs))
    return _ratio(worst, v.scale())


def analyze_candidate(frame: Frame, cand: KillingCandidate, verdict_tol=1e-6) -> SymmetryVerdict:
    v = VectorData(frame, cand)
    kr = killing_residual(frame, v)
    tr = torsion_condition_residual(frame, v)
    tp = torsion_condition_residual(frame, v, swapped_sign=True)
    orc = lie_torsion_oracle(frame, v)
    ko = _ratio(_sup(kappa_matrix(frame, v).value - kappa_oracle(frame, v).value), v.scale())
    fc = frame_constraint_residual(frame, v)
    kp, tpass, opass = kr < verdict_tol, tr < verdict_tol, orc < verdict_tol
    notes = []
    l2 = None
    if kp and opass:
        l2 = curvature_constraint_residual(frame, v)
    else:
        notes.append("curvature constraint skipped: candidate fails its preconditions")
    if tpass != opass:
        notes.append("component torsion condition and Lie-derivative oracle disagree; oracle is authoritative")
    return SymmetryVerdict(cand.name, kr, tr, orc, ko, fc, l2, kp, tpass, opass, tp, notes)


__all__ = [
    "KillingCandidate", "SymmetryVerdict", "VectorData",
    "frame_components", "kappa_matrix", "kappa_oracle", "killing_residual",
    "torsion_condition_residual", "lie_torsion_oracle", "lie_theta_forms",
    "frame_constraint_residual", "lie_matrix", "curvature_constraint_residual", "analyze_candidate",
]
