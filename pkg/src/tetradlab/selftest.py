"""Algebra and expression-layer self tests (the ``selftest`` subcommand).

Everything here is seeded; the same seed gives the same report.
"""

from __future__ import annotations

import numpy as np

from . import clifford as cl
from .clifford import ETA, Multivector
from .expr import (FUNCTIONS, BinOp, Call, Expr, Neg, Num, Sym, eval_jet, parse, safe_mask,
                   to_string)
from .report import Check, Report

COORDS = ("t", "x", "y", "z")
PARAMS = ("p",)
PARAM_VALUES = {"p": 0.7}


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


def random_multivector(rng, n=None, grade=None):
    shape = (16,) if n is None else (n, 16)
    c = rng.normal(size=shape)
    if grade is not None:
        keep = np.array([bin(m).count("1") == grade for m in range(16)])
        c = c * keep
    return Multivector(c)


# ---------------------------------------------------------------------------
# Clifford algebra


def generator_residual():
    worst = 0.0
    for a in range(4):
        for b in range(4):
            s = cl.theta(a) * cl.theta(b) + cl.theta(b) * cl.theta(a)
            want = np.zeros(16)
            want[0] = 2.0 * ETA[a] if a == b else 0.0
            worst = max(worst, float(np.abs(s.values - want).max()))
    return worst


def associativity_residual(rng, n=1000):
    A, B, C = (random_multivector(rng, n) for _ in range(3))
    return _rel(((A * B) * C).values, (A * (B * C)).values)


def decomposition_residual(rng, n=1000):
    """a B = a _| B + a ^ B for vectors a."""
    a = random_multivector(rng, n, grade=1)
    B = random_multivector(rng, n)
    return _rel((a * B).values, (cl.left_contract(a, B) + cl.wedge(a, B)).values)


def sandwich_residual(rng, n=1000):
    """1/2 F n reverse(F) = (n _| F) _| F + 1/2 n (F . F) for 2-forms F."""
    nv = random_multivector(rng, n, grade=1)
    F = random_multivector(rng, n, grade=2)
    lhs = F * nv * cl.reverse(F) * 0.5
    rhs = cl.left_contract(cl.left_contract(nv, F), F) + nv * (cl.scalar_product(F, F) * 0.5)
    return _rel(lhs.values, rhs.values)


def sandwich_spot():
    n = cl.theta(0)
    F = cl.wedge(cl.theta(0), cl.theta(1))
    lhs = F * n * cl.reverse(F) * 0.5
    rhs = cl.left_contract(cl.left_contract(n, F), F) + n * (cl.scalar_product(F, F) * 0.5)
    want = cl.theta(0) * 0.5
    return max(float(np.abs(lhs.values - want.values).max()),
               float(np.abs(rhs.values - want.values).max()))


def hodge_residual():
    """<B ^ star A>_4 = (B . A) theta^5 and star^-1 star = id over all blade pairs.

    For equal grades the wedge is already a 4-form; otherwise B . A = 0.
    """
    worst = 0.0
    for i in range(16):
        A = Multivector.blade(cl.blade_indices(i))
        sA = cl.hodge_star(A)
        worst = max(worst, float(np.abs(cl.hodge_star_inverse(sA).values - A.values).max()))
        for j in range(16):
            B = Multivector.blade(cl.blade_indices(j))
            lhs = cl.grade_project(cl.wedge(B, sA), 4)
            rhs = cl.PSEUDOSCALAR * float(cl.scalar_product(B, A))
            worst = max(worst, float(np.abs(lhs.values - rhs.values).max()))
    return worst


def star_star_residual():
    worst = 0.0
    for i in range(16):
        A = Multivector.blade(cl.blade_indices(i))
        k = bin(i).count("1")
        ss = cl.hodge_star(cl.hodge_star(A))
        worst = max(worst, float(np.abs(ss.values - cl.star_star_sign(k) * A.values).max()))
    return worst


def reverse_residual(rng, n=1000):
    A, B = random_multivector(rng, n), random_multivector(rng, n)
    return _rel(cl.reverse(A * B).values, (cl.reverse(B) * cl.reverse(A)).values)


def contraction_duality_residual(rng, n=200):
    """A_r _| B_s = (-1)^(r(s-1)) B_s |_ A_r."""
    worst = 0.0
    for r in range(5):
        for s in range(5):
            A = random_multivector(rng, n, grade=r)
            B = random_multivector(rng, n, grade=s)
            sign = (-1.0) ** (r * (s - 1))
            worst = max(worst, _rel(cl.left_contract(A, B).values,
                                    sign * cl.right_contract(B, A).values))
    return worst


# ---------------------------------------------------------------------------
# expressions


def random_expr(rng, depth=6):
    """Grammar-directed random AST; depth counts nested operators."""
    if depth <= 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.45:
            return Sym(COORDS[rng.integers(4)])
        if r < 0.55:
            return Sym(PARAMS[0])
        if r < 0.6:
            return Sym("pi")
        return Num(float(rng.choice([0.5, 1.0, 2.0, 3.0, 0.25, 1.5, 4.0, 10.0])))
    r = rng.random()
    if r < 0.55:
        op = str(rng.choice(["+", "-", "*", "/", "^"], p=[0.27, 0.23, 0.27, 0.13, 0.10]))
        left = random_expr(rng, depth - 1)
        if op == "^":
            if rng.random() < 0.7:
                right = Num(float(rng.choice([2.0, 3.0, 0.5, 1.5, -1.0, -2.0])))
            else:
                right = random_expr(rng, min(depth - 1, 2))
        else:
            right = random_expr(rng, depth - 1)
        return BinOp(op, left, right)
    if r < 0.65:
        return Neg(random_expr(rng, depth - 1))
    return Call(str(rng.choice(FUNCTIONS)), random_expr(rng, depth - 1))


def safe_points(e: Expr, rng, n=10, margin=0.05, bound=1e3, tries=200, box=2.0):
    """Up to n points where e, its finite-difference stencil and every
    intermediate value and derivative stay well inside the domain."""
    cand = rng.uniform(-box, box, size=(tries, 4))
    offs = np.vstack([np.zeros(4), 2e-4 * np.eye(4), -2e-4 * np.eye(4)])
    probe = (cand[:, None, :] + offs[None]).reshape(-1, 4)
    ok = safe_mask(e, probe, PARAM_VALUES, order=2, margin=margin, bound=bound)
    ok = ok.reshape(tries, len(offs)).all(1)
    return cand[ok][:n]


def _stencil(h1, h2):
    """Offsets for central first and second differences, evaluated in one batch."""
    I4 = np.eye(4)
    offs = [np.zeros(4)]
    offs += [h1 * I4[m] for m in range(4)] + [-h1 * I4[m] for m in range(4)]
    offs += [h2 * I4[m] for m in range(4)] + [-h2 * I4[m] for m in range(4)]
    pairs = [(m, k) for m in range(4) for k in range(m + 1, 4)]
    for m, k in pairs:
        em, ek = h2 * I4[m], h2 * I4[k]
        offs += [em + ek, em - ek, -em + ek, -em - ek]
    return np.array(offs), pairs


def fd_errors(e: Expr, pts, h1=1e-5, h2=1e-4):
    """Max relative gradient and Hessian errors of the jet against central differences."""
    j = eval_jet(e, pts, PARAM_VALUES, order=2)
    offs, pairs = _stencil(h1, h2)
    n = len(pts)
    f = eval_jet(e, (pts[:, None, :] + offs[None]).reshape(-1, 4), PARAM_VALUES,
                 order=0).value.reshape(n, len(offs))
    f0 = f[:, 0]
    g_fd = (f[:, 1:5] - f[:, 5:9]) / (2 * h1)
    H_fd = np.zeros((n, 4, 4))
    for m in range(4):
        H_fd[:, m, m] = (f[:, 9 + m] - 2 * f0 + f[:, 13 + m]) / h2**2
    for q, (m, k) in enumerate(pairs):
        b = 17 + 4 * q
        v = (f[:, b] - f[:, b + 1] - f[:, b + 2] + f[:, b + 3]) / (4 * h2**2)
        H_fd[:, m, k] = H_fd[:, k, m] = v
    ge = np.abs(j.grad - g_fd).max(-1) / np.maximum(1.0, np.abs(j.grad).max(-1))
    He = np.abs(j.hess - H_fd).max((-1, -2)) / np.maximum(1.0, np.abs(j.hess).max((-1, -2)))
    sym = float(np.abs(j.hess - np.swapaxes(j.hess, -1, -2)).max())
    return float(ge.max()), float(He.max()), sym


def round_trip_ok(e: Expr):
    s1 = to_string(e.root)
    e2 = parse(s1, COORDS, PARAMS)
    return e2.root == e.root and to_string(e2.root) == s1


def expression_corpus(rng, n=500, points=10, depth=6):
    """Generate n expressions that admit `points` safe points each."""
    out, rejected = [], 0
    while len(out) < n:
        root = random_expr(rng, depth)
        e = parse(to_string(root), COORDS, PARAMS)
        pts = safe_points(e, rng, points)
        if len(pts) < points:
            rejected += 1
            continue
        out.append((e, pts))
    return out, rejected


def expression_suite(rng, n=500, points=10):
    corpus, rejected = expression_corpus(rng, n, points)
    g_worst = h_worst = sym = 0.0
    bad_rt = 0
    for e, pts in corpus:
        g, h, s = fd_errors(e, pts)
        g_worst, h_worst, sym = max(g_worst, g), max(h_worst, h), max(sym, s)
        bad_rt += not round_trip_ok(e)
    return {"expressions": len(corpus), "rejected": rejected, "gradient": g_worst,
            "hessian": h_worst, "hessian_symmetry": sym, "round_trip_failures": bad_rt}


def precedence_residual():
    cases = [("1-2-3", -4.0), ("2^3^2", 512.0), ("-x^2", -9.0), ("2*3+4", 10.0), ("(1+2)*3", 9.0)]
    worst = 0.0
    pt = np.array([[0.0, 3.0, 0.0, 0.0]])
    for src, want in cases:
        got = eval_jet(parse(src, COORDS, PARAMS), pt, PARAM_VALUES, order=0).value[0]
        worst = max(worst, abs(got - want))
    return worst


# ---------------------------------------------------------------------------


def run(seed=42, n_expr=500, tol=1e-12) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report("selftest", {"name": "selftest", "seed": seed, "tolerance": tol,
                              "expressions": n_expr})
    rep.add(Check("generator_relation", "theta^a theta^b + theta^b theta^a = 2 eta^ab",
                  generator_residual(), 0.0))
    rep.add(Check("associativity", "(AB)C = A(BC), 1000 random triples",
                  associativity_residual(rng), tol))
    rep.add(Check("vector_decomposition", "a B = a _| B + a ^ B", decomposition_residual(rng), tol))
    rep.add(Check("field_sandwich", "1/2 F n ~F = (n _| F) _| F + 1/2 n (F . F)",
                  sandwich_residual(rng), tol))
    rep.add(Check("field_sandwich_spot", "n = theta^0, F = theta^01 gives theta^0 / 2",
                  sandwich_spot(), tol))
    rep.add(Check("hodge_defining_property", "<B ^ star A>_4 = (B . A) theta^5 over 256 blade pairs",
                  hodge_residual(), tol))
    rep.add(Check("hodge_star_star", "star star = (-1)^(k+1) on grade k", star_star_residual(), tol))
    rep.add(Check("reverse_antiautomorphism", "reverse(AB) = reverse(B) reverse(A)",
                  reverse_residual(rng), tol))
    rep.add(Check("contraction_duality", "A_r _| B_s = (-1)^(r(s-1)) B_s |_ A_r",
                  contraction_duality_residual(rng), tol))
    rep.add(Check("precedence", "1-2-3, 2^3^2, -x^2 and friends", precedence_residual(), 0.0))
    if n_expr:
        s = expression_suite(rng, n_expr)
        rep.tables["expressions"] = s
        rep.add(Check("jet_gradient_vs_fd", "central differences, h = 1e-5", s["gradient"], 1e-5))
        rep.add(Check("jet_hessian_vs_fd", "central differences, h = 1e-4", s["hessian"], 1e-3))
        rep.add(Check("jet_hessian_symmetry", "hess is exactly symmetric", s["hessian_symmetry"], 0.0))
        rep.add(Check("parse_print_round_trip", "parse(print(e)) == e on the corpus",
                      float(s["round_trip_failures"]), 0.0))
    return rep


__all__ = ["run", "random_expr", "random_multivector", "expression_corpus", "expression_suite",
           "fd_errors", "safe_points", "round_trip_ok"]
