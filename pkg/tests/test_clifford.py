"""Cl(1,3) against a Dirac-matrix representation and basic identities."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tetradlab import clifford as cl
from tetradlab.clifford import Multivector

# Dirac matrices: gamma^a gamma^b + gamma^b gamma^a = 2 eta^ab
_s = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
_I2, _Z = np.eye(2), np.zeros((2, 2))
GAMMA = [np.block([[_I2, _Z], [_Z, -_I2]])] + [np.block([[_Z, s], [-s, _Z]]) for s in _s]


def to_matrix(A: Multivector):
    """Image of A under theta^a -> gamma^a (blades in ascending index order)."""
    out = np.zeros((4, 4), dtype=complex)
    for mask in range(16):
        m = np.eye(4, dtype=complex)
        for i in cl.blade_indices(mask):
            m = m @ GAMMA[i]
        out += A.values[mask] * m
    return out


coeffs = st.lists(st.floats(-3, 3, allow_nan=False), min_size=16, max_size=16)


def test_gamma_matrices_satisfy_generator_relation():
    for a, b in itertools.product(range(4), repeat=2):
        want = 2 * cl.ETA[a] * np.eye(4) if a == b else np.zeros((4, 4))
        assert np.allclose(GAMMA[a] @ GAMMA[b] + GAMMA[b] @ GAMMA[a], want)


def test_representation_is_faithful():
    mats = np.array([to_matrix(Multivector.blade(cl.blade_indices(m))).ravel() for m in range(16)])
    assert np.linalg.matrix_rank(mats) == 16


@settings(max_examples=60, deadline=None)
@given(coeffs, coeffs)
def test_geometric_product_matches_matrix_product(a, b):
    A, B = Multivector(np.array(a)), Multivector(np.array(b))
    assert np.allclose(to_matrix(A * B), to_matrix(A) @ to_matrix(B), atol=1e-10)


def test_blade_table_against_matrices():
    for i, j in itertools.product(range(16), repeat=2):
        A = Multivector.blade(cl.blade_indices(i))
        B = Multivector.blade(cl.blade_indices(j))
        assert np.allclose(to_matrix(A * B), to_matrix(A) @ to_matrix(B))


@pytest.mark.parametrize("a", range(4))
def test_theta_squares(a):
    assert (cl.theta(a) * cl.theta(a)).values[0] == cl.ETA[a]


def test_scalar_product_examples():
    assert cl.scalar_product(cl.theta(0), cl.theta(0)) == 1.0
    assert cl.scalar_product(cl.theta(1), cl.theta(1)) == -1.0
    assert cl.scalar_product(cl.theta(0), cl.theta(1)) == 0.0


def test_contraction_examples():
    t01 = cl.wedge(cl.theta(0), cl.theta(1))
    assert np.array_equal(cl.left_contract(cl.theta(0), t01).values, cl.theta(1).values)
    assert np.array_equal(cl.left_contract(cl.theta(1), t01).values, cl.theta(0).values)
    assert (t01 * t01).values[0] == 1.0             # -theta0 theta0 theta1 theta1


def test_hodge_examples():
    assert np.array_equal(cl.hodge_star(Multivector.scalar(1.0)).values, cl.PSEUDOSCALAR.values)
    assert cl.hodge_star(cl.PSEUDOSCALAR).values[0] == -1.0
    assert np.array_equal(cl.hodge_star(cl.theta(0)).values, Multivector.blade((1, 2, 3)).values)


@pytest.mark.parametrize("k", range(5))
def test_star_star_sign(k):
    for mask in range(16):
        if bin(mask).count("1") != k:
            continue
        A = Multivector.blade(cl.blade_indices(mask))
        ss = cl.hodge_star(cl.hodge_star(A))
        assert np.array_equal(ss.values, cl.star_star_sign(k) * A.values)
        assert np.array_equal(cl.hodge_star_inverse(cl.hodge_star(A)).values, A.values)


@settings(max_examples=40, deadline=None)
@given(coeffs, coeffs)
def test_wedge_and_contraction_via_products(a, b):
    """For a vector u: u ^ B = (uB + B^ u)/2 and u _| B = (uB - B^ u)/2, B^ the main involution."""
    u = Multivector(np.array(a)).grade(1)
    B = Multivector(np.array(b))
    Bh = cl.main_involution(B)
    assert np.allclose(cl.wedge(u, B).values, ((u * B + Bh * u) * 0.5).values, atol=1e-10)
    assert np.allclose(cl.left_contract(u, B).values, ((u * B - Bh * u) * 0.5).values, atol=1e-10)


def test_jet_coefficients_flow_through_products():
    from tetradlab.jet import Jet2
    pts = np.array([[0.1, 0.2, 0.3, 0.4], [1.0, -1.0, 0.5, 2.0]])
    x = Jet2.coordinate(pts, 1)
    A = cl.theta(0) * x + cl.theta(2)
    B = A * A                               # x^2 - 1
    assert np.allclose(B.values[:, 0], pts[:, 1] ** 2 - 1)
    assert np.allclose(B.coeffs.grad[:, 0, 1], 2 * pts[:, 1])


def test_selftest_clifford_checks_pass():
    from tetradlab import selftest
    rep = selftest.run(seed=3, n_expr=0)
    assert rep.ok, [c.id for c in rep.failed()]
