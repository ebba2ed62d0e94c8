"""Spacetime algebra Cl(1,3) with metric diag(1, -1, -1, -1).

Basis blades are 4-bit masks; bit a set means theta^a is a factor, factors in
ascending order. The coefficient array of a multivector is indexed by mask,
so ``coeffs[..., 0b0011]`` is the theta^0 ^ theta^1 component.

The product of two basis blades is always +/- the blade ``i ^ j`` (xor), so
every bilinear operation here is stored as a 16x16 sign matrix S and applied
as  C_k = sum_i A_i S[i, k] B_{i ^ k}.  The sign table is built by brute-force
reduction of index words; nothing is hard-coded.

Coefficients may be float arrays of shape (..., 16) or ``Jet2`` objects with
value shape (..., 16); every operation below works on both.
"""

from __future__ import annotations

import numpy as np

from .jet import Jet2, jeinsum, value_of

ETA = np.array([1.0, -1.0, -1.0, -1.0])
NBLADE = 16
MASKS = np.arange(NBLADE)
GRADE = np.array([bin(m).count("1") for m in range(NBLADE)])
I4 = 0b1111  # theta^5 = theta^0 theta^1 theta^2 theta^3


def blade_indices(mask):
    return tuple(a for a in range(4) if mask >> a & 1)


def blade_mask(indices):
    m = 0
    for a in indices:
        m |= 1 << a
    return m


def _reduce_word(word):
    """Reduce a product of basis vectors to (sign, mask)."""
    w = list(word)
    sign = 1.0
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(w) - 1:
            if w[i] > w[i + 1]:
                w[i], w[i + 1] = w[i + 1], w[i]
                sign = -sign
                changed = True
            elif w[i] == w[i + 1]:
                sign *= ETA[w[i]]
                del w[i:i + 2]
                changed = True
                continue
            i += 1
    return sign, blade_mask(w)


def _product_table():
    sign = np.zeros((NBLADE, NBLADE))
    for i in range(NBLADE):
        for j in range(NBLADE):
            s, m = _reduce_word(blade_indices(i) + blade_indices(j))
            assert m == i ^ j
            sign[i, j] = s
    return sign


PRODUCT_SIGN = _product_table()           # theta^I theta^J = PRODUCT_SIGN[I,J] theta^(I^J)
REVERSE_SIGN = np.array([(-1.0) ** (g * (g - 1) // 2) for g in GRADE])
PARTNER = MASKS[:, None] ^ MASKS[None, :]  # PARTNER[i, k] = i ^ k


def _kernel(keep):
    """S[i,k] for the product of blade i with blade i^k, filtered by keep(i, j, k)."""
    s = np.zeros((NBLADE, NBLADE))
    for i in range(NBLADE):
        for k in range(NBLADE):
            j = i ^ k
            if keep(i, j, k):
                s[i, k] = PRODUCT_SIGN[i, j]
    return s


K_GEOMETRIC = _kernel(lambda i, j, k: True)
K_WEDGE = _kernel(lambda i, j, k: i & j == 0)
K_LEFT = _kernel(lambda i, j, k: i & j == i)      # <A_r B_s>_{s-r}
K_RIGHT = _kernel(lambda i, j, k: i & j == j)     # <A_r B_s>_{r-s}


def _linear_map(fn):
    m = np.zeros((NBLADE, NBLADE))
    for j in range(NBLADE):
        e = np.zeros(NBLADE)
        e[j] = 1.0
        m[:, j] = fn(e)
    return m


def _bilinear_raw(kernel, a, b):
    if isinstance(b, Jet2):
        bg = b.take(PARTNER, axis=-1)
    else:
        bg = np.asarray(b)[..., PARTNER]
    if isinstance(a, Jet2) or isinstance(bg, Jet2):
        return jeinsum("...i,ik,...ik->...k", a, kernel, bg)
    return np.einsum("...i,ik,...ik->...k", np.asarray(a), kernel, bg)


def _apply_matrix(m, c):
    if isinstance(c, Jet2):
        return jeinsum("kj,...j->...k", m, c)
    return np.einsum("kj,...j->...k", m, np.asarray(c))


_PSEUDO = np.zeros(NBLADE)
_PSEUDO[I4] = 1.0
M_HODGE = _linear_map(lambda c: _bilinear_raw(K_GEOMETRIC, REVERSE_SIGN * c, _PSEUDO))
# star^{-1} Y = -theta^5 reverse(Y)
M_HODGE_INV = _linear_map(lambda c: -_bilinear_raw(K_GEOMETRIC, _PSEUDO, REVERSE_SIGN * c))


def _scale(c, s):
    """Multiply coefficient array c (..., 16) by a per-point scalar s (...)."""
    if isinstance(s, Jet2):
        s = s.expand(-1)
    elif np.ndim(s):
        s = np.asarray(s, dtype=float)[..., None]
    if isinstance(c, Jet2) or isinstance(s, Jet2):
        return c * s if isinstance(c, Jet2) else s * c
    return np.asarray(c) * s


class Multivector:
    """Element of Cl(1,3), possibly batched over sample points."""

    __slots__ = ("coeffs",)
    __array_priority__ = 1001

    def __init__(self, coeffs):
        if not isinstance(coeffs, Jet2):
            coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1] != NBLADE:
            raise ValueError("multivector coefficients need a trailing axis of 16")
        self.coeffs = coeffs

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, batch=()):
        return cls(np.zeros(tuple(batch) + (NBLADE,)))

    @classmethod
    def scalar(cls, s):
        c = np.zeros(NBLADE)
        c[0] = 1.0
        return cls(c) * s

    @classmethod
    def blade(cls, indices, coeff=1.0):
        """Blade theta^{i1} ^ ... ^ theta^{ik}, indices in any order."""
        sign, mask = _reduce_word(tuple(indices))
        if len(set(indices)) != len(indices):
            raise ValueError("blade indices must be distinct")
        c = np.zeros(NBLADE)
        c[mask] = sign
        return cls(c) * coeff

    @classmethod
    def vector(cls, comps):
        """sum_a comps[a] theta^a; comps may be a list of scalars or jets."""
        out = cls.zero()
        for a, v in enumerate(comps):
            out = out + cls.blade((a,), v)
        return out

    @classmethod
    def from_components(cls, comps):
        """Build from a dict {mask or index tuple: coefficient}."""
        out = cls.zero()
        for key, v in comps.items():
            idx = blade_indices(key) if isinstance(key, (int, np.integer)) else tuple(key)
            out = out + cls.blade(idx, v)
        return out

    # -- access ---------------------------------------------------------
    def __getitem__(self, mask):
        c = self.coeffs
        return c.take(mask, axis=-1) if isinstance(c, Jet2) else c[..., mask]

    def component(self, indices):
        sign, mask = _reduce_word(tuple(indices))
        return self[mask] * sign

    @property
    def values(self):
        return value_of(self.coeffs)

    @property
    def is_jet(self):
        return isinstance(self.coeffs, Jet2)

    def grades(self, tol=0.0):
        v = np.abs(self.values).reshape(-1, NBLADE).max(axis=0)
        return sorted({int(GRADE[m]) for m in range(NBLADE) if v[m] > tol})

    def norm_inf(self, axis=None):
        """Max-abs coefficient; per point if axis=-1 style reduction is wanted."""
        return np.max(np.abs(self.values), axis=axis)

    def __repr__(self):
        v = self.values
        if v.ndim > 1:
            return f"Multivector(batch={v.shape[:-1]})"
        terms = []
        for m in range(NBLADE):
            if v[m] != 0:
                name = "1" if m == 0 else "θ^" + "".join(map(str, blade_indices(m)))
                terms.append(f"{v[m]:+g}*{name}")
        return "Multivector(" + (" ".join(terms) or "0") + ")"

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Multivector):
            other = Multivector.scalar(other)
        a, b = self.coeffs, other.coeffs
        if isinstance(a, Jet2) or not isinstance(b, Jet2):
            return Multivector(a + b)
        return Multivector(b + a)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        return Multivector(_scale(self.coeffs, other))

    def __rmul__(self, other):
        return Multivector(_scale(self.coeffs, other))

    def __truediv__(self, s):
        return self * (1.0 / s)

    def __xor__(self, other):
        return wedge(self, other)

    def __invert__(self):
        return reverse(self)

    def grade(self, k):
        return grade_project(self, k)


def _mv(x):
    return x if isinstance(x, Multivector) else Multivector.scalar(x)


def geometric_product(a, b):
    return Multivector(_bilinear_raw(K_GEOMETRIC, _mv(a).coeffs, _mv(b).coeffs))


def wedge(a, b):
    return Multivector(_bilinear_raw(K_WEDGE, _mv(a).coeffs, _mv(b).coeffs))


def contract(a, b, side="left"):
    """Left contraction a _| b (side='left') or right contraction a |_ b."""
    if side == "left":
        k = K_LEFT
    elif side == "right":
        k = K_RIGHT
    else:
        raise ValueError("side must be 'left' or 'right'")
    return Multivector(_bilinear_raw(k, _mv(a).coeffs, _mv(b).coeffs))


def left_contract(a, b):
    return contract(a, b, "left")


def right_contract(a, b):
    return contract(a, b, "right")


def scalar_product(a, b):
    """A . B = <reverse(A) B>_0, returned as a scalar (array or Jet2)."""
    return geometric_product(reverse(a), b)[0]


def reverse(a):
    a = _mv(a)
    return Multivector(_scale_components(a.coeffs, REVERSE_SIGN))


def grade_project(a, k):
    a = _mv(a)
    return Multivector(_scale_components(a.coeffs, (GRADE == k).astype(float)))


def main_involution(a):
    a = _mv(a)
    return Multivector(_scale_components(a.coeffs, (-1.0) ** GRADE))


def _scale_components(c, vec):
    if isinstance(c, Jet2):
        return c * vec
    return np.asarray(c) * vec


def hodge_star(a):
    """star A_k = reverse(A_k) theta^5."""
    return Multivector(_apply_matrix(M_HODGE, _mv(a).coeffs))


def hodge_star_inverse(a):
    return Multivector(_apply_matrix(M_HODGE_INV, _mv(a).coeffs))


def star_star_sign(k):
    """star(star A_k) = (-1)^(k+1) A_k in Cl(1,3)."""
    return (-1.0) ** (k + 1)


def commutator(a, b):
    return geometric_product(a, b) - geometric_product(b, a)


def theta(a):
    return Multivector.blade((a,))


def theta_lower(a):
    return Multivector.blade((a,), ETA[a])


PSEUDOSCALAR = Multivector.blade((0, 1, 2, 3))


def allclose(a, b, rtol=1e-12, atol=1e-14):
    """Coefficient-wise comparison relative to the largest coefficient, with an absolute floor."""
    va, vb = _mv(a).values, _mv(b).values
    scale = max(np.max(np.abs(va), initial=0.0), np.max(np.abs(vb), initial=0.0))
    return bool(np.max(np.abs(va - vb), initial=0.0) <= max(rtol * scale, atol))


__all__ = [
    "Multivector", "ETA", "GRADE", "PSEUDOSCALAR",
    "geometric_product", "wedge", "contract", "left_contract", "right_contract",
    "scalar_product", "reverse", "grade_project", "main_involution",
    "hodge_star", "hodge_star_inverse", "star_star_sign", "commutator",
    "theta", "theta_lower", "blade_indices", "blade_mask", "allclose",
]
