"""Second-order jets over the four chart coordinates.

A ``Jet2`` carries, for every entry of a value array of shape ``V``:

    value  V
    grad   V + (4,)       first partials d/dx^mu
    hess   V + (4, 4)     second partials

Derivative axes always sit at the end. ``hess`` is None for a jet that came
out of a differentiation (it knows its first derivatives only) and ``grad``
is None for a value-only jet. Operations between jets keep the lowest order
available, so repeated differentiation of jet-built quantities stays exact
until the information runs out instead of silently returning zeros.
"""

from __future__ import annotations

import numpy as np

NDIM = 4


def _arr(x):
    return np.asarray(x, dtype=float)


def _bcast(a, shape):
    if a is None:
        return None
    return np.broadcast_to(a, shape)


class Jet2:
    __slots__ = ("value", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, value, grad=None, hess=None):
        self.value = _arr(value)
        self.grad = None if grad is None else _arr(grad)
        self.hess = None if hess is None or grad is None else _arr(hess)

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, value, order=2):
        v = _arr(value)
        g = np.zeros(v.shape + (NDIM,)) if order >= 1 else None
        h = np.zeros(v.shape + (NDIM, NDIM)) if order >= 2 else None
        return cls(v, g, h)

    @classmethod
    def coordinate(cls, points, mu, order=2):
        """Seed jet for the coordinate x^mu at a batch of points (N, 4)."""
        pts = _arr(points)
        v = pts[..., mu].copy()
        g = None
        h = None
        if order >= 1:
            g = np.zeros(v.shape + (NDIM,))
            g[..., mu] = 1.0
        if order >= 2:
            h = np.zeros(v.shape + (NDIM, NDIM))
        return cls(v, g, h)

    # -- bookkeeping --------------------------------------------------
    @property
    def order(self):
        if self.grad is None:
            return 0
        return 1 if self.hess is None else 2

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def truncate(self, order):
        if order >= self.order:
            return self
        return Jet2(self.value, self.grad if order >= 1 else None, None)

    def __repr__(self):
        return f"Jet2(shape={self.shape}, order={self.order})"

    def _axis(self, axis):
        return axis + self.ndim if axis < 0 else axis

    def take(self, idx, axis=-1):
        ax = self._axis(axis)
        return Jet2(
            np.take(self.value, idx, axis=ax),
            None if self.grad is None else np.take(self.grad, idx, axis=ax),
            None if self.hess is None else np.take(self.hess, idx, axis=ax),
        )

    def index(self, *idx):
        """Basic indexing on the value axes (ints and slices only)."""
        return Jet2(
            self.value[idx],
            None if self.grad is None else self.grad[idx],
            None if self.hess is None else self.hess[idx],
        )

    def transpose(self, *axes):
        n = self.ndim
        g = None if self.grad is None else self.grad.transpose(*axes, n)
        h = None if self.hess is None else self.hess.transpose(*axes, n, n + 1)
        return Jet2(self.value.transpose(*axes), g, h)

    def expand(self, axis=-1):
        ax = axis + self.ndim + 1 if axis < 0 else axis
        return Jet2(
            np.expand_dims(self.value, ax),
            None if self.grad is None else np.expand_dims(self.grad, ax),
            None if self.hess is None else np.expand_dims(self.hess, ax),
        )

    def reshape(self, *shape):
        g = None if self.grad is None else self.grad.reshape(*shape, NDIM)
        h = None if self.hess is None else self.hess.reshape(*shape, NDIM, NDIM)
        return Jet2(self.value.reshape(*shape), g, h)

    def sum(self, axis):
        ax = self._axis(axis)
        return Jet2(
            self.value.sum(axis=ax),
            None if self.grad is None else self.grad.sum(axis=ax),
            None if self.hess is None else self.hess.sum(axis=ax),
        )

    def partial(self):
        """Jet of the gradient; the derivative index becomes the last value axis."""
        if self.grad is None:
            raise ValueError("jet carries no derivative information")
        return Jet2(self.grad, self.hess, None)

    # -- arithmetic ---------------------------------------------------
    def __neg__(self):
        return Jet2(-self.value,
                    None if self.grad is None else -self.grad,
                    None if self.hess is None else -self.hess)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet2):
            v = self.value + other.value
            if self.grad is None or other.grad is None:
                return Jet2(v)
            g = self.grad + other.grad
            h = None
            if self.hess is not None and other.hess is not None:
                h = self.hess + other.hess
            return Jet2(v, g, h)
        c = _arr(other)
        v = self.value + c
        return Jet2(v, _bcast(self.grad, v.shape + (NDIM,)),
                    _bcast(self.hess, v.shape + (NDIM, NDIM)))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet2):
            a, b = self, other
            v = a.value * b.value
            if a.grad is None or b.grad is None:
                return Jet2(v)
            av, bv = a.value[..., None], b.value[..., None]
            g = a.grad * bv + av * b.grad
            h = None
            if a.hess is not None and b.hess is not None:
                outer = a.grad[..., :, None] * b.grad[..., None, :]
                cross = outer + np.swapaxes(outer, -1, -2)
                h = (a.hess * bv[..., None] + av[..., None] * b.hess) + cross
            return Jet2(v, g, h)
        c = _arr(other)
        v = self.value * c
        if c.ndim:
            g = None if self.grad is None else self.grad * c[..., None]
            h = None if self.hess is None else self.hess * c[..., None, None]
        else:
            g = None if self.grad is None else self.grad * c
            h = None if self.hess is None else self.hess * c
        return Jet2(v, g, h)

    __rmul__ = __mul__

    def reciprocal(self):
        u = self.value
        return _chain(self, 1.0 / u, -1.0 / u**2, 2.0 / u**3)

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        return self * (1.0 / _arr(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, other):
        if isinstance(other, Jet2):
            return exp(other * log(self))
        c = float(other)
        u = self.value
        if c == 0.0:
            return Jet2.constant(np.ones_like(u), self.order)
        f = u**c
        f1 = c * u ** (c - 1) if c != 1.0 else np.ones_like(u)
        if c == 1.0:
            f2 = np.zeros_like(u)
        elif c == 2.0:
            f2 = np.full_like(u, 2.0)
        else:
            f2 = c * (c - 1) * u ** (c - 2)
        return _chain(self, f, f1, f2)

    def __rpow__(self, other):
        return exp(self * np.log(_arr(other)))


def _chain(u, f, f1, f2):
    """Apply a scalar function with values f, f', f'' along jet u."""
    if u.grad is None:
        return Jet2(f)
    g = f1[..., None] * u.grad
    h = None
    if u.hess is not None:
        gg = u.grad[..., :, None] * u.grad[..., None, :]       # exactly symmetric
        h = f1[..., None, None] * u.hess + f2[..., None, None] * gg
    return Jet2(f, g, h)


def _unary(fn):
    def wrapper(x):
        if isinstance(x, Jet2):
            return fn(x)
        return fn(Jet2(x)).value
    wrapper.__name__ = fn.__name__
    return wrapper


@_unary
def sin(u):
    s, c = np.sin(u.value), np.cos(u.value)
    return _chain(u, s, c, -s)


@_unary
def cos(u):
    s, c = np.sin(u.value), np.cos(u.value)
    return _chain(u, c, -s, -c)


@_unary
def tan(u):
    t = np.tan(u.value)
    sec2 = 1.0 + t * t
    return _chain(u, t, sec2, 2.0 * t * sec2)


@_unary
def cot(u):
    t = 1.0 / np.tan(u.value)
    csc2 = 1.0 + t * t
    return _chain(u, t, -csc2, 2.0 * t * csc2)


@_unary
def sinh(u):
    s, c = np.sinh(u.value), np.cosh(u.value)
    return _chain(u, s, c, s)


@_unary
def cosh(u):
    s, c = np.sinh(u.value), np.cosh(u.value)
    return _chain(u, c, s, c)


@_unary
def tanh(u):
    t = np.tanh(u.value)
    s2 = 1.0 - t * t
    return _chain(u, t, s2, -2.0 * t * s2)


@_unary
def exp(u):
    e = np.exp(u.value)
    return _chain(u, e, e, e)


@_unary
def log(u):
    x = u.value
    return _chain(u, np.log(x), 1.0 / x, -1.0 / x**2)


@_unary
def sqrt(u):
    s = np.sqrt(u.value)
    return _chain(u, s, 0.5 / s, -0.25 / (s * u.value))


@_unary
def fabs(u):
    sg = np.sign(u.value)
    return _chain(u, np.abs(u.value), sg, np.zeros_like(sg))


# ---------------------------------------------------------------------------
# multilinear products with the product rule

_RESERVED = "YZ"


def _parse_subscripts(subs):
    ins, out = subs.replace(" ", "").split("->")
    return ins.split(","), out


def jeinsum(subs, *ops):
    """``np.einsum`` over a mix of Jet2 and constant arrays.

    Subscripts follow numpy syntax (explicit output required, ``...`` allowed
    at the front). Derivatives are propagated with the product rule.
    """
    ins, out = _parse_subscripts(subs)
    if len(ins) != len(ops):
        raise ValueError("operand count does not match subscripts")
    for s in ins:
        if any(ch in _RESERVED for ch in s):
            raise ValueError("subscripts Y and Z are reserved")
    vals = [op.value if isinstance(op, Jet2) else _arr(op) for op in ops]
    value = np.einsum(subs, *vals, optimize=len(ops) > 2)
    jets = [i for i, op in enumerate(ops) if isinstance(op, Jet2)]
    if not jets or any(ops[i].grad is None for i in jets):
        return Jet2(value)

    def run(replace):
        sub_in = list(ins)
        args = list(vals)
        extra = ""
        for i, (arr, tag) in replace.items():
            sub_in[i] = sub_in[i] + tag
            args[i] = arr
            extra += tag
        s = ",".join(sub_in) + "->" + out + "".join(sorted(extra))
        return np.einsum(s, *args, optimize=len(ops) > 2)

    grad = sum(run({i: (ops[i].grad, "Y")}) for i in jets)
    hess = None
    if all(ops[i].hess is not None for i in jets):
        hess = sum(run({i: (ops[i].hess, "YZ")}) for i in jets)
        for i in jets:
            for j in jets:
                if i != j:
                    hess = hess + run({i: (ops[i].grad, "Y"), j: (ops[j].grad, "Z")})
    return Jet2(value, grad, hess)


def jinv(m):
    """Inverse of a matrix-valued jet with value shape (..., n, n)."""
    if not isinstance(m, Jet2):
        return np.linalg.inv(m)
    mi = np.linalg.inv(m.value)
    if m.grad is None:
        return Jet2(mi)
    dm = m.grad
    g = -np.einsum("...ij,...jkY,...kl->...ilY", mi, dm, mi)
    h = None
    if m.hess is not None:
        # A = Minv dM Minv per direction
        a = np.einsum("...ij,...jkY,...kl->...ilY", mi, dm, mi)
        h = (np.einsum("...ijY,...jkZ,...kl->...ilYZ", a, dm, mi)
             + np.einsum("...ijZ,...jkY,...kl->...ilYZ", a, dm, mi)
             - np.einsum("...ij,...jkYZ,...kl->...ilYZ", mi, m.hess, mi))
    return Jet2(mi, g, h)


def value_of(x):
    return x.value if isinstance(x, Jet2) else _arr(x)


def stack(items, axis=-1):
    """Stack Jet2 (or constant) entries along a new value axis."""
    jets = [x for x in items if isinstance(x, Jet2)]
    if not jets:
        return np.stack([_arr(x) for x in items], axis=axis)
    shape = np.broadcast_shapes(*[value_of(x).shape for x in items])
    order = min(j.order for j in jets)
    full = [x if isinstance(x, Jet2) else Jet2.constant(x, order) for x in items]
    full = [Jet2(_bcast(x.value, shape), _bcast(x.grad, shape + (NDIM,)) if order >= 1 else None,
                 _bcast(x.hess, shape + (NDIM, NDIM)) if order >= 2 else None) for x in full]
    ax = axis + len(shape) + 1 if axis < 0 else axis
    v = np.stack([x.value for x in full], axis=ax)
    g = np.stack([x.grad for x in full], axis=ax) if order >= 1 else None
    h = np.stack([x.hess for x in full], axis=ax) if order >= 2 else None
    return Jet2(v, g, h)


__all__ = [
    "Jet2", "jeinsum", "jinv", "stack", "value_of",
    "sin", "cos", "tan", "cot", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "fabs",
    "NDIM",
]
