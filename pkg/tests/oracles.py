"""Independent symbolic oracles built with sympy from the metric alone.

Nothing here touches the Clifford or jet code: the spec's coframe strings are
parsed by sympy, the metric is g = h^T eta h, and everything else is
textbook coordinate tensor calculus.
"""

import numpy as np
import sympy as sp

ETA = sp.diag(1, -1, -1, -1)


def _locals(spec):
    names = {c: sp.Symbol(c, real=True) for c in spec.coordinates}
    names.update({p: sp.Symbol(p, real=True) for p in spec.parameters})
    names.update({"ln": sp.log, "abs": sp.Abs, "cot": sp.cot, "pi": sp.pi})
    return names


def sym(spec, src):
    return sp.sympify(src.replace("^", "**"), locals=_locals(spec))


def coords(spec):
    loc = _locals(spec)
    return [loc[c] for c in spec.coordinates]


def coframe(spec):
    return sp.Matrix(4, 4, lambda a, m: sym(spec, spec.coframe[a][m]))


def metric(spec):
    h = coframe(spec)
    return h.T * ETA * h


def christoffel(g, x):
    gi = g.inv(method="LU")
    return [[[sum(gi[r, l] * (sp.diff(g[l, m], x[n]) + sp.diff(g[l, n], x[m])
                              - sp.diff(g[m, n], x[l])) for l in range(4)) / 2
              for n in range(4)] for m in range(4)] for r in range(4)]


def ricci_scalar(spec):
    """R = g^{sn} R^r_{s r n} with R^r_{s m n} = d_m G^r_ns - d_n G^r_ms + G^r_ml G^l_ns - G^r_nl G^l_ms."""
    x = coords(spec)
    g = metric(spec)
    gi = g.inv(method="LU")
    G = christoffel(g, x)

    def riem(r, s, m, n):
        e = sp.diff(G[r][n][s], x[m]) - sp.diff(G[r][m][s], x[n])
        e += sum(G[r][m][l] * G[l][n][s] - G[r][n][l] * G[l][m][s] for l in range(4))
        return e

    ric = sp.Matrix(4, 4, lambda s, n: sum(riem(r, s, r, n) for r in range(4)))
    return sum(gi[s, n] * ric[s, n] for s in range(4) for n in range(4))


def numeric(spec, expr):
    """Vectorised evaluation at an (N, 4) array of points."""
    x = coords(spec)
    loc = _locals(spec)
    pars = [(loc[p], v) for p, v in spec.parameters.items()]
    f = sp.lambdify(x, expr.subs(pars), "numpy", cse=True)
    return lambda pts: np.broadcast_to(np.asarray(f(*pts.T), dtype=float), (len(pts),))


def killing_operator(spec, xi_src):
    """(L_xi g)_{mn} as a sympy matrix."""
    x = coords(spec)
    g = metric(spec)
    xi = [sym(spec, s) for s in xi_src]
    return sp.Matrix(4, 4, lambda m, n: sum(
        xi[r] * sp.diff(g[m, n], x[r]) + g[r, n] * sp.diff(xi[r], x[m])
        + g[m, r] * sp.diff(xi[r], x[n]) for r in range(4)))


def killing_residual(spec, xi_src, pts):
    """sup |L_xi g| over the points."""
    L = killing_operator(spec, xi_src)
    worst = 0.0
    for m in range(4):
        for n in range(m, 4):
            worst = max(worst, float(np.abs(numeric(spec, L[m, n])(pts)).max()))
    return worst
