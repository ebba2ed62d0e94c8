"""Spacetime specifications: the JSON format, validation and the builtins.

A spec is plain data (strings and numbers) so it round-trips through JSON
unchanged; ``compile_spec`` turns it into parsed expressions.

    {
      "name": "schwarzschild",
      "coordinates": ["t", "r", "theta", "phi"],
      "parameters": {"k": 2.0},
      "coframe": [["zeta", "0", "0", "0"], ...],      # theta^a = h^a_mu dx^mu
      "domain": {"r": ["3*k", "10*k"], ...},         # numbers or parameter expressions
      "excluded": ["r - k", "sin(theta)"],
      "connection": "teleparallel",                  # or "levi-civita"
      "killing": [{"name": "d_t", "components": ["1", "0", "0", "0"]}],
      "metadata": {...}                              # optional, free-form
    }
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any

from .expr import Expr, ExprError, evaluate, parse

SCHEMA = "tetradlab.spacetime/1"
CONNECTIONS = ("levi-civita", "teleparallel")


class SpecError(ValueError):
    """Malformed spacetime or field specification."""


class UnknownSpacetimeError(KeyError):
    def __init__(self, name):
        super().__init__(f"unknown spacetime '{name}'; valid names: {', '.join(BUILTIN_NAMES)}")
        self.name = name

    def __str__(self):
        return self.args[0]


@dataclass
class SpacetimeSpec:
    name: str
    coordinates: list
    parameters: dict
    coframe: list
    domain: dict
    excluded: list = field(default_factory=list)
    connection: str = "levi-civita"
    killing: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    # -- JSON ---------------------------------------------------------
    def to_dict(self):
        d = {
            "schema": SCHEMA,
            "name": self.name,
            "coordinates": list(self.coordinates),
            "parameters": dict(self.parameters),
            "coframe": [list(row) for row in self.coframe],
            "domain": {k: list(v) for k, v in self.domain.items()},
            "excluded": list(self.excluded),
            "connection": self.connection,
            "killing": [dict(k) for k in self.killing],
        }
        if self.metadata:
            d["metadata"] = copy.deepcopy(self.metadata)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise SpecError("spec must be a JSON object")
        missing = [k for k in ("name", "coordinates", "coframe", "domain") if k not in d]
        if missing:
            raise SpecError(f"spec is missing field(s): {', '.join(missing)}")
        spec = cls(
            name=str(d["name"]),
            coordinates=list(d["coordinates"]),
            parameters={str(k): float(v) for k, v in dict(d.get("parameters", {})).items()},
            coframe=[list(row) for row in d["coframe"]],
            domain={str(k): list(v) for k, v in dict(d["domain"]).items()},
            excluded=list(d.get("excluded", [])),
            connection=d.get("connection", "levi-civita"),
            killing=[dict(k) for k in d.get("killing", [])],
            metadata=copy.deepcopy(d.get("metadata", {})),
        )
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            return cls.from_json(text)
        except SpecError as exc:
            raise SpecError(f"{path}: {exc}") from exc

    # -- helpers ------------------------------------------------------
    def with_params(self, overrides):
        s = SpacetimeSpec.from_dict(self.to_dict())
        for k, v in overrides.items():
            if k not in s.parameters:
                raise SpecError(f"unknown parameter '{k}' for {self.name}; "
                                f"known: {', '.join(s.parameters) or 'none'}")
            s.parameters[k] = float(v)
        return s

    def validate(self):
        if len(self.coordinates) != 4 or len(set(self.coordinates)) != 4:
            raise SpecError("need exactly 4 distinct coordinate names")
        if len(self.coframe) != 4 or any(len(r) != 4 for r in self.coframe):
            raise SpecError("coframe must be a 4x4 array of expressions")
        if self.connection not in CONNECTIONS:
            raise SpecError(f"connection must be one of {CONNECTIONS}")
        for c in self.coordinates:
            if c not in self.domain:
                raise SpecError(f"domain has no range for coordinate '{c}'")
        for c, rng in self.domain.items():
            if c not in self.coordinates:
                raise SpecError(f"domain names unknown coordinate '{c}'")
            if len(rng) != 2:
                raise SpecError(f"domain range for '{c}' must be [lo, hi]")
        for i, k in enumerate(self.killing):
            if "components" not in k or len(k["components"]) != 4:
                raise SpecError(f"killing[{i}] needs 4 components")
        compile_spec(self)
        lo, hi = self.domain_box()
        for c, a, b in zip(self.coordinates, lo, hi):
            if not a < b:
                raise SpecError(f"empty domain for '{c}': [{a}, {b}]")
        return self

    def domain_box(self):
        lo, hi = [], []
        for c in self.coordinates:
            a, b = (_bound(x, self.parameters) for x in self.domain[c])
            lo.append(a)
            hi.append(b)
        return lo, hi


def _bound(x, params):
    if isinstance(x, (int, float)):
        return float(x)
    try:
        e = parse(str(x), (), tuple(params))
    except ExprError as exc:
        raise SpecError(f"domain bound '{x}': {exc}") from exc
    return float(evaluate(e, [[0.0, 0.0, 0.0, 0.0]], params)[0])


@dataclass
class CompiledSpec:
    spec: SpacetimeSpec
    coframe: list            # 4x4 Expr
    excluded: list           # Expr
    killing: list            # (name, [4 Expr])

    @property
    def params(self):
        return self.spec.parameters

    @property
    def coords(self):
        return self.spec.coordinates


def _compile(src, where, coords, params):
    try:
        return parse(str(src), coords, params)
    except ExprError as exc:
        raise SpecError(f"{where}: {exc}") from exc


def compile_spec(spec):
    coords = tuple(spec.coordinates)
    params = tuple(spec.parameters)
    cof = [[_compile(spec.coframe[a][m], f"coframe[{a}][{m}]", coords, params)
            for m in range(4)] for a in range(4)]
    exc = [_compile(s, f"excluded[{i}]", coords, params) for i, s in enumerate(spec.excluded)]
    kil = []
    for i, k in enumerate(spec.killing):
        comps = [_compile(s, f"killing[{i}].components[{m}]", coords, params)
                 for m, s in enumerate(k["components"])]
        kil.append((k.get("name", f"xi{i + 1}"), comps))
    return CompiledSpec(spec, cof, exc, kil)


def compile_vector(spec, comps, where="vector"):
    coords = tuple(spec.coordinates)
    params = tuple(spec.parameters)
    return [_compile(s, f"{where}[{m}]", coords, params) for m, s in enumerate(comps)]


# ---------------------------------------------------------------------------
# builtins



def _diag(*entries):
    return [[entries[a] if a == m else "0" for m in range(4)] for a in range(4)]


def _k(name, comps):
    return {"name": name, "components": list(comps)}


def _minkowski_cartesian():
    killing = [
        _k("P_t", ["1", "0", "0", "0"]),
        _k("P_x", ["0", "1", "0", "0"]),
        _k("P_y", ["0", "0", "1", "0"]),
        _k("P_z", ["0", "0", "0", "1"]),
        _k("J_z", ["0", "-y", "x", "0"]),
        _k("J_x", ["0", "0", "-z", "y"]),
        _k("J_y", ["0", "z", "0", "-x"]),
        _k("K_x", ["x", "t", "0", "0"]),
        _k("K_y", ["y", "0", "t", "0"]),
        _k("K_z", ["z", "0", "0", "t"]),
    ]
    return SpacetimeSpec(
        name="minkowski_cartesian",
        coordinates=["t", "x", "y", "z"],
        parameters={},
        coframe=_diag("1", "1", "1", "1"),
        domain={"t": [-1.0, 1.0], "x": [-1.0, 1.0], "y": [-1.0, 1.0], "z": [-1.0, 1.0]},
        connection="teleparallel",
        killing=killing,
        metadata={"description": "Minkowski spacetime, Cartesian chart, Poincare generators",
                  "ricci_scalar": "0"},
    )


def _minkowski_spherical():
    st, ct, sp_, cp = "sin(theta)", "cos(theta)", "sin(phi)", "cos(phi)"
    px = [f"{st}*{cp}", f"{ct}*{cp}/r", f"-{sp_}/(r*{st})"]
    py = [f"{st}*{sp_}", f"{ct}*{sp_}/r", f"{cp}/(r*{st})"]
    pz = [f"{ct}", f"-{st}/r", "0"]
    xs = {"x": f"r*{st}*{cp}", "y": f"r*{st}*{sp_}", "z": f"r*{ct}"}
    killing = [
        _k("P_t", ["1", "0", "0", "0"]),
        _k("P_x", ["0"] + px),
        _k("P_y", ["0"] + py),
        _k("P_z", ["0"] + pz),
        _k("J_x", ["0", "0", f"-{sp_}", f"-cot(theta)*{cp}"]),
        _k("J_y", ["0", "0", cp, f"-cot(theta)*{sp_}"]),
        _k("J_z", ["0", "0", "0", "1"]),
        _k("K_x", [xs["x"]] + [f"t*{c}" for c in px]),
        _k("K_y", [xs["y"]] + [f"t*{c}" for c in py]),
        _k("K_z", [xs["z"]] + [f"t*{c}" for c in pz]),
    ]
    return SpacetimeSpec(
        name="minkowski_spherical",
        coordinates=["t", "r", "theta", "phi"],
        parameters={},
        coframe=_diag("1", "1", "r", "r*sin(theta)"),
        domain={"t": [0.0, 1.0], "r": [1.0, 10.0], "theta": [0.3, "pi - 0.3"], "phi": [0.0, "2*pi"]},
        excluded=["r", "sin(theta)"],
        connection="levi-civita",
        killing=killing,
        metadata={"description": "Minkowski spacetime, spherical chart", "ricci_scalar": "0"},
    )


def _schwarzschild():
    z = "sqrt(1 - k/r)"
    return SpacetimeSpec(
        name="schwarzschild",
        coordinates=["t", "r", "theta", "phi"],
        parameters={"k": 2.0},
        coframe=_diag(z, f"1/{z}", "r", "r*sin(theta)"),
        domain={"t": [0.0, 1.0], "r": ["3*k", "10*k"], "theta": [0.3, "pi - 0.3"],
                "phi": [0.0, "2*pi"]},
        excluded=["r - k", "sin(theta)"],
        connection="teleparallel",
        killing=[
            _k("row1", ["1", "0", "0", "0"]),
            _k("row2", ["0", "0", "-sin(phi)", "-cot(theta)*cos(phi)"]),
            _k("row3", ["0", "0", "cos(phi)", "-cot(theta)*sin(phi)"]),
            _k("row4", ["0", "0", "0", "1"]),
        ],
        metadata={
            "ricci_scalar": "0",
            "expected_torsion_preserving": [4],
            "reference_structure_coefficients": [
                {"index": [0, 1, 0], "expr": "-k/(sqrt(1 - k/r)*r^2)"},
                {"index": [2, 1, 2], "expr": "sqrt(1 - k/r)/r"},
                {"index": [3, 1, 3], "expr": "sqrt(1 - k/r)/r"},
                {"index": [3, 2, 3], "expr": "cot(theta)/r"},
            ],
        },
    )


def _isotropic():
    rho = "sqrt(x^2 + y^2 + z^2)"
    psi = f"(1 + m/(2*{rho}))"
    lapse = f"(1 - m/(2*{rho}))/{psi}"
    return SpacetimeSpec(
        name="schwarzschild_isotropic",
        coordinates=["t", "x", "y", "z"],
        parameters={"m": 1.0},
        coframe=_diag(lapse, f"{psi}^2", f"{psi}^2", f"{psi}^2"),
        domain={"t": [0.0, 1.0], "x": ["2*m", "6*m"], "y": ["-6*m", "6*m"], "z": ["-6*m", "6*m"]},
        excluded=[f"{rho} - m/2"],
        connection="levi-civita",
        killing=[
            _k("d_t", ["1", "0", "0", "0"]),
            _k("J_z", ["0", "-y", "x", "0"]),
            _k("J_x", ["0", "0", "-z", "y"]),
            _k("J_y", ["0", "z", "0", "-x"]),
        ],
        metadata={"description": "Schwarzschild in isotropic Cartesian coordinates (mass integral)",
                  "ricci_scalar": "0"},
    )


def _desitter_rows(w, c, s, outer):
    """Ten listed candidates; ``outer`` swaps the roles of c and s in rows 1-6."""
    sa = "sqrt(alpha)"
    st, ct, sp_, cp = "sin(theta)", "cos(theta)", "sin(phi)", "cos(phi)"
    a, b = (s, c) if outer else (c, s)
    rows = [
        [f"r/{w}*{st}*{cp}*{a}", f"{sa}*{w}*{st}*{cp}*{b}", f"{sa}/r*{w}*{ct}*{cp}*{b}",
         f"-{sa}/r*{w}*{sp_}/{st}*{b}"],
        [f"r/{w}*{st}*{sp_}*{a}", f"{sa}*{st}*{sp_}*{b}", f"{sa}/r*{w}*{ct}*{sp_}*{b}",
         f"-{sa}/r*{w}*{cp}/{st}*{b}"],
        [f"r/{w}*{ct}*{a}", f"-{sa}*{w}*{ct}*{b}", f"-{sa}/r*{w}*{st}*{b}", "0"],
        [f"-r/{w}*{st}*{cp}*{b}", f"-{sa}*{w}*{st}*{cp}*{a}", f"-{sa}/r*{w}*{ct}*{cp}*{a}",
         f"{sa}/r*{w}*{sp_}/{st}*{a}"],
        [f"-r/{w}*{st}*{sp_}*{b}", f"-{sa}*{w}*{st}*{sp_}*{a}", f"-{sa}/r*{w}*{ct}*{sp_}*{a}",
         f"-{sa}/r*{w}*{cp}/{st}*{a}"],
        [f"-r/{w}*{ct}*{b}", f"-{sa}*{w}*{ct}*{a}", f"{sa}/r*{w}*{st}*{a}", "0"],
        [sa, "0", "0", "0"],
        ["0", "0", f"-{cp}", f"cot(theta)*{sp_}"],
        ["0", "0", f"-{sp_}", f"-cot(theta)*{cp}"],
        ["0", "0", "0", "-1"],
    ]
    return [_k(f"row{i + 1}", r) for i, r in enumerate(rows)]


def _desitter_corrections(w, c, s, outer):
    """Killing fields with the structure of rows 1-6 (checked symbolically).

    Relative to the listed rows, xi^0 gains a factor sqrt(alpha) and the
    spatial parts lose one; beyond the horizon the spatial parts also flip sign.
    """
    sa = "sqrt(alpha)"
    st, ct, sp_, cp = "sin(theta)", "cos(theta)", "sin(phi)", "cos(phi)"
    a, b = (s, c) if outer else (c, s)
    rows = [
        [f"{sa}*r/{w}*{st}*{cp}*{a}", f"{w}*{st}*{cp}*{b}", f"{w}/r*{ct}*{cp}*{b}",
         f"-{w}/r*{sp_}/{st}*{b}"],
        [f"{sa}*r/{w}*{st}*{sp_}*{a}", f"{w}*{st}*{sp_}*{b}", f"{w}/r*{ct}*{sp_}*{b}",
         f"{w}/r*{cp}/{st}*{b}"],
        [f"{sa}*r/{w}*{ct}*{a}", f"{w}*{ct}*{b}", f"-{w}/r*{st}*{b}", "0"],
        [f"-{sa}*r/{w}*{st}*{cp}*{b}", f"-{w}*{st}*{cp}*{a}", f"-{w}/r*{ct}*{cp}*{a}",
         f"{w}/r*{sp_}/{st}*{a}"],
        [f"-{sa}*r/{w}*{st}*{sp_}*{b}", f"-{w}*{st}*{sp_}*{a}", f"-{w}/r*{ct}*{sp_}*{a}",
         f"-{w}/r*{cp}/{st}*{a}"],
        [f"-{sa}*r/{w}*{ct}*{b}", f"-{w}*{ct}*{a}", f"{w}/r*{st}*{a}", "0"],
    ]
    if outer:
        rows = [[r[0]] + [x if x == "0" else f"-({x})" for x in r[1:]] for r in rows]
    return {str(i + 1): r for i, r in enumerate(rows)}


def _desitter_inner():
    w = "sqrt(1 - alpha*r^2)"
    c, s = "cosh(sqrt(alpha)*t)", "sinh(sqrt(alpha)*t)"
    return SpacetimeSpec(
        name="desitter_inner",
        coordinates=["t", "r", "theta", "phi"],
        parameters={"alpha": 1.0},
        coframe=_diag(w, f"1/{w}", "r", "r*sin(theta)"),
        domain={"t": [0.0, 1.0], "r": ["0.1/sqrt(alpha)", "0.9/sqrt(alpha)"],
                "theta": [0.3, "pi - 0.3"], "phi": [0.0, "2*pi"]},
        excluded=["1 - alpha*r^2", "sin(theta)"],
        connection="teleparallel",
        killing=_desitter_rows(w, c, s, outer=False),
        metadata={
            "ricci_scalar": "-12*alpha",
            "expected_torsion_preserving": [7],
            "candidate_corrections": _desitter_corrections(w, c, s, outer=False),
            "reference_structure_coefficients": [
                {"index": [0, 1, 0], "expr": "alpha*r/sqrt(1 - alpha*r^2)"},
                {"index": [2, 1, 2], "expr": "sqrt(1 - alpha*r^2)/r"},
                {"index": [3, 1, 3], "expr": "sqrt(1 - alpha*r^2)/r"},
                {"index": [3, 2, 3], "expr": "cot(theta)/r"},
            ],
        },
    )


def _desitter_outer():
    w = "sqrt(alpha*r^2 - 1)"
    c, s = "cosh(sqrt(alpha)*t)", "sinh(sqrt(alpha)*t)"
    # beyond the horizon r is the timelike coordinate: theta^0 = dr/Omega, theta^1 = Omega dt
    cof = [["0", f"1/{w}", "0", "0"],
           [w, "0", "0", "0"],
           ["0", "0", "r", "0"],
           ["0", "0", "0", "r*sin(theta)"]]
    return SpacetimeSpec(
        name="desitter_outer",
        coordinates=["t", "r", "theta", "phi"],
        parameters={"alpha": 1.0},
        coframe=cof,
        domain={"t": [0.0, 1.0], "r": ["1.1/sqrt(alpha)", "3/sqrt(alpha)"],
                "theta": [0.3, "pi - 0.3"], "phi": [0.0, "2*pi"]},
        excluded=["alpha*r^2 - 1", "sin(theta)"],
        connection="teleparallel",
        killing=_desitter_rows(w, c, s, outer=True),
        metadata={
            "ricci_scalar": "-12*alpha",
            "expected_torsion_preserving": [7],
            "candidate_corrections": _desitter_corrections(w, c, s, outer=True),
        },
    )


def _friedmann(scale_factor="t^(2/3)"):
    R = f"({scale_factor})"
    return SpacetimeSpec(
        name="friedmann",
        coordinates=["t", "x", "y", "z"],
        parameters={},
        coframe=_diag("1", R, R, R),
        domain={"t": [1.0, 2.0], "x": [-1.0, 1.0], "y": [-1.0, 1.0], "z": [-1.0, 1.0]},
        excluded=[R],
        connection="teleparallel",
        killing=[
            _k("row1", ["0", "1", "0", "0"]),
            _k("row2", ["0", "0", "1", "0"]),
            _k("row3", ["0", "0", "0", "1"]),
            _k("row4", ["0", "-y", "x", "0"]),
            _k("row5", ["0", "0", "z", "y"]),
            _k("row6", ["0", "z", "0", "-x"]),
        ],
        metadata={
            "scale_factor": scale_factor,
            **({"ricci_scalar": "-4/(3*t^2)",
                "reference_structure_coefficients": [
                    {"index": [0, 1, 0], "expr": "2/(3*t)"},
                    {"index": [2, 2, 0], "expr": "2/(3*t)"},
                    {"index": [3, 3, 0], "expr": "2/(3*t)"},
                ]} if scale_factor == "t^(2/3)" else {}),
            "expected_torsion_preserving": [1, 2, 3, 4, 5, 6],
            "candidate_corrections": {"5": ["0", "0", "z", "-y"]},
        },
    )


def perturbed_minkowski(seed: int, eps: float = 0.1, connection: str = "levi-civita") -> SpacetimeSpec:
    """Cartesian Minkowski coframe plus a smooth random perturbation of size eps.

    Every coefficient gets eps * (c0 + c1 sin(k.x + p)), so the frame is
    generic (no symmetry, full 4x4 coupling) but stays close to the identity.
    """
    import numpy as np

    rng = np.random.default_rng(seed)
    names = ["t", "x", "y", "z"]
    cof = []
    for a in range(4):
        row = []
        for m in range(4):
            k = rng.uniform(-1.0, 1.0, size=4)
            c0, c1, ph = rng.uniform(-1.0, 1.0, size=3)
            arg = " + ".join(f"({k[i]:.12f})*{names[i]}" for i in range(4))
            base = "1" if a == m else "0"
            row.append(f"{base} + ({eps * c0:.12f}) + ({eps * c1:.12f})*sin({arg} + ({ph:.12f}))")
        cof.append(row)
    return SpacetimeSpec(
        name=f"minkowski_perturbed_{seed}",
        coordinates=names,
        parameters={},
        coframe=cof,
        domain={c: [-1.0, 1.0] for c in names},
        connection=connection,
        metadata={"description": "random smooth perturbation of the Cartesian Minkowski coframe"},
    ).validate()


_BUILDERS = {
    "minkowski_cartesian": _minkowski_cartesian,
    "minkowski_spherical": _minkowski_spherical,
    "schwarzschild": _schwarzschild,
    "schwarzschild_isotropic": _isotropic,
    "desitter_inner": _desitter_inner,
    "desitter_outer": _desitter_outer,
    "friedmann": _friedmann,
}
BUILTIN_NAMES = tuple(_BUILDERS)


def builtin(name: str, **options: Any) -> SpacetimeSpec:
    """Return a builtin spec. ``friedmann`` accepts ``scale_factor=<expr in t>``."""
    if name not in _BUILDERS:
        raise UnknownSpacetimeError(name)
    spec = _BUILDERS[name](**options)
    spec.validate()
    return spec


def resolve(name_or_path: str) -> SpacetimeSpec:
    """A builtin name or a path to a JSON spec file."""
    if name_or_path in _BUILDERS:
        return builtin(name_or_path)
    try:
        return SpacetimeSpec.load(name_or_path)
    except FileNotFoundError:
        raise UnknownSpacetimeError(name_or_path) from None


def compile_expr(spec, src, where="expression"):
    return _compile(src, where, tuple(spec.coordinates), tuple(spec.parameters))


__all__ = [
    "SpacetimeSpec", "CompiledSpec", "SpecError", "UnknownSpacetimeError",
    "builtin", "resolve", "perturbed_minkowski", "compile_spec", "compile_vector", "compile_expr",
    "BUILTIN_NAMES", "CONNECTIONS", "SCHEMA", "Expr",
]
