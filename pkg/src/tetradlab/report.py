"""Schema-versioned reports.

JSON output is deterministic: keys are sorted, floats keep full precision and
no timings or host details are recorded. Non-finite floats become null.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SCHEMA = "tetradlab.report/1"


@dataclass
class Check:
    id: str
    description: str
    residual: float
    tolerance: float
    notes: str = ""

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def to_dict(self):
        return {"id": self.id, "description": self.description, "residual": self.residual,
                "tolerance": self.tolerance, "pass": self.passed, "notes": self.notes}


@dataclass
class Report:
    command: str
    spec: dict
    checks: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    mass: dict | None = None
    discrepancies: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, check: Check):
        self.checks.append(check)
        return check

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return _clean({
            "schema": SCHEMA,
            "command": self.command,
            "spec": self.spec,
            "checks": [c.to_dict() for c in self.checks],
            "verdicts": self.verdicts,
            "tables": self.tables,
            "mass": self.mass,
            "discrepancies": self.discrepancies,
            "notes": self.notes,
            "ok": self.ok,
        })

    def to_json(self):
        return dumps(self.to_dict())

    def to_text(self):
        lines = [f"{self.command}: {self.spec.get('name', '')}"]
        params = self.spec.get("parameters")
        if params:
            lines.append("  parameters: " + ", ".join(f"{k}={_g(v)}" for k, v in sorted(params.items())))
        if self.checks:
            w = max(len(c.id) for c in self.checks)
            lines.append("checks:")
            for c in self.checks:
                mark = "pass" if c.passed else "FAIL"
                lines.append(f"  {c.id:<{w}}  {_e(c.residual)}  (tol {_e(c.tolerance)})  {mark}")
        if self.verdicts:
            lines.append("candidates:")
            lines.append(f"  {'#':>2} {'name':<14} {'killing':>9} {'torsion':>9} {'oracle':>9}  verdict")
            for v in self.verdicts:
                verdict = "Killing" if v["killing_pass"] else "not Killing (suspected typo)"
                if self.spec.get("connection") == "teleparallel":
                    verdict += ", torsion preserved" if v["oracle_pass"] else ", torsion not preserved"
                lines.append(f"  {v.get('index', ''):>2} {v['name']:<14} {_e(v['killing_residual'])} "
                             f"{_e(v['torsion_condition_residual'])} "
                             f"{_e(v['lie_torsion_oracle_residual'])}  {verdict}")
        if self.mass:
            lines.append("mass integral:")
            for r, m in zip(self.mass["radii"], self.mass["values"]):
                lines.append(f"  r = {_g(r):>10}  m_I = {m:.6g}")
            lines.append(f"  extrapolated (1/r -> 0): {self.mass['extrapolated']:.6g}")
        for key in sorted(self.tables):
            if key in ("current_closure",):
                continue
            lines.append(f"{key}: {_fmt_table(self.tables[key])}")
        if self.discrepancies:
            lines.append("discrepancies:")
            lines.extend(f"  - {d}" for d in self.discrepancies)
        for n in self.notes:
            lines.append(f"note: {n}")
        n_fail = len(self.failed())
        lines.append(f"{len(self.checks) - n_fail}/{len(self.checks)} checks pass")
        return "\n".join(lines)

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        rep = cls(d["command"], d["spec"], verdicts=d.get("verdicts", []),
                  tables=d.get("tables", {}), mass=d.get("mass"),
                  discrepancies=d.get("discrepancies", []), notes=d.get("notes", []))
        for c in d.get("checks", []):
            rep.add(Check(c["id"], c["description"], _num(c["residual"]), c["tolerance"], c["notes"]))
        return rep

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _num(x):
    return float("nan") if x is None else x


def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):                      # numpy scalars
        return _clean(x.item())
    return x


def _e(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "      n/a"
    return f"{x:9.2e}"


def _g(x):
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _fmt_table(v):
    if isinstance(v, dict):
        return ", ".join(f"{k}={_fmt_table(x)}" for k, x in sorted(v.items()))
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)
