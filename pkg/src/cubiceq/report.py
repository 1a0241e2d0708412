"""Machine-readable residual reports."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = 1

CONVENTIONS = {
    "matrix_layout": "row-major",
    "operator_action": "column",
    "index_order": "M[out, in]",
    "site_numbering": "1-based",
}


@dataclass
class ResidualReport:
    kind: str
    passed: bool
    absolute: float | None = None
    relative: float | None = None
    exact_zero: bool | None = None
    tolerance: float | None = None
    inputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    wall_time_ms: float = 0.0

    def to_dict(self) -> dict:
        out = {"schema": SCHEMA_VERSION, "conventions": dict(CONVENTIONS)}
        out.update(asdict(self))
        return jsonable(out)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    if hasattr(x, "item"):
        return jsonable(x.item())
    return str(x)
