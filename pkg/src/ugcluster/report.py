from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from .graph import ClusteringSignature, ConnectivityTable


def _clean(x):
    """Make values JSON-safe: infinities become strings, numpy scalars python."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


@dataclass
class SolveReport:
    """Outcome of one solver run.

    ``value`` is the objective (``km`` or ``kc``) of ``signature`` measured
    on ``table``; ``table_source`` says which table that was.
    """

    algorithm: str
    objective: str
    signature: ClusteringSignature
    table: ConnectivityTable = field(repr=False)
    params: dict[str, Any] = field(default_factory=dict)
    bounds: dict[str, Any] = field(default_factory=dict)
    samples: dict[str, int] = field(default_factory=dict)
    evaluations: int | None = None
    trace: list[dict] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)
    fingerprint: str = ""
    duration: float = 0.0

    @property
    def centers(self) -> tuple[int, ...]:
        return self.signature.centers

    @property
    def value(self) -> float:
        from .graph import kc_value, km_value

        fn = km_value if self.objective == "km" else kc_value
        return fn(self.table, self.signature)

    @property
    def table_source(self) -> str:
        return self.table.source

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "algorithm": self.algorithm,
            "params": self.params,
            "centers": list(self.centers),
            "center_count": len(self.centers),
            "signature": self.signature.to_dict(self.table),
            "objective": self.objective,
            "value": self.value,
            "table_source": self.table.source,
            "table_samples": self.table.samples,
            "bounds": self.bounds,
            "samples": self.samples,
            "evaluations": self.evaluations,
            "trace": self.trace,
            "extra": self.extra,
            "graph_fingerprint": self.fingerprint,
        }
        if timing:
            d["duration"] = self.duration
        return _clean(d)

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=2)
