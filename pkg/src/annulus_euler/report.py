from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


@dataclass
class SolveReport:
    converged: bool = False
    iterations: int = 0
    update_trace: list = field(default_factory=list)
    euler_residual_inf: float | None = None
    bc_residuals: dict = field(default_factory=dict)
    flux_defect: float | None = None
    Rave_final: float | None = None
    compat_gap: float | None = None
    energy_trace: list | None = None
    diagnostics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def contraction_ratios(self):
        """update[k] / update[k-1] for consecutive iterates with nonzero updates."""
        t = self.update_trace
        return [t[k] / t[k - 1] for k in range(1, len(t)) if t[k - 1] > 0.0]

    def record(self, update):
        self.update_trace.append(float(update))
        self.iterations = len(self.update_trace)

    def to_dict(self):
        return _jsonable(asdict(self))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _jsonable(x.item())
    return x
