"""Run configuration read from a TOML document.

Layout::

    bc_kind = "BC4"                  # BC1 BC2 BC3 BC3prime BC4 BC5 BC5prime BC1star BC2star
    method = "vortex_transport"      # grad_shafranov | vortex_transport | both

    [grid]
    r0 = 1.0
    r1 = 2.0
    nr = 65
    ntheta = 128

    [data]
    j0 = 0.0
    p1_at_0 = 0.0                    # optional, primed kinds only
    f0 = { mean = 0.1, cos = [0.0], sin = [0.02] }
    # f1, b0, p0, p1, T_shift take the same {mean, cos, sin} form

    [solver]
    picard_tol = 1e-10
    gs_max_iters = 200
    relaxation = 1.0
    fp_tol = 1e-10
    fp_max_iters = 100
    ode_steps_per_cell = 4
    modes = 42
    transport = "stream"
    smallness_cap = 0.25
    compat_tol = 1e-6

    [output]
    dir = "out"
    fields = true
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .boundary import BoundaryData
from .errors import ConfigError
from .fields import AnnulusGrid, BoundaryFunction
from .grad_shafranov import GSConfig
from .pressure import DEFAULT_COMPAT_TOL
from .transport import FixedPointConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

BC_KINDS = ("BC1", "BC2", "BC3", "BC3prime", "BC4", "BC5", "BC5prime", "BC1star", "BC2star")
METHODS = ("grad_shafranov", "vortex_transport", "both")
GS_KINDS = ("BC1", "BC2", "BC3", "BC3prime")
VT_KINDS = ("BC1star", "BC2star", "BC3", "BC3prime", "BC4", "BC5", "BC5prime")
# kinds both routes can solve; BC1/BC2 and their starred forms differ only by
# the unit offset of the through-flow
BOTH_KINDS = ("BC1", "BC1star", "BC2", "BC2star", "BC3", "BC3prime")
FUNCTION_KEYS = ("f0", "f1", "b0", "p0", "p1", "T_shift")

_SOLVER_KEYS = {
    "picard_tol", "gs_max_iters", "relaxation", "fp_tol", "fp_max_iters",
    "ode_steps_per_cell", "modes", "transport", "smallness_cap", "compat_tol",
}


@dataclass(frozen=True)
class RunConfig:
    bc_kind: str
    method: str
    grid: AnnulusGrid
    data: BoundaryData = field(default_factory=BoundaryData)
    gs: GSConfig = field(default_factory=GSConfig)
    fp: FixedPointConfig = field(default_factory=FixedPointConfig)
    compat_tol: float = DEFAULT_COMPAT_TOL
    output_dir: str | None = None
    write_fields: bool = True

    def __post_init__(self):
        check_compatibility(self.bc_kind, self.method)

    def methods(self):
        if self.method == "both":
            return ["grad_shafranov", "vortex_transport"]
        return [self.method]

    def with_grid(self, nr, ntheta):
        g = self.grid
        return dataclasses.replace(self, grid=AnnulusGrid(g.r0, g.r1, int(nr), int(ntheta)))

    def with_method(self, method):
        return dataclasses.replace(self, method=method)


def check_compatibility(bc_kind, method):
    if bc_kind not in BC_KINDS:
        raise ConfigError(f"unknown bc_kind {bc_kind!r}; expected one of {', '.join(BC_KINDS)}")
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    allowed = {"grad_shafranov": GS_KINDS, "vortex_transport": VT_KINDS, "both": BOTH_KINDS}[method]
    if bc_kind not in allowed:
        raise ConfigError(f"method {method} does not support {bc_kind}")


def parse_grid_spec(text):
    """'NRxNT' -> (nr, ntheta)."""
    try:
        nr, nt = text.lower().split("x")
        return int(nr), int(nt)
    except ValueError:
        raise ConfigError(f"grid must look like NRxNT, got {text!r}") from None


def _function(name, spec):
    if isinstance(spec, (int, float)):
        return BoundaryFunction(float(spec))
    if not isinstance(spec, dict):
        raise ConfigError(f"data.{name} must be a number or a {{mean, cos, sin}} table")
    unknown = set(spec) - {"mean", "cos", "sin"}
    if unknown:
        raise ConfigError(f"data.{name}: unknown keys {sorted(unknown)}")
    try:
        return BoundaryFunction(float(spec.get("mean", 0.0)), spec.get("cos", ()), spec.get("sin", ()))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"data.{name}: {exc}") from None


def _data(d):
    unknown = set(d) - set(FUNCTION_KEYS) - {"j0", "p1_at_0"}
    if unknown:
        raise ConfigError(f"[data]: unknown keys {sorted(unknown)}")
    kw = {k: _function(k, d[k]) for k in FUNCTION_KEYS if k in d}
    kw["j0"] = float(d.get("j0", 0.0))
    if "p1_at_0" in d:
        kw["p1_at_0"] = float(d["p1_at_0"])
    return BoundaryData(**kw)


def config_from_dict(doc):
    """Build a RunConfig from a parsed document; every problem is a ConfigError."""
    try:
        bc_kind = doc["bc_kind"]
        method = doc.get("method", "vortex_transport")
        g = doc.get("grid", {})
        grid = AnnulusGrid(
            float(g.get("r0", 1.0)), float(g.get("r1", 2.0)),
            int(g.get("nr", 65)), int(g.get("ntheta", 128)),
        )
        s = doc.get("solver", {})
        unknown = set(s) - _SOLVER_KEYS
        if unknown:
            raise ConfigError(f"[solver]: unknown keys {sorted(unknown)}")
        cap = float(s.get("smallness_cap", 0.25))
        modes = s.get("modes")
        gs = GSConfig(
            picard_tol=float(s.get("picard_tol", 1e-10)),
            max_iters=int(s.get("gs_max_iters", 200)),
            relaxation=float(s.get("relaxation", 1.0)),
            smallness_cap=cap,
            modes=modes,
        )
        fp = FixedPointConfig(
            fp_tol=float(s.get("fp_tol", 1e-10)),
            max_iters=int(s.get("fp_max_iters", 100)),
            ode_steps_per_cell=int(s.get("ode_steps_per_cell", 4)),
            modes=modes,
            smallness_cap=cap,
            transport=s.get("transport", "stream"),
        )
        out = doc.get("output", {})
        return RunConfig(
            bc_kind=bc_kind,
            method=method,
            grid=grid,
            data=_data(doc.get("data", {})),
            gs=gs,
            fp=fp,
            compat_tol=float(s.get("compat_tol", DEFAULT_COMPAT_TOL)),
            output_dir=out.get("dir"),
            write_fields=bool(out.get("fields", True)),
        )
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path):
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc)
