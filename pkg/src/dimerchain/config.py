"""
Experiment configuration files.

A config is a JSON object. Every key is optional except that the experiment
kind must be known (from the ``kind`` key or the CLI subcommand). Unknown keys
are rejected.

Defaults
--------
=================  =====================================================
key                default
=================  =====================================================
model              ``XXZ`` for xxz_delta_scan / baseline_compare_xxz, else ``XX``
N                  8 (theta_delta_map, single_run), 10 (xxz_delta_scan)
J                  1.0
delta              0.8 for XX, 0.75 for XXZ
anisotropy         0.5 for baseline_compare_xxz, else 0.0
theta, phi         pi/2, 0
outcome            ``P00``
t_max              ``4 N / J`` (``null``)
dt                 0.02
degenerate         ``min_sz`` for xxz_delta_scan, else ``error``
theta_grid         0..pi step pi/16 (``{"start":0,"stop":1,"step":0.0625,"units":"pi"}``)
delta_grid         0.1..0.9 step 0.1; freefermion_check: [0, 0.25, 0.5, 0.8, 0.95]
anisotropy_grid    -2..2 step 0.5
n_grid             projection_compare [4,6,8,10]; baseline_* [4,6,8];
                   freefermion_check [3..10]
outcomes           all four for projection_compare
baseline_variants  ``["dimerized", "uniform"]``
attach_coupling    ``null`` (strong bond ``J (1 + delta)``)
output             ``results/<kind>``
threads            1
=================  =====================================================

Grids are either explicit lists or ``{"start", "stop", "step"}`` objects
(inclusive of ``stop``); ``"units": "pi"`` multiplies every value by pi.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .engine import DegeneracyPolicy
from .hamiltonian import ChainSpec, Model
from .protocol import Outcome, RotationAngles


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration files."""


class ExperimentKind(str, enum.Enum):
    THETA_DELTA_MAP = "theta_delta_map"
    PROJECTION_COMPARE = "projection_compare"
    BASELINE_COMPARE_XX = "baseline_compare_xx"
    XXZ_DELTA_SCAN = "xxz_delta_scan"
    BASELINE_COMPARE_XXZ = "baseline_compare_xxz"
    FREEFERMION_CHECK = "freefermion_check"
    SINGLE_RUN = "single_run"

    @property
    def is_protocol(self) -> bool:
        return self is not ExperimentKind.FREEFERMION_CHECK


ALLOWED_KEYS = {
    "kind", "model", "N", "J", "delta", "anisotropy", "theta", "phi", "outcome",
    "t_max", "dt", "degenerate", "theta_grid", "delta_grid", "anisotropy_grid",
    "n_grid", "outcomes", "baseline_variants", "attach_coupling", "output", "threads",
}

BASELINE_VARIANTS = ("dimerized", "uniform")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    model: Model
    n_sites: int
    j_coupling: float
    delta: float
    anisotropy: float
    theta: float
    phi: float
    outcome: Outcome
    t_max: float | None
    dt: float
    degenerate: DegeneracyPolicy
    theta_grid: tuple[float, ...]
    delta_grid: tuple[float, ...]
    anisotropy_grid: tuple[float, ...]
    n_grid: tuple[int, ...]
    outcomes: tuple[Outcome, ...]
    baseline_variants: tuple[str, ...]
    attach_coupling: float | None
    output: str
    threads: int = 1
    raw: dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def chain(self, **overrides: Any) -> ChainSpec:
        values = dict(
            model=self.model,
            n_sites=self.n_sites,
            j_coupling=self.j_coupling,
            delta=self.delta,
            anisotropy=self.anisotropy,
        )
        values.update(overrides)
        return ChainSpec(**values)

    def angles(self, theta: float | None = None) -> RotationAngles:
        return RotationAngles(self.theta if theta is None else theta, self.phi)

    def t_max_for(self, spec: ChainSpec) -> float:
        return self.t_max if self.t_max is not None else 4.0 * spec.n_sites / spec.j_coupling

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("raw")
        return json.loads(json.dumps(d, default=lambda o: o.value if isinstance(o, enum.Enum) else str(o)))


def expand_grid(value: Any, name: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        values = [float(value)]
    elif isinstance(value, list):
        values = [float(v) for v in value]
    elif isinstance(value, dict):
        extra = set(value) - {"start", "stop", "step", "units"}
        if extra:
            raise ConfigError(f"{name}: unknown grid keys {sorted(extra)}")
        try:
            start, stop, step = float(value["start"]), float(value["stop"]), float(value["step"])
        except KeyError as exc:
            raise ConfigError(f"{name}: grid object needs start, stop and step") from exc
        if step <= 0:
            raise ConfigError(f"{name}: step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + i * step, 12) for i in range(max(count, 0))]
        if value.get("units", None) == "pi":
            values = [v * math.pi for v in values]
        elif value.get("units") not in (None, "pi"):
            raise ConfigError(f"{name}: units must be 'pi' if given")
    else:
        raise ConfigError(f"{name}: expected a number, list or grid object")
    if not values:
        raise ConfigError(f"{name}: grid is empty")
    return tuple(values)


def _kind_defaults(kind: ExperimentKind) -> dict[str, Any]:
    xxz = kind in (ExperimentKind.XXZ_DELTA_SCAN, ExperimentKind.BASELINE_COMPARE_XXZ)
    n_grid = {
        ExperimentKind.PROJECTION_COMPARE: [4, 6, 8, 10],
        ExperimentKind.BASELINE_COMPARE_XX: [4, 6, 8],
        ExperimentKind.BASELINE_COMPARE_XXZ: [4, 6, 8],
        ExperimentKind.FREEFERMION_CHECK: list(range(3, 11)),
    }.get(kind, [8])
    delta_grid: Any = {"start": 0.1, "stop": 0.9, "step": 0.1}
    if kind is ExperimentKind.FREEFERMION_CHECK:
        delta_grid = [0.0, 0.25, 0.5, 0.8, 0.95]
    return {
        "model": "XXZ" if xxz else "XX",
        "N": 10 if kind is ExperimentKind.XXZ_DELTA_SCAN else 8,
        "J": 1.0,
        "anisotropy": 0.5 if kind is ExperimentKind.BASELINE_COMPARE_XXZ else 0.0,
        "theta": math.pi / 2,
        "phi": 0.0,
        "outcome": "P00",
        "t_max": None,
        "dt": 0.02,
        "degenerate": "min_sz" if kind is ExperimentKind.XXZ_DELTA_SCAN else "error",
        "theta_grid": {"start": 0, "stop": 1, "step": 0.0625, "units": "pi"},
        "delta_grid": delta_grid,
        "anisotropy_grid": {"start": -2, "stop": 2, "step": 0.5},
        "n_grid": n_grid,
        "outcomes": [o.value for o in Outcome],
        "baseline_variants": list(BASELINE_VARIANTS),
        "attach_coupling": None,
        "output": f"results/{kind.value}",
        "threads": 1,
    }


def build_config(data: dict[str, Any], kind: str | None = None) -> ExperimentConfig:
    """Validate a parsed config object and apply defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - ALLOWED_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    given = data.get("kind")
    if kind is not None and given is not None and given != kind:
        raise ConfigError(f"config kind '{given}' does not match subcommand '{kind}'")
    try:
        k = ExperimentKind(kind or given)
    except ValueError as exc:
        raise ConfigError(f"kind: unknown experiment kind {kind or given!r}") from exc
    v = _kind_defaults(k)
    v.update(data)
    if "delta" not in data:
        v["delta"] = 0.75 if v["model"] == "XXZ" else 0.8

    def num(key: str, cast=float):
        try:
            return cast(v[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: expected a number, got {v[key]!r}") from exc

    try:
        model = Model(v["model"])
        outcome = Outcome(v["outcome"])
        outcomes = tuple(Outcome(o) for o in v["outcomes"])
        degenerate = DegeneracyPolicy(v["degenerate"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    variants = tuple(v["baseline_variants"])
    if not variants or any(x not in BASELINE_VARIANTS for x in variants):
        raise ConfigError(f"baseline_variants: choose from {list(BASELINE_VARIANTS)}")
    if not outcomes:
        raise ConfigError("outcomes: must not be empty")
    n_grid_raw = v["n_grid"] if isinstance(v["n_grid"], list) else [v["n_grid"]]
    if not n_grid_raw or any(isinstance(n, bool) or int(n) != n for n in n_grid_raw):
        raise ConfigError("n_grid: expected a non-empty list of integers")
    n_sites = num("N", int)
    if n_sites != v["N"]:
        raise ConfigError("N: expected an integer")
    t_max = None if v["t_max"] is None else num("t_max")
    dt = num("dt")
    if dt <= 0:
        raise ConfigError("dt: step must be positive")
    if t_max is not None and t_max <= 0:
        raise ConfigError("t_max: must be positive")
    threads = num("threads", int)
    if threads < 1:
        raise ConfigError("threads: must be >= 1")
    attach = None if v["attach_coupling"] is None else num("attach_coupling")

    cfg = ExperimentConfig(
        kind=k,
        model=model,
        n_sites=n_sites,
        j_coupling=num("J"),
        delta=num("delta"),
        anisotropy=num("anisotropy"),
        theta=num("theta"),
        phi=num("phi"),
        outcome=outcome,
        t_max=t_max,
        dt=dt,
        degenerate=degenerate,
        theta_grid=expand_grid(v["theta_grid"], "theta_grid"),
        delta_grid=expand_grid(v["delta_grid"], "delta_grid"),
        anisotropy_grid=expand_grid(v["anisotropy_grid"], "anisotropy_grid"),
        n_grid=tuple(int(n) for n in n_grid_raw),
        outcomes=outcomes,
        baseline_variants=variants,
        attach_coupling=attach,
        output=str(v["output"]),
        threads=threads,
        raw=dict(data),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    try:
        cfg.chain()
        cfg.angles()
        for th in cfg.theta_grid:
            RotationAngles(th, cfg.phi)
        for d in cfg.delta_grid:
            if not 0 <= d < 1:
                raise ValueError(f"delta_grid value {d} outside [0, 1)")
    except ValueError as exc:
        raise ConfigError(f"validation: {exc}") from exc
    if cfg.attach_coupling is not None and cfg.attach_coupling <= 0:
        raise ConfigError("attach_coupling: must be positive")
    if not cfg.kind.is_protocol:
        if any(n < 2 for n in cfg.n_grid):
            raise ConfigError("n_grid: free-fermion checks need N >= 2")
        return
    sizes = cfg.n_grid if cfg.kind in _N_GRID_KINDS else (cfg.n_sites,)
    for n in sizes:
        if n < 4 or n % 2:
            raise ConfigError(f"N: protocol experiments need even N >= 4, got {n}")


_N_GRID_KINDS = {
    ExperimentKind.PROJECTION_COMPARE,
    ExperimentKind.BASELINE_COMPARE_XX,
    ExperimentKind.BASELINE_COMPARE_XXZ,
}


def load_config(path: str | Path, kind: str | None = None) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return build_config(data, kind)
