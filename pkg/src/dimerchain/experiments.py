"""
Parameter sweeps that regenerate the figure data as CSV tables.

Each experiment expands its config into an ordered list of grid points,
evaluates them on a thread pool and writes rows back in grid order, so the
CSV body depends only on the config.
"""

from __future__ import annotations

import enum
import json
import logging
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .baseline import AttachedSystemSpec, run_attaching
from .config import ExperimentConfig, ExperimentKind
from .errors import DimerChainError
from .freefermion import (
    EvenVariant,
    adjacency_matrix,
    spectrum_formula_even,
    spectrum_formula_odd,
    spectrum_numeric,
)
from .hamiltonian import Model
from .protocol import Outcome, ProtocolRun

log = logging.getLogger(__name__)

COLUMNS = {
    ExperimentKind.THETA_DELTA_MAP: ["theta", "delta", "t_star", "probability", "concurrence", "status"],
    ExperimentKind.PROJECTION_COMPARE: ["n_sites", "outcome", "t_star", "probability", "concurrence", "status"],
    ExperimentKind.BASELINE_COMPARE_XX: ["n_sites", "scheme", "t_star", "concurrence", "status"],
    ExperimentKind.BASELINE_COMPARE_XXZ: ["n_sites", "scheme", "t_star", "concurrence", "status"],
    ExperimentKind.XXZ_DELTA_SCAN: ["anisotropy", "t_star", "probability", "concurrence", "status"],
    ExperimentKind.FREEFERMION_CHECK: ["n_sites", "delta", "variant", "max_abs_deviation", "root_count", "status"],
    ExperimentKind.SINGLE_RUN: [
        "n_sites", "theta", "phi", "outcome", "t_star", "probability", "concurrence",
        "werner_p", "werner_residual", "status",
    ],
}

OK = "ok"
FAILED_PREFIX = "error:"
FF_TOLERANCE = 1e-9

Row = dict[str, Any]


@dataclass
class ExperimentResult:
    kind: ExperimentKind
    columns: list[str]
    rows: list[Row]

    @property
    def failures(self) -> list[Row]:
        return [r for r in self.rows if str(r["status"]).startswith(FAILED_PREFIX)]

    @property
    def ok(self) -> bool:
        return not self.failures


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return "nan"
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{float(value):.12g}"
    if isinstance(value, enum.Enum):
        return str(value.value)
    return str(value)


def failure_status(exc: Exception) -> str:
    return f"{FAILED_PREFIX}{type(exc).__name__}"


def _guard(fn: Callable[[], Row], blank: Row) -> Row:
    try:
        return fn()
    except DimerChainError as exc:
        log.debug("grid point failed: %s", exc)
        return {**blank, "status": failure_status(exc)}


def _protocol_row(cfg: ExperimentConfig, spec, angles, outcome, extra: Row) -> Row:
    def go() -> Row:
        ts = ProtocolRun(spec, angles, outcome, cfg.degenerate).find_tstar(cfg.t_max_for(spec), cfg.dt)
        return {**extra, "t_star": ts.t_star, "probability": ts.probability, "concurrence": ts.concurrence, "status": OK}

    return _guard(go, {**extra, "t_star": None, "probability": None, "concurrence": None})


def _tasks(cfg: ExperimentConfig) -> list[Callable[[], list[Row]]]:
    kind = cfg.kind
    tasks: list[Callable[[], list[Row]]] = []

    if kind is ExperimentKind.THETA_DELTA_MAP:
        for delta in cfg.delta_grid:
            for theta in cfg.theta_grid:
                tasks.append(
                    lambda d=delta, th=theta: [
                        _protocol_row(cfg, cfg.chain(delta=d), cfg.angles(th), cfg.outcome, {"theta": th, "delta": d})
                    ]
                )
    elif kind is ExperimentKind.PROJECTION_COMPARE:
        for n in cfg.n_grid:
            for outcome in cfg.outcomes:
                tasks.append(
                    lambda n=n, o=outcome: [
                        _protocol_row(cfg, cfg.chain(n_sites=n), cfg.angles(), o, {"n_sites": n, "outcome": o.value})
                    ]
                )
    elif kind in (ExperimentKind.BASELINE_COMPARE_XX, ExperimentKind.BASELINE_COMPARE_XXZ):
        for n in cfg.n_grid:
            tasks.append(lambda n=n: _baseline_rows(cfg, n))
    elif kind is ExperimentKind.XXZ_DELTA_SCAN:
        for aniso in cfg.anisotropy_grid:
            tasks.append(
                lambda a=aniso: [
                    _protocol_row(cfg, cfg.chain(anisotropy=a), cfg.angles(), cfg.outcome, {"anisotropy": a})
                ]
            )
    elif kind is ExperimentKind.FREEFERMION_CHECK:
        for n in cfg.n_grid:
            for delta in cfg.delta_grid:
                tasks.append(lambda n=n, d=delta: _freefermion_rows(cfg, n, d))
    elif kind is ExperimentKind.SINGLE_RUN:
        tasks.append(lambda: [_single_row(cfg)])
    return tasks


def _baseline_rows(cfg: ExperimentConfig, n: int) -> list[Row]:
    spec = cfg.chain(n_sites=n)
    rows = [
        {k: v for k, v in _protocol_row(cfg, spec, cfg.angles(), cfg.outcome, {"n_sites": n, "scheme": "rotation"}).items()
         if k != "probability"}
    ]
    for variant in cfg.baseline_variants:
        scheme = "attaching" if variant == "dimerized" else "attaching_uniform"
        blank = {"n_sites": n, "scheme": scheme, "t_star": None, "concurrence": None}

        def go(variant=variant, blank=blank) -> Row:
            att = AttachedSystemSpec(spec, cfg.attach_coupling, uniform_chain=variant == "uniform")
            ts = run_attaching(att, cfg.t_max_for(spec), cfg.dt, cfg.degenerate)
            return {**blank, "t_star": ts.t_star, "concurrence": ts.concurrence, "status": OK}

        rows.append(_guard(go, blank))
    return rows


def _freefermion_rows(cfg: ExperimentConfig, n: int, delta: float) -> list[Row]:
    spec = cfg.chain(model=Model.XX, n_sites=n, delta=delta)
    status = lambda dev: OK if dev < FF_TOLERANCE else "mismatch"  # noqa: E731
    if n % 2:
        ref = spectrum_numeric(adjacency_matrix(spec)).lambdas
        dev = float(np.max(np.abs(spectrum_formula_odd(spec).lambdas - ref)))
        return [{"n_sites": n, "delta": delta, "variant": "odd", "max_abs_deviation": dev,
                 "root_count": None, "status": status(dev)}]
    report = spectrum_formula_even(spec)
    rows = []
    for variant in (EvenVariant.PRINTED, EvenVariant.COEFF2):
        dev = report.deviations[variant]
        rows.append({"n_sites": n, "delta": delta, "variant": f"even_{variant.value}", "max_abs_deviation": dev,
                     "root_count": report.roots.count, "status": status(dev)})
    return rows


def _single_row(cfg: ExperimentConfig) -> Row:
    spec = cfg.chain()
    blank = {"n_sites": spec.n_sites, "theta": cfg.theta, "phi": cfg.phi, "outcome": cfg.outcome.value,
             "t_star": None, "probability": None, "concurrence": None, "werner_p": None, "werner_residual": None}

    def go() -> Row:
        res = ProtocolRun(spec, cfg.angles(), cfg.outcome, cfg.degenerate).result(cfg.t_max_for(spec), cfg.dt)
        return {**blank, "t_star": res.t_star, "probability": res.outcome_probability,
                "concurrence": res.concurrence, "werner_p": res.werner_p,
                "werner_residual": res.werner_residual, "status": OK}

    return _guard(go, blank)


def run_experiment(cfg: ExperimentConfig, threads: int | None = None, echo: bool = False) -> ExperimentResult:
    """Evaluate every grid point; rows come back in grid order."""
    workers = threads or cfg.threads
    tasks = _tasks(cfg)
    columns = COLUMNS[cfg.kind]
    rows: list[Row] = []
    if workers <= 1:
        chunks = map(lambda task: task(), tasks)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        chunks = pool.map(lambda task: task(), tasks)
    try:
        for chunk in chunks:
            for row in chunk:
                rows.append(row)
                if echo:
                    print(" ".join(f"{c}={fmt(row.get(c))}" for c in columns), flush=True)
    finally:
        if workers > 1:
            pool.shutdown()
    return ExperimentResult(cfg.kind, columns, rows)


def csv_text(result: ExperimentResult) -> str:
    lines = [",".join(result.columns)]
    lines += [",".join(fmt(row.get(c)) for c in result.columns) for row in result.rows]
    return "\n".join(lines) + "\n"


def plot_script(result: ExperimentResult, csv_name: str) -> str:
    head = [
        "# gnuplot script regenerating the figure from the CSV next to it",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set ylabel 'concurrence'",
    ]
    kind = result.kind
    if kind is ExperimentKind.THETA_DELTA_MAP:
        body = [
            "set xlabel 'theta'", "set ylabel 'delta'", "set zlabel 'concurrence'",
            "set dgrid3d 30,30", "set pm3d",
            f"splot '{csv_name}' using 1:2:(strcol(6) eq 'ok' ? $5 : NaN) with lines title 'C(t*)'",
        ]
    elif kind is ExperimentKind.PROJECTION_COMPARE:
        body = ["set xlabel 'N'"] + [
            f"{'plot' if i == 0 else 'replot'} '{csv_name}' using 1:(strcol(2) eq '{o.value}' && strcol(6) eq 'ok' ? $5 : NaN) "
            f"with linespoints title '{o.value}'"
            for i, o in enumerate(Outcome)
        ]
    elif kind in (ExperimentKind.BASELINE_COMPARE_XX, ExperimentKind.BASELINE_COMPARE_XXZ):
        body = ["set xlabel 'N'"] + [
            f"{'plot' if i == 0 else 'replot'} '{csv_name}' using 1:(strcol(2) eq '{s}' && strcol(5) eq 'ok' ? $4 : NaN) "
            f"with linespoints title '{s}'"
            for i, s in enumerate(("rotation", "attaching", "attaching_uniform"))
        ]
    elif kind is ExperimentKind.XXZ_DELTA_SCAN:
        body = ["set xlabel 'anisotropy'",
                f"plot '{csv_name}' using 1:(strcol(5) eq 'ok' ? $4 : NaN) with linespoints title 'C(t*)'"]
    elif kind is ExperimentKind.FREEFERMION_CHECK:
        body = ["set xlabel 'N'", "set ylabel 'max |deviation|'", "set logscale y",
                f"plot '{csv_name}' using 1:($4 > 0 ? $4 : 1e-16) with points title 'formula vs numeric'"]
    else:
        body = [f"# single run: see {csv_name}"]
    return "\n".join(head + body) + "\n"


def write_outputs(result: ExperimentResult, cfg: ExperimentConfig, prefix: str | Path) -> dict[str, Path]:
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": prefix.with_name(prefix.name + ".csv"),
        "plot": prefix.with_name(prefix.name + ".gp"),
        "meta": prefix.with_name(prefix.name + ".meta.json"),
    }
    with open(paths["csv"], "w", newline="\n") as fh:
        fh.write(csv_text(result))
    with open(paths["plot"], "w", newline="\n") as fh:
        fh.write(plot_script(result, paths["csv"].name))
    meta = {
        "kind": cfg.kind.value,
        "config": cfg.to_json(),
        "rows": len(result.rows),
        "failures": len(result.failures),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "package_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
    }
    paths["meta"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return paths
