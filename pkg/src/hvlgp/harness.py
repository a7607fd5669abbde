"""Seeded batch experiments: sweeps over n, CSV output, summaries, and power-law fits."""
from __future__ import annotations

import csv
import io
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .engine import Acceptance, OpCount, RunConfig, Status, run
from .problems import ProblemKind

CSV_FIELDS = ["n", "trial", "seed", "status", "evaluations", "accepted", "t_max_nodes", "final_fitness"]
OUTPUT_ENV = "HVLGP_OUTPUT_DIR"

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, n: int, trial: int) -> int:
    """64-bit seed for one trial; depends only on its coordinates, not on scheduling."""
    h = _splitmix64(master_seed & _MASK64)
    h = _splitmix64(h ^ (n & _MASK64))
    return _splitmix64(h ^ (trial & _MASK64))


@dataclass(frozen=True)
class TrialRow:
    n: int
    trial: int
    seed: int
    status: str
    evaluations: int
    accepted: int
    t_max_nodes: int
    final_fitness: int


@dataclass(frozen=True)
class ExperimentConfig:
    template: RunConfig
    n_values: tuple[int, ...]
    trials_per_n: int
    master_seed: int = 0
    workers: int = 1
    output: Optional[str] = None
    name: str = "experiment"

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        if self.trials_per_n < 1:
            raise ValueError("trials_per_n must be >= 1")
        if not self.n_values or any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("n_values must be non-empty and strictly increasing")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for n in self.n_values:
            replace(self.template, n=n).validate()


@dataclass(frozen=True)
class SummaryRow:
    n: int
    trials: int
    optimal: int
    mean_evaluations: float   # over Optimal trials only
    std_evaluations: float    # sample (n-1) convention; 0 for a single trial
    stuck_fraction: float
    budget_fraction: float
    mean_t_max: float


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    intercept: float
    residual_norm: float
    n_values: tuple[int, ...] = field(default=())


def _run_trial(job: tuple[RunConfig, int]) -> TrialRow:
    cfg, trial = job
    res = run(cfg)
    return TrialRow(cfg.n, trial, cfg.seed, res.status.value, res.evaluations,
                    res.accepted, res.t_max, res.final_fitness)


def trial_configs(config: ExperimentConfig) -> list[tuple[RunConfig, int]]:
    return [
        (replace(config.template, n=n, seed=trial_seed(config.master_seed, n, t), trace_level=0), t)
        for n in config.n_values
        for t in range(config.trials_per_n)
    ]


def run_experiment(config: ExperimentConfig) -> tuple[list[TrialRow], list[SummaryRow]]:
    jobs = trial_configs(config)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (8 * config.workers))))
    else:
        rows = [_run_trial(j) for j in jobs]
    rows.sort(key=lambda r: (r.n, r.trial))
    summary = summarize(rows)
    if config.output:
        write_outputs(config.output, config.name, rows, summary)
    return rows, summary


def summarize(rows: Iterable[TrialRow]) -> list[SummaryRow]:
    by_n: dict[int, list[TrialRow]] = {}
    for r in rows:
        by_n.setdefault(r.n, []).append(r)
    if not by_n:
        raise ValueError("no rows to summarize")
    out = []
    for n in sorted(by_n):
        group = by_n[n]
        evals = [r.evaluations for r in group if r.status == Status.OPTIMAL.value]
        m = len(group)
        out.append(SummaryRow(
            n=n,
            trials=m,
            optimal=len(evals),
            mean_evaluations=statistics.fmean(evals) if evals else math.nan,
            std_evaluations=statistics.stdev(evals) if len(evals) > 1 else 0.0,
            stuck_fraction=sum(r.status == Status.STUCK.value for r in group) / m,
            budget_fraction=sum(r.status == Status.BUDGET_EXHAUSTED.value for r in group) / m,
            mean_t_max=statistics.fmean(r.t_max_nodes for r in group),
        ))
    return out


def fit_scaling_exponent(summary: Sequence[SummaryRow]) -> ScalingFit:
    """Least-squares slope of log(mean evaluations) against log(n).

    Only n values where every trial reached the optimum are used.
    """
    pts = [s for s in summary if s.optimal == s.trials and s.trials > 0]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 fully optimal n values, have {len(pts)}")
    x = np.log([s.n for s in pts])
    y = np.log([s.mean_evaluations for s in pts])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.linalg.norm(y - A @ np.array([slope, icpt])))
    return ScalingFit(float(slope), float(icpt), resid, tuple(s.n for s in pts))


def rows_to_csv(rows: Iterable[TrialRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([getattr(r, k) for k in CSV_FIELDS])
    return buf.getvalue()


def read_csv(path) -> list[TrialRow]:
    with open(path, newline="") as fh:
        return [
            TrialRow(int(d["n"]), int(d["trial"]), int(d["seed"]), d["status"], int(d["evaluations"]),
                     int(d["accepted"]), int(d["t_max_nodes"]), int(d["final_fitness"]))
            for d in csv.DictReader(fh)
        ]


def summary_to_csv(summary: Iterable[SummaryRow]) -> str:
    buf = io.StringIO()
    names = list(SummaryRow.__dataclass_fields__)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for s in summary:
        w.writerow([asdict(s)[k] for k in names])
    return buf.getvalue()


def emit_plot_data(summary: Iterable[SummaryRow], path) -> None:
    """Whitespace-separated ``n mean std`` lines, plus a comment header."""
    lines = ["# n mean_evaluations std_evaluations"]
    for s in summary:
        lines.append(f"{s.n} {s.mean_evaluations:.6g} {s.std_evaluations:.6g}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_outputs(directory, name: str, rows, summary) -> dict[str, Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": d / f"{name}.csv",
        "summary": d / f"{name}_summary.csv",
        "plot": d / f"{name}_plot.dat",
    }
    paths["csv"].write_text(rows_to_csv(rows))
    paths["summary"].write_text(summary_to_csv(summary))
    emit_plot_data(summary, paths["plot"])
    return paths


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "results")


def _template(problem, acceptance, ops, init, budget=0) -> RunConfig:
    return RunConfig(problem=problem, n=1 if init != "t-lopt" else 2, acceptance=acceptance,
                     ops=ops, init=init, budget=budget)


PRESETS: dict[str, dict] = {
    # GP-single on MAJORITY from 2n copies of ~x1, no budget and no size limit
    "fig2": dict(
        template=_template(ProblemKind.MAJORITY, Acceptance.NONSTRICT, OpCount.SINGLE, "adversarial-neg1"),
        n_values=(8, 16, 32, 64, 128), trials_per_n=50,
    ),
    # GP*-single on MAJORITY from unity initialization; stuck runs are certified
    "fig3": dict(
        template=_template(ProblemKind.MAJORITY, Acceptance.STRICT, OpCount.SINGLE, "unity"),
        n_values=(10, 20, 30, 40, 50), trials_per_n=100,
    ),
    "order-scaling": dict(
        template=_template(ProblemKind.ORDER, Acceptance.STRICT, OpCount.SINGLE, "unity"),
        n_values=(16, 32, 64, 128), trials_per_n=50,
    ),
    "tlopt-multi": dict(
        template=_template(ProblemKind.MAJORITY, Acceptance.STRICT, OpCount.MULTI, "t-lopt", budget=10**6),
        n_values=(20,), trials_per_n=100,
    ),
}


def preset(name: str, master_seed: int = 0, workers: int = 1, output: Optional[str] = None,
           **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kw = dict(PRESETS[name])
    kw.update(overrides)
    return ExperimentConfig(master_seed=master_seed, workers=workers, output=output, name=name, **kw)


def parse_kv(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        k, v = line.split("=", 1)
        out[k.strip().lower().replace("-", "_")] = v.strip()
    return out


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(v: str) -> bool:
    v = v.lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"not a boolean: {v!r}")


def run_config_from_kv(kv: dict[str, str]) -> RunConfig:
    known = {"problem", "n", "acceptance", "ops", "init", "seed", "budget", "stuck_detection", "trace_level"}
    extra = set(kv) - known
    if extra:
        raise ValueError(f"unknown run keys: {sorted(extra)}")
    if "problem" not in kv:
        raise ValueError("config needs 'problem'")
    return RunConfig(
        problem=kv["problem"],
        n=int(kv.get("n", 1)),
        acceptance=kv.get("acceptance", "nonstrict"),
        ops=kv.get("ops", "single"),
        init=kv.get("init", "unity"),
        seed=int(kv.get("seed", 0)),
        budget=int(kv.get("budget", 0)),
        stuck_detection=_bool(kv.get("stuck_detection", "true")),
        trace_level=int(kv.get("trace_level", 0)),
    )


def experiment_from_kv(kv: dict[str, str]) -> ExperimentConfig:
    kv = dict(kv)
    exp_keys = {"n_values", "trials", "master_seed", "workers", "output", "name", "preset"}
    exp = {k: kv.pop(k) for k in list(kv) if k in exp_keys}
    if "preset" in exp:
        base = preset(exp.pop("preset"))
        template = base.template
        if kv:
            template = run_config_from_kv({**_template_kv(template), **kv})
        n_values, trials = base.n_values, base.trials_per_n
        name = base.name
    else:
        template = run_config_from_kv({**kv, "n": kv.get("n", "1")})
        n_values, trials, name = (), 1, "experiment"
    if "n_values" in exp:
        n_values = tuple(int(x) for x in exp["n_values"].replace(",", " ").split())
    if "trials" in exp:
        trials = int(exp["trials"])
    return ExperimentConfig(
        template=template,
        n_values=n_values,
        trials_per_n=trials,
        master_seed=int(exp.get("master_seed", 0)),
        workers=int(exp.get("workers", 1)),
        output=exp.get("output"),
        name=exp.get("name", name),
    )


def _template_kv(cfg: RunConfig) -> dict[str, str]:
    return {
        "problem": cfg.problem.value, "n": str(cfg.n), "acceptance": cfg.acceptance.value,
        "ops": cfg.ops.value, "init": cfg.init, "budget": str(cfg.budget),
        "stuck_detection": str(cfg.stuck_detection),
    }
