"""Monte Carlo harness: seeded trials over a sparsity or measurement-count sweep."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .measure import VARIANTS, MeasurementSet, gaussian_design, make_fourier_design, random_sparse_signal
from .pipeline import INVARIANCE_MODES, METHODS, RecoveryOptions, TrialRecord, recover
from .solver import SolverConfig

CSV_HEADER = [
    "sweep_value",
    "trials",
    "success_rate",
    "support_rate",
    "mean_rel_error",
    "mean_mu",
    "mean_cert_holds_for",
    "mean_iters",
    "mean_seconds",
]
BENCH_MODES = ("exact", "noise", "fourier")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _as_list(v) -> list[int]:
    return [int(a) for a in v] if isinstance(v, (list, tuple)) else [int(v)]


@dataclass
class ExperimentConfig:
    variant: str = "complex"
    n: int = 10
    N: int | list[int] = 40
    sparsity: int | list[int] = 1
    trials: int = 10
    eps: float = 0.0
    method: str = "convex"
    invariance: str = "none"
    autocorr: bool | None = None
    reweight: bool = True
    solver: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    timing: bool = False
    csv: str | None = None
    svg: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.invariance not in INVARIANCE_MODES:
            raise ConfigError(f"unknown invariance mode {self.invariance!r}")
        if self.n < 1 or self.trials < 1 or self.workers < 1:
            raise ConfigError("n, trials and workers must be positive")
        if self.eps < 0:
            raise ConfigError("eps must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if isinstance(self.N, list) and isinstance(self.sparsity, list):
            raise ConfigError("sweep either N or sparsity, not both")
        for name in ("N", "sparsity"):
            vals = _as_list(getattr(self, name))
            if not vals:
                raise ConfigError(f"{name} sweep is empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError(f"{name} sweep must be strictly increasing")
            if min(vals) < 0 or (name == "N" and min(vals) < 1):
                raise ConfigError(f"{name} values must be positive")
        if max(_as_list(self.sparsity)) > self.n:
            raise ConfigError("sparsity cannot exceed n")
        if self.variant == "fourier":
            bad = [N for N in _as_list(self.N) if N not in (self.n, 2 * self.n)]
            if bad:
                raise ConfigError(f"Fourier designs need N = n or N = 2n, got {bad}")
        try:
            self.solver_config = SolverConfig.from_dict(self.solver)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("solver_config", None)
        return d

    @property
    def sweep_name(self) -> str:
        return "N" if isinstance(self.N, list) else "sparsity"

    def sweep_points(self) -> list[tuple[int, int, int]]:
        """``(sweep_value, N, k)`` per sweep point."""
        if self.sweep_name == "N":
            k = int(self.sparsity)
            return [(N, N, k) for N in _as_list(self.N)]
        N = int(self.N)
        return [(k, N, k) for k in _as_list(self.sparsity)]

    def options(self) -> RecoveryOptions:
        return RecoveryOptions(self.method, self.invariance, self.autocorr, self.reweight, self.solver_config)

    def check_mode(self, mode: str) -> None:
        if mode not in BENCH_MODES:
            raise ConfigError(f"unknown bench mode {mode!r}")
        if mode == "exact" and self.eps != 0:
            raise ConfigError("bench exact needs eps = 0")
        if mode == "noise" and self.eps <= 0:
            raise ConfigError("bench noise needs eps > 0")
        if mode == "fourier" and self.variant != "fourier":
            raise ConfigError("bench fourier needs variant 'fourier'")
        if mode != "fourier" and self.variant == "fourier":
            raise ConfigError("Fourier designs are benchmarked with bench fourier")


def trial_rng(seed: int, sweep_index: int, trial: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, sweep index, trial)``."""
    ss = np.random.SeedSequence([int(seed), int(sweep_index), int(trial)])
    return np.random.Generator(np.random.Philox(ss))


def make_trial(config: ExperimentConfig, sweep_index: int, trial: int, N: int, k: int) -> MeasurementSet:
    rng = trial_rng(config.seed, sweep_index, trial)
    n = config.n
    complex_signal = config.variant == "complex"
    if config.variant == "fourier":
        q = make_fourier_design(n, N)
    else:
        q = gaussian_design(n, N, config.variant != "real", rng)
    x0 = random_sparse_signal(n, k, complex_signal, rng)
    noise_seed = int(rng.integers(0, 2**63))
    return MeasurementSet.generate(config.variant, q, x0, config.eps, noise_seed)


def _run_one(args) -> tuple[int, int, TrialRecord]:
    config, si, t, N, k = args
    ms = make_trial(config, si, t, N, k)
    rec = recover(ms, config.options(), seed=(config.seed, si, t))
    return si, t, rec.record


@dataclass
class SweepRow:
    sweep_value: int
    trials: int
    success_rate: float
    support_rate: float
    mean_rel_error: float
    mean_mu: float
    mean_cert_holds_for: float
    mean_iters: float
    mean_seconds: float

    def cells(self) -> list[str]:
        return [str(self.sweep_value), str(self.trials)] + [
            _fmt(getattr(self, name)) for name in CSV_HEADER[2:]
        ]


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.9g}"


@dataclass
class BenchResult:
    config: ExperimentConfig
    rows: list[SweepRow]
    records: dict[tuple[int, int], TrialRecord]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows:
            w.writerow(row.cells())
        return buf.getvalue()


def _aggregate(value: int, recs: list[TrialRecord], timing: bool) -> SweepRow:
    errs = [r.relative_error for r in recs if r.relative_error is not None and math.isfinite(r.relative_error)]
    return SweepRow(
        sweep_value=value,
        trials=len(recs),
        success_rate=float(np.mean([r.exact_success for r in recs])),
        support_rate=float(np.mean([r.support_success for r in recs])),
        mean_rel_error=float(np.mean(errs)) if errs else float("nan"),
        mean_mu=float(np.mean([r.mu for r in recs])),
        mean_cert_holds_for=float(np.mean([r.cert_holds_for for r in recs])),
        mean_iters=float(np.mean([r.iterations for r in recs])),
        mean_seconds=float(np.mean([r.seconds for r in recs])) if timing else float("nan"),
    )


def run_monte_carlo(config: ExperimentConfig, progress=None) -> BenchResult:
    """Run every trial of every sweep point and aggregate per point.

    Results are keyed by ``(sweep index, trial)`` so aggregation does not
    depend on execution order. ``mean_seconds`` is written as ``nan``
    unless ``config.timing`` is set, keeping the CSV reproducible.
    """
    points = config.sweep_points()
    jobs = [(config, si, t, N, k) for si, (_, N, k) in enumerate(points) for t in range(config.trials)]
    records: dict[tuple[int, int], TrialRecord] = {}
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for si, t, rec in pool.map(_run_one, jobs, chunksize=4):
                records[si, t] = rec
    else:
        for job in jobs:
            si, t, rec = _run_one(job)
            records[si, t] = rec
            if progress is not None:
                progress(si, t, rec)
    rows = [
        _aggregate(value, [records[si, t] for t in range(config.trials)], config.timing)
        for si, (value, _, _) in enumerate(points)
    ]
    return BenchResult(config, rows, records)
