"""Seeded experiment runner.

An experiment is a pure function of its ``ExperimentConfig``: trial ``i`` uses
the generator ``numpy.random.default_rng(seed ^ i)`` whatever the number of
workers. Outputs in ``config.out``:

``trials.jsonl``
    one JSON object per trial (sorted keys), tagged with config hash and seed;
    byte-identical across reruns.
``summary.csv``
    ``config_hash,seed,metric,count,mean,stddev,wilson_low,wilson_high,flag``.
``timing.jsonl``
    wall-clock seconds per trial, kept apart so the records stay reproducible.

Config files are flat ``key = value`` lines; ``#`` starts a comment. Keys match
the ``ExperimentConfig`` fields.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from . import estimator, lowerbound, overlap
from .measurement import all_bases, outcome_distribution, write_shots
from .qstate import StateSpec, make_state, num_qubits, pauli_decompose_dict, partial_trace

KINDS = ("tomo", "overlap", "lowerbound", "oracle")

# fields that do not influence results and are excluded from the config hash
_NON_SEMANTIC = ("out", "workers")


def empirical_distribution(samples: Sequence[int], num_symbols: int | None = None) -> np.ndarray:
    """Frequency of each symbol ``0 .. num_symbols - 1`` among ``samples``."""
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0:
        raise ValueError("empirical distribution of an empty sample")
    if samples.min() < 0:
        raise ValueError("symbols must be non-negative integers")
    counts = np.bincount(samples, minlength=num_symbols or 0)
    if num_symbols is not None and counts.size > num_symbols:
        raise ValueError(f"symbol {samples.max()} outside alphabet of size {num_symbols}")
    return counts / samples.size


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return math.nan, math.nan
    ci = binomtest(successes, trials).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _parse_subsets(text: str) -> tuple[tuple[int, ...], ...]:
    # "0-1;2-3" -> ((0, 1), (2, 3))
    return tuple(tuple(int(i) for i in part.split("-")) for part in text.split(";") if part.strip())


def _format_subsets(subsets) -> str:
    return ";".join("-".join(str(i) for i in s) for s in subsets)


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """All inputs of an experiment.

    ``m`` overrides the per-basis shot budget of ``tomo`` and the per-column
    sample count of ``lowerbound``; ``total_shots`` overrides the ``overlap``
    budget. ``subsets`` selects partial mode for ``overlap`` and the marginals
    reported by ``oracle``. ``n_list`` switches ``lowerbound`` to the scaling
    experiment.
    """

    kind: str
    state: str = "maximally_mixed"
    n: int = 1
    k: int = 1
    epsilon: float = 0.2
    delta: float = 0.1
    trials: int = 1
    seed: int = 0
    out: str = "results"
    m: int | None = None
    total_shots: int | None = None
    subsets: tuple[tuple[int, ...], ...] | None = None
    bases: tuple[str, ...] | None = None
    n_list: tuple[int, ...] | None = None
    project_to_physical: bool = False
    save_shots: bool = False
    save_estimates: bool = False
    include_smaller: bool = False
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        if self.total_shots is not None and self.total_shots < 1:
            raise ValueError("total_shots must be >= 1")
        if self.kind == "lowerbound":
            if not 0 < self.epsilon < 0.5:
                raise ValueError("lowerbound needs epsilon in (0, 1/2)")
            if not 0 < self.delta < 1:
                raise ValueError("delta must lie in (0, 1)")
            if self.n < 1:
                raise ValueError("n must be >= 1")
            return
        # state-based kinds
        spec = self.state_spec()
        if spec.n != self.n:
            raise ValueError(f"state {self.state!r} has {spec.n} qubits, config says n={self.n}")
        if self.kind == "tomo":
            estimator.TomographyPlan(self.n, self.epsilon, self.delta, self.m or 1)
        elif self.kind == "overlap":
            self.overlap_plan()

    def state_spec(self) -> StateSpec:
        return StateSpec.parse(self.state, self.n)

    def tomography_plan(self) -> estimator.TomographyPlan:
        if self.m is not None:
            return estimator.TomographyPlan(self.n, self.epsilon, self.delta, self.m)
        return estimator.TomographyPlan.from_targets(self.n, self.epsilon, self.delta)

    def overlap_plan(self) -> overlap.OverlapPlan:
        plan = overlap.OverlapPlan.from_targets(
            self.n, self.k, self.epsilon, self.delta, self.subsets, self.include_smaller
        )
        if self.total_shots is not None:
            plan = dataclasses.replace(plan, total_shots=self.total_shots)
        return plan

    def lowerbound_m(self) -> int:
        if self.m is not None:
            return self.m
        return lowerbound.required_samples_single(self.epsilon, min(self.delta / self.n, 0.2499))

    # -- serialization -----------------------------------------------------

    def to_items(self) -> dict[str, str]:
        items = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "subsets":
                v = _format_subsets(v)
            elif f.name in ("bases", "n_list"):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            items[f.name] = str(v)
        return items

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in sorted(self.to_items().items()))

    def config_hash(self) -> str:
        items = {k: v for k, v in self.to_items().items() if k not in _NON_SEMANTIC}
        text = "".join(f"{k}={v}\n" for k, v in sorted(items.items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @classmethod
    def from_items(cls, items: dict[str, str]) -> "ExperimentConfig":
        types = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in items.items():
            if raw is None:
                continue
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            raw = str(raw).strip()
            if key in ("n", "k", "trials", "seed", "m", "total_shots", "workers"):
                kwargs[key] = int(raw)
            elif key in ("epsilon", "delta"):
                kwargs[key] = float(raw)
            elif key in ("project_to_physical", "save_shots", "save_estimates", "include_smaller"):
                kwargs[key] = _parse_bool(raw)
            elif key == "subsets":
                kwargs[key] = _parse_subsets(raw)
            elif key == "bases":
                kwargs[key] = tuple(b.strip() for b in raw.split(",") if b.strip())
            elif key == "n_list":
                kwargs[key] = tuple(int(x) for x in raw.split(",") if x.strip())
            else:
                kwargs[key] = raw
        if "kind" not in kwargs:
            raise ValueError("config is missing 'kind'")
        return cls(**kwargs)


def parse_config_text(text: str) -> dict[str, str]:
    items = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        items[key] = value
    return items


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    items = parse_config_text(Path(path).read_text())
    items.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_items(items)


# --------------------------------------------------------------------------
# Trials

def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(seed ^ index)


def _run_trial(config: ExperimentConfig, index: int) -> tuple[dict, dict]:
    """Returns ``(record, extras)``; extras hold bulky optional artifacts."""
    rng = trial_rng(config.seed, index)
    extras: dict = {}
    if config.kind == "tomo":
        rho = make_state(config.state_spec())
        plan = config.tomography_plan()
        _, diag = estimator.run_full_tomography(
            rho, plan, rng, physical=config.project_to_physical, keep_shots=config.save_shots
        )
        if config.save_shots:
            extras["shots"] = diag["shots_record"]
        record = {
            "trace_error": diag["trace_error"],
            "frobenius_error": diag["frobenius_error"],
            "success": diag["trace_error"] < config.epsilon,
            "shots": diag["shots"],
        }
    elif config.kind == "overlap":
        rho = make_state(config.state_spec())
        plan = config.overlap_plan()
        shots = overlap.sample_random_shots(rho, plan.total_shots, rng)
        ests = overlap.run_overlap(rho, plan, rng, shots=shots)
        if config.save_shots:
            extras["shots"] = shots
        if config.save_estimates:
            extras["estimates"] = [e.to_record() for e in ests]
        errs = [e.trace_error for e in ests]
        record = {
            "trace_error": max(errs),
            "mean_trace_error": float(np.mean(errs)),
            "subsets": len(ests),
            "success": overlap.all_within(ests, config.epsilon),
            "shots": plan.total_shots,
        }
    elif config.kind == "lowerbound":
        m = config.lowerbound_m()
        ok = lowerbound.simulate_decoding(config.n, config.epsilon, m, 1, rng)[0]
        record = {
            "correct": int(ok.sum()),
            "success": bool(ok.all()),
            "shots": m,
        }
    else:
        raise ValueError(f"kind {config.kind!r} has no trials")
    record["success"] = bool(record["success"])
    return record, extras


def _timed_trial(args) -> tuple[dict, dict, float]:
    config, index = args
    t0 = time.perf_counter()
    record, extras = _run_trial(config, index)
    return record, extras, time.perf_counter() - t0


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def summarize(records: Sequence[dict], config_hash: str, seed: int) -> list[dict]:
    """Mean/stddev per numeric metric plus a Wilson interval for ``success``."""
    metrics = sorted(
        {k for r in records for k, v in r.items() if isinstance(v, (int, float)) and k not in ("trial", "seed")}
    )
    if "success" not in metrics:
        metrics.append("success")
    rows = []
    for name in metrics:
        vals = np.array([float(r[name]) for r in records if name in r])
        row = {
            "config_hash": config_hash,
            "seed": seed,
            "metric": name,
            "count": int(vals.size),
            "mean": float(vals.mean()) if vals.size else math.nan,
            "stddev": float(vals.std(ddof=1)) if vals.size > 1 else (0.0 if vals.size else math.nan),
            "wilson_low": "",
            "wilson_high": "",
            "flag": "" if vals.size else "empty",
        }
        if name == "success":
            lo, hi = wilson_interval(int(vals.sum()), int(vals.size))
            row["wilson_low"], row["wilson_high"] = lo, hi
        rows.append(row)
    return rows


SUMMARY_FIELDS = ["config_hash", "seed", "metric", "count", "mean", "stddev", "wilson_low", "wilson_high", "flag"]


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def write_summary(path: Path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})


def write_scaling_csv(path: Path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["n", "m_star", "trials", "success_rate", "stderr"], lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[dict]
    summary: list[dict]
    extra: dict = field(default_factory=dict)

    def metric(self, name: str) -> dict:
        return next(r for r in self.summary if r["metric"] == name)


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run ``config.trials`` trials (or the oracle report / scaling table).

    With ``write`` the result files are created under ``config.out``.
    """
    out = Path(config.out)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(config.to_text())
    chash = config.config_hash()

    if config.kind == "oracle":
        report = oracle_report(config.state_spec(), config.subsets or (), config.bases)
        if write:
            (out / "oracle.json").write_text(json.dumps(report, sort_keys=True, indent=1) + "\n")
        return ExperimentResult(config, [], [], {"oracle": report})

    if config.kind == "lowerbound" and config.n_list:
        rows = lowerbound.scaling_experiment(
            config.n_list, config.epsilon, config.delta, np.random.default_rng(config.seed), max(config.trials, 2000)
        )
        if write:
            write_scaling_csv(out / "scaling.csv", rows)
        return ExperimentResult(config, [], [], {"scaling": rows})

    jobs = [(config, i) for i in range(config.trials)]
    if config.workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_timed_trial, jobs))
    else:
        results = [_timed_trial(j) for j in jobs]

    records = []
    for i, (record, _, _) in enumerate(results):
        records.append({"trial": i, "config_hash": chash, "seed": config.seed, **record})
    summary = summarize(records, chash, config.seed)

    if write:
        with open(out / "trials.jsonl", "w", newline="\n") as fh:
            fh.writelines(_dump(r) + "\n" for r in records)
        with open(out / "timing.jsonl", "w", newline="\n") as fh:
            fh.writelines(_dump({"trial": i, "wall_time": t}) + "\n" for i, (_, _, t) in enumerate(results))
        write_summary(out / "summary.csv", summary)
        if config.save_shots:
            (out / "shots").mkdir(exist_ok=True)
            for i, (_, extras, _) in enumerate(results):
                if "shots" in extras:
                    write_shots(out / "shots" / f"trial_{i:05d}.tsv", extras["shots"])
        if config.save_estimates:
            with open(out / "estimates.jsonl", "w", newline="\n") as fh:
                for i, (_, extras, _) in enumerate(results):
                    for est in extras.get("estimates", []):
                        fh.write(_dump({"trial": i, **est}) + "\n")
    return ExperimentResult(config, records, summary)


def load_records(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def report(trials_path: str | Path, out_path: str | Path | None = None) -> list[dict]:
    """Re-aggregate a saved ``trials.jsonl`` into summary rows (and optionally CSV)."""
    records = load_records(trials_path)
    chash = records[0]["config_hash"] if records else ""
    seed = records[0]["seed"] if records else ""
    if any(r.get("config_hash") != chash for r in records):
        raise ValueError("trial records come from different configurations")
    rows = summarize(records, chash, seed)
    if out_path is not None:
        write_summary(Path(out_path), rows)
    return rows


# --------------------------------------------------------------------------
# Ground truth

def _matrix_pairs(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def oracle_report(
    spec: StateSpec | str,
    subsets: Sequence[Sequence[int]] = (),
    bases: Sequence[str] | None = None,
    n: int | None = None,
) -> dict:
    """Exact Pauli expectations, marginals and outcome distributions of a test state.

    ``bases`` defaults to all ``3**n`` bases when n <= 4, otherwise none.
    """
    rho = make_state(spec, n)
    n = num_qubits(rho)
    if bases is None:
        bases = all_bases(n) if n <= 4 else []
    return {
        "state": str(spec),
        "n": n,
        "expectations": {p: round(v, 15) + 0.0 for p, v in pauli_decompose_dict(rho).items()},
        "marginals": {
            "-".join(map(str, s)): _matrix_pairs(partial_trace(rho, s)) for s in subsets
        },
        "distributions": {b: outcome_distribution(rho, b).tolist() for b in bases},
    }
