"""Replicate ensembles and the statistical studies built on them.

Every replicate ``r`` of a study grows its own graph from the stream
``make_rng(seed, r)`` and is observed at each checkpoint by a probe.  The
probes run in replicate order (or in a process pool whose results are put
back in replicate order), so reported numbers do not depend on the worker
count.
"""

from __future__ import annotations

import csv
import json
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from . import __version__
from .config_chain import ChainModel, extract_config
from .errors import ParameterError, SizeError
from .graph_core import GrowthParams, advance, make_rng, new_complete
from .logic.evaluate import eval_table
from .logic.syntax import Sentence
from .neighborhood import (classify, complete_census, extract_open_neighborhood,
                           initial_closed)

REPORT_SCHEMA = "capattach.report/1"
PILOT_OFFSET = 1_000_000  # pilot replicates use stream indices disjoint from main runs


@dataclass
class ExperimentConfig:
    m: int = 2
    checkpoints: tuple = (100,)
    replicates: int = 100
    seed: int = 0
    a: int = 1
    R: int = 1
    open_radii: tuple = ()
    sentences: tuple = ()
    out_dir: str | None = None
    workers: int = 1
    replicate_offset: int = 0

    def __post_init__(self):
        GrowthParams(self.m, self.seed)
        self.checkpoints = tuple(int(n) for n in self.checkpoints)
        self.open_radii = tuple(int(a) for a in self.open_radii)
        self.sentences = tuple(self.sentences)
        if self.replicates < 1:
            raise ParameterError("replicate count must be at least 1")
        if not self.checkpoints:
            raise ParameterError("at least one checkpoint is required")
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ParameterError(f"checkpoints must be strictly increasing: {self.checkpoints}")
        if self.checkpoints[0] < self.m + 1:
            raise ParameterError(f"checkpoints start at n = m+1 = {self.m + 1}")

    def to_json(self) -> dict:
        doc = asdict(self)
        # execution details; the output must not depend on them
        del doc["workers"], doc["out_dir"]
        doc["checkpoints"] = list(self.checkpoints)
        doc["open_radii"] = list(self.open_radii)
        doc["sentences"] = [{"id": sentence_id(s, i), "text": s.text}
                            for i, s in enumerate(self.sentences)]
        return doc


def sentence_id(s: Sentence, index: int) -> str:
    return s.name or f"s{index:03d}"


# -- replicate machinery ---------------------------------------------------

def _run_one(m, seed, checkpoints, probe_factory, replicate):
    rng = make_rng(seed, replicate)
    g = new_complete(GrowthParams(m, seed), capacity=checkpoints[-1])
    probe = probe_factory()
    out = []
    for n in checkpoints:
        advance(g, n - g.n, rng)
        out.append(probe(g))
    return out


def run_replicates(cfg: ExperimentConfig, probe_factory, count=None, offset=None):
    """Per replicate, the list of probe values at each checkpoint."""
    count = cfg.replicates if count is None else count
    offset = cfg.replicate_offset if offset is None else offset
    job = partial(_run_one, cfg.m, cfg.seed, cfg.checkpoints, probe_factory)
    reps = range(offset, offset + count)
    if cfg.workers <= 1:
        return [job(r) for r in reps]
    with ProcessPoolExecutor(cfg.workers) as pool:
        return list(pool.map(job, reps, chunksize=max(1, count // (4 * cfg.workers))))


class ConfigProbe:
    def __init__(self, radii=()):
        self.radii = radii

    def __call__(self, g):
        opens = {a: extract_open_neighborhood(g, a).key.hex() for a in self.radii}
        return extract_config(g).key.hex(), opens


class SentenceProbe:
    def __init__(self, sentences):
        self.sentences = sentences

    def __call__(self, g):
        mat = g.adjacency_matrix()
        out = []
        for j, s in enumerate(self.sentences):
            try:
                out.append(eval_table(s, mat))
            except SizeError as exc:
                raise SizeError(f"sentence {sentence_id(s, j)} at n={g.n}: {exc}") from exc
        return tuple(out)


class ConvergenceProbe:
    """Class key, initial-closed flag and census monotonicity along one run."""

    def __init__(self, R, a):
        self.R, self.a = R, a
        self.cache = {}
        self.previous = None

    def __call__(self, g):
        census = complete_census(g, self.a, key_cache=self.cache)
        violations = 0
        if self.previous is not None:
            violations = sum(1 for k, c in self.previous.counts.items() if census.count(k) < c)
        self.previous = census
        key = classify(g, self.R)
        return key.digest(), initial_closed(g), violations, sum(census.counts.values())


# -- statistics -------------------------------------------------------------

def proportion(k: int, n: int) -> tuple[float, float]:
    """Estimate and standard error sqrt(p(1-p)/n)."""
    p = k / n
    return p, math.sqrt(p * (1 - p) / n)


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def frequencies(values) -> dict:
    counts = Counter(values)
    total = sum(counts.values())
    return {k: c / total for k, c in counts.items()}


def exact_law(chain: ChainModel) -> dict:
    """Stationary law keyed by configuration hex key."""
    if chain.stationary is None:
        raise ParameterError("chain has no stationary distribution; solve it first")
    return {s.key.hex(): float(p) for s, p in zip(chain.states, chain.stationary) if p}


# -- reports ---------------------------------------------------------------

@dataclass
class StatsReport:
    kind: str
    config: dict
    summary: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    version: str = __version__

    def to_json(self) -> dict:
        return {"schema": REPORT_SCHEMA, "kind": self.kind, "version": self.version,
                "config": self.config, "summary": self.summary, "tables": self.tables,
                "series": self.series}

    def write(self, out_dir, figures: bool = True) -> list[str]:
        """Write ``<kind>.json``, one CSV per table, ``<kind>_plotdata.json`` and PNG figures."""
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        path = os.path.join(out_dir, f"{self.kind}.json")
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=False)
        paths.append(path)
        for name, rows in self.tables.items():
            if not rows:
                continue
            path = os.path.join(out_dir, f"{self.kind}_{name}.csv")
            with open(path, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
            paths.append(path)
        path = os.path.join(out_dir, f"{self.kind}_plotdata.json")
        with open(path, "w") as fh:
            json.dump(self.series, fh, indent=1)
        paths.append(path)
        if figures:
            from .plotting import plot_series

            for name, spec in self.series.items():
                series = {k: (v["x"], v["y"]) for k, v in spec["series"].items()}
                errors = {k: v["err"] for k, v in spec["series"].items() if v.get("err")}
                paths.append(plot_series(series, os.path.join(out_dir, f"{self.kind}_{name}.png"),
                                         spec["xlabel"], spec["ylabel"], spec.get("title", ""),
                                         errors=errors or None))
        return paths


def _config_rows(checkpoint, keys, exact, n_reps):
    counts = Counter(keys)
    rows = []
    for key, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        p, se = proportion(c, n_reps)
        rows.append({"checkpoint": checkpoint, "key": key, "estimate": p, "stderr": se,
                     "n_replicates": n_reps, "exact": exact.get(key, 0.0) if exact else ""})
    return rows


def sim_config_distribution(cfg: ExperimentConfig, chain: ChainModel | None = None) -> StatsReport:
    """Empirical configuration-type frequencies, compared with the exact stationary law."""
    exact = exact_law(chain) if chain is not None and chain.stationary is not None else None
    records = run_replicates(cfg, partial(ConfigProbe, cfg.open_radii))
    n_reps = len(records)
    report = StatsReport("configs", cfg.to_json())
    rows, tv_rows, open_rows = [], [], []
    for i, n in enumerate(cfg.checkpoints):
        keys = [rec[i][0] for rec in records]
        rows += _config_rows(n, keys, exact, n_reps)
        if exact is not None:
            tv_rows.append({"checkpoint": n, "tv": total_variation(frequencies(keys), exact),
                            "n_replicates": n_reps, "distinct_types": len(set(keys))})
        for a in cfg.open_radii:
            for row in _config_rows(n, [rec[i][1][a] for rec in records], None, n_reps):
                row.pop("exact")
                open_rows.append({"a": a, **row})
    report.tables = {"config_types": rows, "tv": tv_rows, "open_types": open_rows}
    if tv_rows:
        report.summary["tv_by_checkpoint"] = {r["checkpoint"]: r["tv"] for r in tv_rows}
        report.series["tv"] = {"xlabel": "n", "ylabel": "TV distance to stationary law",
                               "series": {"TV": {"x": [r["checkpoint"] for r in tv_rows],
                                                 "y": [r["tv"] for r in tv_rows]}}}
    if exact is not None:
        last = cfg.checkpoints[-1]
        top = sorted(exact, key=exact.get, reverse=True)[:8]
        emp = {r["key"]: r for r in rows if r["checkpoint"] == last}
        report.series["top_types"] = {
            "xlabel": "rank of exact stationary mass", "ylabel": "probability",
            "title": f"configuration types at n={last}",
            "series": {
                "exact": {"x": list(range(1, len(top) + 1)), "y": [exact[k] for k in top]},
                "empirical": {"x": list(range(1, len(top) + 1)),
                              "y": [emp[k]["estimate"] if k in emp else 0.0 for k in top],
                              "err": [emp[k]["stderr"] if k in emp else 0.0 for k in top]},
            }}
    return report


def tv_threshold(cfg: ExperimentConfig, chain: ChainModel, blocks: int = 4,
                 sd_multiplier: float = 5.0) -> dict:
    """Pilot calibration: ``blocks`` independent runs of ``cfg.replicates`` each.

    Returns the per-block TV distances at the last checkpoint and the
    threshold mean + ``sd_multiplier`` * sd.
    """
    exact = exact_law(chain)
    pilot = ExperimentConfig(**{**asdict(cfg), "checkpoints": (cfg.checkpoints[-1],)})
    records = run_replicates(pilot, ConfigProbe, count=blocks * cfg.replicates,
                             offset=PILOT_OFFSET)
    tvs = []
    for b in range(blocks):
        block = records[b * cfg.replicates:(b + 1) * cfg.replicates]
        tvs.append(total_variation(frequencies([rec[0][0] for rec in block]), exact))
    mean, sd = float(np.mean(tvs)), float(np.std(tvs, ddof=1))
    return {"block_tv": tvs, "mean": mean, "sd": sd,
            "threshold": mean + sd_multiplier * sd, "blocks": blocks,
            "replicates_per_block": cfg.replicates}


def sim_sentence_probability(cfg: ExperimentConfig) -> StatsReport:
    """Empirical P(G_n satisfies phi) per checkpoint, with the n -> 2n Cauchy diagnostic."""
    sentences = list(cfg.sentences)
    if not sentences:
        raise ParameterError("no sentences configured")
    records = run_replicates(cfg, partial(SentenceProbe, sentences))
    n_reps = len(records)
    report = StatsReport("sentences", cfg.to_json())
    est = {}
    rows = []
    for i, n in enumerate(cfg.checkpoints):
        for j, s in enumerate(sentences):
            k = sum(rec[i][j] for rec in records)
            p, se = proportion(k, n_reps)
            est[(n, j)] = (p, se)
            rows.append({"checkpoint": n, "sentence_id": sentence_id(s, j), "estimate": p,
                         "stderr": se, "n_replicates": n_reps, "depth": s.depth,
                         "variables": s.variable_count})
    cauchy = []
    for n in cfg.checkpoints:
        if 2 * n not in cfg.checkpoints:
            continue
        for j, s in enumerate(sentences):
            (p1, s1), (p2, s2) = est[(n, j)], est[(2 * n, j)]
            pooled = math.sqrt(s1**2 + s2**2)
            delta = abs(p1 - p2)
            cauchy.append({"n": n, "two_n": 2 * n, "sentence_id": sentence_id(s, j),
                           "delta": delta, "pooled_stderr": pooled,
                           "z": delta / pooled if pooled > 0 else (0.0 if delta == 0 else math.inf),
                           "within_3_se": delta <= 3 * pooled})
    report.tables = {"estimates": rows, "cauchy": cauchy}
    report.summary["cauchy_violations"] = [c for c in cauchy if not c["within_3_se"]]
    report.series["probability"] = {
        "xlabel": "n", "ylabel": "empirical P(G_n satisfies sentence)",
        "series": {sentence_id(s, j): {"x": list(cfg.checkpoints),
                                       "y": [est[(n, j)][0] for n in cfg.checkpoints],
                                       "err": [est[(n, j)][1] for n in cfg.checkpoints]}
                   for j, s in enumerate(sentences)}}
    return report


def exponential_rate(ns, fractions):
    """Least-squares slope of -log(1 - f) against n over points with 0 < 1 - f."""
    pts = [(n, 1 - f) for n, f in zip(ns, fractions) if 1 - f > 0]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.log([p[1] for p in pts])
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


def convergence_report(cfg: ExperimentConfig) -> StatsReport:
    """Class-key frequencies, initial-closed trend and census monotonicity audit."""
    records = run_replicates(cfg, partial(ConvergenceProbe, cfg.R, cfg.a))
    n_reps = len(records)
    report = StatsReport("convergence", cfg.to_json())
    class_rows, closed_rows = [], []
    class_freq = {}
    closed = []
    for i, n in enumerate(cfg.checkpoints):
        digests = [rec[i][0] for rec in records]
        class_freq[n] = frequencies(digests)
        for key, c in sorted(Counter(digests).items(), key=lambda kv: (-kv[1], kv[0])):
            p, se = proportion(c, n_reps)
            class_rows.append({"checkpoint": n, "key": key, "estimate": p, "stderr": se,
                               "n_replicates": n_reps})
        k = sum(rec[i][1] for rec in records)
        p, se = proportion(k, n_reps)
        closed.append((p, se))
        closed_rows.append({"checkpoint": n, "key": "all_initial_closed", "estimate": p,
                            "stderr": se, "n_replicates": n_reps})
    violations = sum(rec[i][2] for rec in records for i in range(len(cfg.checkpoints)))
    class_tv = [{"n": n, "two_n": 2 * n, "tv": total_variation(class_freq[n], class_freq[2 * n]),
                 "classes_n": len(class_freq[n]), "classes_2n": len(class_freq[2 * n])}
                for n in cfg.checkpoints if 2 * n in class_freq]
    trend = [{"from": a, "to": b, "drop": closed[i][0] - closed[i + 1][0],
              "two_se": 2 * math.hypot(closed[i][1], closed[i + 1][1])}
             for i, (a, b) in enumerate(zip(cfg.checkpoints, cfg.checkpoints[1:]))]
    report.tables = {"class_keys": class_rows, "initial_closed": closed_rows,
                     "class_tv": class_tv, "closed_trend": trend}
    report.summary = {
        "census_monotonicity_violations": violations,
        "census_radius": cfg.a,
        "closed_fraction": {n: closed[i][0] for i, n in enumerate(cfg.checkpoints)},
        "closed_trend_ok": all(t["drop"] <= t["two_se"] for t in trend),
        "fitted_open_decay_rate": exponential_rate(cfg.checkpoints, [c[0] for c in closed]),
        "class_tv": class_tv,
    }
    report.series["initial_closed"] = {
        "xlabel": "n", "ylabel": "fraction with all initial vertices closed",
        "series": {"all_initial_closed": {"x": list(cfg.checkpoints), "y": [c[0] for c in closed],
                                          "err": [c[1] for c in closed]}}}
    report.series["class_count"] = {
        "xlabel": "n", "ylabel": "distinct class keys observed",
        "series": {"classes": {"x": list(cfg.checkpoints),
                               "y": [len(class_freq[n]) for n in cfg.checkpoints]}}}
    return report
