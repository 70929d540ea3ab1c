"""Seeded end-to-end simulation runs and their CSV / manifest outputs.

Seeding scheme: replicate ``i`` of a run with master seed ``s`` uses
``SeedSequence(s, spawn_key=(i,))``; its first 64 bits are recorded as the
replicate seed. From the replicate seed, ``SeedSequence(rep_seed).spawn(3)``
gives the streams for the model, the embeddings and the corpus. Replicate
``i`` therefore does not depend on how many replicates are run.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cod import DEFAULT_GRID as ALPHA_GRID
from .cod import tune_alpha
from .cooc import count_cooccurrences
from .corpus_sim import default_alpha, simulate_corpus
from .errors import InvalidParameterError
from .metrics import f_score, rand_index, relative_error
from .model_gen import SCENARIOS, BlockModel, sample_embeddings, scenario_model
from .pmi import DEFAULT_ETA, SppmiMatrix, empirical_pmi, sppmi
from .precision import DEFAULT_EPS_FLOOR, EstimationResult, estimate
from .precision import DEFAULT_GRID as LAMBDA_GRID

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "scenario", "replicate", "d", "p", "K", "T", "alpha", "lambda", "rand_index",
    "rel_err_max", "rel_err_frob", "precision", "recall", "f_score", "wall_ms",
]
METRIC_COLUMNS = ["alpha", "lambda", "rand_index", "rel_err_max", "rel_err_frob",
                  "precision", "recall", "f_score"]


@dataclass
class ScenarioConfig:
    scenario: str
    d: int
    p: int
    K: int
    T: int = 200_000
    q: int = 10
    replicates: int = 10
    seed: int = 0
    eta: float = DEFAULT_ETA
    alpha_grid: list = field(default_factory=lambda: list(ALPHA_GRID))
    lambda_grid: list = field(default_factory=lambda: list(LAMBDA_GRID))
    eps_floor: float = DEFAULT_EPS_FLOOR
    tau: float | None = None
    clustering_mode: str = "tuned"
    estimation_partition: str = "oracle"
    averaging: bool = True
    uneven: bool = False
    gamma_low: float = 0.25
    gamma_high: float = 0.5
    timing: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise InvalidParameterError(f"unknown scenario {self.scenario!r}")
        for name in ("d", "p", "K", "T", "q"):
            if int(getattr(self, name)) < 1:
                raise InvalidParameterError(f"{name} must be positive")
        if self.replicates < 0:
            raise InvalidParameterError("replicates must be nonnegative")
        if self.K > self.d:
            raise InvalidParameterError("K cannot exceed d")
        if self.d % self.K and not self.uneven:
            raise InvalidParameterError(f"K={self.K} does not divide d={self.d} (set uneven=true)")
        if not self.alpha_grid or not self.lambda_grid:
            raise InvalidParameterError("tuning grids must be nonempty")
        if self.clustering_mode not in ("tuned", "oracle"):
            raise InvalidParameterError("clustering_mode must be 'tuned' or 'oracle'")
        if self.estimation_partition not in ("oracle", "estimated"):
            raise InvalidParameterError("estimation_partition must be 'oracle' or 'estimated'")
        if self.eps_floor <= 0:
            raise InvalidParameterError("eps_floor must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        if "config" in doc:  # a run manifest
            doc = doc["config"]
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


def replicate_seed(master: int, index: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def replicate_streams(rep_seed: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(rep_seed).spawn(3)]


@dataclass
class ReplicateData:
    model: BlockModel
    S: SppmiMatrix
    timings: dict


def simulate_replicate(config: ScenarioConfig, index: int) -> ReplicateData:
    """Model, embeddings, corpus, counts and SPPMI for one replicate."""
    seed = replicate_seed(config.seed, index)
    model_rng, emb_rng, corpus_rng = replicate_streams(seed)
    timings = {}
    t0 = time.perf_counter()
    model = scenario_model(config.scenario, config.d, config.K, model_rng,
                           config.gamma_low, config.gamma_high, config.uneven, seed=seed)
    V = sample_embeddings(model, config.p, emb_rng)
    timings["model_ms"] = _ms(t0)
    t0 = time.perf_counter()
    tokens = simulate_corpus(V, config.T, default_alpha(config.d, config.p), corpus_rng)
    timings["simulate_ms"] = _ms(t0)
    t0 = time.perf_counter()
    C = count_cooccurrences([tokens], config.q, config.d)
    timings["cooc_ms"] = _ms(t0)
    t0 = time.perf_counter()
    S = sppmi(empirical_pmi(C), config.eta)
    timings["pmi_ms"] = _ms(t0)
    return ReplicateData(model, S, timings)


def _ms(t0):
    return (time.perf_counter() - t0) * 1e3


def score_estimate(model: BlockModel, result: EstimationResult) -> dict:
    truth = model.graph.adjacency() | np.eye(model.K, dtype=bool)
    prec, rec, f = f_score(result.support, truth)
    return {
        "lambda": result.lam,
        "rel_err_max": relative_error(result.o_hat, model.O, "max"),
        "rel_err_frob": relative_error(result.o_hat, model.O, "frobenius"),
        "precision": prec,
        "recall": rec,
        "f_score": f,
    }


def analyze_replicate(config: ScenarioConfig, data: ReplicateData, averaging=None) -> dict:
    """Cluster, estimate and score one simulated replicate."""
    model, S = data.model, data.S
    if averaging is None:
        averaging = config.averaging
    t0 = time.perf_counter()
    if config.clustering_mode == "tuned":
        alpha, part, _ = tune_alpha(S, config.d, config.p, config.alpha_grid)
    else:
        alpha, part = math.nan, model.assignment
    data.timings["cluster_ms"] = _ms(t0)
    row = {"alpha": alpha, "rand_index": rand_index(model.assignment, part)}
    est_part = model.assignment if config.estimation_partition == "oracle" else part
    t0 = time.perf_counter()
    if est_part.K == model.K:
        result = estimate(S, est_part, config.d, config.p, grid=config.lambda_grid,
                          tau=config.tau, eps_floor=config.eps_floor, averaging=averaging)
        row.update(score_estimate(model, result))
    else:
        # estimated partition with the wrong K cannot be scored against O
        row.update({k: math.nan for k in METRIC_COLUMNS if k not in row})
    data.timings["estimate_ms"] = _ms(t0)
    return row


def run_replicate(config: ScenarioConfig, index: int) -> dict:
    t0 = time.perf_counter()
    seed = replicate_seed(config.seed, index)
    row = {"scenario": config.scenario, "replicate": index, "d": config.d, "p": config.p,
           "K": config.K, "T": config.T}
    try:
        data = simulate_replicate(config, index)
        row.update(analyze_replicate(config, data))
        timings, error = data.timings, None
    except Exception as exc:  # recorded per replicate; the run continues
        logger.error("replicate %d failed: %s", index, exc)
        row.update({k: math.nan for k in METRIC_COLUMNS})
        timings, error = {}, "".join(traceback.format_exception_only(type(exc), exc)).strip()
    wall = _ms(t0)
    timings["wall_ms"] = wall
    row["wall_ms"] = wall if config.timing else None
    return {"row": row, "seed": seed, "timings": timings, "error": error}


def _run_one(args):
    return run_replicate(*args)


@dataclass
class RunOutput:
    rows: list
    aggregates: list
    manifest: dict

    @property
    def failed(self) -> bool:
        return any(f is not None for f in self.manifest["failures"])

    def results_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in self.rows + self.aggregates:
            writer.writerow([_fmt(row.get(c)) for c in RESULT_COLUMNS])
        return buf.getvalue()

    def save(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(self.results_csv())
        with open(out / "manifest.json", "w") as fh:
            json.dump(self.manifest, fh, indent=2)
            fh.write("\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def aggregate(config: ScenarioConfig, rows: list) -> list:
    if not rows:
        return []
    out = []
    for label, fn in (("mean", np.nanmean), ("median", np.nanmedian)):
        agg = {"scenario": config.scenario, "replicate": label, "d": config.d, "p": config.p,
               "K": config.K, "T": config.T}
        for col in METRIC_COLUMNS:
            vals = np.array([r[col] for r in rows], dtype=float)
            agg[col] = float(fn(vals)) if np.isfinite(vals).any() else math.nan
        out.append(agg)
    return out


def run_scenario(config: ScenarioConfig, threads: int = 1) -> RunOutput:
    """All replicates of one configuration, ordered by replicate index."""
    config.validate()
    jobs = [(config, i) for i in range(config.replicates)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(threads) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    rows = [r["row"] for r in results]
    manifest = {
        "config": config.to_dict(),
        "replicate_seeds": [r["seed"] for r in results],
        "version": __version__,
        "timings": [r["timings"] for r in results],
        "failures": [r["error"] for r in results],
    }
    return RunOutput(rows, aggregate(config, rows), manifest)
