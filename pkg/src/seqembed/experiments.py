"""Experiment orchestration: static and streaming scenarios, sweeps, timing.

Scenarios follow the evaluation protocol: "all" trains the full graph as
if every edge existed from the start; "seq" trains a spanning forest
first, then replays the removed edges one at a time, training one walk
from each endpoint of every added edge.
"""

import csv
import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import oselm
from . import sgd as sgd_mod
from .evaluation import evaluate_embedding
from .graph import Graph, spanning_forest_split
from .rng import substream
from .sampling import NegativeSampler, TablePolicy
from .walks import WalkConfig, context_arrays, random_walk


@dataclass
class ExperimentConfig:
    """One run's knobs; walk defaults follow the standard hyper-parameters
    (p=0.5, q=1.0, r=10, l=80, w=8, ns=10)."""

    scenario: str = "all"              # all | seq
    model: str = "proposed"            # proposed | original
    dims: int = 32
    p: float = 0.5
    q: float = 1.0
    walks_per_node: int = 10
    walk_length: int = 80
    window: int = 8
    ns: int = 10
    mu: float = 0.01
    mode: str = "tied"                 # tied | random_alpha
    update: str = "sequential"         # sequential | dataflow
    negatives: str = "auto"            # auto | fresh | shared
    refresh_every: int | None = 1      # alias rebuild per k edge additions; None = never
    neg_exponent: float = 1.0
    p0_scale: float = 1.0
    regularized: bool = True
    lr: float = 0.01                   # baseline SGD learning rate
    seed: int = 0
    trials: int = 3
    seq_walks_per_endpoint: int = 1
    eval_every: int | None = None      # optional interim eval cadence (edges)
    eval_epochs: int = 200
    eval_lr: float = 0.1
    eval_l2: float = 1e-4

    def __post_init__(self):
        if self.scenario not in ("all", "seq"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.model not in ("proposed", "original"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.update not in ("sequential", "dataflow"):
            raise ValueError(f"unknown update rule {self.update!r}")
        if self.negatives not in ("auto", "fresh", "shared"):
            raise ValueError(f"unknown negatives policy {self.negatives!r}")

    def walk_config(self) -> WalkConfig:
        return WalkConfig(p=self.p, q=self.q, walk_length=self.walk_length,
                          window=self.window, walks_per_node=self.walks_per_node)

    def effective_negatives(self) -> str:
        """Fresh draws for the per-context schedule, one shared pool per
        walk for the dataflow schedule, unless overridden."""
        if self.negatives != "auto":
            return self.negatives
        if self.model == "proposed" and self.update == "dataflow":
            return "shared"
        return "fresh"


@dataclass
class MetricsRecord:
    scenario: str
    config: dict
    micro_f1_mean: float
    micro_f1_std: float
    macro_f1_mean: float
    macro_f1_std: float
    walk_time_mean_ms: float
    walk_time_median_ms: float
    walk_time_p95_ms: float
    parameters: dict
    walks_trained: int
    edges_streamed: int
    wall_time_s: float
    interim_evals: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)

    def stable_dict(self) -> dict:
        """Record contents minus wall-clock-dependent fields."""
        d = self.as_dict()
        for key in ("walk_time_mean_ms", "walk_time_median_ms",
                    "walk_time_p95_ms", "wall_time_s"):
            d.pop(key)
        return d


@dataclass
class RunResult:
    record: MetricsRecord
    model: object
    embedding: np.ndarray


class _ProposedTrainer:
    def __init__(self, cfg: ExperimentConfig, node_count: int, init_seed: int):
        self.model = oselm.init_model(cfg.dims, node_count, mu=cfg.mu, mode=cfg.mode,
                                      seed=init_seed, p0_scale=cfg.p0_scale,
                                      regularized=cfg.regularized)
        self._update = (oselm.walk_update_dataflow if cfg.update == "dataflow"
                        else oselm.train_walk)

    def train(self, centers, positives, negatives):
        self._update(self.model, centers, positives, negatives)

    def snapshot(self):
        return oselm.embedding_snapshot(self.model)

    def parameters(self):
        return oselm.parameter_count(self.model)


class _OriginalTrainer:
    def __init__(self, cfg: ExperimentConfig, node_count: int, init_seed: int):
        self.model = sgd_mod.init_sgd(cfg.dims, node_count, lr=cfg.lr, seed=init_seed)

    def train(self, centers, positives, negatives):
        sgd_mod.train_walk(self.model, centers, positives, negatives)

    def snapshot(self):
        return sgd_mod.sgd_embedding_snapshot(self.model)

    def parameters(self):
        return sgd_mod.sgd_parameter_count(self.model)


def _make_trainer(cfg: ExperimentConfig, node_count: int, init_seed: int):
    if cfg.model == "proposed":
        return _ProposedTrainer(cfg, node_count, init_seed)
    return _OriginalTrainer(cfg, node_count, init_seed)


def _trial_streams(cfg: ExperimentConfig, trial: int):
    walks_rng = substream(cfg.seed, f"trial{trial}", "walks")
    negs_rng = substream(cfg.seed, f"trial{trial}", "negatives")
    init_seed = int(substream(cfg.seed, f"trial{trial}", "init").integers(2**63))
    return walks_rng, negs_rng, init_seed


def _train_one_walk(g, start, wc, trainer, sampler, walks_rng, negs_rng, times,
                    rebuild: bool):
    """Generate, count, and train one walk; only training time is recorded."""
    walk = random_walk(g, start, wc, walks_rng)
    sampler.observe_walk(walk)
    centers, positives = context_arrays(walk, wc.window)
    if centers.size:
        negs = sampler.negatives(negs_rng, centers.shape[0], wc.window - 1)
        t0 = time.perf_counter()
        trainer.train(centers, positives, negs)
        times.append(time.perf_counter() - t0)
    if rebuild:
        sampler.rebuild()
    return 1


def _full_pass(g, cfg, trainer, sampler, walks_rng, negs_rng, times):
    """walks_per_node walks from every node, node order reshuffled per pass.

    The alias table is rebuilt after every walk here; the edge-addition
    refresh policy only governs the streaming phase.
    """
    wc = cfg.walk_config()
    trained = 0
    for _ in range(cfg.walks_per_node):
        for start in walks_rng.permutation(g.node_count):
            trained += _train_one_walk(g, int(start), wc, trainer, sampler,
                                       walks_rng, negs_rng, times, rebuild=True)
    return trained


def _timing_fields(times):
    if not times:
        return 0.0, 0.0, 0.0
    ms = np.asarray(times) * 1e3
    return float(ms.mean()), float(np.median(ms)), float(np.percentile(ms, 95))


def _finish(scenario, cfg, features, labels, times, walks_trained, edges_streamed,
            trainer, t_start, interim):
    summary = evaluate_embedding(features, labels, trials=cfg.trials, seed=cfg.seed,
                                 epochs=cfg.eval_epochs, lr=cfg.eval_lr, l2=cfg.eval_l2)
    mean_ms, median_ms, p95_ms = _timing_fields(times)
    record = MetricsRecord(
        scenario=scenario,
        config=asdict(cfg),
        micro_f1_mean=summary.micro_mean,
        micro_f1_std=summary.micro_std,
        macro_f1_mean=summary.macro_mean,
        macro_f1_std=summary.macro_std,
        walk_time_mean_ms=mean_ms,
        walk_time_median_ms=median_ms,
        walk_time_p95_ms=p95_ms,
        parameters=trainer.parameters(),
        walks_trained=walks_trained,
        edges_streamed=edges_streamed,
        wall_time_s=time.perf_counter() - t_start,
        interim_evals=interim,
    )
    return RunResult(record=record, model=trainer.model, embedding=features[-1])


def run_all(g: Graph, labels, cfg: ExperimentConfig) -> RunResult:
    """Static scenario: train the full graph, one pass of r walks per node."""
    t_start = time.perf_counter()
    features, times = [], []
    walks_trained = 0
    trainer = None
    for trial in range(cfg.trials):
        walks_rng, negs_rng, init_seed = _trial_streams(cfg, trial)
        trainer = _make_trainer(cfg, g.node_count, init_seed)
        sampler = NegativeSampler(g.node_count, ns=cfg.ns,
                                  policy=TablePolicy(cfg.refresh_every),
                                  exponent=cfg.neg_exponent,
                                  mode=cfg.effective_negatives())
        walks_trained += _full_pass(g, cfg, trainer, sampler, walks_rng, negs_rng, times)
        features.append(trainer.snapshot())
    return _finish("all", cfg, features, labels, times, walks_trained, 0,
                   trainer, t_start, [])


def run_seq(g_full: Graph, labels, cfg: ExperimentConfig) -> RunResult:
    """Streaming scenario: spanning forest first, then per-edge walk training.

    After each deferred edge lands, one walk starts from each endpoint
    (times seq_walks_per_endpoint); the alias table refreshes on the
    edge-addition cadence of the table policy.
    """
    t_start = time.perf_counter()
    wc = cfg.walk_config()
    features, times, interim = [], [], []
    walks_trained = 0
    edges_streamed = 0
    trainer = None
    for trial in range(cfg.trials):
        walks_rng, negs_rng, init_seed = _trial_streams(cfg, trial)
        stream_seed = int(substream(cfg.seed, f"trial{trial}", "stream").integers(2**63))
        stream = spanning_forest_split(g_full, seed=stream_seed)
        g = Graph.from_edges(g_full.node_count, stream.initial_edges)

        trainer = _make_trainer(cfg, g.node_count, init_seed)
        sampler = NegativeSampler(g.node_count, ns=cfg.ns,
                                  policy=TablePolicy(cfg.refresh_every),
                                  exponent=cfg.neg_exponent,
                                  mode=cfg.effective_negatives())
        walks_trained += _full_pass(g, cfg, trainer, sampler, walks_rng, negs_rng, times)

        for i, (u, v, w) in enumerate(stream.deferred_edges):
            g.add_edge(u, v, w)
            for endpoint in (u, v):
                for _ in range(cfg.seq_walks_per_endpoint):
                    walks_trained += _train_one_walk(g, endpoint, wc, trainer, sampler,
                                                     walks_rng, negs_rng, times,
                                                     rebuild=False)
            sampler.notify_edge_added()
            if cfg.eval_every and (i + 1) % cfg.eval_every == 0:
                snap = evaluate_embedding(trainer.snapshot(), labels, trials=1,
                                          seed=cfg.seed, epochs=cfg.eval_epochs,
                                          lr=cfg.eval_lr, l2=cfg.eval_l2)
                interim.append({"trial": trial, "edges": i + 1,
                                "micro_f1": snap.micro_mean, "macro_f1": snap.macro_mean})
        edges_streamed = len(stream.deferred_edges)
        features.append(trainer.snapshot())
    return _finish("seq", cfg, features, labels, times, walks_trained,
                   edges_streamed, trainer, t_start, interim)


def run_experiment(g: Graph, labels, cfg: ExperimentConfig) -> RunResult:
    return run_seq(g, labels, cfg) if cfg.scenario == "seq" else run_all(g, labels, cfg)


def sweep_mu(g: Graph, labels, cfg: ExperimentConfig, mu_values) -> list[MetricsRecord]:
    """One static run per scale factor plus the fixed-random-input baseline."""
    if not mu_values:
        raise ValueError("mu_values must be nonempty")
    records = []
    for mu in mu_values:
        sub = replace(cfg, scenario="all", model="proposed", mode="tied", mu=mu)
        records.append(run_all(g, labels, sub).record)
    alpha_cfg = replace(cfg, scenario="all", model="proposed", mode="random_alpha")
    records.append(run_all(g, labels, alpha_cfg).record)
    return records


def sweep_table_update(g: Graph, labels, cfg: ExperimentConfig,
                       refresh_values) -> list[MetricsRecord]:
    """One streaming run per alias-table refresh cadence (None = never)."""
    records = []
    for rv in refresh_values:
        sub = replace(cfg, scenario="seq", refresh_every=rv)
        records.append(run_seq(g, labels, sub).record)
    return records


def bench_walk(g: Graph, cfg: ExperimentConfig, repetitions: int) -> dict:
    """Per-walk training time for the configured model and dims.

    Times only the training of one walk's contexts; walk generation and
    negative drawing happen outside the timed region.
    """
    if repetitions < 10:
        raise ValueError("repetitions must be >= 10")
    wc = cfg.walk_config()
    walks_rng = substream(cfg.seed, "bench", "walks")
    negs_rng = substream(cfg.seed, "bench", "negatives")
    init_seed = int(substream(cfg.seed, "bench", "init").integers(2**63))

    degrees = np.array([g.degree(u) for u in range(g.node_count)])
    start = int(degrees.argmax())
    walk = random_walk(g, start, wc, walks_rng)
    centers, positives = context_arrays(walk, wc.window)
    if centers.size == 0:
        raise ValueError("benchmark walk produced no contexts")
    sampler = NegativeSampler(g.node_count, ns=cfg.ns, policy=TablePolicy(None),
                              mode=cfg.effective_negatives())
    sampler.observe_walk(walk)
    sampler.rebuild()
    negatives = sampler.negatives(negs_rng, centers.shape[0], wc.window - 1)

    trainer = _make_trainer(cfg, g.node_count, init_seed)
    for _ in range(2):  # JIT warmup outside the timed loop
        trainer.train(centers, positives, negatives)
    times = np.empty(repetitions)
    for r in range(repetitions):
        t0 = time.perf_counter()
        trainer.train(centers, positives, negatives)
        times[r] = time.perf_counter() - t0
    ms = times * 1e3
    return {
        "model": cfg.model,
        "update": cfg.update,
        "dims": cfg.dims,
        "repetitions": repetitions,
        "contexts": int(centers.shape[0]),
        "mean_ms": float(ms.mean()),
        "median_ms": float(np.median(ms)),
        "p95_ms": float(np.percentile(ms, 95)),
        "min_ms": float(ms.min()),
    }


def write_records_jsonl(records, path):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.as_dict()) + "\n")


def _flatten(record: MetricsRecord) -> dict:
    row = {"scenario": record.scenario}
    for key, val in record.config.items():
        row[f"cfg_{key}"] = val
    d = record.as_dict()
    for key in ("micro_f1_mean", "micro_f1_std", "macro_f1_mean", "macro_f1_std",
                "walk_time_mean_ms", "walk_time_median_ms", "walk_time_p95_ms",
                "walks_trained", "edges_streamed", "wall_time_s"):
        row[key] = d[key]
    for key, val in record.parameters.items():
        row[f"param_{key}"] = val
    return row


def write_records_csv(records, path):
    if not records:
        raise ValueError("no records to write")
    rows = [_flatten(rec) for rec in records]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
