"""End-to-end pipeline, batch mode, and the Monte Carlo experiments.

The pipeline runs ingestion/simulation, clique selection, distance
estimation, the three geometry tests, and curvature/dimension estimation,
and emits a deterministic report.  Experiments reproduce the simulation
designs at configurable scale: type-1 error across clique sizes, power
across clique counts, and dimension recovery.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .cliques import CliqueSelectionError, CliqueSet, select_cliques
from .curvature import estimate_curvature
from .dimension import dimension_from_rank, ladle_rank
from .distance import distances_from_graph
from .geometry import Geometry, ManifoldSpec, cosine_form, gram_matrix
from .graph import Graph, load_edge_list
from .hypotest import (
    GEOMETRIES,
    BootstrapConfig,
    GeometryReport,
    bootstrap_distance,
    classify,
)
from .simulate import SimConfig, sample_graph, sample_latent


class PipelineStageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for reporting."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    """Inputs and knobs of one full pipeline run.

    Exactly one of ``input_path`` / ``sim`` must be given.
    """

    input_path: str | None = None
    sim: SimConfig | None = None
    indexing: str = "zero"
    k: int = 7
    ell: int = 6
    t: int | None = None
    density: float = 1.0
    draws: int = 1_000_000
    pool_cap: int = 50_000
    boot: BootstrapConfig = field(default_factory=BootstrapConfig)
    seed: int = 0

    def __post_init__(self):
        if (self.input_path is None) == (self.sim is None):
            raise ConfigError("exactly one of input_path / sim must be set")


@dataclass(frozen=True)
class RunReport:
    """Full record of one pipeline run; deterministic given (config, seed)."""

    config: dict
    clique_summary: dict
    e_nu_hat: float
    d_hat: list
    report: dict
    seed: int
    version: str
    elapsed_seconds: float = 0.0

    def to_json(self, include_timing: bool = False) -> str:
        payload = asdict(self)
        if not include_timing:
            # wall-clock time would break the byte-determinism contract
            payload.pop("elapsed_seconds")
        return json.dumps(payload, sort_keys=True, indent=2)


def _config_echo(cfg: PipelineConfig) -> dict:
    out = {
        "input_path": cfg.input_path,
        "indexing": cfg.indexing,
        "K": cfg.k,
        "ell": cfg.ell,
        "t": cfg.t,
        "density": cfg.density,
        "draws": cfg.draws,
        "pool_cap": cfg.pool_cap,
        "seed": cfg.seed,
        "boot": asdict(cfg.boot),
    }
    if cfg.sim is not None:
        sim = asdict(cfg.sim)
        sim["manifold"] = {
            "kind": cfg.sim.manifold.kind.value,
            "dim": cfg.sim.manifold.dim,
            "curvature": cfg.sim.manifold.curvature,
        }
        out["sim"] = sim
    return out


def report_to_dict(report: GeometryReport) -> dict:
    results = {}
    for kind, res in report.results.items():
        results[kind.value] = {
            "k_star": res.k_star,
            "stat_observed": res.stat_observed,
            "critical_value": res.critical_value,
            "p_value": res.p_value,
            "reject": res.reject,
            "kappa_used": res.kappa_used,
            "eigenvalue_observed": res.eigenvalue_observed,
            "degenerate": res.degenerate,
        }
    return {
        "tests": results,
        "classification": report.classification.value if report.classification else "NA",
        "alpha": report.alpha,
        "kappa_hat": report.kappa_hat,
        "r_hat": report.r_hat,
        "p_hat": report.p_hat,
    }


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Execute the full chain and return a deterministic report.

    Any stage failure is re-raised as PipelineStageError tagged with the
    stage name; an infeasible clique search suggests lowering K or ell.
    """
    start = time.perf_counter()
    try:
        if cfg.input_path is not None:
            g = load_edge_list(cfg.input_path, cfg.indexing)
        else:
            lat = sample_latent(cfg.sim)
            g = sample_graph(lat, cfg.sim.seed + 1_000_003)
    except Exception as exc:
        raise PipelineStageError("ingest", str(exc)) from exc

    try:
        cs = select_cliques(
            g,
            cfg.k,
            cfg.ell,
            draws=cfg.draws,
            seed=cfg.seed,
            density=cfg.density,
            pool_cap=cfg.pool_cap,
            t=cfg.t,
        )
    except CliqueSelectionError as exc:
        raise PipelineStageError("cliques", str(exc)) from exc

    try:
        _, e_nu_hat, d_hat = distances_from_graph(g, cs, cfg.t)
    except Exception as exc:
        raise PipelineStageError("distances", str(exc)) from exc

    try:
        boot = replace(cfg.boot, seed=cfg.boot.seed or cfg.seed)
        report = classify(g, cs, boot, cfg.t)
    except Exception as exc:
        raise PipelineStageError("classify", str(exc)) from exc

    elapsed = time.perf_counter() - start
    return RunReport(
        config=_config_echo(cfg),
        clique_summary={
            "K": cs.k,
            "ell": cs.ell,
            "overlap": cs.overlap_score,
            "cliques": [list(c) for c in cs.cliques],
        },
        e_nu_hat=d_hat.e_nu_hat,
        d_hat=d_hat.values.tolist(),
        report=report_to_dict(report),
        seed=cfg.seed,
        version=__version__,
        elapsed_seconds=elapsed,
    )


def run_batch(paths, template: PipelineConfig, threads: int = 1) -> dict:
    """Run the pipeline over many edge-list files, isolating per-file crashes.

    Returns per-file outcomes in input order plus a summary of
    classification fractions over the files that completed.
    """
    items = [replace(template, input_path=str(p), sim=None) for p in paths]
    outcomes = _pmap(_batch_one, items, threads)
    counts = {"euclidean": 0, "spherical": 0, "hyperbolic": 0, "NA": 0}
    done = 0
    for out in outcomes:
        if out.get("error") is None:
            done += 1
            counts[out["classification"]] += 1
    summary = {
        "files": len(items),
        "completed": done,
        "fractions": {
            k: (v / done if done else 0.0) for k, v in counts.items()
        },
    }
    return {"results": outcomes, "summary": summary}


def _batch_one(cfg: PipelineConfig) -> dict:
    try:
        rep = run_pipeline(cfg)
        return {
            "path": cfg.input_path,
            "error": None,
            "classification": rep.report["classification"],
            "report": json.loads(rep.to_json()),
        }
    except Exception as exc:
        return {"path": cfg.input_path, "error": str(exc), "classification": None}


# ---------------------------------------------------------------------------
# Monte Carlo experiment designs


#: Simulation parameters: the dispersion/curvature used for a given truth
#: depends on which null it is paired against (diagonal entries drive the
#: type-1 and dimension designs, off-diagonal the power designs).
def _truth_config(
    truth: Geometry,
    null: Geometry | None,
    n: int,
    n_centers: int,
    seed: int,
    dim: int = 2,
) -> SimConfig:
    same = null is None or null == truth
    if truth is Geometry.EUCLIDEAN:
        sigma = 0.5 if same else 0.8
        manifold = ManifoldSpec(Geometry.EUCLIDEAN, dim, 0.0)
        return SimConfig(manifold, n=n, n_centers=n_centers, spread=sigma,
                         center_scale=sigma, seed=seed)
    if truth is Geometry.SPHERICAL:
        kappa = 1.0 if same else 0.75
        manifold = ManifoldSpec(Geometry.SPHERICAL, 2, kappa)
        return SimConfig(manifold, n=n, n_centers=n_centers, seed=seed)
    kappa = -1.0 if same else -0.75
    manifold = ManifoldSpec(Geometry.HYPERBOLIC, 2, kappa)
    return SimConfig(manifold, n=n, n_centers=n_centers, seed=seed)


def _child_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _select_for_experiment(g: Graph, k: int, ell: int, seed: int) -> CliqueSet:
    return select_cliques(g, k, ell, draws=400, seed=seed, pool_cap=2000)


def _type1_rep(args) -> list[dict]:
    truth, ell_list, k, n, n_centers, boot, rep, seed = args
    sim = _truth_config(truth, truth, n, n_centers, _child_seed(seed, 11, rep))
    lat = sample_latent(sim)
    g = sample_graph(lat, _child_seed(seed, 12, rep))
    rows = []
    for ell in ell_list:
        try:
            cs = _select_for_experiment(g, k, ell, _child_seed(seed, 13, rep, ell))
        except CliqueSelectionError:
            rows.append({"kind": "type1", "geometry": truth.value, "ell": ell,
                         "K": k, "rep": rep, "reject": None, "p_value": None})
            continue
        from .hypotest import test_geometry

        boot_rep = replace(boot, seed=_child_seed(seed, 14, rep, ell))
        res = test_geometry(g, cs, truth, boot_rep)
        rows.append({"kind": "type1", "geometry": truth.value, "ell": ell,
                     "K": k, "rep": rep, "reject": res.reject,
                     "p_value": res.p_value})
    return rows


def _power_rep(args) -> list[dict]:
    truth, null, k_list, ell, n, n_centers, boot, rep, seed = args
    sim = _truth_config(truth, null, n, n_centers, _child_seed(seed, 21, rep))
    lat = sample_latent(sim)
    g = sample_graph(lat, _child_seed(seed, 22, rep))
    rows = []
    k_max = max(k_list)
    try:
        cs_max = _select_for_experiment(g, k_max, ell, _child_seed(seed, 23, rep))
    except CliqueSelectionError:
        return [{"kind": "power", "truth": truth.value, "null": null.value,
                 "K": k, "ell": ell, "rep": rep, "reject": None,
                 "p_value": None} for k in k_list]
    from .hypotest import test_geometry

    rng = np.random.default_rng(_child_seed(seed, 24, rep))
    for k in sorted(k_list):
        if k == k_max:
            cs = cs_max
        else:
            # smaller sets are nested subsamples of the largest selection
            picked = sorted(rng.choice(k_max, size=k, replace=False).tolist())
            sub = tuple(cs_max.cliques[i] for i in picked)
            cs = CliqueSet(sub, cs_max.ell, 0, None, cs_max.draws_used)
        boot_rep = replace(boot, seed=_child_seed(seed, 25, rep, k))
        res = test_geometry(g, cs, null, boot_rep)
        rows.append({"kind": "power", "truth": truth.value, "null": null.value,
                     "K": k, "ell": ell, "rep": rep, "reject": res.reject,
                     "p_value": res.p_value})
    return rows


def _dimension_rep(args) -> list[dict]:
    truth, k, ell, n, n_centers, boot, rep, seed = args
    dim = 3 if truth is Geometry.EUCLIDEAN else 2
    sim = _truth_config(truth, truth, n, n_centers, _child_seed(seed, 31, rep), dim=dim)
    lat = sample_latent(sim)
    g = sample_graph(lat, _child_seed(seed, 32, rep))
    try:
        cs = _select_for_experiment(g, k, ell, _child_seed(seed, 33, rep))
    except CliqueSelectionError:
        return [{"kind": "dimension", "geometry": truth.value, "K": k,
                 "ell": ell, "rep": rep, "r_hat": None, "p_hat": None}]
    _, e_nu_hat, d_hat = distances_from_graph(g, cs)
    boot_rep = replace(boot, seed=_child_seed(seed, 34, rep))
    boot_d = bootstrap_distance(g, cs, d_hat.e_nu_hat, boot_rep)
    if truth is Geometry.EUCLIDEAN:
        builder = lambda dist: gram_matrix(dist, 0.0)
        psd = False
    else:
        kappa = estimate_curvature(d_hat.values, truth).kappa_hat
        builder = lambda dist: cosine_form(dist, kappa)
        psd = truth is Geometry.HYPERBOLIC
    ladle = ladle_rank(builder, d_hat.values, list(boot_d), psd_mode=psd)
    p_hat = dimension_from_rank(truth, ladle.r_hat, floor=True)
    return [{"kind": "dimension", "geometry": truth.value, "K": k, "ell": ell,
             "rep": rep, "r_hat": ladle.r_hat, "p_hat": p_hat}]


def run_experiment(
    kind: str,
    reps: int,
    seed: int = 0,
    geometries: tuple[Geometry, ...] = GEOMETRIES,
    ell_list: tuple[int, ...] = (5, 9),
    k_list: tuple[int, ...] = (5, 10),
    k: int = 5,
    ell: int = 9,
    n: int = 1200,
    n_centers: int = 15,
    boot: BootstrapConfig | None = None,
    power_pairs: tuple[tuple[Geometry, Geometry], ...] = (
        (Geometry.SPHERICAL, Geometry.HYPERBOLIC),
        (Geometry.HYPERBOLIC, Geometry.SPHERICAL),
    ),
    threads: int = 1,
) -> list[dict]:
    """Run one of the Monte Carlo designs and return per-rep result rows.

    type1: per geometry, the true null is tested on ``reps`` fresh graphs,
    reusing each graph across the clique sizes in ``ell_list`` (paired
    comparison).  power: per (truth, null) pair, the false null is tested
    with the clique counts in ``k_list`` nested within one selection per
    graph.  dimension: rank/dimension recovery at (k, ell) per geometry.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    boot = boot or BootstrapConfig()
    rows: list[dict] = []
    if kind == "type1":
        for truth in geometries:
            args = [(truth, tuple(ell_list), k, n, n_centers, boot, r, seed)
                    for r in range(reps)]
            for chunk in _pmap(_type1_rep, args, threads):
                rows.extend(chunk)
    elif kind == "power":
        for truth, null in power_pairs:
            args = [(truth, null, tuple(k_list), ell, n, n_centers, boot, r, seed)
                    for r in range(reps)]
            for chunk in _pmap(_power_rep, args, threads):
                rows.extend(chunk)
    elif kind == "dimension":
        for truth in geometries:
            args = [(truth, k, ell, n, n_centers, boot, r, seed)
                    for r in range(reps)]
            for chunk in _pmap(_dimension_rep, args, threads):
                rows.extend(chunk)
    else:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    """Serialize experiment rows to CSV with a stable header order."""
    if not rows:
        return ""
    header: list[str] = []
    for row in rows:
        for key in row:
            if key not in header:
                header.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header)
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def summarize_rates(rows: list[dict], group_keys: tuple[str, ...]) -> list[dict]:
    """Rejection rates (or dimension frequencies) grouped by the given keys."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple(row.get(k) for k in group_keys)
        groups.setdefault(key, []).append(row)
    out = []
    for key, members in sorted(groups.items(), key=lambda kv: str(kv[0])):
        entry = dict(zip(group_keys, key))
        if "reject" in members[0]:
            decided = [m for m in members if m.get("reject") is not None]
            entry["n"] = len(decided)
            entry["rejection_rate"] = (
                float(np.mean([m["reject"] for m in decided])) if decided else None
            )
        else:
            dims = [m["p_hat"] for m in members if m.get("p_hat") is not None]
            entry["n"] = len(dims)
            for value in sorted(set(dims)):
                entry[f"p_hat_{value}"] = dims.count(value) / len(dims)
        out.append(entry)
    return out
