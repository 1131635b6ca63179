"""Command-line front end: simulate, cliques, distances, curvature,
dimension, test, classify, pipeline, experiment.

Exit codes: 0 success, 2 configuration error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .cliques import CliqueSelectionError, select_cliques
from .curvature import curvature_bounds, estimate_curvature, CurvatureBracket
from .dimension import dimension_from_rank, ladle_rank
from .distance import distances_from_graph
from .geometry import Geometry, ManifoldSpec, cosine_form, gram_matrix
from .graph import GraphFormatError, load_edge_list, save_edge_list
from .hypotest import BootstrapConfig, bootstrap_distance, classify, test_geometry
from .pipeline import (
    ConfigError,
    PipelineConfig,
    PipelineStageError,
    report_to_dict,
    rows_to_csv,
    run_batch,
    run_experiment,
    run_pipeline,
    summarize_rates,
)
from .simulate import SimConfig, sample_graph, sample_latent

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3


def _write_output(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _manifold_from_args(args) -> ManifoldSpec:
    kind = Geometry(args.geometry)
    if kind is Geometry.EUCLIDEAN:
        return ManifoldSpec(kind, args.dim, 0.0)
    kappa = args.kappa
    if kappa is None:
        kappa = 1.0 if kind is Geometry.SPHERICAL else -1.0
    return ManifoldSpec(kind, 2, kappa)


def _sim_config_from_args(args) -> SimConfig:
    return SimConfig(
        manifold=_manifold_from_args(args),
        n=args.n,
        n_centers=args.centers,
        spread=args.spread,
        center_scale=args.center_scale,
        nu_law=args.nu,
        nu_param=args.nu_param,
        seed=args.seed,
    )


def _boot_config_from_args(args) -> BootstrapConfig:
    return BootstrapConfig(
        n_boot=args.B,
        subsample=args.m,
        rate=args.rate,
        alpha=args.alpha,
        seed=args.seed,
    )


def _load_graph(args):
    return load_edge_list(args.input, args.indexing)


def _select(args, g):
    return select_cliques(
        g,
        args.K,
        args.ell,
        draws=args.draws,
        seed=args.seed,
        density=args.density,
        pool_cap=args.pool_cap,
        t=args.t,
    )


def _add_graph_args(p):
    p.add_argument("--input", required=True, help="edge-list file")
    p.add_argument("--indexing", default="zero", choices=("zero", "one", "labeled"))


def _add_clique_args(p):
    p.add_argument("--K", type=int, default=7, help="number of cliques")
    p.add_argument("--ell", type=int, default=6, help="clique size")
    p.add_argument("--t", type=int, default=None,
                   help="almost-clique threshold (default ell-1)")
    p.add_argument("--draws", type=int, default=1_000_000)
    p.add_argument("--density", type=float, default=1.0,
                   help="relaxed candidate density; 1.0 = exact cliques")
    p.add_argument("--pool-cap", dest="pool_cap", type=int, default=50_000)


def _add_boot_args(p):
    p.add_argument("--B", type=int, default=200, help="bootstrap replicates")
    p.add_argument("--m", type=int, default=None, help="subsample size per clique")
    p.add_argument("--rate", type=float, default=1.0 / 3.0,
                   help="statistic rescaling exponent")
    p.add_argument("--alpha", type=float, default=0.05)


def _add_sim_args(p):
    p.add_argument("--geometry", required=True,
                   choices=("euclidean", "spherical", "hyperbolic"))
    p.add_argument("--n", type=int, default=1200)
    p.add_argument("--centers", type=int, default=15)
    p.add_argument("--dim", type=int, default=2, help="dimension (flat case)")
    p.add_argument("--kappa", type=float, default=None,
                   help="curvature (curved cases; default +/-1)")
    p.add_argument("--spread", type=float, default=None)
    p.add_argument("--center-scale", dest="center_scale", type=float, default=None)
    p.add_argument("--nu", default="zero", choices=("zero", "uniform", "exponential"))
    p.add_argument("--nu-param", dest="nu_param", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentgeom",
        description="Infer the latent geometry of a network from one observed graph",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", default=None, help="write result here")
    common.add_argument("--format", default="json", choices=("json", "csv"))
    common.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("simulate", parents=[common],
                       help="simulate a graph from the formation model")
    _add_sim_args(p)
    p.add_argument("--latent-csv", default=None,
                   help="also dump node, coords..., nu as CSV")

    p = sub.add_parser("cliques", parents=[common],
                       help="select well-separated cliques")
    _add_graph_args(p)
    _add_clique_args(p)

    p = sub.add_parser("distances", parents=[common],
                       help="estimate the clique distance matrix")
    _add_graph_args(p)
    _add_clique_args(p)
    p.add_argument("--csv", default=None, help="write the distance matrix as CSV")

    p = sub.add_parser("curvature", parents=[common],
                       help="estimate curvature from a distance matrix")
    p.add_argument("--distances-csv", default=None,
                   help="distance matrix CSV (alternative to --input)")
    p.add_argument("--input", default=None, help="edge-list file")
    p.add_argument("--indexing", default="zero", choices=("zero", "one", "labeled"))
    _add_clique_args(p)
    p.add_argument("--kind", required=True, choices=("spherical", "hyperbolic"))
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--a", type=float, default=None, help="bracket lower magnitude")
    p.add_argument("--b", type=float, default=None, help="bracket upper magnitude")

    p = sub.add_parser("dimension", parents=[common],
                       help="estimate the rank / manifold dimension")
    _add_graph_args(p)
    _add_clique_args(p)
    _add_boot_args(p)
    p.add_argument("--geometry", required=True,
                   choices=("euclidean", "spherical", "hyperbolic"))

    p = sub.add_parser("test", parents=[common],
                       help="bootstrap geometry hypothesis test")
    _add_graph_args(p)
    _add_clique_args(p)
    _add_boot_args(p)
    p.add_argument("--null", default="all",
                   choices=("euclidean", "spherical", "hyperbolic", "all"))

    p = sub.add_parser("classify", parents=[common],
                       help="run all three tests and classify")
    _add_graph_args(p)
    _add_clique_args(p)
    _add_boot_args(p)

    p = sub.add_parser("pipeline", parents=[common],
                       help="full pipeline on one or more graphs")
    p.add_argument("--input", nargs="+", default=None, help="edge-list file(s)")
    p.add_argument("--indexing", default="zero", choices=("zero", "one", "labeled"))
    p.add_argument("--simulate", dest="do_simulate", action="store_true",
                   help="simulate the input graph instead of reading files")
    for name, kwargs in (
        ("--geometry", dict(default="spherical",
                            choices=("euclidean", "spherical", "hyperbolic"))),
        ("--n", dict(type=int, default=1200)),
        ("--centers", dict(type=int, default=15)),
        ("--dim", dict(type=int, default=2)),
        ("--kappa", dict(type=float, default=None)),
        ("--spread", dict(type=float, default=None)),
        ("--center-scale", dict(dest="center_scale", type=float, default=None)),
        ("--nu", dict(default="zero", choices=("zero", "uniform", "exponential"))),
        ("--nu-param", dict(dest="nu_param", type=float, default=0.0)),
    ):
        p.add_argument(name, **kwargs)
    _add_clique_args(p)
    _add_boot_args(p)

    p = sub.add_parser("experiment", parents=[common],
                       help="Monte Carlo error/power/dimension experiments")
    p.add_argument("--kind", required=True, choices=("type1", "power", "dimension"))
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--ell-list", dest="ell_list", type=int, nargs="+", default=[5, 9])
    p.add_argument("--k-list", dest="k_list", type=int, nargs="+", default=[5, 10])
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--ell", type=int, default=9)
    p.add_argument("--n", type=int, default=1200)
    p.add_argument("--centers", type=int, default=15)
    _add_boot_args(p)
    p.add_argument("--summary", action="store_true",
                   help="emit grouped rates instead of raw rows")

    return parser


def _load_distance_csv(path: str) -> np.ndarray:
    d = np.loadtxt(path, delimiter=",")
    return np.atleast_2d(d)


def _cmd_simulate(args) -> int:
    cfg = _sim_config_from_args(args)
    lat = sample_latent(cfg)
    g = sample_graph(lat, args.seed + 1_000_003)
    if args.output:
        save_edge_list(g, args.output)
    else:
        sys.stdout.write(f"n={g.n}\n")
        for i, j in g.edges():
            sys.stdout.write(f"{i} {j}\n")
    if args.latent_csv:
        rows = ["node," + ",".join(
            f"x{i}" for i in range(lat.positions.shape[1])) + ",nu"]
        for i in range(lat.n):
            coords = ",".join(f"{v:.10g}" for v in lat.positions[i])
            rows.append(f"{i},{coords},{lat.nu[i]:.10g}")
        Path(args.latent_csv).write_text("\n".join(rows) + "\n")
    return EXIT_OK


def _cmd_cliques(args) -> int:
    g = _load_graph(args)
    try:
        cs = _select(args, g)
        payload = {
            "ell": cs.ell,
            "K": cs.k,
            "cliques": [list(c) for c in cs.cliques],
            "overlap": cs.overlap_score,
            "feasible": True,
        }
    except CliqueSelectionError as exc:
        payload = {"ell": args.ell, "K": args.K, "cliques": [],
                   "overlap": None, "feasible": False, "error": str(exc)}
    _write_output(json.dumps(payload, indent=2), args.output)
    return EXIT_OK if payload["feasible"] else EXIT_STAGE


def _cmd_distances(args) -> int:
    g = _load_graph(args)
    cs = _select(args, g)
    p, e_nu, d = distances_from_graph(g, cs, args.t)
    payload = {
        "P_hat": p.values.tolist(),
        "almost_clique_density": e_nu.value,
        "E_nu_hat": d.e_nu_hat,
        "E_nu_warned": e_nu.warned,
        "D_hat": d.values.tolist(),
        "floor_flags": p.floored.tolist(),
        "clamp_count": d.clamp_count,
    }
    _write_output(json.dumps(payload, indent=2), args.output)
    if args.csv:
        np.savetxt(args.csv, d.values, delimiter=",")
    return EXIT_OK


def _cmd_curvature(args) -> int:
    if args.distances_csv:
        d_values = _load_distance_csv(args.distances_csv)
    elif args.input:
        g = _load_graph(args)
        cs = _select(args, g)
        _, _, d = distances_from_graph(g, cs, args.t)
        d_values = d.values
    else:
        raise ConfigError("curvature needs --distances-csv or --input")
    bracket = None
    if args.a is not None or args.b is not None:
        auto = curvature_bounds(d_values)
        bracket = CurvatureBracket(
            args.a if args.a is not None else auto.lower,
            args.b if args.b is not None else auto.upper,
        )
    est = estimate_curvature(d_values, Geometry(args.kind), q=args.q, bracket=bracket)
    payload = {
        "kappa_hat": est.kappa_hat,
        "objective": est.objective_at_min,
        "bracket": [est.bracket.lower, est.bracket.upper],
        "q": est.q_used,
        "trace": [list(pair) for pair in est.trace],
    }
    _write_output(json.dumps(payload, indent=2), args.output)
    return EXIT_OK


def _cmd_dimension(args) -> int:
    g = _load_graph(args)
    cs = _select(args, g)
    _, e_nu, d = distances_from_graph(g, cs, args.t)
    boot_cfg = _boot_config_from_args(args)
    boot_d = bootstrap_distance(g, cs, d.e_nu_hat, boot_cfg)
    kind = Geometry(args.geometry)
    if kind is Geometry.EUCLIDEAN:
        builder = lambda dist: gram_matrix(dist, 0.0)
        psd = False
        kappa = 0.0
    else:
        kappa = estimate_curvature(d.values, kind).kappa_hat
        builder = lambda dist: cosine_form(dist, kappa)
        psd = kind is Geometry.HYPERBOLIC
    result = ladle_rank(builder, d.values, list(boot_d), psd_mode=psd)
    payload = {
        "r_hat": result.r_hat,
        "p_hat": dimension_from_rank(kind, result.r_hat, floor=True),
        "phi": result.phi.tolist(),
        "f": result.f.tolist(),
        "objective": result.objective.tolist(),
        "B": result.n_boot,
        "kappa_used": kappa,
        "full_rank_warning": result.full_rank_warning,
    }
    _write_output(json.dumps(payload, indent=2), args.output)
    return EXIT_OK


def _result_payload(res) -> dict:
    return {
        "geometry": res.geometry.value,
        "k_star": res.k_star,
        "stat_observed": res.stat_observed,
        "critical_value": res.critical_value,
        "p_value": res.p_value,
        "reject": res.reject,
        "kappa_used": res.kappa_used,
        "degenerate": res.degenerate,
    }


def _cmd_test(args) -> int:
    g = _load_graph(args)
    cs = _select(args, g)
    cfg = _boot_config_from_args(args)
    if args.null == "all":
        report = classify(g, cs, cfg, args.t)
        payload = report_to_dict(report)
    else:
        res = test_geometry(g, cs, Geometry(args.null), cfg)
        payload = _result_payload(res)
    _write_output(json.dumps(payload, indent=2), args.output)
    return EXIT_OK


def _cmd_classify(args) -> int:
    g = _load_graph(args)
    cs = _select(args, g)
    report = classify(g, cs, _boot_config_from_args(args), args.t)
    _write_output(json.dumps(report_to_dict(report), indent=2), args.output)
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    boot = _boot_config_from_args(args)
    base = dict(
        k=args.K, ell=args.ell, t=args.t, density=args.density,
        draws=args.draws, pool_cap=args.pool_cap, boot=boot, seed=args.seed,
    )
    if args.do_simulate:
        cfg = PipelineConfig(sim=_sim_config_from_args(args), **base)
        report = run_pipeline(cfg)
        _write_output(report.to_json(), args.output)
        sys.stderr.write(f"elapsed: {report.elapsed_seconds:.2f}s\n")
        return EXIT_OK
    if not args.input:
        raise ConfigError("pipeline needs --input file(s) or --simulate")
    if len(args.input) == 1:
        cfg = PipelineConfig(input_path=args.input[0], indexing=args.indexing, **base)
        report = run_pipeline(cfg)
        _write_output(report.to_json(), args.output)
        sys.stderr.write(f"elapsed: {report.elapsed_seconds:.2f}s\n")
        return EXIT_OK
    template = PipelineConfig(input_path=args.input[0], indexing=args.indexing, **base)
    batch = run_batch(args.input, template, threads=args.threads)
    _write_output(json.dumps(batch, indent=2), args.output)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    boot = _boot_config_from_args(args)
    rows = run_experiment(
        args.kind,
        args.reps,
        seed=args.seed,
        ell_list=tuple(args.ell_list),
        k_list=tuple(args.k_list),
        k=args.K,
        ell=args.ell,
        n=args.n,
        n_centers=args.centers,
        boot=boot,
        threads=args.threads,
    )
    if args.summary:
        keys = {
            "type1": ("kind", "geometry", "ell", "K"),
            "power": ("kind", "truth", "null", "K", "ell"),
            "dimension": ("kind", "geometry", "K", "ell"),
        }[args.kind]
        rows = summarize_rates(rows, keys)
    if args.format == "csv":
        _write_output(rows_to_csv(rows), args.output)
    else:
        _write_output(json.dumps(rows, indent=2), args.output)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "cliques": _cmd_cliques,
    "distances": _cmd_distances,
    "curvature": _cmd_curvature,
    "dimension": _cmd_dimension,
    "test": _cmd_test,
    "classify": _cmd_classify,
    "pipeline": _cmd_pipeline,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (PipelineStageError, CliqueSelectionError, GraphFormatError, OSError) as exc:
        sys.stderr.write(f"stage failure: {exc}\n")
        return EXIT_STAGE
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
