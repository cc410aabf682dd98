"""Command-line interface: moments, expand, sbm-sim, eval, relabel."""

from __future__ import annotations

import argparse
import json
import logging
import os
import secrets
import sys
import tempfile
import time

import numpy as np

from .graph import EdgeListParseError, load_edge_list, load_seed_file
from .metrics import adjusted_rand_index, precision_recall_f1
from .mixture import HitmixConfig, hitmix
from .moments import compute_moments
from .sbm import (SWEEPS, HitmixConfig as _HmCfg, SimulationSpec, run_simulation,
                  runs_csv_lines, summary_csv_lines)
from .solver import CgConfig

log = logging.getLogger("hitmix")


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".hitmix-tmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = secrets.randbelow(2 ** 31)
        log.info("no --seed given; using seed %d (pass --seed %d to replay)",
                 seed, seed)
    return seed


def _load_graph_and_seeds(args):
    with open(args.graph) as f:
        graph = load_edge_list(f)
    with open(args.seeds) as f:
        seeds = load_seed_file(f, graph.n_vertices)
    return graph, seeds


def _cmd_moments(args) -> int:
    graph, seeds = _load_graph_and_seeds(args)
    cfg = CgConfig(rel_tol=args.cg_tol)
    t0 = time.perf_counter()
    table = compute_moments(graph, seeds, order=2, cfg=cfg)
    log.info("moments: %d vertices, CG iters %s, %.3fs",
             table.vertices.size, [s.iterations for s in table.cg_stats],
             time.perf_counter() - t0)
    lines = ["vertex_id\tmean\tvariance\treachable"]
    for i, v in enumerate(table.vertices):
        lines.append(f"{v}\t{table.mean[i]:.12g}\t{table.variance[i]:.12g}"
                     f"\t{int(table.reachable[i])}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


def _parse_clusters(text: str) -> tuple[int, ...]:
    if text == "auto":
        return (2, 3, 4, 5)
    return tuple(int(t) for t in text.split(","))


def _cmd_expand(args) -> int:
    graph, seeds = _load_graph_and_seeds(args)
    seed = _resolve_seed(args.seed)
    cfg = HitmixConfig(m=args.samples_per_vertex,
                       g_candidates=_parse_clusters(args.clusters),
                       tau=args.tau,
                       em_max_iters=args.em_max_iters,
                       em_rel_tol=args.em_tol,
                       rng_seed=seed,
                       cg=CgConfig(rel_tol=args.cg_tol))
    t0 = time.perf_counter()
    result = hitmix(graph, seeds, cfg)
    log.info("expand: selected g=%d, BIC %s, EM iters %s, %.3fs",
             result.selected_g,
             {g: round(b, 3) for g, b in result.bic_by_g.items()},
             {g: f.iterations for g, f in result.fits.items()},
             time.perf_counter() - t0)

    table = result.moments
    lines = ["vertex_id\tmean\tvariance\tposterior_goal\tlabel"]
    for i, v in enumerate(result.vertices):
        lines.append(f"{v}\t{table.mean[i]:.12g}\t{table.variance[i]:.12g}"
                     f"\t{result.posterior[i]:.12g}\t{int(result.labels[i])}")
    _atomic_write(args.out, "\n".join(lines) + "\n")

    sidecar = {
        "selected_g": result.selected_g,
        "goal_component": result.goal_component,
        "tau": args.tau,
        "rng_seed": seed,
        "bic_by_g": {str(g): b for g, b in result.bic_by_g.items()},
        "components": {str(g): [{"mu": c.mu, "sigma2": c.sigma2}
                                for c in f.components]
                       for g, f in result.fits.items()},
        "weights": {str(g): f.weights.tolist() for g, f in result.fits.items()},
        "em_iterations": {str(g): f.iterations for g, f in result.fits.items()},
        "goal_set_size": int(result.labels.sum()),
        "unreachable": int((~result.reachable).sum()),
    }
    _atomic_write(args.out + ".json", json.dumps(sidecar, indent=2) + "\n")
    return 0


def _parse_kv_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _cmd_sbm_sim(args) -> int:
    kv = _parse_kv_config(args.config)
    sweep = kv["sweep"]
    if sweep not in SWEEPS:
        raise ValueError(f"sweep must be one of {SWEEPS}")
    raw_values = [t for t in kv["values"].replace(",", " ").split()]
    values = ([int(v) for v in raw_values] if sweep != "p_in"
              else [float(v) for v in raw_values])
    seed = _resolve_seed(args.seed if args.seed is not None
                         else (int(kv["seed"]) if "seed" in kv else None))
    hm_cfg = _HmCfg(
        m=int(kv.get("samples_per_vertex", 25)),
        g_candidates=_parse_clusters(kv.get("clusters", "2")),
        tau=float(kv.get("tau", 0.5)),
    )
    spec = SimulationSpec(
        sweep=sweep,
        values=values,
        mc_samples=int(kv.get("mc_samples", 50)),
        n_blocks=int(kv.get("n_blocks", 2)),
        block_size=int(kv.get("block_size", 100)),
        p_in=float(kv.get("p_in", 0.15)),
        p_out=float(kv.get("p_out", 0.05)),
        scale_p_out=kv.get("scale_p_out", "false").lower() in ("1", "true", "yes"),
        hitting_set_size=int(kv.get("hitting_set_size", 10)),
        seed=seed,
        workers=args.workers if args.workers is not None
        else int(kv.get("workers", 1)),
        hitmix_cfg=hm_cfg,
    )
    t0 = time.perf_counter()
    summary = run_simulation(spec)
    log.info("sbm-sim: %d conditions x %d runs in %.1fs",
             len(values), spec.mc_samples, time.perf_counter() - t0)
    os.makedirs(args.out, exist_ok=True)
    _atomic_write(os.path.join(args.out, "runs.csv"),
                  "\n".join(runs_csv_lines(summary)) + "\n")
    _atomic_write(os.path.join(args.out, "summary.csv"),
                  "\n".join(summary_csv_lines(summary)) + "\n")
    return 0


def _read_label_tsv(path: str) -> dict[int, int]:
    labels = {}
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("vertex_id"):
                continue
            tokens = line.split("\t")
            labels[int(tokens[0])] = int(tokens[1])
    return labels


def _cmd_eval(args) -> int:
    pred = _read_label_tsv(args.predicted)
    truth = _read_label_tsv(args.truth)
    common = sorted(set(pred) & set(truth))
    if len(common) < 2:
        raise ValueError("need at least 2 vertices common to both label files")
    a = [pred[v] for v in common]
    b = [truth[v] for v in common]
    ari = adjusted_rand_index(a, b)
    pred_set = {v for v in common if pred[v] == 1}
    truth_set = {v for v in common if truth[v] == 1}
    precision, recall, f1 = precision_recall_f1(pred_set, truth_set)
    print(json.dumps({"ari": ari, "precision": precision,
                      "recall": recall, "f1": f1}))
    return 0


def _cmd_relabel(args) -> int:
    mapping: dict[str, int] = {}
    out_lines = []
    with open(args.graph) as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise EdgeListParseError(line_no, f"expected 2 tokens, got {len(tokens)}")
            ids = [mapping.setdefault(t, len(mapping)) for t in tokens]
            out_lines.append(f"{ids[0]} {ids[1]}")
    _atomic_write(args.out, "\n".join(out_lines) + "\n")
    map_lines = [f"{name}\t{vid}" for name, vid in mapping.items()]
    _atomic_write(args.out + ".map.tsv", "\n".join(map_lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hitmix",
        description="Seed-set expansion via hitting-time moments and a "
                    "lognormal mixture model")
    sub = parser.add_subparsers(dest="command", required=True)

    common_gs = argparse.ArgumentParser(add_help=False)
    common_gs.add_argument("--graph", required=True, help="edge-list file")
    common_gs.add_argument("--seeds", required=True, help="seed-id file")
    common_gs.add_argument("--out", required=True, help="output path")
    common_gs.add_argument("--cg-tol", type=float, default=1e-10)

    p = sub.add_parser("moments", parents=[common_gs],
                       help="hitting-time means/variances as TSV")
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("expand", parents=[common_gs],
                       help="full membership pipeline, TSV + JSON sidecar")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--samples-per-vertex", type=int, default=25)
    p.add_argument("--clusters", default="auto",
                   help="comma list of component counts, or 'auto' (BIC over 2-5)")
    p.add_argument("--em-tol", type=float, default=1e-8)
    p.add_argument("--em-max-iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("sbm-sim", help="Monte Carlo SBM benchmark sweep")
    p.add_argument("--config", required=True, help="key = value settings file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_sbm_sim)

    p = sub.add_parser("eval", help="score predicted vs truth label TSVs")
    p.add_argument("--predicted", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("relabel", help="map string vertex names to dense ids")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_relabel)
    return parser


def run(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return 2


def main() -> None:
    sys.exit(run())
