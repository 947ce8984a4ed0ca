"""Command-line front end: ``pairscan synth|score|discover|eval``.

Each subcommand reads an optional JSON config (``--config``); command-line
flags override config values, which override built-in defaults. Unknown
config keys are rejected. Every output directory receives a
``descriptor.json`` holding the fully resolved configuration, so a run can
be repeated with ``--config <dir>/descriptor.json``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure. ``PAIRSCAN_WORKERS`` sets the default worker count.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .bandit import PolicyConfig, PosteriorHyperParams, run_discovery, write_history, write_metrics
from .bandit.policies import POLICY_KINDS
from .core import DataError, NumericError, RelationSet, ScoreMatrix, canonical_pair
from .disjoint import cosine_sq, disjointedness_sweep, embedding_residual_score, mean_centered_embeddings
from .io import dataset_load, dataset_save, fmt, load_json, read_relations, read_sample_csv, read_score_matrix
from .io import write_json, write_relations, write_rows, write_score_matrix
from .kernels import MATERN25, MEDIAN, RBF, KernelSpec
from .nre import NreTrainConfig
from .ratio import Knn, NreSmile, separability_sweep
from .synth import MixtureSpec, SeparableSpec, gen_disjoint_mixture, gen_lowrank_reward, gen_separable_tabular
from .synth import plant_relations

log = logging.getLogger("pairscan")

WORKERS_ENV = "PAIRSCAN_WORKERS"
EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4

STATS = ("separability-knn", "separability-nre-smile", "disjointedness-rbf", "disjointedness-matern", "embedding-residual")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def _pair_list(value) -> list[list[int]]:
    if isinstance(value, str):
        value = value.split()
    out = []
    for item in value:
        if isinstance(item, str):
            parts = item.split(",")
        else:
            parts = list(item)
        if len(parts) != 2:
            raise ConfigError(f"pair {item!r} is not of the form i,j")
        try:
            out.append(list(canonical_pair(int(parts[0]), int(parts[1]))))
        except ValueError:
            raise ConfigError(f"pair {item!r} is not of the form i,j") from None
    return out


def _int(value) -> int:
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ConfigError(f"expected an integer, got {value!r}")
    return int(value)


def _str_list(value) -> list[str]:
    if isinstance(value, str):
        return [value]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"expected a string or list of strings, got {value!r}")
    return value


def _int_list(value) -> list[int]:
    if isinstance(value, (_int, str)):
        value = [value]
    try:
        return [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"expected integers, got {value!r}") from None


def _bandwidth(value):
    if value == MEDIAN:
        return MEDIAN
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bandwidth must be 'median' or a number, got {value!r}") from None


# key -> (coercion, default); a default of None marks an optional value
Schema = dict[str, tuple[Callable[[Any], Any], Any]]

SYNTH: Schema = {
    "kind": (str, None),
    "out": (str, None),
    "seed": (_int, 0),
    "n": (_int, None),
    "depth": (_int, None),
    "slope": (float, 0.7),
    "n_perturbations": (_int, 50),
    "rank": (_int, 5),
    "noise_sd": (float, 0.0),
    "n_relations": (_int, 0),
    "relation_top_fraction": (float, 0.1),
    "relation_hit_rate": (float, 0.5),
}
SCORE: Schema = {
    "data": (str, None),
    "out": (str, None),
    "stat": (_str_list, ["separability-knn"]),
    "pairs": (_pair_list, None),
    "seed": (_int, 0),
    "k": (_int, 5),
    "tau": (float, 5.0),
    "bandwidth": (_bandwidth, MEDIAN),
    "epochs": (_int, 500),
    "hidden_sizes": (_int_list, [128, 64]),
    "embed_dim": (_int, 32),
    "step_size": (float, 0.005),
    "batch_size": (_int, 1024),
    "embeddings": (str, None),
    "workers": (_int, None),
}
DISCOVER: Schema = {
    "truth": (str, None),
    "out": (str, None),
    "relations": (str, None),
    "policy": (_str_list, ["ids"]),
    "rounds": (_int, 50),
    "batch": (_int, 10),
    "seeds": (_int, 1),
    "seed_start": (_int, 0),
    "lam": (float, 2.0),
    "beta": (float, 1.0),
    "rank": (_int, 5),
    "prior_sd": (float, 1.0),
    "noise_sd": (float, 0.1),
    "n_draws": (_int, 500),
    "burn_in": (_int, 100),
    "thinning": (_int, 2),
    "n_chains": (_int, 10),
    "percentile": (float, 5.0),
    "workers": (_int, None),
}
EVAL: Schema = {
    "runs": (str, None),
    "out": (str, None),
    "embeddings": (str, None),
    "scores": (str, None),
}
REQUIRED = {"synth": ("kind", "out"), "score": ("data", "out"), "discover": ("truth", "out"), "eval": ("out",)}
SCHEMAS = {"synth": SYNTH, "score": SCORE, "discover": DISCOVER, "eval": EVAL}


def resolve_config(command: str, config_path: str | None, flags: dict) -> dict:
    """Merge defaults, config file and flags (in increasing precedence)."""
    schema = SCHEMAS[command]
    merged = {k: default for k, (_, default) in schema.items()}
    layers = []
    if config_path is not None:
        try:
            raw = load_json(config_path)
        except DataError as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{config_path}: top level must be a JSON object")
        # descriptors written by this tool nest the settings under "config"
        if set(raw) == {"command", "config", "version"}:
            if raw["command"] != command:
                raise ConfigError(f"{config_path} describes a {raw['command']!r} run, not {command!r}")
            raw = raw["config"]
        unknown = sorted(set(raw) - set(schema))
        if unknown:
            raise ConfigError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
        layers.append(raw)
    layers.append({k: v for k, v in flags.items() if v is not None})
    for layer in layers:
        for key, value in layer.items():
            if value is None:
                merged[key] = None
                continue
            coerce = schema[key][0]
            try:
                merged[key] = coerce(value)
            except ConfigError:
                raise
            except (TypeError, ValueError):
                raise ConfigError(f"invalid value for {key!r}: {value!r}") from None
    missing = [k for k in REQUIRED[command] if merged[k] is None]
    if missing:
        raise ConfigError(f"missing required setting(s): {', '.join(missing)}")
    return merged


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1")
    return n


def _descriptor(out: Path, command: str, cfg: dict) -> None:
    # worker count never affects outputs, so it is left out for byte-identical reruns
    kept = {k: v for k, v in cfg.items() if k != "workers"}
    write_json(out / "descriptor.json", {"command": command, "config": kept, "version": __version__})


# ---------------------------------------------------------------------------
# synth


def cmd_synth(cfg: dict) -> int:
    out = Path(cfg["out"])
    kind = cfg["kind"]
    if kind == "separable":
        spec = SeparableSpec(**_spec_kwargs(cfg, SeparableSpec))
        ds = gen_separable_tabular(spec)
    elif kind == "mixture":
        spec = MixtureSpec(**_spec_kwargs(cfg, MixtureSpec))
        ds = gen_disjoint_mixture(spec)
    elif kind == "lowrank":
        truth = gen_lowrank_reward(cfg["n_perturbations"], cfg["rank"], cfg["noise_sd"], cfg["seed"])
        write_score_matrix(out / "truth.csv", truth)
        info = {"kind": kind, "n_perturbations": truth.n, "files": ["truth.csv"]}
        if cfg["n_relations"] > 0:
            rel = plant_relations(
                truth, cfg["n_relations"], cfg["relation_top_fraction"], cfg["relation_hit_rate"], cfg["seed"]
            )
            write_relations(out / "relations.txt", rel)
            info["files"].append("relations.txt")
        _descriptor(out, "synth", cfg)
        print(json.dumps(info, sort_keys=True))
        return 0
    else:
        raise ConfigError(f"unknown kind {kind!r}; expected separable, mixture or lowrank")
    dataset_save(ds, out)
    _descriptor(out, "synth", cfg)
    gt = [[ds.names[i], ds.names[j]] for i, j in ds.metadata["ground_truth_pairs"]]
    print(json.dumps({"kind": kind, "conditions": len(ds.conditions), "ground_truth_pairs": gt}, sort_keys=True))
    return 0


def _spec_kwargs(cfg: dict, cls) -> dict:
    kw = {"seed": cfg["seed"], "leaky_slope": cfg["slope"]}
    if cfg["n"] is not None:
        kw["n_per_class"] = cfg["n"]
    if cfg["depth"] is not None:
        kw["mlp_depth"] = cfg["depth"]
    return kw


# ---------------------------------------------------------------------------
# score


def cmd_score(cfg: dict) -> int:
    unknown = [s for s in cfg["stat"] if s not in STATS]
    if unknown:
        raise ConfigError(f"unknown statistic(s) {', '.join(unknown)}; expected one of {', '.join(STATS)}")
    ds = dataset_load(cfg["data"])
    out = Path(cfg["out"])
    workers = cfg["workers"] or default_workers()
    pairs = [tuple(p) for p in cfg["pairs"]] if cfg["pairs"] is not None else ds.double_pairs()
    for p in pairs:
        if max(p) >= ds.n_perturbations:
            raise DataError(f"pair {p} out of range for {ds.n_perturbations} perturbations")
    for stat in cfg["stat"]:
        values, diag = _score_one(stat, ds, pairs, cfg, workers)
        write_score_matrix(out / f"{stat}.csv", ScoreMatrix(ds.n_perturbations, values))
        write_json(out / f"{stat}_diagnostics.json", {f"{i},{j}": d for (i, j), d in sorted(diag.items())})
        log.info("%s: scored %d pairs", stat, len(values))
    _descriptor(out, "score", cfg)
    return 0


def _score_one(stat: str, ds, pairs, cfg: dict, workers: int):
    if stat.startswith("separability"):
        if stat == "separability-knn":
            est = Knn(cfg["k"])
        else:
            nre = NreTrainConfig(
                tuple(cfg["hidden_sizes"]), cfg["embed_dim"], cfg["step_size"], cfg["epochs"], cfg["batch_size"], cfg["seed"]
            )
            est = NreSmile(nre, cfg["tau"])
        res, _ = separability_sweep(ds, pairs, est)
        return {p: r.score for p, r in res.items()}, {p: asdict(r) for p, r in res.items()}
    if stat.startswith("disjointedness"):
        family = RBF if stat == "disjointedness-rbf" else MATERN25
        res = disjointedness_sweep(ds, pairs, KernelSpec(family, cfg["bandwidth"]), cfg["seed"], workers)
        return {p: r.mmd2 for p, r in res.items()}, {p: asdict(r) for p, r in res.items()}
    emb = dataset_load(cfg["embeddings"]) if cfg["embeddings"] else None
    table = mean_centered_embeddings(ds, emb)
    vals = {p: embedding_residual_score(table, *p) for p in pairs}
    return vals, {p: {"score": v} for p, v in vals.items()}


# ---------------------------------------------------------------------------
# discover


def _discover_one(args) -> tuple[str, int, str]:
    truth, relations, policy, hp, cfg, seed, run_dir = args
    state, metrics = run_discovery(truth, policy, hp, cfg["rounds"], seed, relations, cfg["percentile"])
    run_dir = Path(run_dir)
    write_history(run_dir / "history.csv", state)
    write_metrics(run_dir / "metrics.csv", metrics)
    desc = dict(cfg, policy=[policy.kind], seeds=1, seed_start=seed)
    _descriptor(run_dir, "discover", desc)
    return policy.kind, seed, f"recovery={fmt(metrics.recovery[-1])} regret={fmt(metrics.regret[-1])}"


def cmd_discover(cfg: dict) -> int:
    for kind in cfg["policy"]:
        if kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy {kind!r}; expected one of {', '.join(POLICY_KINDS)}")
    if cfg["seeds"] < 1:
        raise ConfigError("seeds must be >= 1")
    truth = read_score_matrix(cfg["truth"])
    if not truth.is_complete():
        raise DataError(f"{cfg['truth']}: truth matrix must be fully observed")
    relations = read_relations(cfg["relations"]) if cfg["relations"] else RelationSet()
    if any(max(p) >= truth.n for p in relations):
        raise DataError("relation pair index out of range for the truth matrix")
    n_pairs = truth.n * (truth.n - 1) // 2
    if cfg["rounds"] * cfg["batch"] > n_pairs:
        raise ConfigError(f"budget {cfg['rounds']} x {cfg['batch']} exceeds the {n_pairs} available pairs")
    try:
        hp = PosteriorHyperParams(
            cfg["rank"], cfg["prior_sd"], cfg["noise_sd"], cfg["n_draws"], cfg["burn_in"], cfg["thinning"], 0, cfg["n_chains"]
        )
        policies = [PolicyConfig(k, cfg["batch"], cfg["lam"], cfg["beta"]) for k in cfg["policy"]]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(cfg["out"])
    seeds = range(cfg["seed_start"], cfg["seed_start"] + cfg["seeds"])
    jobs = [
        (truth, relations, pol, hp, cfg, s, str(out / pol.kind / f"seed_{s}")) for pol in policies for s in seeds
    ]
    workers = min(cfg["workers"] or default_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_discover_one, jobs))
    else:
        results = [_discover_one(j) for j in jobs]
    for kind, seed, summary in results:
        log.info("%s seed %d: %s", kind, seed, summary)
    _descriptor(out, "discover", cfg)
    return 0


# ---------------------------------------------------------------------------
# eval

METRIC_COLUMNS = ("regret", "recovery", "known_count")


def _read_metrics(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty metrics file")
    try:
        body = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError:
        raise DataError(f"{path}: malformed metrics value") from None
    return rows[0], body


def collect_runs(root: Path) -> dict[str, list[np.ndarray]]:
    """Metrics arrays grouped by policy, ordered by seed."""
    found: dict[str, list[tuple[int, np.ndarray]]] = {}
    header_ref = None
    for mpath in sorted(root.rglob("metrics.csv")):
        desc = load_json(mpath.parent / "descriptor.json")
        cfg = desc.get("config", {})
        policy, seed = cfg.get("policy", [None])[0], cfg.get("seed_start")
        if policy is None or seed is None:
            raise DataError(f"{mpath.parent}: descriptor lacks policy or seed")
        header, body = _read_metrics(mpath)
        if header_ref is None:
            header_ref = header
        if header != header_ref or header != ["round", *METRIC_COLUMNS]:
            raise DataError(f"inconsistent run schemas: {mpath} has columns {header}")
        found.setdefault(policy, []).append((seed, body))
    if not found:
        raise DataError(f"no runs found under {root}")
    out = {}
    for policy, runs in sorted(found.items()):
        runs.sort(key=lambda t: t[0])
        shapes = {b.shape for _, b in runs}
        if len(shapes) != 1:
            raise DataError(f"inconsistent run schemas: policy {policy} has runs of differing length")
        out[policy] = [b for _, b in runs]
    return out


def summarize_runs(runs: dict[str, list[np.ndarray]]) -> list[list]:
    """Tidy rows ``policy, round, metric, mean, min, max`` across seeds."""
    rows = []
    for policy, bodies in runs.items():
        stack = np.stack(bodies)  # (seeds, rounds, 1 + metrics)
        for r in range(stack.shape[1]):
            for c, metric in enumerate(METRIC_COLUMNS, start=1):
                col = stack[:, r, c]
                rows.append([policy, int(stack[0, r, 0]), metric, float(col.mean()), float(col.min()), float(col.max())])
    return rows


def cosine_table(vectors: np.ndarray, scores: ScoreMatrix) -> list[list]:
    """Rows ``i, j, score, cosine_sq`` over the observed score entries."""
    if vectors.shape[0] != scores.n:
        raise DataError(f"embedding table has {vectors.shape[0]} rows but the score matrix is {scores.n} x {scores.n}")
    return [[i, j, float(v), cosine_sq(vectors[i], vectors[j])] for (i, j), v in sorted(scores.observed().items())]


def cmd_eval(cfg: dict) -> int:
    out = Path(cfg["out"])
    did = False
    if cfg["runs"]:
        root = Path(cfg["runs"])
        if not root.is_dir():
            raise DataError(f"no runs found: {root} is not a directory")
        write_rows(out / "summary.csv", ["policy", "round", "metric", "mean", "min", "max"], summarize_runs(collect_runs(root)))
        did = True
    if cfg["embeddings"] or cfg["scores"]:
        if not (cfg["embeddings"] and cfg["scores"]):
            raise ConfigError("the cosine table needs both embeddings and scores")
        rows = cosine_table(read_sample_csv(cfg["embeddings"]), read_score_matrix(cfg["scores"]))
        write_rows(out / "cosine.csv", ["i", "j", "score", "cosine_sq"], rows)
        did = True
    if not did:
        raise ConfigError("eval needs runs, or embeddings together with scores")
    _descriptor(out, "eval", cfg)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairscan", description="Score perturbation pairs for interactions and run adaptive pair discovery.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", help="JSON config; flags take precedence over its values")
        sp.add_argument("-v", "--verbose", action="store_true", help="log one line per round or statistic to stderr")
        return sp

    sp = add("synth", "generate a synthetic dataset or low-rank reward matrix")
    sp.add_argument("--kind", help="separable, mixture or lowrank")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--seed", type=int, help="generator seed (default 0)")
    sp.add_argument("--n", type=int, help="samples per condition (default 20000)")
    sp.add_argument("--depth", type=int, help="MLP depth (default 7 separable, 10 mixture)")
    sp.add_argument("--slope", type=float, help="leaky-ReLU slope (default 0.7)")
    sp.add_argument("--n-perturbations", dest="n_perturbations", type=int, help="lowrank: matrix size (default 50)")
    sp.add_argument("--rank", type=int, help="lowrank: rank (default 5)")
    sp.add_argument("--noise-sd", dest="noise_sd", type=float, help="lowrank: entry noise sd (default 0)")
    sp.add_argument("--n-relations", dest="n_relations", type=int, help="lowrank: planted known relations (default 0)")
    sp.add_argument("--relation-top-fraction", dest="relation_top_fraction", type=float, help="default 0.1")
    sp.add_argument("--relation-hit-rate", dest="relation_hit_rate", type=float, help="default 0.5")

    sp = add("score", "compute pairwise interaction scores for a dataset")
    sp.add_argument("--data", help="dataset directory or manifest.json")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--stat", nargs="+", help=f"one or more of {', '.join(STATS)}")
    sp.add_argument("--pairs", nargs="+", help="restrict to pairs given as i,j (default: all doubles)")
    sp.add_argument("--seed", type=int, help="seed for NRE training and pool subsampling (default 0)")
    sp.add_argument("--k", type=int, help="nearest-neighbour order (default 5)")
    sp.add_argument("--tau", type=float, help="SMILE clipping threshold (default 5)")
    sp.add_argument("--bandwidth", help="kernel bandwidth or 'median' (default)")
    sp.add_argument("--epochs", type=int, help="NRE epochs (default 500)")
    sp.add_argument("--hidden-sizes", dest="hidden_sizes", type=int, nargs="+", help="NRE hidden widths (default 128 64)")
    sp.add_argument("--embed-dim", dest="embed_dim", type=int, help="NRE embedding width (default 32)")
    sp.add_argument("--step-size", dest="step_size", type=float, help="Adam step size (default 0.005)")
    sp.add_argument("--batch-size", dest="batch_size", type=int, help="NRE minibatch size (default 1024)")
    sp.add_argument("--embeddings", help="dataset of per-sample embeddings for embedding-residual")
    sp.add_argument("--workers", type=int, help=f"worker threads (default ${WORKERS_ENV} or 1)")

    sp = add("discover", "run adaptive pair discovery against a known score matrix")
    sp.add_argument("--truth", help="fully observed score-matrix CSV")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--relations", help="known relations file (lines of i,j)")
    sp.add_argument("--policy", nargs="+", help=f"one or more of {', '.join(POLICY_KINDS)} (default ids)")
    sp.add_argument("--rounds", type=int, help="number of rounds T (default 50)")
    sp.add_argument("--batch", type=int, help="pairs per round b (default 10)")
    sp.add_argument("--seeds", type=int, help="number of seeds (default 1)")
    sp.add_argument("--seed-start", dest="seed_start", type=int, help="first seed (default 0)")
    sp.add_argument("--lam", type=float, help="IDS regret exponent (default 2)")
    sp.add_argument("--beta", type=float, help="UCB width (default 1)")
    sp.add_argument("--rank", type=int, help="posterior rank m (default 5)")
    sp.add_argument("--prior-sd", dest="prior_sd", type=float, help="factor prior sd (default 1)")
    sp.add_argument("--noise-sd", dest="noise_sd", type=float, help="observation noise sd (default 0.1)")
    sp.add_argument("--n-draws", dest="n_draws", type=int, help="posterior draws k (default 500)")
    sp.add_argument("--burn-in", dest="burn_in", type=int, help="Gibbs burn-in sweeps (default 100)")
    sp.add_argument("--thinning", type=int, help="sweeps between kept draws (default 2)")
    sp.add_argument("--n-chains", dest="n_chains", type=int, help="parallel Gibbs chains (default 10)")
    sp.add_argument("--percentile", type=float, help="top-percentile for recovery (default 5)")
    sp.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")

    sp = add("eval", "aggregate discovery runs and embedding comparisons")
    sp.add_argument("--runs", help="directory containing discovery runs")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--embeddings", help="CSV with one embedding vector per perturbation")
    sp.add_argument("--scores", help="score-matrix CSV to join with embedding cosines")
    return p


COMMANDS = {"synth": cmd_synth, "score": cmd_score, "discover": cmd_discover, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        cfg = resolve_config(args.command, args.config, flags)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # invalid settings rejected by the library's own constructors
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
