"""Command-line entry point.

Each stage reads and writes the documented file formats, so stages can be
run one at a time or chained with ``bench``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import ScenarioConfig, replicate_seed, replicate_streams, run_scenario
from .cod import cod_cluster, tune_alpha
from .cooc import count_cooccurrences, read_cooc, write_cooc
from .corpus_sim import default_alpha, read_sequences, simulate_corpus, write_sequences
from .errors import InvalidParameterError, ParseError
from .metrics import f_score, rand_index, relative_error
from .model_gen import BlockModel, sample_embeddings, scenario_model
from .partition import read_partition, write_partition
from .pmi import DEFAULT_ETA, empirical_pmi, read_dense, sppmi, write_dense
from .precision import DEFAULT_EPS_FLOOR, estimate

logger = logging.getLogger("blockgraph")


def _grid(text):
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_simulate(args):
    config = ScenarioConfig.load(args.config)
    if args.seed is not None:
        config.seed = args.seed
    seed = replicate_seed(config.seed, args.replicate)
    model_rng, emb_rng, corpus_rng = replicate_streams(seed)
    model = scenario_model(config.scenario, config.d, config.K, model_rng,
                           config.gamma_low, config.gamma_high, config.uneven, seed=seed)
    V = sample_embeddings(model, config.p, emb_rng)
    tokens = simulate_corpus(V, config.T, default_alpha(config.d, config.p), corpus_rng)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / "model.json")
    write_sequences([tokens], out / "corpus.txt")
    logger.info("wrote %s/model.json and corpus.txt (T=%d)", out, config.T)


def cmd_cooc(args):
    seqs = read_sequences(args.input, d=args.d)
    C = count_cooccurrences(seqs, args.q, args.d)
    write_cooc(C, args.output)
    logger.info("d=%d q=%d total=%d", C.d, C.q, C.total)


def cmd_pmi(args):
    S = sppmi(empirical_pmi(read_cooc(args.input)), args.eta)
    write_dense(S.values, args.output)


def cmd_cluster(args):
    S = read_dense(args.input)
    if args.alpha is not None:
        part = cod_cluster(S, args.alpha)
        alpha = args.alpha
    else:
        if args.p is None:
            raise InvalidParameterError("either --alpha or --p (for tuning) is required")
        alpha, part, _ = tune_alpha(S, S.shape[0], args.p, args.grid)
    write_partition(part, args.output)
    logger.info("alpha=%.6g, %d clusters", alpha, part.K)


def cmd_estimate(args):
    S = read_dense(args.input)
    part = read_partition(args.partition)
    if part.d != S.shape[0]:
        raise InvalidParameterError(f"partition covers d={part.d} but SPPMI has d={S.shape[0]}")
    result = estimate(S, part, S.shape[0], args.p, lam=args.lam, grid=args.grid, tau=args.tau,
                      eps_floor=args.eps_floor, averaging=not args.no_averaging,
                      workers=args.threads)
    result.save(args.output)
    logger.info("lambda=%.6g, %d support entries", result.lam, int(result.support.sum()))


def cmd_evaluate(args):
    report = {}
    if args.partition and args.reference:
        report["rand_index"] = rand_index(read_partition(args.reference), read_partition(args.partition))
    if args.estimate:
        if not args.model:
            raise InvalidParameterError("--estimate needs --model for the ground truth")
        model = BlockModel.load(args.model)
        est = Path(args.estimate)
        o_hat = read_dense(est / "o_hat.csv")
        sup = read_dense(est / "support.csv").astype(bool)
        if o_hat.shape != model.O.shape:
            raise InvalidParameterError("estimate and model disagree on K")
        truth = model.graph.adjacency() | np.eye(model.K, dtype=bool)
        prec, rec, f = f_score(sup, truth)
        report.update({
            "rel_err_max": relative_error(o_hat, model.O, "max"),
            "rel_err_frob": relative_error(o_hat, model.O, "frobenius"),
            "precision": prec, "recall": rec, "f_score": f,
        })
    if not report:
        raise InvalidParameterError("nothing to evaluate: give --partition/--reference and/or --estimate/--model")
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)


def cmd_bench(args):
    config = ScenarioConfig.load(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.timing:
        config.timing = True
    out = run_scenario(config, threads=args.threads)
    out.save(args.out)
    for agg in out.aggregates:
        logger.info("%s %s: rand_index=%.4f f_score=%.4f", config.scenario, agg["replicate"],
                    agg["rand_index"], agg["f_score"])
    if out.failed:
        logger.error("%d replicate(s) failed; see manifest.json",
                     sum(f is not None for f in out.manifest["failures"]))
        return 1
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="blockgraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a model and a token corpus from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--output", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cooc", help="count windowed co-occurrences")
    p.add_argument("--input", required=True, help="token file, one sequence per line")
    p.add_argument("--output", required=True)
    p.add_argument("--q", type=int, default=10)
    p.add_argument("--d", type=int, help="vocabulary size (default: largest id)")
    p.set_defaults(func=cmd_cooc)

    p = sub.add_parser("pmi", help="SPPMI matrix from a count file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--eta", type=float, default=DEFAULT_ETA)
    p.set_defaults(func=cmd_pmi)

    p = sub.add_parser("cluster", help="COD clustering of an SPPMI matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--p", type=int, help="embedding dimension, for the tuning grid scale")
    p.add_argument("--grid", type=_grid, default=[round(0.1 * i, 1) for i in range(1, 21)])
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("estimate", help="CLIME precision estimate for a given partition")
    p.add_argument("--input", required=True, help="SPPMI dense CSV")
    p.add_argument("--partition", required=True)
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--grid", type=_grid, default=[round(0.1 * i, 1) for i in range(1, 21)])
    p.add_argument("--tau", type=float)
    p.add_argument("--eps-floor", type=float, default=DEFAULT_EPS_FLOOR)
    p.add_argument("--no-averaging", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", help="compare partitions and/or an estimate with ground truth")
    p.add_argument("--partition")
    p.add_argument("--reference")
    p.add_argument("--estimate", help="estimate directory")
    p.add_argument("--model", help="model.json with the true precision graph")
    p.add_argument("--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="run all replicates of a scenario config")
    p.add_argument("--config", required=True, help="config JSON or a previous manifest.json")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        status = args.func(args)
    except (OSError, ParseError, InvalidParameterError, KeyError, json.JSONDecodeError) as exc:
        logger.error("%s", exc)
        return 2
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
