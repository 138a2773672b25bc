"""Command-line front end: reproducible runs producing JSON reports plus
flat CSV traces for plotting.

Commands: batch, online, bounds, samplesize, rankprob, simulate.  Every
report embeds the fully resolved config; the timestamp is the only field
excluded from byte-for-byte reproducibility.  SATISRANK_LOG (debug/info/
warning) controls verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .batch_solver import satisficing_binary_search
from .data_io import (
    DistributionSpec,
    SplitMix64Stream,
    bootstrap_indices,
    load_batches,
    parse_distribution,
    write_batches,
)
from .divergence import DivergenceKind, DivergenceSpec
from .errors import SatisrankError
from .online_solver import initial_state, run
from .ranking import loss_bound_probability, rank_items
from .risk_core import ItemBatch, RegretScaling
from .validation import (
    estimate_dual,
    load_bound_params,
    lower_bound_estimate,
    ranking_validity_probability,
    required_sample_size,
    shrinking_upper_bound,
)

log = logging.getLogger("satisrank.cli")

_KINDS = [k.value for k in DivergenceKind]
_SCALINGS = [s.value for s in RegretScaling]


def _add_common(parser):
    parser.add_argument("--risk", choices=_KINDS, default="cvar", help="divergence kind")
    parser.add_argument("--theta", type=float, default=None, help="shape parameter where required")
    parser.add_argument("--scaling", choices=_SCALINGS, default="inv_alpha")
    parser.add_argument("--epsilon", type=float, default=1e-4, help="bisection tolerance")
    parser.add_argument("--seed", type=int, default=0, help="unsigned base seed")
    parser.add_argument("--out", type=Path, default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satisrank",
        description="Satisficing-measure risk indices, rankings, and their validity bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("batch", help="solve and rank a batch CSV")
    _add_common(p)
    p.add_argument("--input", type=Path, required=True, help="batch CSV (item_id,target,value)")
    p.add_argument(
        "--threshold-tau", action="store_true",
        help="test feasibility against the item target instead of 0",
    )
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("online", help="streaming primal-dual runs")
    _add_common(p)
    p.add_argument("--stream", type=Path, default=None, help="stream file (item_id,value lines)")
    p.add_argument("--dist", type=str, default=None, help="generator, e.g. normal:100:50:42")
    p.add_argument("--items", type=int, default=1, help="item count for generator streams")
    p.add_argument("--tau", type=str, required=True, help="target, or comma list per item")
    p.add_argument("--iters", type=int, required=True)
    p.set_defaults(func=_cmd_online)

    p = sub.add_parser("bounds", help="candidate validation and group bounds per item")
    _add_common(p)
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--groups", type=int, default=10)
    p.add_argument("--group-size", type=int, default=0, help="0 means the batch size")
    p.add_argument("--resample-factor", type=int, default=10)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("samplesize", help="required per-item sample size calculator")
    p.add_argument("--params", type=Path, required=True, help="key=value BoundParams file")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=_cmd_samplesize)

    p = sub.add_parser("rankprob", help="ranking validity probability calculators")
    p.add_argument("--mode", choices=["saa", "inversion"], required=True)
    p.add_argument("--params", type=Path, default=None, help="BoundParams file (saa mode)")
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    p.add_argument("--items", type=int, required=True)
    p.add_argument("--e", type=int, default=None, help="inversion budget (inversion mode)")
    p.add_argument("--c", type=float, default=None, help="minimal ranking separation")
    p.add_argument("--kappa", type=float, default=None, help="gap-bound constant")
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--literal-binomial", action="store_true")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=_cmd_rankprob)

    p = sub.add_parser("simulate", help="write a synthetic batch CSV")
    p.add_argument("--dist", type=str, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=str, required=True)
    p.add_argument("--items", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_simulate)
    return parser


def _divergence(args) -> DivergenceSpec:
    return DivergenceSpec(kind=DivergenceKind(args.risk), theta=args.theta)


def _taus(text: str, items: int) -> list[float]:
    values = [float(x) for x in text.split(",")]
    if len(values) == 1:
        return values * items
    if len(values) != items:
        raise ValueError(f"--tau lists {len(values)} targets for {items} items")
    return values


def _config(args) -> dict:
    cfg = {}
    for key, value in vars(args).items():
        if key == "func":
            continue
        cfg[key] = str(value) if isinstance(value, Path) else value
    return cfg


def _report(args, results) -> dict:
    return {
        "command": args.command,
        "config": _config(args),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "results": results,
    }


def _emit(args, results, extra_writer=None) -> None:
    report = _report(args, results)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.json").write_text(text, encoding="utf-8")
        if extra_writer is not None:
            extra_writer(args.out)
        log.info("report written to %s", args.out / "report.json")
    else:
        sys.stdout.write(text)


def _ranking_dict(report) -> dict:
    return {
        "entries": [
            {"item_id": e.item_id, "index": e.index, "rank": e.rank} for e in report.entries
        ],
        "ties": [list(group) for group in report.ties],
    }


def _write_ranking_csv(path: Path, report) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["item_id", "index", "rank"])
        for e in report.entries:
            writer.writerow([e.item_id, f"{e.index:.17g}", e.rank])


def _cmd_batch(args) -> None:
    spec = _divergence(args)
    scaling = RegretScaling(args.scaling)
    items = load_batches(args.input)
    ids = [b.item_id for b in items]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate item_ids")
    solutions = []
    for batch in items:
        threshold = batch.target if args.threshold_tau else 0.0
        solutions.append(
            satisficing_binary_search(batch, spec, scaling, args.epsilon, threshold)
        )
    ranking = rank_items([(s.item_id, s.index) for s in solutions])
    results = {
        "items": [
            {
                "item_id": s.item_id,
                "alpha_star": s.alpha_star,
                "index": s.index,
                "eta_star": s.eta_star,
                "feasible_at_alpha_star": s.feasible_at_alpha_star,
                "bisection_steps": s.bisection_steps,
            }
            for s in solutions
        ],
        "ranking": _ranking_dict(ranking),
    }
    _emit(args, results, lambda out: _write_ranking_csv(out / "ranking.csv", ranking))


def _cmd_online(args) -> None:
    spec = _divergence(args)
    scaling = RegretScaling(args.scaling)
    if (args.stream is None) == (args.dist is None):
        raise ValueError("provide exactly one of --stream or --dist")
    streams: list[tuple[str, list[float] | SplitMix64Stream, float]] = []
    if args.stream is not None:
        grouped: dict[str, list[float]] = {}
        order: list[str] = []
        for item_id, value in _iter_stream_file(args.stream):
            if item_id not in grouped:
                grouped[item_id] = []
                order.append(item_id)
            grouped[item_id].append(value)
        taus = _taus(args.tau, len(order))
        streams = [(i, grouped[i], taus[k]) for k, i in enumerate(order)]
    else:
        base = parse_distribution(args.dist)
        taus = _taus(args.tau, args.items)
        for k in range(args.items):
            spec_k = replace(base, seed=base.seed + k)
            streams.append((f"item_{k + 1}", SplitMix64Stream(spec_k), taus[k]))
    per_item = []
    histories = []
    checkpoints = []
    for item_id, source, tau in streams:
        values = source.draw(args.iters) if isinstance(source, SplitMix64Stream) else source
        result = run(iter(values), args.iters, initial_state(tau, spec, scaling))
        state = result.final_state
        per_item.append(
            {
                "item_id": item_id,
                "index_estimate": result.index_estimate,
                "alpha_readout": 1.0 - state.alpha,
                "alpha_readout_note": "state readout 1 - alpha_t, not the running value estimate",
                "t": state.t,
                "r": state.r,
            }
        )
        histories.append((item_id, result.r_history))
        checkpoints.append(
            {
                "item_id": item_id,
                "alpha": state.alpha,
                "eta": state.eta,
                "lambda": state.lam,
                "r": state.r,
                "t": state.t,
                "tau": state.tau,
                "spec": {"kind": state.spec.kind.value, "theta": state.spec.theta},
                "scaling": state.scaling.value,
                "bracket": list(state.bracket) if state.bracket else None,
            }
        )
    ranking = rank_items([(p["item_id"], p["index_estimate"]) for p in per_item])

    def write_extras(out: Path) -> None:
        _write_ranking_csv(out / "ranking.csv", ranking)
        with (out / "rhistory.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["item_id", "t", "r"])
            for item_id, history in histories:
                for t, r in history:
                    writer.writerow([item_id, t, f"{r:.17g}"])
        checkpoint = {"version": 1, "items": checkpoints}
        (out / "checkpoint.json").write_text(
            json.dumps(checkpoint, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    _emit(args, {"items": per_item, "ranking": _ranking_dict(ranking)}, write_extras)


def _iter_stream_file(path: Path):
    from .data_io import stream_observations

    return stream_observations(path)


def _cmd_bounds(args) -> None:
    spec = _divergence(args)
    scaling = RegretScaling(args.scaling)
    items = load_batches(args.input)
    sense = "min" if scaling is RegretScaling.INVERSE_ONE_MINUS_ALPHA else "max"
    results = []
    for k, batch in enumerate(items):
        sol = satisficing_binary_search(batch, spec, scaling, args.epsilon)
        pi_tilde = estimate_dual(batch, sol.alpha_star, spec, scaling)
        n = batch.size
        resample = ItemBatch(
            item_id=f"{batch.item_id}:resample",
            samples=batch.samples[bootstrap_indices(n, args.resample_factor * n, args.seed + 2 * k)],
            target=batch.target,
        )
        candidate, upper, rounds = shrinking_upper_bound(
            batch, resample, spec, scaling, args.delta, args.epsilon
        )
        group_size = args.group_size or n
        groups = [
            ItemBatch(
                item_id=f"{batch.item_id}:group{m}",
                samples=batch.samples[
                    bootstrap_indices(n, group_size, (args.seed + 2 * k + 1) * 1_000 + m)
                ],
                target=batch.target,
            )
            for m in range(args.groups)
        ]
        lower = lower_bound_estimate(groups, pi_tilde, spec, scaling, args.gamma, sense=sense)
        results.append(
            {
                "item_id": batch.item_id,
                "solution": {
                    "alpha_star": sol.alpha_star,
                    "index": sol.index,
                    "feasible_at_alpha_star": sol.feasible_at_alpha_star,
                },
                "pi_tilde": pi_tilde,
                "upper": {
                    "alpha_tilde": candidate.alpha_star,
                    "value": candidate.index,
                    "q_tilde": upper.q_tilde,
                    "s_q": upper.s_q,
                    "z_delta": upper.z_delta,
                    "accepted": upper.accepted,
                    "confidence": upper.confidence,
                    "shrink_rounds": rounds,
                },
                "lower": asdict(lower),
            }
        )
    _emit(args, {"items": results})


def _cmd_samplesize(args) -> None:
    result = required_sample_size(load_bound_params(args.params))
    _emit(args, asdict(result))


def _cmd_rankprob(args) -> None:
    if args.mode == "saa":
        if args.params is None or args.n1 is None or args.n2 is None:
            raise ValueError("saa mode needs --params, --n1, --n2")
        p = ranking_validity_probability(args.n1, args.n2, args.items, load_bound_params(args.params))
    else:
        needed = {"--e": args.e, "--c": args.c, "--kappa": args.kappa, "--iters": args.iters}
        missing = [k for k, v in needed.items() if v is None]
        if missing:
            raise ValueError(f"inversion mode needs {', '.join(missing)}")
        p = loss_bound_probability(
            args.items, args.e, args.c, args.kappa, args.iters, literal=args.literal_binomial
        )
    _emit(args, {"probability": p})


def _cmd_simulate(args) -> None:
    base = parse_distribution(args.dist)
    taus = _taus(args.tau, args.items)
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    batches = []
    for k in range(args.items):
        spec_k = replace(base, seed=base.seed + k)
        batches.append(
            ItemBatch(
                item_id=f"item_{k + 1}",
                samples=SplitMix64Stream(spec_k).draw(args.n),
                target=taus[k],
            )
        )

    def write_extras(out: Path) -> None:
        write_batches(out / "data.csv", batches)

    _emit(args, {"rows": args.n * args.items, "items": args.items, "path": "data.csv"}, write_extras)


def main(argv=None) -> int:
    level = os.environ.get("SATISRANK_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (SatisrankError, ValueError, OSError) as exc:
        record = {
            "error": {
                "module": type(exc).__module__.removeprefix("satisrank."),
                "type": type(exc).__name__,
                "message": str(exc),
                "config": _config(args),
            }
        }
        sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
