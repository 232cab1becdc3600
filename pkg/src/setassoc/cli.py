"""Command-line front end: ``setassoc <subcommand> [options]``.

Global options (accepted before or after the subcommand): ``--seed``,
``--out``, ``--format`` and ``--config``.  Errors go to stderr as one JSON
object ``{"error": ..., "message": ...}`` with exit status 2.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

from .ballsbins import (EXACT_BUDGET, BallsBinsParams, exact_overflow_probability,
                        mc_overflow_probability, mc_saturated_bins, overflow_bound)
from .cache import RehashConfig
from .classes import CHECKS, SearchSpace, audit
from .experiments import (BALLSBINS_AUDIT, CLASS_AUDIT, PAIR_RUN, REHASH_LONGRUN,
                          THRESHOLD_SWEEP, ExperimentConfig, TraceSource, build_trace,
                          config_from_mapping, load_config, pair_report,
                          run_rehash_longrun, run_threshold_sweep)
from .io import BINARY, CSV, JSON, TEXT, emit_report, make_meta, save_trace
from .policies import PolicyKind


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="single seed (overrides the seed list)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output path ('-' for stdout)")
    g.add_argument("--format", default=argparse.SUPPRESS,
                   help="CSV or JSON for reports, TEXT or BINARY for gen-trace")
    g.add_argument("--config", default=argparse.SUPPRESS, help="INI file with an [experiment] section")
    return p


def _experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", help="cache size")
    p.add_argument("--alphas", help="comma-separated associativities")
    p.add_argument("--delta", help="resource augmentation delta, or AUTO")
    p.add_argument("--c", help="target ratio used by AUTO delta and the adversary")
    p.add_argument("--kind", help="policy, e.g. LRU, LRU-2, LFU, FIFO, CLOCK")
    p.add_argument("--trace", help="generator string like mixed:s=32,t=4,exponent=1.0 or file:PATH")
    p.add_argument("--seeds", help="seed list, e.g. 0,1,2 or 0..9")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="setassoc", parents=[common],
                                 description="Set-associative paging experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="threshold sweep over associativities")
    _experiment_args(p)

    p = sub.add_parser("rehash", parents=[common], help="long fixed-set run with rehashing")
    _experiment_args(p)
    p.add_argument("--mode", help="FULL-FLUSH or INCREMENTAL")
    p.add_argument("--modes", help="comma list of modes to run, e.g. NONE,FULL-FLUSH,INCREMENTAL")
    p.add_argument("--threshold", help="misses between rehashes (default k**d)")
    p.add_argument("--d", help="rehash exponent d >= 2")
    p.add_argument("--repetitions", type=int, help="cycles of the fixed set")

    p = sub.add_parser("audit-classes", parents=[common], help="exhaustive class audit")
    p.add_argument("--kinds", default="LRU,LRU-2,LFU,FIFO,CLOCK,FLUSH-WHEN-FULL,REUSE-DISTANCE")
    p.add_argument("--predicates", default=",".join(CHECKS))
    p.add_argument("--universe", type=int, default=4)
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--capacities", default="2,3,4")
    p.add_argument("--budget", type=int, default=10**7)

    p = sub.add_parser("audit-ballsbins", parents=[common], help="balls-and-bins estimates")
    p.add_argument("--m", type=int, required=True, help="balls")
    p.add_argument("--n", type=int, required=True, help="bins")
    p.add_argument("--alphas", default="", help="overflow levels to estimate")
    p.add_argument("--epsilons", default="", help="saturation margins to estimate")
    p.add_argument("--delta", type=float, help="delta for the reported overflow bound")
    p.add_argument("--trials", type=int, default=10_000)

    p = sub.add_parser("pair-run", parents=[common], help="one lockstep test/reference run")
    p.add_argument("--trace", required=True, help="generator string or file:PATH[,format=BINARY]")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--kind", default="LRU")
    p.add_argument("--ref-capacity", type=int, help="reference size (default: k)")
    p.add_argument("--delta", type=float, default=0.0, help="used by generated traces")
    p.add_argument("--mode", default="NONE")
    p.add_argument("--threshold", type=int)

    p = sub.add_parser("gen-trace", parents=[common], help="write a generated trace")
    p.add_argument("--trace", required=True, help="generator string")
    p.add_argument("--k", type=int, default=4096)
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--c", type=float, default=1.0)
    return ap


def _config(args, experiment: str) -> ExperimentConfig:
    base = ExperimentConfig(experiment=experiment)
    if getattr(args, "config", None):
        base = load_config(args.config, base)
        base = dataclasses.replace(base, experiment=experiment)
    m = {}
    for flag, key in (("k", "k"), ("alphas", "alpha_grid"), ("delta", "delta"), ("c", "c"),
                      ("kind", "kind"), ("trace", "trace"), ("seeds", "seeds"),
                      ("mode", "rehash_mode"), ("threshold", "rehash_threshold"),
                      ("d", "rehash_d"), ("modes", "modes")):
        v = getattr(args, flag, None)
        if v is not None:
            m[key] = str(v)
    if getattr(args, "seed", None) is not None:
        m["seeds"] = str(args.seed)
    if getattr(args, "out", None):
        m["output"] = args.out
    cfg = config_from_mapping(m, base)
    reps = getattr(args, "repetitions", None)
    if reps is not None:
        cfg = dataclasses.replace(cfg, trace_source=TraceSource("cycler", (("repetitions", reps),)))
    return cfg


def _report_format(args) -> str:
    fmt = (getattr(args, "format", None) or CSV).upper()
    if fmt not in (CSV, JSON):
        raise ValueError(f"report format must be CSV or JSON, not {fmt}")
    return fmt


def _emit(args, rows, meta, cfg_out=None):
    emit_report(rows, getattr(args, "out", None) or cfg_out, _report_format(args), meta)


def cmd_sweep(args):
    cfg = _config(args, THRESHOLD_SWEEP)
    _emit(args, run_threshold_sweep(cfg), make_meta(cfg, cfg.seeds), cfg.output)


def cmd_rehash(args):
    cfg = _config(args, REHASH_LONGRUN)
    if cfg.trace_source.generator != "cycler":
        cfg = dataclasses.replace(cfg, trace_source=TraceSource("cycler", (("repetitions", 1024),)))
    _emit(args, run_rehash_longrun(cfg), make_meta(cfg, cfg.seeds), cfg.output)


def _ints(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def cmd_audit_classes(args):
    space = SearchSpace(args.universe, args.max_len, _ints(args.capacities), budget=args.budget)
    kinds = [PolicyKind.parse(x) for x in args.kinds.split(",") if x.strip()]
    preds = [p.strip().upper() for p in args.predicates.split(",") if p.strip()]
    for p in preds:
        if p not in CHECKS:
            raise ValueError(f"unknown predicate {p!r}")
    verdicts = audit(kinds, preds, space)
    cfg = {"experiment": CLASS_AUDIT, "kinds": [str(k) for k in kinds], "predicates": preds,
           "space": space.as_dict()}
    _emit(args, [v.as_dict() for v in verdicts], make_meta(cfg, []))


def cmd_audit_ballsbins(args):
    seed = getattr(args, "seed", 0)
    params = BallsBinsParams(args.m, args.n, args.trials, seed)
    rows = []
    for a in (float(x) for x in args.alphas.split(",") if x.strip()):
        a = int(a)
        est, se = mc_overflow_probability(params, a)
        row = {"quantity": "overflow", "m": args.m, "n": args.n, "alpha": a, "epsilon": None,
               "estimate": est, "stderr": se, "exact": None, "bound": None, "out_of_range": False}
        if args.n ** args.m <= EXACT_BUDGET:
            row["exact"] = float(exact_overflow_probability(args.m, args.n, a))
        if args.delta is not None:
            row["bound"] = overflow_bound(args.m, a, args.delta)
        rows.append(row)
    for e in (float(x) for x in args.epsilons.split(",") if x.strip()):
        st = mc_saturated_bins(params, e)
        rows.append({"quantity": "saturation", "m": args.m, "n": args.n, "alpha": None,
                     "epsilon": e, "estimate": st.frac_exceeding, "stderr": st.stderr,
                     "exact": None, "bound": 1 - math.exp(-st.f_value / 32),
                     "out_of_range": st.out_of_range})
    cfg = {"experiment": BALLSBINS_AUDIT, "m": args.m, "n": args.n, "trials": args.trials,
           "alphas": args.alphas, "epsilons": args.epsilons, "delta": args.delta}
    _emit(args, rows, make_meta(cfg, [seed]))


def cmd_pair_run(args):
    seed = getattr(args, "seed", 0)
    src = TraceSource.parse(args.trace)
    kind = PolicyKind.parse(args.kind)
    trace = build_trace(src, args.k, args.alpha, args.delta, 1.0, seed)
    ref = args.ref_capacity or args.k
    rehash = RehashConfig(args.mode.upper(), args.threshold)
    rep = pair_report(trace, args.k, args.alpha, kind, seed, rehash, ref)
    row = {"k": args.k, "alpha": args.alpha, "kind": str(kind), "ref_capacity": ref,
           "mode": rehash.mode, "accesses": rep.accesses, "misses_test": rep.misses_test,
           "misses_ref": rep.misses_ref, "bad_evictions": rep.bad_evictions,
           "flush_evictions": rep.flush_evictions, "ledger_violations": rep.ledger_violations,
           "ratio": rep.ratio, "seed": seed}
    cfg = {"experiment": PAIR_RUN, "trace": str(src), "k": args.k, "alpha": args.alpha,
           "kind": str(kind), "ref_capacity": ref, "rehash_mode": rehash.mode,
           "rehash_threshold": args.threshold}
    _emit(args, [row], make_meta(cfg, [seed]))


def cmd_gen_trace(args):
    fmt = (getattr(args, "format", None) or TEXT).upper()
    if fmt not in (TEXT, BINARY):
        raise ValueError(f"trace format must be TEXT or BINARY, not {fmt}")
    out = getattr(args, "out", None)
    if not out:
        raise ValueError("gen-trace needs --out")
    src = TraceSource.parse(args.trace)
    if src.generator == "file":
        raise ValueError("gen-trace needs a generator, not a file")
    trace = build_trace(src, args.k, args.alpha, args.delta, args.c, getattr(args, "seed", 0))
    save_trace(trace, out, fmt)


COMMANDS = {"sweep": cmd_sweep, "rehash": cmd_rehash, "audit-classes": cmd_audit_classes,
            "audit-ballsbins": cmd_audit_ballsbins, "pair-run": cmd_pair_run,
            "gen-trace": cmd_gen_trace}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        COMMANDS[args.command](args)
    except Exception as e:  # noqa: BLE001 - surfaced as a machine-readable error
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
