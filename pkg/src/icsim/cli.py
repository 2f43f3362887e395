"""Command-line harness.

Subcommands:
  capacity      channel capacity plus an error-exponent table as CSV
  simulate      seeded simulation trials of one scheme, CSV + JSON summary
  lookahead     two-state lookahead diagnostics on random protocols
  coincidence   Monte Carlo coincidence-failure rate vs. the theoretical bound
  classify      coincidence certificate (and two-state taxonomy) of an advance table
  disjointness  disjointness-reduction check, exhaustive or sampled
  sweep         config-driven multi-n sweep with audits

Relative output paths land in $ICSIM_OUTDIR when set. Exit code 0 means all
requested audits passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .channel import ChannelModel
from .coding import CodeSpec
from .harness import (
    ExperimentConfig,
    compare_bounds,
    csv_line,
    report_csv_row,
    resolve_out,
    run_sweep,
    run_trial,
    summary_json,
    wilson_interval,
)
from .multistate import (
    all_tables,
    balanced_tables,
    coincidence_bound,
    coincidence_failure_trials,
    is_coinciding,
)
from .protocol import run_protocol
from .threestate import DisjInstance, count_transcript_triples, disj_via_protocol
from .twostate import classify_advance, random_two_state_protocol, run_lookahead_exchange
from .vertical import genie_lookahead, make_schedule
from .protocol import pad_protocol


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        out = resolve_out(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    else:
        sys.stdout.write(text)


def _load_advance(spec: str) -> tuple[tuple[int, int], ...]:
    """An advance table from a JSON file ([[..],[..]] or flat row-major), or
    the builtin shorthand markovian:<log_M>."""
    if spec.startswith("markovian:"):
        log_M = int(spec.split(":", 1)[1])
        M = 1 << log_M
        return tuple((((s << 1) & (M - 1)), ((s << 1) & (M - 1)) | 1) for s in range(M))
    raw = json.loads(Path(spec).read_text())
    if raw and isinstance(raw[0], list):
        return tuple(tuple(int(v) for v in row) for row in raw)
    if len(raw) % 2:
        raise ValueError("flat advance table must have 2M entries")
    return tuple((int(raw[2 * s]), int(raw[2 * s + 1])) for s in range(len(raw) // 2))


def _cmd_capacity(args) -> int:
    ch = ChannelModel.parse(args.channel)
    cap = ch.capacity()
    lines = [f"# {ch.name} capacity {cap:.6f} bits/use", "R,Er_bits"]
    for k in range(args.points):
        r = cap * k / (args.points - 1) if args.points > 1 else 0.0
        lines.append(f"{r:.6f},{ch.error_exponent(r):.6f}")
    _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_simulate(args) -> int:
    protocol = {"type": "file", "path": args.protocol} if args.protocol else {"type": args.family}
    cfg = ExperimentConfig(
        scheme=args.scheme,
        protocol=protocol,
        channel=args.channel,
        code=args.code,
        side_code=args.side_code,
        placement=args.placement,
        n_list=(args.n,),
        trials=args.trials,
        base_seed=args.seed,
    )
    lines = [csv_line(("seed", "N", "rate", "alice_ok", "bob_ok"))]
    reports = []
    from .vertical import accounting
    audits_ok = True
    for t in range(cfg.trials):
        r = run_trial(cfg, args.n, t)
        reports.append(r)
        lines.append(csv_line((r.seed, r.channel_uses, r.achieved_rate,
                               r.alice_correct, r.bob_correct)))
        audits_ok &= accounting(r).passed
    _write_or_print("\n".join(lines) + "\n", args.out)
    failures = sum(1 for r in reports if not r.correct)
    low, high = wilson_interval(failures, len(reports))
    summary = {
        "schema_version": 1,
        "trials": len(reports),
        "failures": failures,
        "mean_pe": failures / len(reports),
        "wilson_95": [low, high],
        "mean_rate": float(np.mean([r.achieved_rate for r in reports])),
        "audits_passed": audits_ok,
    }
    _write_or_print(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.summary)
    return 0 if audits_ok else 1


def _cmd_lookahead(args) -> int:
    ch = ChannelModel.parse(args.channel)
    side = CodeSpec.parse(args.side_code)
    agree = 0
    bits = []
    for t in range(args.trials):
        rng = np.random.default_rng(args.seed + t)
        p = random_two_state_protocol(args.n, rng)
        sched = make_schedule(p.n)
        pp = pad_protocol(p, sched.n_padded)
        la = run_lookahead_exchange(pp, ch, side, rng)
        truth = genie_lookahead(pp)[0]
        agree += la.alice_states == truth and la.bob_states == truth
        bits.append(la.bits_used)
    print(f"trials={args.trials} n={args.n} bits_used={bits[0]} "
          f"agree_rate={agree / args.trials:.4f} "
          f"bits_per_block={bits[0] / make_schedule(args.n).rows:.2f}")
    return 0


def _cmd_coincidence(args) -> int:
    eta = _load_advance(args.advance)
    M = len(eta)
    if args.M and args.M != M:
        raise ValueError(f"advance table has {M} states, not {args.M}")
    if args.functions == "balanced":
        fset = balanced_tables(M)
    elif args.functions == "all":
        fset = all_tables(M)
    else:
        fset = tuple(tuple(int(b) for b in t) for t in json.loads(Path(args.functions).read_text()))
    cert = is_coinciding(eta, M)
    if cert is None:
        print("advance function is not coinciding; no bound applies")
        return 1
    k = cert.K if cert.K else 1
    p = args.p - args.p % k
    failures = coincidence_failure_trials(eta, fset, p, args.trials, args.seed)
    bound = coincidence_bound(M, len(fset), k, p)
    audit = compare_bounds([(f"p={p}", failures, args.trials, bound)])[0]
    verdict = "pass" if audit.passed else "fail"
    if audit.vacuous:
        verdict += " (vacuous bound)"
    print(f"M={M} |F|={len(fset)} K={k} p={p} trials={args.trials}")
    print(f"empirical={audit.empirical:.6f} bound={audit.bound:.6f} "
          f"sigma={audit.sigma:.6f} -> {verdict}")
    return 0 if audit.passed else 1


def _cmd_classify(args) -> int:
    eta = _load_advance(args.advance)
    M = len(eta)
    cert = is_coinciding(eta, M)
    if cert is None:
        print(f"M={M}: not coinciding (some state pair never meets)")
    else:
        print(f"M={M}: coinciding, K={cert.K}")
        for (a, b), (wa, wb) in sorted(cert.witnesses.items()):
            print(f"  pair ({a},{b}): drive {list(wa)} / {list(wb)}")
    if M == 2:
        cls = classify_advance(eta)
        print(f"two-state class: {cls.category}; constant-making tables: "
              f"{list(cls.constant_making)}")
    return 0


def _cmd_disjointness(args) -> int:
    u = args.universe
    mismatches = 0
    if args.exhaustive:
        if u > 10:
            raise ValueError("exhaustive mode supported up to universe 10")
        cases = 0
        for xm in range(1 << u):
            x = frozenset(k + 1 for k in range(u) if xm >> k & 1)
            for ym in range(1 << u):
                y = frozenset(k + 1 for k in range(u) if ym >> k & 1)
                inst = DisjInstance(u, x, y)
                mismatches += disj_via_protocol(inst) != inst.disj()
                cases += 1
    else:
        rng = np.random.default_rng(args.seed)
        cases = args.trials
        for _ in range(args.trials):
            x = frozenset(int(k) + 1 for k in np.flatnonzero(rng.integers(0, 2, u)))
            y = frozenset(int(k) + 1 for k in np.flatnonzero(rng.integers(0, 2, u)))
            inst = DisjInstance(u, x, y)
            mismatches += disj_via_protocol(inst) != inst.disj()
    print(f"universe={u} cases={cases} mismatches={mismatches} "
          f"-> {'pass' if mismatches == 0 else 'fail'}")
    if args.count_triples:
        m = args.count_triples
        count = count_transcript_triples(m)
        expected = 1 << (3 * m // 2)
        print(f"transcript triples m={m}: {count} (expected {expected}) "
              f"-> {'pass' if count == expected else 'fail'}")
        if count != expected:
            return 1
    return 0 if mismatches == 0 else 1


def _cmd_sweep(args) -> int:
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.scheme:
        overrides["scheme"] = args.scheme
    if args.channel:
        overrides["channel"] = args.channel
    if args.code:
        overrides["code"] = args.code
    if args.n:
        overrides["n_list"] = tuple(int(v) for v in args.n.split(","))
    if args.out:
        overrides["csv_path"] = args.out
    if args.summary:
        overrides["json_path"] = args.summary
    cfg = ExperimentConfig.from_json(args.config, **overrides)
    summary = run_sweep(cfg)
    for row in summary.rows:
        print(f"n={row.n} scheme={row.scheme} trials={row.trials} "
              f"P_e={row.mean_pe:.4f} [{row.wilson_low:.4f},{row.wilson_high:.4f}] "
              f"rate={row.mean_rate:.4f} overhead={row.mean_overhead:.1f} "
              f"coincidence_failures={row.coincidence_failures}")
    print(f"audits: {'pass' if summary.audits_passed else 'fail'}")
    return 0 if summary.audits_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icsim",
                                     description="interactive-coding simulation lab")
    sub = parser.add_subparsers(dest="command", required=True)

    cap = sub.add_parser("capacity", help="capacity and error-exponent table")
    cap.add_argument("--channel", required=True, help="bsc:0.05 | bec:0.2 | awgn:0.8")
    cap.add_argument("--points", type=int, default=11)
    cap.add_argument("--out", help="write CSV here instead of stdout")
    cap.set_defaults(func=_cmd_capacity)

    sim = sub.add_parser("simulate", help="run seeded simulation trials")
    sim.add_argument("--protocol", help="protocol JSON file (else a random family)")
    sim.add_argument("--family", default="two-state", choices=["two-state", "markovian"])
    sim.add_argument("--channel", default="bsc:0.05")
    sim.add_argument("--code", default="oracle:0.3", help="oracle:<R> | rep:<r> | rlc:<x>")
    sim.add_argument("--side-code", dest="side_code", help="code for side information")
    sim.add_argument("--scheme", default="genie",
                     choices=["genie", "two-state", "two-state-exhaustive", "m-state"])
    sim.add_argument("--placement", default="last", choices=["last", "first"])
    sim.add_argument("--n", type=int, default=256)
    sim.add_argument("--trials", type=int, default=1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", help="CSV output path")
    sim.add_argument("--summary", help="JSON summary path")
    sim.set_defaults(func=_cmd_simulate)

    look = sub.add_parser("lookahead", help="two-state lookahead diagnostics")
    look.add_argument("--n", type=int, default=1024)
    look.add_argument("--seed", type=int, default=0)
    look.add_argument("--trials", type=int, default=100)
    look.add_argument("--channel", default="bsc:0")
    look.add_argument("--side-code", dest="side_code", default="rep:1")
    look.set_defaults(func=_cmd_lookahead)

    coin = sub.add_parser("coincidence", help="coincidence failure rate vs. bound")
    coin.add_argument("--M", type=int)
    coin.add_argument("--advance", required=True,
                      help="JSON advance table file or markovian:<log_M>")
    coin.add_argument("--functions", default="balanced",
                      help="balanced | all | JSON file of tables")
    coin.add_argument("--p", type=int, default=80)
    coin.add_argument("--trials", type=int, default=10000)
    coin.add_argument("--seed", type=int, default=0)
    coin.set_defaults(func=_cmd_coincidence)

    cls = sub.add_parser("classify", help="coincidence certificate of an advance table")
    cls.add_argument("--advance", required=True)
    cls.set_defaults(func=_cmd_classify)

    dis = sub.add_parser("disjointness", help="disjointness reduction check")
    dis.add_argument("--universe", type=int, default=8)
    mode = dis.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--trials", type=int, default=1000)
    dis.add_argument("--seed", type=int, default=0)
    dis.add_argument("--count-triples", dest="count_triples", type=int,
                     help="also count transcript triples for this even m")
    dis.set_defaults(func=_cmd_disjointness)

    sweep = sub.add_parser("sweep", help="config-driven sweep")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--trials", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--scheme")
    sweep.add_argument("--channel")
    sweep.add_argument("--code")
    sweep.add_argument("--n", help="comma-separated list")
    sweep.add_argument("--out")
    sweep.add_argument("--summary")
    sweep.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
