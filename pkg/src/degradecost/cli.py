"""Command line interface.

    degradecost hard    --q 3 --M 2 --out w.json
    degradecost degrade w.json --L 2 --method exhaustive
    degradecost bound   --q 2..10 --L 2..1024:*2
    degradecost gap     --q 2 --M 8,16,32,64 --L 4
    degradecost polar   --q 2 --M 64 --L 16 --depth 6 --method dp
    degradecost verify  --seed 0

Exit status: 0 on success, 2 for invalid input, 3 when a size guard trips.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds
from .bounds import fmt
from .channel import (Channel, apply_partition, dumps_channel, loads_channel,
                      mutual_information, require_valid)
from .errors import ChannelError, ResourceLimitError
from .hard import DEFAULT_MAX_OUTPUTS, HardChannelSpec, build_hard_channel
from .partition import Partition
from .polar import DEFAULT_MAX_DEPTH, LEAF_FIELDS, construct, degrade_to, leaf_rows, rate_loss_demo
from .quantizer import (EXHAUSTIVE_MAX_OUTPUTS, degrade, degrade_exhaustive, delta,
                        delta_tilde_forms, holder_defect_check)

OUTDIR_ENV = "DEGRADECOST_OUTDIR"
DEFAULT_SEED = 20150101

EXIT_OK, EXIT_INVALID, EXIT_GUARD = 0, 2, 3

log = logging.getLogger("degradecost")


def parse_range(text: str) -> list[int]:
    """'4', '2,4,8', '2..10', '2..10:2' (step) or '16..1024:*2' (factor)."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." not in part:
            out.append(int(part))
            continue
        span, _, step = part.partition(":")
        lo, hi = (int(v) for v in span.split(".."))
        if step.startswith("*"):
            f = int(step[1:])
            if f < 2 or lo < 1:
                raise argparse.ArgumentTypeError(f"bad geometric range {part!r}")
            v = lo
            while v <= hi:
                out.append(v)
                v *= f
        else:
            s = int(step) if step else 1
            if s < 1:
                raise argparse.ArgumentTypeError(f"bad step in {part!r}")
            out.extend(range(lo, hi + 1, s))
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _round12(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _json(obj) -> str:
    return json.dumps(_round12(obj), indent=1) + "\n"


def _csv(header, rows, comments=()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    for k, v in comments:
        buf.write(f"# {k},{v}\n")
    return buf.getvalue()


def _emit(args, text: str) -> None:
    out = args.out
    if out is None and os.environ.get(OUTDIR_ENV):
        ext = "json" if args.command == "hard" else args.format
        out = str(Path(os.environ[OUTDIR_ENV]) / f"{args.command}.{ext}")
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _load_channel(path: str) -> Channel:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ChannelError(f"cannot read channel file: {e}") from None
    return require_valid(loads_channel(text))


def _single(values, name):
    if len(values) != 1:
        raise ChannelError(f"--{name} takes a single value here")
    return values[0]


# --- subcommands ------------------------------------------------------------

def cmd_hard(args) -> str:
    q, M = _single(args.q, "q"), _single(args.M, "M")
    ch = build_hard_channel(HardChannelSpec(q, M), max_outputs=args.max_outputs)
    return dumps_channel(ch) + "\n"


def cmd_degrade(args) -> str:
    ch = _load_channel(args.channel)
    if args.method == "dp" and ch.q != 2:
        raise ChannelError(f"method 'dp' needs q = 2, channel has q = {ch.q}")
    L = _single(args.L, "L")
    if args.method == "exhaustive":
        res = degrade_exhaustive(ch, L, args.mode)
    else:
        res = degrade(ch, L, args.method)
    mi_w = mutual_information(ch)
    if args.format == "json":
        return _json({**res.to_json(), "mi_W": mi_w, "mi_Q": mi_w - res.drop})
    rows = [[i, " ".join(str(y) for y in b), fmt(d), fmt(t)]
            for i, (b, (d, t)) in enumerate(zip(res.partition.blocks, res.per_block))]
    return _csv(["block", "outputs", "delta", "delta_tilde"], rows,
                [("method", res.method), ("mi_W", fmt(mi_w)),
                 ("mi_Q", fmt(mi_w - res.drop)), ("drop", fmt(res.drop))])


def cmd_bound(args) -> str:
    if args.eps:
        rows = []
        for q in sorted(set(args.q)):
            for eps in sorted(set(args.eps)):
                lg = bounds.log10_required_output_size(q, eps)
                rows.append([q, fmt(eps), fmt(10 ** lg) if lg < 300 else "inf", fmt(lg)])
        header = ["q", "eps", "L_required", "log10_L_required"]
        if args.format == "json":
            return _json([dict(zip(header, r)) for r in rows])
        return _csv(header, rows)
    reports = [bounds.bound_report(q, L) for q in sorted(set(args.q)) for L in sorted(set(args.L))]
    if args.format == "json":
        return _json([{f: getattr(r, f) for f in r.CSV_FIELDS} for r in reports])
    return bounds.bounds_csv(reports)


def gap_rows(q: int, Ms, L: int, method: str = "auto", max_outputs=DEFAULT_MAX_OUTPUTS):
    rows = []
    for M in sorted(set(Ms)):
        ch = build_hard_channel(HardChannelSpec(q, M), max_outputs=max_outputs)
        m = method
        if m == "auto":
            m = "dp" if q == 2 else ("exhaustive" if ch.n <= EXHAUSTIVE_MAX_OUTPUTS else "greedy")
        if L >= ch.n:
            cost = 0.0
        else:
            cost = degrade(ch, L, m).drop
        lower = bounds.dc_lower_bound(q, L)
        rows.append({
            "q": q, "M": M, "L": L, "outputs": ch.n, "method": m,
            "cost": cost, "lower_bound": lower, "ratio": cost / lower,
            "convex_bound": bounds.convex_allocation_bound(q, L, M),
        })
    return rows


GAP_FIELDS = ("q", "M", "L", "outputs", "method", "cost", "lower_bound", "ratio", "convex_bound")


def cmd_gap(args) -> str:
    q, L = _single(args.q, "q"), _single(args.L, "L")
    if args.method == "dp" and q != 2:
        raise ChannelError("method 'dp' needs q = 2")
    rows = gap_rows(q, args.M, L, args.method, args.max_outputs)
    if args.format == "json":
        return _json(rows)
    return _csv(GAP_FIELDS, [[fmt(r[f]) if f != "method" else r[f] for f in GAP_FIELDS]
                             for r in rows])


def cmd_polar(args) -> str:
    L, depth = _single(args.L, "L"), args.depth
    method = args.method
    if args.channel:
        ch = _load_channel(args.channel)
        if method == "exhaustive":
            raise ChannelError("polar construction supports greedy or dp")
        leaves = construct(ch, depth, L, method, max_depth=args.max_depth)
        Q = degrade_to(ch, L, method)
        if args.dump_degraded:
            Path(args.dump_degraded).write_text(dumps_channel(Q) + "\n")
        summary = {"mi_W": mutual_information(ch), "mi_Q": mutual_information(Q)}
    else:
        q, M = _single(args.q, "q"), _single(args.M, "M")
        rep = rate_loss_demo(q, M, L, depth, method, args.threshold,
                             max_outputs=args.max_outputs, max_depth=args.max_depth)
        leaves = rep.leaves
        summary = rep.summary()
        if args.dump_degraded:
            Q = rep.initial.degraded if rep.initial else build_hard_channel(
                HardChannelSpec(q, M), max_outputs=args.max_outputs)
            Path(args.dump_degraded).write_text(dumps_channel(Q) + "\n")
    summary["mean_leaf_mi"] = float(np.mean([nd.mi for nd in leaves]))
    if args.format == "json":
        return _json({"summary": summary,
                      "leaves": [dict(zip(LEAF_FIELDS, r)) for r in leaf_rows(leaves)]})
    comments = [(k, fmt(v) if isinstance(v, float) else v) for k, v in summary.items()]
    return _csv(LEAF_FIELDS, leaf_rows(leaves), comments)


def cmd_verify(args) -> str:
    """Randomized checks of the merge-cost identities on seeded channels."""
    rng = np.random.default_rng(args.seed)
    worst_identity = worst_pair = 0.0
    holder_viol = tilde_viol = 0
    for _ in range(args.trials):
        q = int(rng.integers(2, 5))
        n = int(rng.integers(1, 9))
        ch = Channel(rng.dirichlet(np.ones(n), size=q), rng.dirichlet(np.ones(q)))
        labels = rng.integers(0, rng.integers(1, n + 1), size=n)
        part = Partition.from_blocks(
            [np.flatnonzero(labels == b).tolist() for b in np.unique(labels)], n)
        Q = apply_partition(ch, part)
        dsum = sum(delta(ch, b) for b in part.blocks)
        worst_identity = max(worst_identity,
                             abs(mutual_information(ch) - mutual_information(Q) - dsum))
        A = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist()
        d = delta(ch, A)
        t1, t2 = delta_tilde_forms(ch, A)
        worst_pair = max(worst_pair, abs(t1 - t2))
        tilde_viol += not (d >= t1 - 1e-12 and t1 >= -1e-12)
        t = int(rng.integers(1, 6))
        vecs = rng.random((t, int(rng.integers(1, 6))))
        lhs, rhs = holder_defect_check(list(zip(vecs, rng.dirichlet(np.ones(t)))))
        holder_viol += lhs < rhs - 1e-12
    rows = [
        ["merge_cost_identity_max_err", fmt(worst_identity), worst_identity <= 1e-10],
        ["delta_tilde_forms_max_err", fmt(worst_pair), worst_pair <= 1e-12],
        ["delta_ge_delta_tilde_violations", tilde_viol, tilde_viol == 0],
        ["holder_defect_violations", holder_viol, holder_viol == 0],
    ]
    if args.format == "json":
        return _json({r[0]: {"value": r[1], "pass": r[2]} for r in rows})
    return _csv(["check", "value", "pass"], rows, [("seed", args.seed), ("trials", args.trials)])


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help=f"output file (default stdout, or ${OUTDIR_ENV}/<command>.<fmt>)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--max-outputs", type=int, default=DEFAULT_MAX_OUTPUTS,
                        help="size cap on constructed hard channels")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="degradecost", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("hard", parents=[common], help="write the hard channel W_M as JSON")
    s.add_argument("--q", type=parse_range, required=True)
    s.add_argument("--M", type=parse_range, required=True)
    s.set_defaults(func=cmd_hard)

    s = sub.add_parser("degrade", parents=[common], help="degrade a channel file to L outputs")
    s.add_argument("channel")
    s.add_argument("--L", type=parse_range, required=True)
    s.add_argument("--method", choices=("greedy", "exhaustive", "dp"), default="greedy")
    s.add_argument("--mode", choices=("at-most", "exactly"), default="at-most")
    s.set_defaults(func=cmd_degrade)

    s = sub.add_parser("bound", parents=[common], help="tabulate degrading-cost bounds")
    s.add_argument("--q", type=parse_range, required=True)
    s.add_argument("--L", type=parse_range, default=[1])
    s.add_argument("--eps", type=parse_floats, default=None,
                   help="instead report the L needed for the lower bound to reach eps")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("gap", parents=[common], help="optimal degrading cost of W_M vs the bound")
    s.add_argument("--q", type=parse_range, required=True)
    s.add_argument("--M", type=parse_range, required=True)
    s.add_argument("--L", type=parse_range, required=True)
    s.add_argument("--method", choices=("auto", "greedy", "exhaustive", "dp"), default="auto")
    s.set_defaults(func=cmd_gap)

    s = sub.add_parser("polar", parents=[common], help="degrade-after-each-step polar construction")
    s.add_argument("--q", type=parse_range)
    s.add_argument("--M", type=parse_range)
    s.add_argument("--channel", help="channel JSON file used instead of W_M")
    s.add_argument("--L", type=parse_range, required=True)
    s.add_argument("--depth", type=int, default=0)
    s.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH)
    s.add_argument("--method", choices=("greedy", "dp"), default="greedy")
    s.add_argument("--threshold", type=float, default=0.99)
    s.add_argument("--dump-degraded", help="also write the initial degraded channel Q as JSON")
    s.set_defaults(func=cmd_polar)

    s = sub.add_parser("verify", parents=[common], help="seeded randomized identity checks")
    s.add_argument("--trials", type=int, default=200)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "polar" and not args.channel and (args.q is None or args.M is None):
        parser.error("polar needs --q and --M, or --channel")
    try:
        text = args.func(args)
    except ResourceLimitError as e:
        print(f"degradecost: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (ChannelError, ValueError) as e:
        print(f"degradecost: {e}", file=sys.stderr)
        return EXIT_INVALID
    _emit(args, text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
