"""Deterministic experiment runner.

Subcommands bind the library into reproducible CSV/JSON reports: `set` for
enumeration and gap statistics, `randomize` for the indicator-sampling
ensemble, `thin`/`ak` for deletion experiments and their probability table,
`ctype` for the weighted construction and its claim checks.

Every output file starts with a comment line carrying the tool version and
a hash of the logical configuration; seeds are always explicit, and thread
count never changes a byte of output.

Exit codes: 0 ok, 2 configuration error, 3 enumeration cap exceeded,
4 refinement failure, 5 claim-verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .ctype import (
    build_construction,
    check_fast_decay,
    verify_claim_convergence,
    verify_claim_divergence,
)
from .dyadic import Dyadic, DyadicInterval
from .errors import (
    ClaimVerificationError,
    LambdaLabError,
    ParseError,
    RefinementError,
    WindowTooLargeError,
)
from .randwit import RandomWitness, indicator_frequencies, refine_partition
from .sets import (
    count_in,
    dyadic_ladder,
    empty_window_probability,
    from_descriptor,
    lacunarity_scan,
    powers_of_two,
    simulate_gap_events,
    thin,
)
from .weights import parse_weights
from .witness import PiecewiseWitness, partial_sum
from .weights import OnesWeights

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_REFINEMENT = 4
EXIT_CLAIM = 5


def _config_hash(args: argparse.Namespace) -> str:
    skip = {"out", "out_prefix", "threads", "func", "config"}
    payload = {
        k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None
    }
    blob = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _header(args) -> str:
    return f"# lambda-lab v{__version__} config={_config_hash(args)}"


def _write_lines(path, lines) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="")


def _parse_dyadic(text: str) -> Dyadic:
    try:
        return Dyadic.parse(text)
    except ParseError:
        return Dyadic.coerce(Fraction(text))


def _parse_grid(spec: str) -> list:
    """Grid spec: 'lo:hi:step' (inclusive ends) or a comma list."""
    if ":" in spec:
        lo_s, hi_s, step_s = spec.split(":")
        lo, hi, step = (_parse_dyadic(s) for s in (lo_s, hi_s, step_s))
        out = []
        x = lo
        while x <= hi:
            out.append(x)
            x = x + step
        return out
    return [_parse_dyadic(s) for s in spec.split(",")]


def _parse_horizons(spec: str) -> list:
    if spec.startswith("pow2:"):
        _, lo_s, hi_s = spec.split(":")
        return [Dyadic(1 << j) for j in range(int(lo_s), int(hi_s) + 1)]
    return [_parse_dyadic(s) for s in spec.split(",")]


def _parse_seeds(spec: str) -> list[int]:
    if ":" in spec:
        lo, hi = spec.split(":")
        return list(range(int(lo), int(hi)))
    return [int(s) for s in spec.split(",")]


def _build_set(args):
    if getattr(args, "set_json", None):
        return from_descriptor(json.loads(Path(args.set_json).read_text()))
    kind = getattr(args, "kind", None)
    if kind == "dyadic-ladder":
        lam = dyadic_ladder(args.k_max, args.k_min)
    elif kind == "powers-of-two":
        lam = powers_of_two(args.k_max)
    elif kind == "log-integers":
        lam = from_descriptor({"kind": "log_integers", "max_n": args.max_n})
    elif kind == "explicit":
        lam = from_descriptor(
            {"kind": "explicit", "points": [str(_parse_dyadic(p)) for p in args.points.split(",")]}
        )
    else:
        raise ParseError(f"no set given (need --set-json or --kind), got {kind!r}")
    if getattr(args, "thin_p", None):
        lam = thin(lam, _parse_dyadic(args.thin_p), args.thin_seed)
    return lam


def _load_witness(args) -> PiecewiseWitness:
    if getattr(args, "witness_json", None):
        return PiecewiseWitness.from_json_dict(
            json.loads(Path(args.witness_json).read_text())
        )
    raise ParseError("no witness given (need --witness-json)")


# ----------------------------------------------------------------------
# set

def cmd_set(args) -> int:
    lam = _build_set(args)
    lo, hi = (_parse_dyadic(s) for s in args.window)
    window = DyadicInterval(lo, hi)
    lines = [_header(args)]
    if args.stats:
        stats = lacunarity_scan(lam, window.hi)
        lines.append("window_start,count")
        j = lo.floor_int()
        while Dyadic(j + 1) <= hi:
            lines.append(f"{j},{count_in(lam, Dyadic(j), Dyadic(1))}")
            j += 1
        lines.append(f"# max_gap={stats.max_gap} after={stats.max_gap_after}")
        lines.append(
            "# empty_unit_windows=" + ",".join(str(a) for a in stats.empty_windows)
        )
    else:
        lines.append("rank,point")
        for rank, pt in lam.iter_indexed(window.lo, window.hi):
            lines.append(f"{rank},{pt}")
    _write_lines(args.out, lines)
    return EXIT_OK


# ----------------------------------------------------------------------
# randomize

def cmd_randomize(args) -> int:
    lam = _build_set(args)
    f3 = _load_witness(args)
    if not f3.levels_are_pow2():
        from .witness import clip_at_one, quantize_to_powers

        f3 = quantize_to_powers(clip_at_one(f3))
        provenance_note = "quantized"
    else:
        provenance_note = "as-given"
    reach = args.reach
    lo, hi = (_parse_dyadic(s) for s in args.cd_window)
    window = DyadicInterval(lo, hi)
    partition = refine_partition(f3, lam, reach, window)
    seeds = _parse_seeds(args.seeds)
    horizons = _parse_horizons(args.horizons)
    c_grid = _parse_grid(args.c_grid) if args.c_grid else []
    d_grid = _parse_grid(args.d_grid) if args.d_grid else []
    grid = c_grid + d_grid

    part_doc = partition.to_json_dict()
    part_doc["pipeline"] = provenance_note
    part_lines = [_header(args), json.dumps(part_doc, sort_keys=True)]
    _write_lines(f"{args.out_prefix}.partition.json", part_lines)

    witness = partition.as_witness()
    ones = OnesWeights()
    expected = {}
    for x in grid:
        for h in horizons:
            expected[(str(x), str(h))] = partial_sum(witness, lam, ones, x, h).value
    points = list(lam.iter_points(lam.lower_bound(), horizons[-1], closed_hi=True)) if grid else []

    def run_item(item):
        seed, x = item
        w = RandomWitness(partition, seed)
        hits_at = []
        for pt in points:
            xv = (float(x) + pt) if isinstance(pt, float) else (x + pt)
            if w.value(xv):
                hits_at.append(pt)
        rows = []
        for h in horizons:
            hf = h.as_float()
            hits = sum(
                1 for pt in hits_at if (pt <= hf if isinstance(pt, float) else pt <= h)
            )
            rows.append((str(x), str(h), hits))
        return (seed, str(x)), rows

    items = [(seed, x) for seed in seeds for x in grid]
    results = {}
    if args.threads > 1 and items:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            for key, rows in pool.map(run_item, items):
                results[key] = rows
    else:
        for item in items:
            key, rows = run_item(item)
            results[key] = rows

    lines = [_header(args), "seed,x,horizon,hits,expected"]
    for seed in seeds:
        for x in grid:
            for x_s, h_s, hits in results[(seed, str(x))]:
                exp = expected[(x_s, h_s)]
                exp_s = str(exp) if isinstance(exp, Dyadic) else repr(float(exp))
                lines.append(f"{seed},{x_s},{h_s},{hits},{exp_s}")
    freqs = indicator_frequencies(partition, seeds)
    lines.append("# interval_freqs=" + ",".join(repr(f) for f in freqs))
    _write_lines(f"{args.out_prefix}.ensemble.csv", lines)
    return EXIT_OK


# ----------------------------------------------------------------------
# thin

def cmd_thin(args) -> int:
    lam = _build_set(args)
    thinned = thin(lam, _parse_dyadic(args.p), args.seed)
    lo, hi = (_parse_dyadic(s) for s in args.window)
    lines = [_header(args), "base_rank,point"]
    kept = 0
    total = 0
    for base_rank, pt in lam.iter_indexed(lo, hi):
        total += 1
        if thinned.keeps(base_rank):
            kept += 1
            lines.append(f"{base_rank},{pt}")
    lines.append(f"# kept={kept} of={total} p={thinned.p}")
    _write_lines(args.out, lines)
    return EXIT_OK


# ----------------------------------------------------------------------
# ak

_M_RULES = {
    "k": lambda k: k,
}
_N_RULES = {
    "unit": lambda k: k,
}


def _parse_m_rule(spec: str):
    if spec in _M_RULES:
        return _M_RULES[spec]
    if spec.startswith("const:"):
        c = int(spec.split(":")[1])
        return lambda k: c
    raise ParseError(f"unknown m rule {spec!r} (use 'k' or 'const:<int>')")


def _parse_n_rule(spec: str):
    if spec in _N_RULES:
        return _N_RULES[spec]
    if spec.startswith("gap:"):
        g = int(spec.split(":")[1])
        return lambda k: 1 + (k - 1) * g
    raise ParseError(f"unknown n rule {spec!r} (use 'unit' or 'gap:<int>')")


def cmd_ak(args) -> int:
    m_rule = _parse_m_rule(args.m)
    n_rule = _parse_n_rule(args.n)
    q = _parse_dyadic(args.q)
    lines = [_header(args), "k,m,block_len,exact,formula,empirical,four_sigma,ok"]
    all_ok = True
    for k in range(1, args.k_max + 1):
        m = m_rule(k)
        block_len = n_rule(k + 1) - n_rule(k)
        prob = empty_window_probability(m, q, block_len)
        exact_s = "" if prob.exact is None else f"{prob.exact.numerator}/{prob.exact.denominator}"
        if args.trials:
            seeds = range(k * args.trials, (k + 1) * args.trials)
            events = simulate_gap_events(m, block_len, q, list(seeds))
            emp = float(events.mean())
            sigma = (prob.approx * (1 - prob.approx) / args.trials) ** 0.5
            tol = 4 * sigma
            ok = abs(emp - prob.approx) <= tol if sigma > 0 else emp == prob.approx
            all_ok = all_ok and ok
            lines.append(
                f"{k},{m},{block_len},{exact_s},{prob.approx!r},{emp!r},{tol!r},{int(ok)}"
            )
        else:
            lines.append(f"{k},{m},{block_len},{exact_s},{prob.approx!r},,,")
    _write_lines(args.out, lines)
    return EXIT_OK if all_ok else EXIT_CLAIM


# ----------------------------------------------------------------------
# ctype

_DEFAULT_DIV_GRID = "0:1/2^1:1/2^4"
_DEFAULT_CONV_GRID = "-4,-7/2^1,-3,-5/2^1,-2,-3/2^1,-1,-3/2^2,-9/2^4"


def cmd_ctype(args) -> int:
    weights = parse_weights(args.weights)
    fd = check_fast_decay(weights, args.blocks)
    lines = [_header(args), "n,fast_decay_holds"]
    for row in fd.rows:
        lines.append(f"{row.n},{int(row.holds)}")
    verdict = "holds" if fd.holds else f"fails at n={fd.first_fail}"
    lines.append(f"# fast_decay={verdict}")
    if args.check_only:
        _write_lines(args.out_prefix and f"{args.out_prefix}.fastdecay.csv", lines)
        return EXIT_OK
    if not fd.holds:
        print(f"error: weight rule fails fast decay at n={fd.first_fail}", file=sys.stderr)
        return EXIT_CONFIG
    lam = _build_set(args)
    con = build_construction(
        lam, weights, args.blocks, grid_exp=args.grid_exp, require_fast_decay=False
    )
    if args.out_prefix:
        _write_lines(
            f"{args.out_prefix}.construction.json",
            [_header(args), con.to_json()],
        )
    if not args.verify:
        return EXIT_OK
    div_grid = _parse_grid(args.div_grid)
    conv_grid = _parse_grid(args.conv_grid)
    try:
        div = verify_claim_divergence(con, div_grid)
        conv = verify_claim_convergence(con, conv_grid)
    except ClaimVerificationError as exc:
        print(f"claim verification failed: {exc}", file=sys.stderr)
        return EXIT_CLAIM
    out = [_header(args), "side,x,n,contribution,partial,bound,ok,kind"]
    for report in (div, conv):
        running = {}
        for row in report.rows:
            key = str(row.x)
            running[key] = running.get(key, 0.0) + row.contribution
            bound = float(row.n) if report.side == "divergence" else row.bound
            out.append(
                f"{report.side},{row.x},{row.n},{row.contribution!r},"
                f"{running[key]!r},{bound!r},{int(row.ok)},{row.kind}"
            )
    target = f"{args.out_prefix}.verify.csv" if args.out_prefix else None
    _write_lines(target, out)
    return EXIT_OK if (div.ok and conv.ok) else EXIT_CLAIM


# ----------------------------------------------------------------------
# parser plumbing

def _add_set_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--set-json", help="path to a set descriptor JSON file")
    p.add_argument(
        "--kind",
        choices=["dyadic-ladder", "powers-of-two", "log-integers", "explicit"],
    )
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--k-min", type=int, default=0)
    p.add_argument("--max-n", type=int, default=1000)
    p.add_argument("--points", help="comma list of dyadic points for --kind explicit")
    p.add_argument("--thin-p", help="optional keep probability; thins the set")
    p.add_argument("--thin-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lambda-lab",
        description="exact dyadic translated-sum experiments",
    )
    ap.add_argument("--config", help="JSON file with defaults for the subcommand")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("set", help="enumerate or summarise a point set")
    _add_set_flags(p)
    p.add_argument("--window", nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--stats", action="store_true", help="per-window counts and gaps")
    p.add_argument("--out")
    p.set_defaults(func=cmd_set)

    p = sub.add_parser("randomize", help="sample indicator witnesses over a partition")
    _add_set_flags(p)
    p.add_argument("--witness-json", required=True)
    p.add_argument("--reach", type=int, required=True, help="bound K with C,D in [-K,K]")
    p.add_argument("--cd-window", nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--seeds", default="0:100")
    p.add_argument("--c-grid", default="")
    p.add_argument("--d-grid", default="")
    p.add_argument("--horizons", default="pow2:0:16")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_randomize)

    p = sub.add_parser("thin", help="deterministically thin a set and list survivors")
    _add_set_flags(p)
    p.add_argument("--p", required=True, help="keep probability (dyadic)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--window", nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_thin)

    p = sub.add_parser("ak", help="empty-window probabilities: formula vs Monte Carlo")
    p.add_argument("--m", default="k", help="m rule: 'k' or 'const:<int>'")
    p.add_argument("--n", default="unit", help="n rule: 'unit' or 'gap:<int>'")
    p.add_argument("--q", required=True, help="deletion probability (dyadic)")
    p.add_argument("--k-max", type=int, default=12)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ak)

    p = sub.add_parser("ctype", help="weighted construction and claim checks")
    _add_set_flags(p)
    p.add_argument("--weights", required=True)
    p.add_argument("--blocks", type=int, default=20)
    p.add_argument("--grid-exp", type=int, default=4)
    p.add_argument("--check-only", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--div-grid", default=_DEFAULT_DIV_GRID)
    p.add_argument("--conv-grid", default=_DEFAULT_CONV_GRID)
    p.add_argument("--out-prefix")
    p.set_defaults(func=cmd_ctype)

    return ap


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser, argv):
    """Flags override config-file values: reparse with file values as defaults."""
    if not args.config:
        return args
    data = json.loads(Path(args.config).read_text())
    if not isinstance(data, dict):
        raise ParseError("config file must hold a JSON object")
    sub_defaults = {k.replace("-", "_"): v for k, v in data.items()}
    parser.set_defaults(**sub_defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config_file(args, parser, argv)
        return args.func(args)
    except WindowTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except RefinementError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFINEMENT
    except ClaimVerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CLAIM
    except (ParseError, LambdaLabError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
