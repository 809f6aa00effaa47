"""Command-line front end.

Every command prints (or writes with ``--out``) one report.  JSON reports carry
a ``schema`` field and a ``manifest`` describing the invocation, and contain
no timestamps, so re-running a manifest reproduces the report byte for byte.

Exit status: 0 on success, 1 when a check in the report fails, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction
from typing import Optional

from . import __version__
from .analysis import (
    exact_run,
    expected_stopping_time,
    fl_truncate,
    spectrum_mass,
    stopping_profile,
    validity_check,
)
from .bounds import asymptotic_rates, bound_grid
from .exactnum import DyadicExp, Real, format_ratio, parse_ratio
from .interval_alg import build_tree, generate
from .markov import summarize
from .process import ConfigError, load_model
from .sim import BitStream, SimConfig, empirical_spectrum, run_one, run_trials, sample_symbol

SCHEMA = "exactrng-report/1"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# serialisation helpers


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_ratio(x)
    if isinstance(x, Real):
        return {"value": x.value, "err": x.err}
    if isinstance(x, DyadicExp):
        return {"dyadic": str(x), "approx": float(x)}
    if isinstance(x, dict):
        return {_key(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _key(k) -> str:
    if isinstance(k, tuple):
        return ",".join(map(str, k))
    if isinstance(k, Fraction):
        return format_ratio(k)
    return str(k)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([_jsonable(v) if isinstance(v, Fraction) else v for v in r])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".exactrng-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _manifest(args) -> dict:
    skip = {"func", "format", "out"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip and k not in ("coin", "target", "model")}
    return {
        "command": args.command,
        "inputs": {k: getattr(args, k) for k in ("coin", "target", "model") if getattr(args, k, None)},
        "params": params,
        "output": args.out,
        "version": __version__,
        "seed": getattr(args, "seed", None),
    }


# --------------------------------------------------------------------------
# argument parsing helpers


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _int_range(text: str) -> list[int]:
    """``"0-30"`` or ``"0,1,5"``."""
    if "-" in text and "," not in text:
        a, b = text.split("-", 1)
        return list(range(int(a), int(b) + 1))
    return _ints(text)


def _ratios(text: str) -> list[Fraction]:
    try:
        return [parse_ratio(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _thresholds(args, bits_attr: str) -> list[Fraction]:
    """Thresholds from ``--*-bits`` (integers) or explicit ``--threshold`` rationals."""
    bits = getattr(args, bits_attr, None)
    out = []
    if bits:
        if any(b < 0 for b in bits):
            raise UsageError(f"--{bits_attr.replace('_', '-')}: bits must be >= 0")
        out += [Fraction(1, 2**b) for b in bits]
    if args.threshold:
        out += args.threshold
    for t in out:
        if not 0 < t <= 1:
            raise UsageError(f"threshold {format_ratio(t)} outside (0, 1]")
    return out


def _load(path: Optional[str], flag: str):
    if not path:
        raise UsageError(f"{flag} is required")
    try:
        return load_model(path)
    except OSError as e:
        raise UsageError(f"{flag}: cannot read {path}: {e.strerror}") from None


# --------------------------------------------------------------------------
# commands; each returns (result, csv_rows, text, ok)


def cmd_generate(args):
    coin = _load(args.coin, "--coin")
    target = _load(args.target, "--target")
    n = args.n
    if args.coin_stream is not None:
        stream = iter(args.coin_stream)
    elif args.seed is not None:
        if not coin.rational:
            out, T = run_one(coin, target, n, args.m_max or 10**6 * max(n, 1), args.seed, 0)
            res = {"output": out, "stopping_time": T, "complete": out is not None}
            return res, None, _gen_text(out, T), out is not None
        stream = _sampled_coins(coin, args.seed, args.m_max or 10**6 * max(n, 1))
    else:
        raise UsageError("generate needs --coin-stream or --seed")
    run = generate(coin, target, n, stream)
    res = {"output": run.output, "stopping_time": run.stopping_time, "coins_read": run.coins_read, "complete": run.complete}
    rows = [["step", "coin", "emitted", "coin_lo", "coin_hi", "target_lo", "target_hi"]]
    if args.transcript:
        res["transcript"] = [
            {"coin": x, "emitted": e, "coin_interval": [I.lo, I.hi], "target_interval": [J.lo, J.hi]}
            for x, e, I, J in run.transcript
        ]
    for i, (x, e, I, J) in enumerate(run.transcript):
        rows.append([i, x if x is not None else "", ",".join(map(str, e)), I.lo, I.hi, J.lo, J.hi])
    text = _gen_text(run.output, run.stopping_time)
    if not run.complete:
        text = f"incomplete: coin stream exhausted after {len(run.coins_read)} symbols; emitted so far " + ",".join(
            str(y) for _, e, _, _ in run.transcript for y in e
        )
    if args.transcript:
        text += "\n" + "\n".join(
            f"read={x if x is not None else '-'} emit={','.join(map(str, e)) or '-'} "
            f"I=[{format_ratio(I.lo)},{format_ratio(I.hi)}) J=[{format_ratio(J.lo)},{format_ratio(J.hi)})"
            for x, e, I, J in run.transcript
        )
    return res, rows, text, run.complete


def _gen_text(out, T):
    if out is None:
        return f"incomplete after {T} coin symbols"
    return f"y={','.join(map(str, out))} T={T}"


def _sampled_coins(coin, seed, cap):
    bits = BitStream(seed, 0)
    prefix: list = []
    while len(prefix) < cap:
        x = sample_symbol(coin, prefix, bits)
        prefix.append(x)
        yield x


def cmd_analyze(args):
    coin = _load(args.coin, "--coin")
    target = _load(args.target, "--target")
    n, m_max = args.n, args.m_max if args.m_max is not None else 40
    thr = _thresholds(args, "lambda_bits")
    threshold = thr[0] if thr else None
    if not coin.rational:
        rep = validity_check(coin, target, n, m_max, args.eps or Fraction(0), threshold=threshold)
        res = {"validity": _validity(rep)}
        text = f"validity: {_tri(rep.passed)}  {rep.detail}"
        if rep.witness_mass is not None:
            text += f"\nwitness: {rep.witness}, mass >= {float(rep.witness_mass):.6f}"
        if rep.m_star is not None:
            text += f"\nm_star: {rep.m_star}"
        return res, None, text, rep.passed is not False

    prof = stopping_profile(coin, target, n, m_max)
    run = exact_run(coin, target, n, m_max)
    checks = _invariant_checks(run)
    res = {
        "overflow": list(prof.overflow),
        "frontier_sizes": list(run.frontier_sizes),
        "max_frontier": prof.max_frontier,
        "tail_rate": prof.tail_rate,
        "checks": checks,
    }
    try:
        lo, hi = expected_stopping_time(prof)
        res["expected_T"] = {"lower": lo, "upper": hi, "lower_float": float(lo), "upper_float": float(hi)}
    except ValueError as e:
        res["expected_T"] = {"error": str(e)}
    ok = all(checks.values())
    if args.eps is not None or threshold is not None:
        rep = validity_check(coin, target, n, m_max, args.eps if args.eps is not None else Fraction(1), threshold=threshold)
        res["validity"] = _validity(rep)
        ok = ok and rep.passed is not False
    rows = [["m", "overflow", "overflow_float", "frontier"]]
    rows += [[m, v, float(v), run.frontier_sizes[m]] for m, v in enumerate(prof.overflow)]
    lines = [f"{m:>4}  {format_ratio(v):>24}  {float(v):.6g}" for m, v in enumerate(prof.overflow)]
    if "lower" in res["expected_T"]:
        lines.append(f"E[T] in [{float(lo):.12g}, {float(hi):.12g}]")
    lines.append("checks: " + ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))
    return res, rows, "\n".join(lines), ok


def _invariant_checks(run) -> dict:
    law = run.cells.law
    below = mono = deficit = True
    prev = None
    for m in range(run.m_max + 1):
        part = run.law_at(m)
        below &= all(part[y] <= law[y] for y in law)
        if prev is not None:
            mono &= all(part[y] >= prev[y] for y in law)
        deficit &= sum(law.values()) - sum(part.values()) == run.overflow[m]
        prev = part
    return {"law_below_target": below, "law_monotone": mono, "deficit_equals_overflow": deficit}


def _validity(rep) -> dict:
    return {
        "passed": rep.passed,
        "eps": rep.eps,
        "deficit": rep.deficit,
        "m_max": rep.m_max,
        "threshold": rep.threshold,
        "m_star": rep.m_star,
        "witness": rep.witness,
        "witness_mass": rep.witness_mass,
        "detail": rep.detail,
    }


def _tri(v):
    return {True: "PASS", False: "FAIL", None: "UNDECIDED"}[v]


def cmd_bounds(args):
    coin = _load(args.coin, "--coin")
    target = _load(args.target, "--target")
    ms = args.m if args.m is not None else list(range(31))
    lambdas = [Fraction(1, 2**b) for b in (args.lambda_bits or [1, 2, 4, 8, 16])]
    taus = [Fraction(1, 2**b) for b in (args.tau_bits or [1, 2, 4, 8, 16])]
    if args.threshold:
        lambdas += args.threshold
        taus += args.threshold
    grid = bound_grid(coin, target, args.n, ms, lambdas, taus)
    pts = [
        {
            "m": g.m,
            "t_lambda": g.t_lambda,
            "t_tau": g.t_tau,
            "overflow": g.overflow,
            "converse_1": g.converse[0],
            "converse_2": g.converse[1],
            "achievability": g.achievability,
            "pass": g.passed,
        }
        for g in grid
    ]
    fails = sum(not g.passed for g in grid)
    res = {"points": pts, "violations": fails, "passed": fails == 0}
    rows = [["m", "t_lambda", "t_tau", "overflow", "converse_1", "converse_2", "achievability", "pass"]]
    rows += [[p["m"], p["t_lambda"], p["t_tau"], p["overflow"], p["converse_1"], p["converse_2"], p["achievability"], p["pass"]] for p in pts]
    text = f"{len(grid)} grid points, {fails} violations"
    return res, rows, text, fails == 0


def cmd_rates(args):
    coin = _load(args.coin, "--coin")
    target = _load(args.target, "--target")
    try:
        rep = asymptotic_rates(summarize(coin), summarize(target))
    except ValueError as e:
        raise UsageError(f"rates: {e}") from None
    res = rep.to_dict()
    lines = [f"{k}: {v['value']:.10g} +/- {v['err']:.2g}" for k, v in res.items() if isinstance(v, dict)]
    lines.append(f"one-point spectrum: coin={rep.coin_one_point} target={rep.target_one_point}")
    return res, None, "\n".join(lines), True


def cmd_simulate(args):
    coin = _load(args.coin, "--coin")
    target = _load(args.target, "--target")
    if args.seed is None:
        raise UsageError("--seed is required")
    cfg = SimConfig(args.seed, args.trials, args.n, args.m_max, args.workers)
    r = run_trials(coin, target, cfg)
    rows = [["m", "overflow_count", "overflow_freq"]]
    rows += [[m, c, c / r.trials] for m, c in enumerate(r.overflow_counts)]
    mt = "n/a" if r.mean_T is None else f"{r.mean_T:.6g}"
    text = f"trials={r.trials} mean_T={mt} truncated={r.truncated_trials}"
    if r.mean_T is not None and args.n:
        text += f" mean_T/n={r.mean_T / args.n:.6g}"
    return r.to_dict(), rows, text, True


def cmd_spectrum(args):
    model = _load(args.model or args.coin, "--model")
    length = args.m_max if args.m_max is not None else args.n
    if not length or length < 1:
        raise UsageError("spectrum needs a sequence length via -m or -n")
    if args.trials:
        if args.seed is None:
            raise UsageError("--seed is required with --trials")
        es = empirical_spectrum(model, length, args.trials, args.seed, bins=args.bins)
        res = es.to_dict()
        for t in _thresholds(args, "lambda_bits"):
            # P(seq) <= t  <=>  self-information >= -log2 t
            res.setdefault("fraction_at_least", {})[format_ratio(t)] = float(
                (es.values * length >= _bits(t) - 1e-12).mean()
            )
        rows = [["bin_lo", "bin_hi", "count"]]
        rows += [[float(es.edges[i]), float(es.edges[i + 1]), int(c)] for i, c in enumerate(es.counts)]
        return res, rows, f"length={length} trials={args.trials} mean={res['mean_bits']:.6g} bits/symbol", True
    ts = _thresholds(args, "lambda_bits")
    if not ts:
        raise UsageError("spectrum needs --lambda-bits/--threshold, or --trials for a histogram")
    out = []
    for t in ts:
        sm = spectrum_mass(model, length, t)
        out.append({"threshold": t, "lambda_bits": sm.lambda_bits, "mass_below": sm.mass_below, "mass_at_least": sm.mass_at_least})
    rows = [["threshold", "mass_below", "mass_at_least"]] + [[o["threshold"], o["mass_below"], o["mass_at_least"]] for o in out]
    text = "\n".join(f"t={format_ratio(o['threshold'])}: P(p<=t)={format_ratio(o['mass_below'])} P(p>=t)={format_ratio(o['mass_at_least'])}" for o in out)
    return {"length": length, "masses": out}, rows, text, True


def _bits(t: Fraction) -> float:
    from .exactnum import log2_ratio

    return -log2_ratio(t)


def cmd_flrng(args):
    coin = _load(args.coin, "--coin")
    target = _load(args.target, "--target")
    if args.fallback is None:
        raise UsageError("--fallback is required")
    m = args.m_max if args.m_max is not None else 10
    try:
        rep = fl_truncate(coin, target, args.n, m, args.fallback)
    except ValueError as e:
        raise UsageError(str(e)) from None
    res = {"m": m, "fallback": rep.fallback, "delta": rep.delta, "overflow": rep.overflow_at_m, "approx_law": rep.approx_law}
    text = f"delta={format_ratio(rep.delta)} overflow={format_ratio(rep.overflow_at_m)}"
    return res, None, text, rep.delta <= rep.overflow_at_m


def cmd_tree(args):
    coin = _load(args.coin, "--coin")
    target = _load(args.target, "--target")
    tree = build_tree(coin, target, args.n, args.depth)
    export = tree.export()
    res = {"lines": export.splitlines(), "terminal_mass": tree.terminal_mass(), "unresolved_mass": tree.unresolved_mass()}
    return res, None, export.rstrip("\n"), True


COMMANDS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "bounds": cmd_bounds,
    "rates": cmd_rates,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "flrng": cmd_flrng,
    "tree": cmd_tree,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exactrng", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="json"):
        sp.add_argument("--coin")
        sp.add_argument("--target")
        sp.add_argument("-n", type=int, default=1)
        if sp.prog.endswith(" bounds"):
            sp.add_argument("-m", "--m-max", dest="m", type=_int_range, help="list like 0,5,10 or range 0-30")
        else:
            sp.add_argument("-m", "--m-max", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--lambda-bits", type=_ints)
        sp.add_argument("--tau-bits", type=_ints)
        sp.add_argument("--threshold", type=_ratios, help="explicit rational thresholds, comma separated")
        sp.add_argument("--fallback", type=_ints)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=["json", "csv", "text"], default=fmt)

    for name in COMMANDS:
        sp = sub.add_parser(name)
        common(sp, "text" if name == "tree" else "json")
        if name == "generate":
            sp.add_argument("--coin-stream", type=_ints)
            sp.add_argument("--transcript", action="store_true")
        if name == "analyze":
            sp.add_argument("--eps", type=parse_ratio)
        if name == "simulate":
            sp.add_argument("--workers", type=int, default=1)
            sp.set_defaults(trials=1000)
        if name == "spectrum":
            sp.add_argument("--model")
            sp.add_argument("--bins", type=int, default=50)
        if name == "tree":
            sp.add_argument("--depth", type=int, default=8)
    return p


def render(args, result, rows, text) -> str:
    if args.format == "json":
        doc = {"schema": SCHEMA, "manifest": _jsonable(_manifest(args)), "result": _jsonable(result)}
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.command} has no tabular output; use json or text")
        return _csv(rows)
    return text + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result, rows, text, ok = COMMANDS[args.command](args)
        payload = render(args, result, rows, text)
    except ConfigError as e:
        print(f"exactrng: config error: {e}", file=sys.stderr)
        return 2
    except UsageError as e:
        print(f"exactrng: {e}", file=sys.stderr)
        return 2
    if args.out:
        write_atomic(args.out, payload)
    else:
        sys.stdout.write(payload)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
