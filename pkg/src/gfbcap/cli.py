"""Command-line entry point.

Rates are computed in nats; ``--bits`` converts them on output only (and, for
``simulate pam``, reads ``--rate`` in bits).  Floats are printed with 17
significant digits so that output is stable under parse and re-emit.  All
randomness comes from ``--seed`` (default 0).

Exit codes: 0 success, 2 usage or input error, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import arma1, cover_pombra, sk_coding, variational, waterfilling
from .filters import CausalFilter
from .spectrum import Arma1Spectrum, ChannelSpecError, NoiseSpectrum, spectrum_from_dict


class UsageError(Exception):
    """Bad input that is not a numerical failure."""


def parse_channel(source: str) -> NoiseSpectrum:
    """Channel spectrum from a JSON file path or an inline JSON object."""
    return spectrum_from_dict(_load_json(source, "channel"))


def _load_json(source: str, what: str):
    text = source.strip()
    if not text.startswith("{"):
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {what} file {source!r}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} is not valid JSON: {exc.msg}") from None


# --- output -----------------------------------------------------------------


def format_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    s = format(v, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _to_plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj) -> str:
    """Minimal JSON writer with ``.17g`` floats and NaN/inf mapped to null."""
    obj = _to_plain(obj)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    v = _to_plain(v)
    if isinstance(v, float):
        return "" if not math.isfinite(v) else format(v, ".17g")
    if isinstance(v, (list, dict)):
        return dumps(v)
    return "" if v is None else str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _write_json_file(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj) + "\n")


# --- commands ---------------------------------------------------------------

LOG2 = math.log(2.0)


def _rate_out(v, args):
    return v / LOG2 if args.bits else v


def cmd_nofb(args):
    spec = parse_channel(args.channel)
    res = waterfilling.capacity_nofb(spec, args.power, N=args.grid_size)
    out = res.to_dict()
    out["capacity"] = _rate_out(out["capacity"], args)
    return out


def cmd_fb_arma1(args):
    if args.power == 0:
        Arma1Spectrum(args.alpha, args.beta)  # range checks
        out = {"x0": 1.0, "capacity": 0.0, "sigma": arma1.feedback_sign(args.alpha, args.beta),
               "y": 0.0, "implied_power": 0.0, "residual": 0.0}
        filt = CausalFilter.zero()
    else:
        sol = arma1.solve_x0(args.power, args.alpha, args.beta)
        out = sol.to_dict()
        filt = sol.filter
    out["capacity"] = _rate_out(out["capacity"], args)
    if args.emit_filter:
        if filt is None:
            raise ValueError("optimal filter undefined for |alpha| = 1 (pole on the unit circle)")
        _write_json_file(args.emit_filter, filt.to_dict())
    return out


def cmd_fb_block(args):
    spec = parse_channel(args.channel)
    res = cover_pombra.optimize(
        spec, args.n, args.power, restarts=args.restarts, max_iters=args.max_iters,
        seed=args.seed, N=args.grid_size,
    )
    out = res.to_dict(include_strategy=args.include_strategy)
    out["rate"] = _rate_out(out["rate"], args)
    if args.emit_strategy:
        _write_json_file(args.emit_strategy, res.strategy.to_dict())
    return out


def cmd_fb_block_eval(args):
    spec = parse_channel(args.channel)
    try:
        strat = cover_pombra.BlockStrategy.from_dict(_load_json(args.strategy, "strategy"))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed strategy JSON: {exc}") from None
    K_Z = cover_pombra.noise_covariance(spec, strat.n, args.grid_size)
    rate, power = cover_pombra.evaluate_block_rate(strat, K_Z)
    return {"label": "lower bound on C_FB,n", "n": strat.n, "rate": _rate_out(rate, args), "power": power}


def _load_filter(source):
    d = _load_json(source, "filter")
    if not isinstance(d, dict):
        raise UsageError("filter JSON must be an object")
    try:
        return CausalFilter.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid filter: {exc}") from None


def cmd_verify(args):
    spec = parse_channel(args.channel)
    B = _load_filter(args.filter)
    rep = variational.verify_sufficient_condition(B, spec, args.power, lam=args.lam, N=args.grid_size)
    return rep.to_dict()


def cmd_eval(args):
    spec = parse_channel(args.channel)
    B = _load_filter(args.filter)
    sv = parse_channel(args.sv) if args.sv else None
    rate, power = variational.eval_objective(variational.VariationalCandidate(B, sv), spec, args.grid_size)
    return {"rate": _rate_out(rate, args), "power": power}


def _scheme(args):
    Arma1Spectrum(args.alpha, args.beta)  # range checks
    return sk_coding.SchemeParams.from_channel(args.power, args.alpha, args.beta)


def cmd_sk(args):
    trace = sk_coding.exact_trace(_scheme(args), args.n)
    header = ["k", "power", "mse", "ratio", "rate"]
    rows = [(k, p, m, q, _rate_out(r, args)) for k, p, m, q, r in trace.rows()]
    if args.format == "json":
        return {h: [row[i] for row in rows] for i, h in enumerate(header)}
    return header, rows


def cmd_pam(args):
    R = args.rate * LOG2 if args.bits else args.rate
    exp = sk_coding.PamExperiment(R, args.n, args.trials, args.seed)
    return sk_coding.pam_simulate(exp, _scheme(args)).to_dict()


# --- parser -----------------------------------------------------------------


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # the leaf copies use SUPPRESS so flags given before the subcommand survive
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--bits", action="store_true", default=d(False), help="report rates in bits")
    p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    p.add_argument("--grid-size", type=int, default=d(None), help="quadrature grid size")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", default=d(None))
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv", default=d(None))
    return p


def build_parser() -> argparse.ArgumentParser:
    leaf = [_global_flags(False)]
    parser = argparse.ArgumentParser(prog="gfbcap", parents=[_global_flags(True)], description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True)

    cap = top.add_parser("capacity", help="capacity computations").add_subparsers(dest="cmd", required=True)
    p = cap.add_parser("nofb", parents=leaf, help="nonfeedback capacity by water-filling")
    p.add_argument("--channel", required=True)
    p.add_argument("--power", type=float, required=True)
    p.set_defaults(func=cmd_nofb)

    p = cap.add_parser("fb-arma1", parents=leaf, help="closed-form ARMA(1) feedback capacity")
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--emit-filter", metavar="PATH")
    p.set_defaults(func=cmd_fb_arma1)

    p = cap.add_parser("fb-block", parents=leaf, help="n-block feedback rate (local optimum)")
    p.add_argument("--channel", required=True)
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--emit-strategy", metavar="PATH")
    p.add_argument("--include-strategy", action="store_true", help="embed K_V and B in the output")
    p.set_defaults(func=cmd_fb_block)

    p = cap.add_parser("fb-block-eval", parents=leaf, help="evaluate a stored block strategy")
    p.add_argument("--strategy", required=True)
    p.add_argument("--channel", required=True)
    p.set_defaults(func=cmd_fb_block_eval)

    ver = top.add_parser("verify", help="optimality certificates").add_subparsers(dest="cmd", required=True)
    p = ver.add_parser("filter", parents=leaf, help="check the sufficient condition for a filter")
    p.add_argument("--channel", required=True)
    p.add_argument("--filter", required=True)
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.set_defaults(func=cmd_verify)

    ev = top.add_parser("eval", help="objective evaluation").add_subparsers(dest="cmd", required=True)
    p = ev.add_parser("variational", parents=leaf, help="rate and power of a stationary strategy")
    p.add_argument("--channel", required=True)
    p.add_argument("--filter", required=True)
    p.add_argument("--sv", help="innovation spectrum, same schema as a channel")
    p.set_defaults(func=cmd_eval)

    sim = top.add_parser("simulate", help="coding-scheme simulation").add_subparsers(dest="cmd", required=True)
    p = sim.add_parser("sk", parents=leaf, help="exact second-moment trace of the scheme")
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=100)
    p.set_defaults(func=cmd_sk, default_format="csv")

    p = sim.add_parser("pam", parents=leaf, help="Monte Carlo error rate with a PAM constellation")
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--rate", type=float, required=True, help="nats per use, or bits with --bits")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_pam)
    return parser


def _emit(payload, fmt, out):
    if isinstance(payload, tuple):
        header, rows = payload
        out.write(to_csv(header, rows))
    elif fmt == "csv":
        flat = {k: v for k, v in payload.items() if not isinstance(v, dict)}
        out.write(to_csv(list(flat), [list(flat.values())]))
    else:
        out.write(dumps(payload) + "\n")


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.format = args.format or getattr(args, "default_format", "json")
    try:
        payload = args.func(args)
    except ChannelSpecError as exc:
        stderr.write(dumps({"error": exc.reason, "field": exc.field}) + "\n")
        return 2
    except UsageError as exc:
        stderr.write(dumps({"error": str(exc)}) + "\n")
        return 2
    except (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        stderr.write(dumps({"error": str(exc)}) + "\n")
        return 1
    _emit(payload, args.format, stdout)
    return 0


def main() -> None:
    sys.exit(run())
