"""``paralab`` command line.

Exit codes: 0 pass or positive decision, 1 property failure or negative
decision, 2 usage error, 3 undecided within budget.

Every command accepts ``--config FILE`` (JSON object whose keys override the
command's defaults, using the long option names with ``_`` for ``-``) and
``--seed``. CSV outputs start with ``#`` comment lines carrying the tool
version and a hash of the effective configuration.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .lacunary import (
    AdmissibleSequences,
    DEFAULT_BUDGET,
    generate_admissible,
    is_lacunary,
    parse_rational,
)
from .lemmas import verify_lemmas
from .normest import Budget, ExponentTriple, loglog_slope, sweep
from .signal import (
    Grid,
    generate,
    read_binary,
    read_csv,
    square_function_ratio,
    write_binary,
    write_csv,
)
from .symbols import (
    exp_convex,
    exp_staircase,
    fit_grid,
    half_plane,
    multilac_staircase,
    resolving_grid,
    symbol_from_json,
    unit_symbol,
)
from .svgplot import line_plot
from .variation import lepingle_ratio

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNDECIDED = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return [int(t) for t in str(text).replace(" ", "").split(",") if t]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in str(text).replace(" ", "").split(",") if t]


def _pairs(text: str) -> list[tuple[int, int]]:
    out = []
    for chunk in str(text).replace(" ", "").split(";"):
        if chunk:
            d, b = chunk.split(",")
            out.append((int(d), int(b)))
    return out


def config_hash(args: argparse.Namespace) -> str:
    skip = {"func", "config", "out", "svg", "verbose"}
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _header(args) -> list[str]:
    return [f"# paralab {__version__}", f"# command {args.command}", f"# config {config_hash(args)}"]


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _csv_text(args, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for line in _header(args):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(args, obj: dict) -> str:
    obj = dict(obj)
    obj["provenance"] = {"version": __version__, "command": args.command, "config": config_hash(args)}
    return json.dumps(obj, indent=2, default=str) + "\n"


def _exponents(args) -> ExponentTriple:
    ps = _float_list(args.p)
    if len(ps) != 3:
        raise UsageError("--p needs three comma separated exponents")
    try:
        return ExponentTriple(*ps, unsafe=args.unsafe_exponents)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_lacunary(args) -> int:
    if args.points is None and args.csv is None:
        raise UsageError("give --points or --csv")
    texts = []
    if args.points is not None:
        texts += [t for t in args.points.replace(" ", "").split(",") if t]
    if args.csv is not None:
        for row in csv.reader(Path(args.csv).read_text().splitlines()):
            texts += [t.strip() for t in row if t.strip() and not t.strip().startswith("#")]
    try:
        pts = [parse_rational(t) for t in texts]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not pts:
        raise UsageError("empty point set")
    res = is_lacunary(pts, args.d, args.b, mode=args.mode, budget=args.budget, symmetric=not args.one_sided)
    report = {
        "status": res.status,
        "d": args.d,
        "b": args.b,
        "heuristic": res.heuristic,
        "explored": res.explored,
        "reason": res.reason,
        "certificate": None if res.certificate is None else res.certificate.to_json(),
    }
    _emit(_json_text(args, report), args.out)
    return {"lacunary": EXIT_OK, "not_lacunary": EXIT_FAIL}.get(res.status, EXIT_UNDECIDED)


def cmd_verify_lemmas(args) -> int:
    cases = []
    if args.input is not None:
        seqs = AdmissibleSequences.from_json(json.loads(Path(args.input).read_text()))
        problems = seqs.violations()
        if problems:
            raise UsageError("input sequences are not admissible: " + "; ".join(problems[:3]))
        cases.append(seqs)
    else:
        for d, b in _pairs(args.db):
            for s in range(args.seed, args.seed + args.seeds):
                try:
                    cases.append(generate_admissible(args.J, d, b, seed=s))
                except ValueError as exc:
                    raise UsageError(f"generation failed for (d,b)=({d},{b}) seed {s}: {exc}") from exc
    rows, failures = [], []
    for seqs in cases:
        rep = verify_lemmas(seqs)
        rows.append([seqs.seed, seqs.d, seqs.b, seqs.J, rep.counts.get("Z"), rep.counts.get("W"),
                     rep.counts.get("V"), len(rep.violations)])
        if not rep.ok:
            failures.append((seqs, rep))
    text = _csv_text(args, ["seed", "d", "b", "J", "Z", "W", "V", "violations"], rows)
    _emit(text, args.out)
    if failures:
        seqs, rep = min(failures, key=lambda t: (t[0].J, len(t[1].violations)))
        dump = {"sequences": seqs.to_json(), "violations": rep.violations[:10]}
        sys.stderr.write("counterexample:\n" + json.dumps(dump, indent=2) + "\n")
        return EXIT_FAIL
    return EXIT_OK


def _family(args):
    """``param -> (J, symbol)`` and ``symbol -> grid`` for the chosen family."""
    N = args.N
    if args.family == "unit":
        return (lambda J: (J, unit_symbol())), (lambda m: Grid(N, args.L or 1.0)), _int_list(args.J)
    if args.family == "exp_staircase":
        return (lambda J: (J, exp_staircase(J))), (lambda m: Grid(N, args.L) if args.L else fit_grid(m, N)), _int_list(args.J)
    if args.family == "exp_convex":
        def conv(J):
            L = args.L or float(fit_grid(exp_staircase(J), N).L)
            return J, exp_convex(J, Grid(N, L))
        return conv, (lambda m: m.grid), _int_list(args.J)
    if args.family == "multilac":
        d, b = _pairs(args.db)[0]
        params = [(J, s) for s in range(args.seed, args.seed + args.seeds) for J in _int_list(args.J)]

        def ml(param):
            J, s = param
            return J, multilac_staircase(generate_admissible(J, d, b, seed=s))
        return ml, (lambda m: resolving_grid(m, N)), params
    if args.family == "half_plane":
        grid = Grid(N, args.L or 1.0)

        def hp(J):
            return J, half_plane(parse_rational(args.slope), parse_rational(args.offset), grid)
        return hp, (lambda m: grid), _int_list(args.J)
    if args.family == "custom-json":
        if not args.symbol:
            raise UsageError("custom-json needs --symbol FILE")
        sym = symbol_from_json(json.loads(Path(args.symbol).read_text()))
        grid_for = (lambda m: m.grid) if hasattr(sym, "grid") else (lambda m: Grid(N, args.L) if args.L else fit_grid(m, N))
        return (lambda J: (J, sym)), grid_for, _int_list(args.J)[:1] or [1]
    raise UsageError(f"unknown family {args.family!r}")


def cmd_norm(args) -> int:
    exps = _exponents(args)
    budget = Budget(args.restarts, args.iterations, args.tolerance)
    family, grid_for, params = _family(args)
    res = sweep(family, params, exps, grid_for, budget, seed=args.seed, label=args.family)
    rows = []
    for r in res["rows"]:
        param = r["param"]
        seed = param[1] if isinstance(param, tuple) else r["seed"]
        rows.append([r["family"], r["J"], seed, f"{r['best_ratio']:.12g}", r["iterations"], r["converged"],
                     r["degenerate"], r["error"] or ""])
    rows.append(["summary", "slope", "", f"{res['slope']:.6g}", "", "", "", ""])
    rows.append(["summary", "dispersion", "", f"{res['dispersion']:.6g}", "", "", "", ""])
    text = _csv_text(args, ["family", "J", "seed", "best_ratio", "iterations", "converged", "degenerate", "error"], rows)
    _emit(text, args.out)
    if args.verbose:
        sys.stderr.write(_json_text(args, res))
    if args.svg:
        series: dict = {}
        for r in res["rows"]:
            if r["error"] is None:
                key = f"seed {r['param'][1]}" if isinstance(r["param"], tuple) else args.family
                xs, ys = series.setdefault(key, ([], []))
                xs.append(r["J"])
                ys.append(r["best_ratio"])
        line_plot(series, args.svg, title=f"{args.family} p={args.p}", xlabel="J", ylabel="best ratio", logx=True)
    return EXIT_FAIL if any(r["error"] for r in res["rows"]) else EXIT_OK


def lp_intervals(grid: Grid) -> list[tuple[float, float]]:
    """Dyadic Littlewood-Paley family ``+-[2^k, 2^(k+1)) / L`` plus ``[-1/L, 1/L)``."""
    L = grid.L
    out = [(-1 / L, 1 / L)]
    k = 1
    while k < grid.N // 2:
        out += [(k / L, 2 * k / L), (-2 * k / L, -k / L)]
        k *= 2
    return out


def _parse_intervals(text: str) -> list[tuple[float, float]]:
    out = []
    for chunk in text.replace(" ", "").split(","):
        a, b = chunk.split(":")
        out.append((parse_rational(a), parse_rational(b)))
    return out


def cmd_sqfn(args) -> int:
    if not 2 < args.p < np.inf:
        raise UsageError(f"sqfn needs 2 < p < inf, got {args.p}")
    Ns = _int_list(args.N)
    rows, means = [], []
    for N in Ns:
        grid = Grid(N, 1.0)
        intervals = _parse_intervals(args.intervals) if args.intervals else lp_intervals(grid)
        vals = []
        for t in range(args.trials):
            f = generate("random_trig", grid, seed=args.seed + t, band=(-N // 2, N // 2))
            vals.append(square_function_ratio(f, intervals, args.p))
            rows.append([N, args.p, args.seed + t, f"{vals[-1]:.12g}"])
        means.append(float(np.mean(vals)))
    rows.append(["slope", args.p, "", f"{loglog_slope(Ns, means):.6g}"])
    _emit(_csv_text(args, ["N", "p", "seed", "ratio"], rows), args.out)
    return EXIT_OK


def cmd_lepingle(args) -> int:
    if not 1 < args.p < np.inf or not 2 < args.r < np.inf:
        raise UsageError(f"lepingle needs 1 < p < inf and 2 < r < inf, got p={args.p}, r={args.r}")
    Ns = _int_list(args.N)
    rows, means = [], []
    for N in Ns:
        grid = Grid(N, 1.0)
        vals = []
        for t in range(args.trials):
            g = generate("random_trig", grid, seed=args.seed + t)
            vals.append(lepingle_ratio(g, args.p, args.r))
            rows.append([N, args.p, args.r, f"{vals[-1]:.12g}"])
        means.append(float(np.mean(vals)))
    rows.append(["slope", args.p, args.r, f"{loglog_slope(Ns, means):.6g}"])
    _emit(_csv_text(args, ["N", "p", "r", "ratio"], rows), args.out)
    return EXIT_OK


def _write_signal(sig, path: str) -> None:
    if path.endswith(".csv"):
        write_csv(sig, path)
    elif path.endswith(".bin"):
        write_binary(sig, path)
    else:
        raise UsageError(f"unknown signal format for {path!r} (use .csv or .bin)")


def cmd_signal_io(args) -> int:
    if args.action == "generate":
        params = json.loads(args.params) if args.params else {}
        if "band" in params:
            params["band"] = tuple(params["band"])
        try:
            sig = generate(args.kind, Grid(args.N, args.L or 1.0), seed=args.seed, **params)
        except (TypeError, KeyError) as exc:
            raise UsageError(f"bad generator parameters: {exc}") from exc
    else:
        if args.input is None:
            raise UsageError("convert needs --input")
        if args.input.endswith(".csv"):
            sig = read_csv(args.input, L=args.L or 1.0)
        elif args.input.endswith(".bin"):
            sig = read_binary(args.input)
        else:
            raise UsageError(f"unknown signal format for {args.input!r}")
    if not args.out:
        raise UsageError("signal-io needs --out")
    _write_signal(sig, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paralab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"paralab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option overrides")
    common.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
    common.add_argument("--out", help="output path (default stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lacunary", parents=[common], help="decide (d, b)-lacunarity of a finite set")
    p.add_argument("--points", help='comma separated rationals, e.g. "1/2^3,1/4,3"')
    p.add_argument("--csv", help="file of rationals (any cells)")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--mode", choices=["auto", "exhaustive", "heuristic"], default="auto")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search state budget")
    p.add_argument("--one-sided", action="store_true", help="use the one-sided pair condition")
    p.set_defaults(func=cmd_lacunary)

    p = sub.add_parser("verify-lemmas", parents=[common], help="exact check of the interval lemmas")
    p.add_argument("--seeds", type=int, default=100, help="number of seeds starting at --seed")
    p.add_argument("--db", default="2,2;2,4;3,3", help='(d,b) pairs, e.g. "2,2;3,3"')
    p.add_argument("--J", type=int, default=20)
    p.add_argument("--input", help="JSON file with one set of sequences instead of generated ones")
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("norm", parents=[common], help="adversarial norm sweep")
    p.add_argument("--family", default="exp_staircase",
                   choices=["unit", "exp_staircase", "exp_convex", "multilac", "half_plane", "custom-json"])
    p.add_argument("--J", default="4,8,16,32,64", help="comma separated truncation parameters")
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--L", type=float, default=None, help="period (default: fitted to the symbol)")
    p.add_argument("--p", default="3,3,3", help="exponents p1,p2,p3")
    p.add_argument("--unsafe-exponents", action="store_true", help="allow exponents outside the local L^2 range")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=1e-7)
    p.add_argument("--db", default="2,2", help="(d,b) for multilac")
    p.add_argument("--seeds", type=int, default=20, help="multilac seeds starting at --seed")
    p.add_argument("--slope", default="1", help="half_plane slope (rational)")
    p.add_argument("--offset", default="0", help="half_plane offset (rational)")
    p.add_argument("--symbol", help="symbol JSON for custom-json")
    p.add_argument("--svg", help="also write an SVG plot")
    p.add_argument("--verbose", action="store_true", help="JSON report with traces on stderr")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("sqfn", parents=[common], help="square function ratios across N")
    p.add_argument("--N", default="256,1024,4096")
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--trials", type=int, default=8)
    p.add_argument("--intervals", help='custom intervals "a:b,c:d" (default dyadic family)')
    p.set_defaults(func=cmd_sqfn)

    p = sub.add_parser("lepingle", parents=[common], help="variation of dyadic averages across N")
    p.add_argument("--N", default="256,1024,4096")
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--r", type=float, default=2.5)
    p.add_argument("--trials", type=int, default=8)
    p.set_defaults(func=cmd_lepingle)

    p = sub.add_parser("signal-io", parents=[common], help="generate or convert signal files")
    p.add_argument("action", choices=["generate", "convert"])
    p.add_argument("--kind", default="gaussian", choices=["gaussian", "modulated_bump", "random_trig", "spike"])
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--params", help="generator parameters as JSON")
    p.add_argument("--input", help="input .csv or .bin for convert")
    p.set_defaults(func=cmd_signal_io)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        overrides = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config: {exc}")
    if not isinstance(overrides, dict):
        parser.error("config must be a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(overrides) - known
    if unknown:
        parser.error(f"unknown config keys: {sorted(unknown)}")
    sub.set_defaults(**overrides)
    # explicit command line flags still win over the file
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"paralab {args.command}: {exc}\n")
        return EXIT_USAGE
    except ValueError as exc:
        sys.stderr.write(f"paralab {args.command}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
