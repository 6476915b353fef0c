"""Command-line front end: ``p2dgl <subcommand> [flags]``.

Every run prints (or writes with --out) one JSON report in the shared schema,
or CSV with --csv.  Exit status: 0 pass, 1 verdict failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import List, Optional

import mpmath
import numpy as np

from . import __version__
from . import constructions as fc
from . import dimension as dim
from . import stats
from .expansion import as_point, cylinder, expand, expand_periodic
from .report import ExperimentReport
from .rng import SEED_ENV, master_seed, sample_stream


class UsageError(Exception):
    pass


def _word(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise UsageError(f"bad digit word {text!r}; expected e.g. 1,2,3")


def _grid(text: str) -> List[float]:
    # "start:stop:step" or a comma list
    if ":" in text:
        a, b, h = (float(v) for v in text.split(":"))
        if h <= 0:
            raise UsageError("grid step must be positive")
        n = int(math.floor((b - a) / h + 1e-9))
        return [round(a + i * h, 12) for i in range(n + 1)]
    return [float(v) for v in text.split(",") if v]


def _ranks(text: str) -> List[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _spec_from_args(args) -> fc.ConstructionSpec:
    if getattr(args, "spec", None):
        with open(args.spec) as fh:
            return fc.ConstructionSpec.loads(fh.read())
    if getattr(args, "flavor", "F") == "E":
        return fc.ConstructionSpec.E(args.M, args.r, args.alpha, args.t)
    return fc.ConstructionSpec.F(args.M, args.alpha, K=args.K)


# ------------------------------------------------------------ commands


def cmd_expand(args) -> ExperimentReport:
    x = as_point(args.x)
    digits = expand(x, args.n)
    per = expand_periodic(x)
    rep = ExperimentReport("expand", None, {"x": str(x), "n": args.n})
    rep.extra.update(
        {
            "digits": list(digits),
            "periodic": {"preperiod": list(per.preperiod), "period": list(per.period), "tag": str(per)},
        }
    )
    rep.series["digits"] = [{"i": i, "digit": d} for i, d in enumerate(digits, start=1)]
    return rep


def cmd_cylinder(args) -> ExperimentReport:
    c = cylinder(_word(args.word))
    rep = ExperimentReport("cylinder", None, {"word": list(c.word)})
    rep.extra.update({"left": str(c.left), "right": str(c.right), "length": str(c.length), "rank": c.rank})
    return rep


def cmd_sample(args) -> ExperimentReport:
    seed = master_seed(args.seed)
    d = sample_stream(seed, args.stream).take(args.n)
    rep = ExperimentReport("sample", seed, {"n": args.n, "stream": args.stream})
    if args.n >= 10**4:
        K = args.n
        p1 = float(np.mean(d == 1))
        rep.add("freq[1]", p1, 0.5, 3 * math.sqrt(0.25 / K))
        rep.add("mean_digit", float(d.mean()), 2.0, 3 * math.sqrt(2.0 / K))
    rep.extra["digits_head"] = d[:64].tolist()
    rep.series["digits"] = [{"i": i + 1, "digit": int(v)} for i, v in enumerate(d[: min(args.n, 10**5)])]
    return rep


def cmd_digit_law(args) -> ExperimentReport:
    return stats.digit_law_test(args.seed, args.K, args.kmax, stream=args.stream)


def cmd_pushforward(args) -> ExperimentReport:
    return stats.pushforward_uniformity_test(args.seed, args.K, args.bits, args.iterations, stream=args.stream)


def cmd_borel_bernstein(args) -> ExperimentReport:
    phi = stats.PhiSpec.parse(args.phi)
    return stats.bb_experiment(phi, args.seeds, args.N, args.seed, args.window_tol, args.workers)


def cmd_max_digit(args) -> ExperimentReport:
    return stats.max_digit_experiment(args.seeds, args.N, args.seed, args.workers)


def cmd_dimension(args) -> ExperimentReport:
    if args.M is None:
        res = dim.solve_s_alpha(args.alpha)
        name = "s(alpha)"
    else:
        try:
            res = dim.solve_s_M_alpha(args.M, args.alpha)
        except dim.NoRootError as e:
            rep = ExperimentReport("dimension", None, {"alpha": args.alpha, "M": args.M})
            rep.extra["no_root"] = str(e)
            rep.add("root_exists", 0.0, 1.0, 0.0)
            rep.extra["supremum"] = e.supremum
            return rep
        name = "s_M(alpha)"
    rep = ExperimentReport("dimension", None, {"alpha": args.alpha, "M": args.M})
    rep.add("residual", res.residual, 0.0, dim.RESIDUAL_TOL)
    rep.extra.update({"quantity": name, "s": float(res.root), **res.to_dict()})
    return rep


def cmd_curve(args) -> ExperimentReport:
    grid = _grid(args.grid)
    curve = dim.s_alpha_curve(grid)
    rep = ExperimentReport("curve", None, {"grid": args.grid, "points": len(grid)})
    worst = 0.0
    with mpmath.workprec(dim.WORK_PREC):
        for a in grid:
            root = dim.solve_s_alpha(a).root
            worst = max(worst, float(abs(dim.s_alpha_equation(root, mpmath.mpf(a)))))
    rep.add("max_equation_residual", worst, 0.0, 1e-10)
    ss = [s for _, s in curve.points]
    rep.add("strictly_decreasing", float(all(b < a for a, b in zip(ss, ss[1:]))), 1.0, 0.0)
    rep.series["curve"] = [{"alpha": a, "s_alpha": s} for a, s in curve.points]
    return rep


def cmd_mbonacci(args) -> ExperimentReport:
    res = dim.solve_mbonacci(args.M)
    rep = ExperimentReport("mbonacci", None, {"M": args.M})
    rep.add("residual", res.residual, 0.0, dim.RESIDUAL_TOL)
    rep.extra.update({"s_M": float(res.root), "log2_s_M": float(res.dimension), **res.to_dict()})
    return rep


def cmd_boxcount(args) -> ExperimentReport:
    if args.alpha is None and args.spec is None:
        counts = fc.count_cylinders_by_length(None, args.jmax, M=args.M)
        target = float(dim.solve_mbonacci(args.M).dimension)
        params = {"M": args.M, "jmax": args.jmax, "flavor": "bounded"}
        tol = 1e-3
    else:
        spec = _spec_from_args(args)
        counts = fc.count_cylinders_by_length(spec, args.jmax)
        target = float(dim.solve_s_M_alpha(spec.M, spec.alpha).root)
        params = {"M": spec.M, "alpha": spec.alpha, "jmax": args.jmax, "flavor": spec.flavor, "nk": list(spec.nk)}
        tol = 2e-2
    est = dim.box_dimension_from_counts(counts)
    rep = ExperimentReport("boxcount", None, params)
    rep.add("slope", est.slope, target, tol)
    rep.extra.update(est.to_dict())
    rep.series["counts"] = [{"j": j, "N": n} for j, n in counts]
    return rep


def cmd_construct(args) -> ExperimentReport:
    spec = _spec_from_args(args)
    if args.spec_out:
        with open(args.spec_out, "w") as fh:
            fh.write(spec.dumps())
    rep = ExperimentReport("construct", None, {"flavor": spec.flavor, "M": spec.M, "alpha": spec.alpha, "N": args.N})
    rep.extra["spec"] = spec.dumps()
    if spec.flavor == "E":
        pt = fc.construct_E_point(spec.r, spec.alpha, spec.M, spec.t, args.N)
        rep.add("ratio_deviation", pt.deviation, 0.0, pt.bound)
        rep.extra.update(pt.to_dict())
        step = max(1, args.N // 1000)
        rep.series["ratios"] = [{"n": n, "L_over_n_r": float(pt.ratios[n - 1])} for n in range(1, args.N + 1, step)]
    else:
        chk = fc.limsup_point_check(spec, args.N)
        for k, ok in enumerate(chk.in_range, start=1):
            rep.add(f"ratio_in_range[{k}]", float(ok), 1.0, 0.0)
        rep.extra.update(chk.to_dict())
        rep.series["special"] = [
            {"k": k, "n_k": n, "digit": d, "ratio": q} for k, (n, d, q) in enumerate(zip(chk.nk, chk.digits, chk.ratios), 1)
        ]
    if args.dump_rank:
        rep.extra["dump_rank"] = args.dump_rank
        rep.series = {"cylinders": _csv_rows(fc.cylinder_dump_csv(spec, args.dump_rank, args.budget))}
    return rep


def _csv_rows(text: str) -> List[dict]:
    import csv
    import io

    return list(csv.DictReader(io.StringIO(text)))


def cmd_gaps(args) -> ExperimentReport:
    spec = _spec_from_args(args)
    ranks = _ranks(args.ranks) if args.ranks else fc.enumerable_ranks(spec, args.budget)
    rep = ExperimentReport("gaps", None, {"M": spec.M, "alpha": spec.alpha, "ranks": ranks, "budget": args.budget})
    rows = []
    for n in ranks:
        g = fc.gaps_at_rank(spec, n, args.budget)
        rep.add(f"violations[{n}]", len(g.violations), 0, 0)
        rows.append(g.to_dict())
    rep.series["ranks"] = [{k: v for k, v in r.items() if k != "violations"} for r in rows]
    return rep


def cmd_measure_check(args) -> ExperimentReport:
    spec = _spec_from_args(args)
    m = fc.check_measure(spec, args.budget)
    rep = ExperimentReport("measure-check", None, {"M": spec.M, "alpha": spec.alpha, "budget": args.budget, "epsilon": args.epsilon})
    rep.add("rank1_total", m.rank1_total, 1.0, 1e-12)
    rep.add("max_additivity_error", m.max_additivity_error, 0.0, 1e-12)
    rep.add("max_total_error", m.max_total_error, 0.0, 1e-12)
    rep.extra["measure"] = m.to_dict()
    if not args.skip_holder:
        h = fc.holder_check(spec, m.ranks, args.epsilon, args.budget)
        rep.add("holder_non_exploding", float(h.verdict), 1.0, 0.0)
        rep.extra["holder"] = h.to_dict()
        rep.series["holder"] = [{"rank": n, "log2_cstar": c} for n, c in zip(h.ranks, h.log2_cstar)]
    return rep


# -------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, seeded: bool = False, workers: bool = False) -> None:
    p.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    p.add_argument("--out", help="write output to this file (a .csv suffix implies --csv)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp for byte-identical reruns")
    if seeded:
        p.add_argument("--seed", type=lambda s: int(s, 0), help=f"master seed (default: ${SEED_ENV} or built-in)")
    if workers:
        p.add_argument("--workers", type=int, default=1, help="process pool size; results do not depend on it")


def _spec_args(p: argparse.ArgumentParser, K_default: int = 6) -> None:
    p.add_argument("--spec", help="key=value construction spec file")
    p.add_argument("--flavor", choices=["F", "E"], default="F")
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--K", type=int, default=K_default, help="number of special positions (F flavor)")
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--t", type=int, default=4)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="p2dgl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help, **kw):
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(func=fn)
        _common(p, **kw)
        return p

    p = add("expand", cmd_expand, "Digits of a rational by iterating T, with its eventually periodic form (digit formula, map T).")
    p.add_argument("--x", required=True, help="point in (0,1], e.g. 1/5 or 3/2^4")
    p.add_argument("--n", type=int, default=16)

    p = add("cylinder", cmd_cylinder, "Exact endpoints and length 2^-(d1+...+dn) of a cylinder (cylinder endpoint lemma).")
    p.add_argument("--word", required=True, help="comma-separated digits, e.g. 1,2")

    p = add("sample", cmd_sample, "Digits of a Lebesgue-random point: i.i.d. with P(d=k)=2^-k (digit independence lemma).", seeded=True)
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--stream", type=int, default=0)

    p = add("digit-law", cmd_digit_law, "Chi-square tests of the geometric digit law and of pair independence (digit independence lemma).", seeded=True)
    p.add_argument("--K", type=int, default=10**6)
    p.add_argument("--kmax", type=int, default=12)
    p.add_argument("--stream", type=int, default=0)

    p = add("pushforward", cmd_pushforward, "KS test that T maps uniform points to uniform points (T preserves Lebesgue measure).", seeded=True)
    p.add_argument("--K", type=int, default=10**5)
    p.add_argument("--bits", type=int, default=30)
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--stream", type=int, default=0)

    p = add(
        "borel-bernstein",
        cmd_borel_bernstein,
        "Window hit fractions of d_n >= phi(n) against exact oracles (Borel-Bernstein zero-one law).",
        seeded=True,
        workers=True,
    )
    p.add_argument("--phi", required=True, help='e.g. "log2n+log2log n", "2log2n", "0.5*n^0.5+1"')
    p.add_argument("--seeds", type=int, default=500, help="number of independent points K")
    p.add_argument("--N", type=int, default=10**5)
    p.add_argument("--window-tol", type=float, default=0.05)

    p = add(
        "max-digit",
        cmd_max_digit,
        "Law of the largest digit L_N against (1-2^-m)^N (growth of L_n ~ log2 n and its liminf/limsup corrections).",
        seeded=True,
        workers=True,
    )
    p.add_argument("--seeds", type=int, default=1000)
    p.add_argument("--N", type=int, default=10**6)

    p = add("dimension", cmd_dimension, "Solve 2^(s alpha)(2^s-1)=1, or its M-term truncation (dimension of {d_n >= alpha n i.o.}).")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--M", type=int, help="truncate the sum at k = M")

    p = add("curve", cmd_curve, "The curve alpha -> s(alpha) as CSV columns alpha,s_alpha (continuity and monotonicity of s).")
    p.add_argument("--grid", default="0:20:0.1", help="start:stop:step or comma list")

    p = add("mbonacci", cmd_mbonacci, "Largest root of x^M - x^(M-1) - ... - 1 and log2 of it (dimension of bounded-digit sets).")
    p.add_argument("--M", type=int, required=True)

    p = add("boxcount", cmd_boxcount, "Exact cylinder counts by length and their log-slope (box dimension of bounded-digit and forced-digit sets).")
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--alpha", type=float, help="count the forced-digit set F_M(alpha) instead of E_M")
    p.add_argument("--K", type=int, default=6)
    p.add_argument("--spec", help="key=value construction spec file")
    p.add_argument("--jmax", type=int, default=200)

    p = add("construct", cmd_construct, "Build a point of F_M(alpha) or E_M(r,alpha) and check its digit-growth sandwich (limsup and L_n / n^r laws).")
    _spec_args(p)
    p.add_argument("--N", type=int, default=10**6)
    p.add_argument("--spec-out", help="write the spec as key=value text")
    p.add_argument("--dump-rank", type=int, help="emit fundamental intervals of this rank (word,left,right,length,mu)")
    p.add_argument("--budget", type=int, default=10**5)

    p = add("gaps", cmd_gaps, "Exact gaps between same-rank fundamental intervals against their lower bounds (gap lemma for F_M(alpha)).")
    _spec_args(p)
    p.add_argument("--ranks", help="e.g. 1-10 or 1,6,7; default: all ranks within budget")
    p.add_argument("--budget", type=int, default=10**6)

    p = add("measure-check", cmd_measure_check, "Mass, additivity and Holder exponent of the measure on F_M(alpha) (mass distribution principle).")
    _spec_args(p)
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--skip-holder", action="store_true")
    return ap


def _emit(rep: ExperimentReport, args) -> None:
    as_csv = args.csv or (args.out or "").lower().endswith(".csv")
    text = rep.series_csv() if as_csv else rep.to_json(timestamp=not args.no_timestamp) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        rep = args.func(args)
    except (UsageError, ValueError, fc.BudgetExceeded) as e:
        parser.print_usage(sys.stderr)
        print(f"p2dgl {args.command}: error: {e}", file=sys.stderr)
        return 2
    _emit(rep, args)
    if not rep.verdict:
        print(f"FAIL: {', '.join(rep.failures())}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
