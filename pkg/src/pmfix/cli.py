"""Command-line interface: ``pmfix <command> ...``.

Exit codes: 0 success, 1 a check or solve reported a violation, 2 malformed
input (with a single ``error: ...`` line on stderr).
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path
from typing import Any, Callable, Sequence

from .contraction import DEFAULT_TOL, Sampler, verify_contractive
from .dynamics import (
    DEFAULT_MAX_ITER,
    DEFAULT_STOP_TOL,
    DEFAULT_WINDOW,
    diagnose_d_convergence,
    diagnose_e_cauchy,
    diagnose_e_convergence,
    diagnose_semi_cauchy,
    enumerate_fixed_structure,
    extract_violation_ranks,
    solve_theorem1,
    solve_theorem2,
)
from .errors import (
    BudgetExhausted,
    ConclusionViolated,
    HypothesisFailed,
    HypothesisUnverified,
    MalformedInput,
    PmfixError,
    UniquenessViolated,
)
from .gauges import parse_gauge
from .io import dumps, fmt, load_json, load_map, load_space, parse_point, read_sequence, table_text, trace_csv
from .search import CampaignConfig, run_campaign
from .spaces import FiniteSpace, PartialMetricSpace, check_axioms, check_e_is_metric, derive


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise MalformedInput(message)


Result = tuple[dict, list[str], int]


def _finite_view(space: PartialMetricSpace) -> tuple[FiniteSpace, str]:
    if isinstance(space, FiniteSpace):
        return space, "exhaustive"
    return space.restrict(space.grid_points(64)), "sampled"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> Result:
    space, mode = _finite_view(load_space(args.space))
    axioms = check_axioms(space, args.tol)
    lines = []
    for r in axioms.results.values():
        where = f" at ({', '.join(space.labels[i] for i in r.witness)})" if r.witness else ""
        lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.name} (margin {fmt(r.margin)}){where}")
    report: dict[str, Any] = {"command": "verify", "mode": mode, "points": space.size, "axioms": axioms.to_dict(space)}
    if axioms.passed:
        metric = check_e_is_metric(space, args.tol)
        report["e_metric"] = metric.to_dict(space)
        lines.append(f"e is a metric: {'yes' if metric.passed else 'NO'}"
                     + "".join(f"\n  {c.name}: {'ok' if c.passed else 'fails'}" for c in metric.checks.values()))
        ok = metric.passed
    else:
        report["e_metric"] = None
        lines.append("e is a metric: not checked (axioms fail)")
        ok = False
    return report, lines, 0 if ok else 1


def cmd_derive(args) -> Result:
    space = load_space(args.space)
    if args.x is not None or args.y is not None:
        if args.x is None or args.y is None:
            raise MalformedInput("--x and --y go together")
        x, y = parse_point(space, args.x), parse_point(space, args.y)
        value = derive(space, args.what, x, y)
        report = {"command": "derive", "what": args.what, "x": space.render_point(x), "y": space.render_point(y),
                  "value": value}
        return report, [f"{args.what}({space.render_point(x)}, {space.render_point(y)}) = {fmt(value)}"], 0
    if not isinstance(space, FiniteSpace):
        raise MalformedInput("continuous spaces need --x and --y")
    table = space.derived_table(args.what)
    report = {"command": "derive", "what": args.what, "labels": list(space.labels), "table": table}
    return report, [table_text(list(space.labels), table)], 0


def _sampler(args) -> Sampler:
    return Sampler(n_random=args.samples, seed=args.seed)


def cmd_contract(args) -> Result:
    space = load_space(args.space)
    T = load_map(args.map, space)
    gauge = parse_gauge(args.gauge)
    rep = verify_contractive(space, T, gauge, g=args.g, tol=args.tol, sampler=_sampler(args))
    report = {"command": "contract", **rep.to_dict(space)}
    lines = [f"{'PASS' if rep.passed else 'FAIL'} contractive with g={rep.g}, gauge {rep.gauge} "
             f"({rep.mode}, {rep.pairs} pairs)",
             f"worst margin {fmt(rep.worst_margin)}; phi branch {rep.phi_branch}, g branch {rep.g_branch}"]
    if not rep.passed:
        w = ", ".join(space.render_point(p) for p in rep.witness)
        lines.append(f"witness ({w}): d(Tx,Ty) = {fmt(rep.lhs)} > {fmt(rep.rhs)}")
    return report, lines, 0 if rep.passed else 1


def _certificate_lines(cert: dict) -> list[str]:
    lines = [f"{cert['kind']}: x* = {cert['point']}",
             f"d(x*,x*) = {fmt(cert['self_distance'])}, d(x*,Tx*) = {fmt(cert['displacement'])}, "
             f"e(x*,Tx*) = {fmt(cert['e_residual'])}"]
    if cert.get("theta") is not None:
        lines.append(f"theta = {fmt(cert['theta'])}, X(T;d) = {cert['x_td']}, Fix(T) = {cert['fix']}")
    lines.append("hypotheses: " + ", ".join(f"{k}={v}" for k, v in cert["hypotheses"].items()))
    return lines


def cmd_solve(args) -> Result:
    space = load_space(args.space)
    T = load_map(args.map, space)
    gauge = parse_gauge(args.gauge)
    x0 = parse_point(space, args.x0) if args.x0 is not None else None
    if args.theorem == 1 and x0 is None:
        raise MalformedInput("--x0 is required with --theorem 1")
    report: dict[str, Any] = {"command": "solve", "theorem": args.theorem}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HypothesisUnverified)
        try:
            if args.theorem == 1:
                res = solve_theorem1(space, T, gauge, x0, args.max_iter, args.stop_tol, args.tol,
                                     sampler=_sampler(args))
                traces = [res.trace]
            else:
                starts = None
                if x0 is not None and not isinstance(space, FiniteSpace):
                    starts = space.grid_points(8) + [x0]
                res = solve_theorem2(space, T, gauge, args.tol, args.max_iter, args.stop_tol, starts=starts,
                                     sampler=_sampler(args))
                traces = res.traces
        except HypothesisFailed as exc:
            report.update(status="hypothesis_failed", hypothesis=exc.hypothesis)
            return report, [f"FAIL hypothesis {exc.hypothesis}"], 1
        except BudgetExhausted as exc:
            report.update(status="budget_exhausted", detail=str(exc))
            return report, [f"FAIL {exc}"], 1
        except ConclusionViolated as exc:
            report.update(status="conclusion_violated", conclusion=exc.conclusion, detail=exc.detail)
            return report, [f"FAIL {exc}"], 1
        except UniquenessViolated as exc:
            report.update(status="uniqueness_violated", detail=str(exc))
            return report, [f"FAIL {exc}"], 1
    cert = res.certificate.to_dict(space)
    report.update(status="certified", certificate=cert, warnings=[str(w.message) for w in caught])
    lines = _certificate_lines(cert) + [f"warning: {w.message}" for w in caught]
    trace = traces[0] if args.theorem == 1 or x0 is None else traces[-1]
    report["trace"] = trace.to_dict(space)
    if args.trace is not None:
        Path(args.trace).write_text(trace_csv(trace.csv_rows(space)))
        report["trace_csv"] = args.trace
        lines.append(f"trace: {args.trace}")
    return report, lines, 0


def cmd_fixed_points(args) -> Result:
    space = load_space(args.space)
    if not isinstance(space, FiniteSpace):
        raise MalformedInput("fixed-points enumerates finite spaces only")
    T = load_map(args.map, space)
    st = enumerate_fixed_structure(space, T, args.tol)
    d = st.to_dict(space)
    lines = [f"Fix(T;d) = {{{', '.join(d['fix_d'])}}}", f"theta = {fmt(d['theta']) if d['theta'] is not None else 'undefined'}",
             f"X(T;d) = {{{', '.join(d['x_td'])}}}", f"Fix(T) = {{{', '.join(d['fix'])}}}"]
    return {"command": "fixed-points", **d}, lines, 0


def cmd_analyze(args) -> Result:
    space = load_space(args.space)
    seq = read_sequence(args.seq, space)
    if args.mode in ("dconv", "econv"):
        if args.x is None:
            raise MalformedInput(f"--x is required with --mode {args.mode}")
        x = parse_point(space, args.x)
        fn = diagnose_d_convergence if args.mode == "dconv" else diagnose_e_convergence
        diag = fn(space, seq, x, args.tol, args.window).to_dict()
    elif args.mode == "ecauchy":
        diag = diagnose_e_cauchy(space, seq, args.tol, args.window).to_dict()
    elif args.mode == "semicauchy":
        diag = diagnose_semi_cauchy(space, seq, args.tol, args.window).to_dict()
    else:
        if args.eps is None:
            raise MalformedInput("--eps is required with --mode ranks")
        gamma = args.gamma
        if gamma is None:
            gamma = diagnose_semi_cauchy(space, seq, args.tol, args.window).values["gamma_estimate"]
        k = args.n0 if args.k is None else args.k
        diag = {"mode": "ranks", "gamma": gamma, "eps": args.eps, "k": k,
                **extract_violation_ranks(space, seq, gamma, args.eps, k, args.n0).to_dict()}
    report = {"command": "analyze", "length": len(seq), **diag}
    lines = [f"{k}: {fmt(v) if not isinstance(v, list) else len(v)}" for k, v in diag.items() if k != "pairs"]
    if args.mode == "ranks" and diag["pairs"]:
        lines += [f"j={j} m={m} n={n}" for j, m, n in diag["pairs"][:10]]
        if len(diag["pairs"]) > 10:
            lines.append(f"... {len(diag['pairs']) - 10} more")
    return report, lines, 0


def cmd_search(args) -> Result:
    cfg = CampaignConfig.from_dict(load_json(args.config))
    parallelism = args.parallelism or cfg.parallelism
    replay_dir = args.replay_dir or cfg.replay_dir
    rep = run_campaign(cfg.base, cfg.count, parallelism, replay_dir)
    d = rep.to_dict()
    lines = [f"trials {d['trials']}, passing hypotheses {d['passing_hypotheses']}, violations {len(d['violations'])}",
             "outcomes: " + ", ".join(f"{k}={v}" for k, v in d["outcomes"].items())]
    if d["hypothesis_failures"]:
        lines.append("hypothesis failures: " + ", ".join(f"{k}={v}" for k, v in d["hypothesis_failures"].items()))
    if rep.base.ablation:
        a = d["ablation"]
        lines.append(f"ablation {a['hypothesis']}: {a['probing_trials']} probing trials, "
                     f"{a['probing_violations']} violations")
    lines += [f"violation seed {v['seed']}: {v['witness']['conclusion']}" for v in d["violations"]]
    lines += [f"replay: {p}" for p in d["replay_files"]]
    return {"command": "search", **d}, lines, rep.exit_code


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmfix", description="Partial metric spaces, contractive maps and their fixed points.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=fn)
        p.add_argument("--json", action="store_true", help="emit the report as JSON")
        return p

    p = add("verify", cmd_verify, "check the partial metric axioms and that e is a metric")
    p.add_argument("space")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = add("derive", cmd_derive, "tabulate b, c or e")
    p.add_argument("space")
    p.add_argument("--what", choices=("b", "c", "e"), required=True)
    p.add_argument("--x")
    p.add_argument("--y")

    def solver_args(p, with_gauge=True):
        p.add_argument("space")
        p.add_argument("map")
        if with_gauge:
            p.add_argument("--gauge", required=True, help="linear:A, rational, expsat or expr:<expression in t>")
            p.add_argument("--samples", type=int, default=10_000, help="random pairs on continuous spaces")
            p.add_argument("--seed", type=int, default=0, help="sampler seed on continuous spaces")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = add("contract", cmd_contract, "check the contractive condition")
    solver_args(p)
    p.add_argument("--g", choices=("b", "c"), default="b")

    p = add("solve", cmd_solve, "run and certify Picard iteration")
    solver_args(p)
    p.add_argument("--x0")
    p.add_argument("--theorem", type=int, choices=(1, 2), default=1)
    p.add_argument("--max-iter", type=_positive_int, default=DEFAULT_MAX_ITER)
    p.add_argument("--stop-tol", type=float, default=DEFAULT_STOP_TOL)
    p.add_argument("--trace", help="write the orbit as CSV to this path")

    p = add("fixed-points", cmd_fixed_points, "enumerate d-fixed and fixed points")
    solver_args(p, with_gauge=False)

    p = add("analyze", cmd_analyze, "diagnose a sequence prefix")
    p.add_argument("seq")
    p.add_argument("--space", required=True)
    p.add_argument("--mode", choices=("dconv", "econv", "ecauchy", "semicauchy", "ranks"), required=True)
    p.add_argument("--x")
    p.add_argument("--eps", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--n0", type=int, default=0, help="index carried by the first term")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--window", type=_positive_int, default=DEFAULT_WINDOW)

    p = add("search", cmd_search, "run a seeded random campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--parallelism", type=_positive_int)
    p.add_argument("--replay-dir")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        report, lines, code = args.func(args)
    except (PmfixError, ValueError, ArithmeticError, LookupError, OSError) as exc:
        message = " ".join(str(exc).split()) or type(exc).__name__
        print(f"error: {message}", file=sys.stderr)
        return 2
    print(dumps(report) if args.json else "\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
