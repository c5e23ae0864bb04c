"""Picard orbits, sequence diagnostics and fixed-point certification.

Limit claims on finite prefixes are judged on a trailing window.  A window never
reaches back past the last quarter of the prefix, so short orbits are not judged
by their transient.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .contraction import DEFAULT_TOL, Sampler, SelfMap, TableMap, verify_contractive
from .errors import (
    BudgetExhausted,
    ConclusionViolated,
    EmptyPrefix,
    HypothesisFailed,
    HypothesisUnverified,
    UniquenessViolated,
)
from .gauges import DEFAULT_GRID, Gauge, GridSpec, classify
from .spaces import ContinuousSpace, FiniteSpace, PartialMetricSpace, check_axioms

DEFAULT_WINDOW = 64
DEFAULT_STOP_TOL = 1e-12
DEFAULT_MAX_ITER = 10**6
_SLACK = 1e-12


def effective_window(length: int, window: int) -> int:
    return max(1, min(window, length, max(1, length // 4)))


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------


@dataclass
class OrbitTrace:
    points: list
    rho: np.ndarray
    alpha: np.ndarray
    delta: np.ndarray
    delta_start: int
    gamma_estimate: float
    stop_reason: str  # converged | budget | cycle
    residual: float

    @property
    def steps(self) -> int:
        return len(self.rho)

    @property
    def last(self) -> Any:
        return self.points[-1]

    def csv_rows(self, space: PartialMetricSpace) -> list[list[str]]:
        rows = [["n", "x_n", "rho_n", "alpha_n"]]
        for n, x in enumerate(self.points):
            rho = repr(float(self.rho[n])) if n < len(self.rho) else ""
            rows.append([str(n), space.render_point(x), rho, repr(float(self.alpha[n]))])
        return rows

    def to_dict(self, space: PartialMetricSpace) -> dict:
        return {
            "steps": self.steps,
            "stop_reason": self.stop_reason,
            "residual": self.residual,
            "gamma_estimate": self.gamma_estimate,
            "last": space.render_point(self.last),
        }


def iterate(
    space: PartialMetricSpace,
    T: SelfMap,
    x0: Any,
    max_iter: int = DEFAULT_MAX_ITER,
    stop_tol: float = DEFAULT_STOP_TOL,
    window: int = DEFAULT_WINDOW,
) -> OrbitTrace:
    """Picard iteration until ``e(x_n, x_{n+1}) <= stop_tol``.

    Budget exhaustion (and, on finite spaces, entering a cycle) is recorded in
    ``stop_reason``; convergence is never claimed then.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    T.validate(space)
    space.check_point(x0)
    d = space.d
    x = x0
    points = [x0]
    rho: list[float] = []
    alpha = [d(x0, x0)]
    seen = {x0: 0} if isinstance(space, FiniteSpace) else None
    reason = "budget"
    residual = float("inf")
    for _ in range(max_iter):
        y = T.apply(space, x)
        points.append(y)
        rho.append(d(x, y))
        alpha.append(d(y, y))
        residual = 2.0 * rho[-1] - alpha[-2] - alpha[-1]
        if residual <= stop_tol:
            reason = "converged"
            break
        if seen is not None:
            if y in seen:
                reason = "cycle"
                break
            seen[y] = len(points) - 1
        x = y
    w = effective_window(len(points), window)
    start = len(points) - w
    delta = space.d_matrix(points[start:])
    gamma = rho[-1] if rho else alpha[0]
    return OrbitTrace(points, np.asarray(rho), np.asarray(alpha), delta, start, float(gamma), reason, float(residual))


# ---------------------------------------------------------------------------
# sequence diagnostics
# ---------------------------------------------------------------------------


@dataclass
class Diagnosis:
    mode: str
    verdict: bool
    values: dict = field(default_factory=dict)
    agree: bool | None = None

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "verdict": self.verdict}
        if self.agree is not None:
            out["characterizations_agree"] = self.agree
        out.update(self.values)
        return out


def _prefix(prefix: Sequence[Any]) -> list:
    seq = list(prefix)
    if not seq:
        raise EmptyPrefix("sequence prefix is empty")
    return seq


def diagnose_d_convergence(
    space: PartialMetricSpace, prefix: Sequence[Any], x: Any, tol: float = 1e-6, window: int = DEFAULT_WINDOW
) -> Diagnosis:
    """Convergence in the partial-metric topology: ``d(x_n, x) -> d(x, x)``."""
    seq = _prefix(prefix)
    tail = seq[-effective_window(len(seq), window):]
    vals = space.d_pairs(tail, [x] * len(tail))
    dev = float(np.max(np.abs(vals - space.d(x, x))))
    return Diagnosis("dconv", dev <= tol, {"deviation": dev, "self_distance": space.d(x, x), "window": len(tail)})


def diagnose_e_convergence(
    space: PartialMetricSpace, prefix: Sequence[Any], x: Any, tol: float = 1e-6, window: int = DEFAULT_WINDOW
) -> Diagnosis:
    """``e(x_n, x) -> 0``, cross-checked against ``d(x_n, x) -> d(x, x)`` together
    with ``d(x_m, x_n) -> d(x, x)``.

    ``agree`` tests the quantitative form of the equivalence on the window: the
    d-side deviations within ``tol`` bound ``e`` by ``3 tol``, and ``e`` within
    ``tol`` bounds them by ``tol`` and ``2 tol``.
    """
    seq = _prefix(prefix)
    tail = seq[-effective_window(len(seq), window):]
    dxx = space.d(x, x)
    dnx = space.d_pairs(tail, [x] * len(tail))
    dnn = space.d_pairs(tail, tail)
    e_dev = float(np.max(2.0 * dnx - dnn - dxx))
    delta = space.d_matrix(tail)
    point_dev = float(np.max(np.abs(dnx - dxx)))
    double_dev = float(np.max(np.abs(delta - dxx)))
    direct = e_dev <= tol
    via_d = max(point_dev, double_dev) <= tol
    # finite prefixes only bound one side by a multiple of the other
    slack = _SLACK * max(1.0, abs(dxx))
    agree = (not direct or (point_dev <= tol + slack and double_dev <= 2 * tol + slack)) and (
        not via_d or e_dev <= 3 * tol + slack
    )
    return Diagnosis(
        "econv",
        direct,
        {
            "e_deviation": e_dev,
            "point_deviation": point_dev,
            "double_limit_deviation": double_dev,
            "d_side_verdict": via_d,
            "window": len(tail),
        },
        agree=agree,
    )


def diagnose_e_cauchy(
    space: PartialMetricSpace, prefix: Sequence[Any], tol: float = 1e-6, window: int = DEFAULT_WINDOW
) -> Diagnosis:
    """Existence of ``lim d(x_m, x_n)`` (spread of the trailing window), cross-checked with ``e(x_m, x_n) -> 0``.

    On any window ``e_max <= 2 spread`` and ``spread <= 1.5 e_max``; ``agree`` checks both.
    """
    seq = _prefix(prefix)
    tail = seq[-effective_window(len(seq), window):]
    delta = space.d_matrix(tail)
    spread = float(delta.max() - delta.min())
    diag = np.diag(delta)
    e_max = float(np.max(2.0 * delta - diag[:, None] - diag[None, :]))
    verdict = spread <= tol
    e_verdict = e_max <= tol
    slack = _SLACK * max(1.0, float(np.abs(delta).max()))
    agree = (not verdict or e_max <= 2 * spread + slack) and (not e_verdict or spread <= 1.5 * e_max + slack)
    values = {"spread": spread, "e_max": e_max, "e_side_verdict": e_verdict, "window": len(tail)}
    values["gamma"] = float(delta.mean()) if verdict else None
    return Diagnosis("ecauchy", verdict, values, agree=agree)


def _settle_index(values: np.ndarray, floor: float) -> int:
    """Smallest k with ``values[n] >= floor`` for all ``n >= k``."""
    below = np.nonzero(values < floor)[0]
    return int(below[-1] + 1) if below.size else 0


def diagnose_semi_cauchy(
    space: PartialMetricSpace, prefix: Sequence[Any], tol: float = 1e-6, window: int = DEFAULT_WINDOW
) -> Diagnosis:
    """Self-distances ``d(x_n, x_n)`` and steps ``d(x_n, x_{n+1})`` settle to a common gamma.

    Settling means: from some index ``k`` on the values stay above gamma, and the
    trailing window lies within ``tol`` of it.
    """
    seq = _prefix(prefix)
    if len(seq) < 2:
        raise EmptyPrefix("semi-Cauchy diagnosis needs at least two terms")
    alpha = space.d_pairs(seq, seq)
    rho = space.d_pairs(seq[:-1], seq[1:])
    w = effective_window(len(rho), window)
    a_tail, r_tail = alpha[-w:], rho[-w:]
    gamma = float(min(a_tail.min(), r_tail.min()))
    a_dev = float(a_tail.max() - gamma)
    r_dev = float(r_tail.max() - gamma)
    verdict = a_dev <= tol and r_dev <= tol
    k = max(_settle_index(alpha, gamma - tol), _settle_index(rho, gamma - tol))
    return Diagnosis(
        "semicauchy",
        verdict,
        {"gamma": gamma if verdict else None, "gamma_estimate": gamma, "alpha_deviation": a_dev,
         "rho_deviation": r_dev, "k": k, "window": w},
    )


# ---------------------------------------------------------------------------
# rank extraction for semi-Cauchy, non-Cauchy prefixes
# ---------------------------------------------------------------------------


@dataclass
class RankExtraction:
    found: bool
    threshold: float
    pairs: list[tuple[int, int, int]]  # (j, m(j), n(j)) in sequence indices
    j_eps: int | None
    gap_bound_ok: bool | None
    limit_ok: bool | None
    shifted_ok: bool | None
    tail_values: list[float]
    last_j: int | None

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "verdict": "violation" if self.found else "no_violation",
            "threshold": self.threshold,
            "pairs": [list(p) for p in self.pairs],
            "j_eps": self.j_eps,
            "gap_bound_ok": self.gap_bound_ok,
            "limit_ok": self.limit_ok,
            "shifted_ok": self.shifted_ok,
            "last_j": self.last_j,
        }


def extract_violation_ranks(
    space: PartialMetricSpace,
    prefix: Sequence[Any],
    gamma: float,
    eps: float,
    k: int | None = None,
    n0: int = 0,
    tol: float = DEFAULT_TOL,
    horizon: float = 0.5,
    band: float = 0.05,
) -> RankExtraction:
    """Rank pairs ``j <= m(j) <= n(j)`` with ``d(x_m, x_n) >= gamma + eps``.

    For each ``j >= k``, ``n(j)`` is the least ``n`` admitting such an ``m`` in
    ``[j, n]`` and ``m(j)`` the least such ``m``.  Pairs exist for a contiguous
    run of ``j``; the prefix counts as a genuine violation only when that run
    reaches ``horizon`` of the way through it, otherwise the result is the
    negative verdict ``found=False``.  Indices are sequence indices, the first
    term carrying index ``n0``.
    """
    seq = _prefix(prefix)
    if not eps > 0:
        raise ValueError("eps must be positive")
    k = n0 if k is None else k
    N = len(seq)
    thr = gamma + eps
    D = space.d_matrix(seq)
    V = np.triu(D >= thr)
    has = V.any(axis=0)
    # largest admissible m for every n (or -1)
    mmax = np.where(has, N - 1 - np.argmax(V[::-1, :], axis=0), -1)
    pairs: list[tuple[int, int, int]] = []
    for jl in range(max(k - n0, 0), N):
        cand = np.nonzero(mmax[jl:] >= jl)[0]
        if cand.size == 0:
            break
        nl = jl + int(cand[0])
        ml = jl + int(np.argmax(V[jl:nl + 1, nl]))
        pairs.append((jl + n0, ml + n0, nl + n0))
    last_j = pairs[-1][0] if pairs else None
    found = bool(pairs) and pairs[0][0] == k and last_j >= k + horizon * (N - 1 + n0 - k)
    if not found:
        return RankExtraction(False, thr, pairs, None, None, None, None, [], last_j)

    alpha = np.diag(D)
    rho = D[np.arange(N - 1), np.arange(1, N)]
    ok_step = (alpha[:-1] >= gamma - tol) & (rho < thr)
    bad = np.nonzero(~ok_step)[0]
    j_eps_l = int(bad[-1] + 1) if bad.size else 0
    j_eps_l = max(j_eps_l, k - n0)
    j_eps = j_eps_l + n0

    gap_ok = all(
        n - m >= 2 and D[m - n0, n - 1 - n0] < thr for j, m, n in pairs if j >= j_eps
    )
    quart = pairs[-max(1, len(pairs) // 4):]
    tail_vals = [float(D[m - n0, n - n0]) for _, m, n in quart]
    limit_ok = all(thr <= v <= thr + band for v in tail_vals)
    shifted = [
        float(D[m - n0 + p, n - n0 + q]) for _, m, n in quart for p in (0, 1) for q in (0, 1) if n - n0 + q < N
    ]
    shifted_ok = all(abs(v - thr) <= band for v in shifted)
    return RankExtraction(True, thr, pairs, j_eps, gap_ok, limit_ok, shifted_ok, tail_vals, last_j)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    kind: str  # d_fixed_point | true_fixed_point | theorem2_unique
    point: Any
    self_distance: float
    displacement: float
    e_residual: float
    d_fixed_residual: float
    hypotheses: dict[str, str]
    tol: float
    gamma: float | None = None
    iterations: int | None = None
    theta: float | None = None
    fix_d: list | None = None
    x_td: list | None = None
    fix: list | None = None
    starts: int | None = None

    def to_dict(self, space: PartialMetricSpace) -> dict:
        def labels(pts):
            return None if pts is None else [space.render_point(p) for p in pts]

        out = {
            "kind": self.kind,
            "point": space.render_point(self.point),
            "self_distance": self.self_distance,
            "displacement": self.displacement,
            "e_residual": self.e_residual,
            "d_fixed_residual": self.d_fixed_residual,
            "gamma": self.gamma,
            "iterations": self.iterations,
            "hypotheses": dict(sorted(self.hypotheses.items())),
            "tol": self.tol,
        }
        if self.kind == "theorem2_unique":
            out.update(theta=self.theta, fix_d=labels(self.fix_d), x_td=labels(self.x_td),
                       fix=labels(self.fix), starts=self.starts)
        return out


def _point_certificate(space, T, x, kind, hypotheses, tol, **extra) -> Certificate:
    tx = T.apply(space, x)
    dxx, dxt = space.d(x, x), space.d(x, tx)
    return Certificate(
        kind=kind,
        point=x,
        self_distance=dxx,
        displacement=dxt,
        e_residual=space.e(x, tx),
        d_fixed_residual=abs(dxt - dxx),
        hypotheses=hypotheses,
        tol=tol,
        **extra,
    )


def _sampled_axioms(space: ContinuousSpace, tol: float) -> bool:
    sub = space.restrict(space.grid_points(64))
    return check_axioms(sub, tol).passed


def _record(status: dict, name: str, ok: bool, mode: str) -> None:
    status[name] = mode if ok else "failed"


def check_hypotheses(
    space: PartialMetricSpace,
    T: SelfMap,
    gauge: Gauge,
    theorem: int,
    tol: float = DEFAULT_TOL,
    sampler: Sampler | None = None,
    grid: GridSpec = DEFAULT_GRID,
) -> dict[str, str]:
    """Machine-check the hypotheses of the first (g = c) or second (g = b) fixed-point theorem.

    Values: ``verified`` (exhaustive or grid), ``sampled`` (continuous
    sampling), ``by_construction``, ``assumed`` (caller's word only),
    ``unchecked`` or ``failed``.
    """
    status: dict[str, str] = {}
    finite = isinstance(space, FiniteSpace)
    if finite:
        status["complete"] = "verified"
        _record(status, "partial_metric", check_axioms(space, tol).passed, "verified")
    else:
        # the builtin families are complete by construction
        status["complete"] = "by_construction"
        _record(status, "partial_metric", _sampled_axioms(space, tol), "sampled")
    g = "c" if theorem == 1 else "b"
    if status["partial_metric"] != "failed":
        report = verify_contractive(space, T, gauge, g=g, tol=tol, sampler=sampler, check_space=False)
        _record(status, f"contractive_{g}", report.passed, "verified" if finite else "sampled")
    else:
        status[f"contractive_{g}"] = "unchecked"
    cls = classify(gauge, grid)
    if theorem == 1:
        _record(status, "right_limit_normal", cls.passes("right_limit_normal"), "verified")
    else:
        _record(status, "limit_normal", cls.passes("limit_normal"), "verified")
        _record(status, "psi_semi_coercive", cls.passes("psi_semi_coercive"), "verified")
    return status


def check_theorem1_trace(trace: OrbitTrace, tol: float) -> None:
    """Raise :class:`ConclusionViolated` unless the orbit shows the first theorem's conclusions."""
    rho, alpha = trace.rho, trace.alpha
    gamma = trace.gamma_estimate
    if rho.size > 1:
        jumps = np.diff(rho)
        if np.any(jumps > tol):
            n = int(np.argmax(jumps))
            raise ConclusionViolated("rho descending", f"rho[{n + 1}] - rho[{n}] = {jumps[n]!r}", trace)
    if rho.size and np.any(alpha[:-1] > rho + tol):
        n = int(np.argmax(alpha[:-1] - rho))
        raise ConclusionViolated("alpha below rho", f"alpha[{n}] - rho[{n}] = {alpha[n] - rho[n]!r}", trace)
    w = effective_window(len(alpha), DEFAULT_WINDOW)
    a_tail = alpha[-w:]
    if np.any(np.abs(a_tail - gamma) > tol):
        raise ConclusionViolated("alpha settles to gamma", f"tail deviation {np.max(np.abs(a_tail - gamma))!r}", trace)
    delta = trace.delta
    if delta.size and (delta.min() < gamma - tol or delta.max() > gamma + tol):
        dev = max(gamma - delta.min(), delta.max() - gamma)
        raise ConclusionViolated("delta settles to gamma", f"window deviation {dev!r}", trace)


def _warn_unverified(hypotheses: dict[str, str]) -> None:
    weak = sorted(k for k, v in hypotheses.items() if v in ("assumed", "failed", "unchecked"))
    if weak:
        warnings.warn(f"hypotheses not machine-verified: {', '.join(weak)}", HypothesisUnverified, stacklevel=3)


@dataclass
class Theorem1Result:
    certificate: Certificate
    trace: OrbitTrace


def solve_theorem1(
    space: PartialMetricSpace,
    T: SelfMap,
    gauge: Gauge,
    x0: Any,
    max_iter: int = DEFAULT_MAX_ITER,
    stop_tol: float = DEFAULT_STOP_TOL,
    tol: float = DEFAULT_TOL,
    hypotheses: dict[str, str] | None = None,
    sampler: Sampler | None = None,
    grid: GridSpec = DEFAULT_GRID,
) -> Theorem1Result:
    """Run the orbit of ``x0``, check conclusions (i)-(iii) on it and certify the limit as d-fixed.

    ``hypotheses`` may carry a record computed earlier; otherwise the hypotheses
    are checked here.  Hypotheses that are assumed or fail are recorded and
    reported as a :class:`HypothesisUnverified` warning, the run still goes ahead.
    """
    if hypotheses is None:
        hypotheses = check_hypotheses(space, T, gauge, 1, tol, sampler, grid)
    _warn_unverified(hypotheses)
    trace = iterate(space, T, x0, max_iter=max_iter, stop_tol=stop_tol)
    if trace.stop_reason != "converged":
        raise BudgetExhausted(f"orbit did not converge ({trace.stop_reason} after {trace.steps} steps)", trace)
    check_theorem1_trace(trace, tol)
    cert = _point_certificate(
        space, T, trace.last, "d_fixed_point", hypotheses, tol, gamma=trace.gamma_estimate, iterations=trace.steps
    )
    if cert.d_fixed_residual > tol:
        raise ConclusionViolated("limit is d-fixed", f"|d(x*,Tx*) - d(x*,x*)| = {cert.d_fixed_residual!r}", trace)
    return Theorem1Result(cert, trace)


# ---------------------------------------------------------------------------
# fixed structure and uniqueness
# ---------------------------------------------------------------------------


@dataclass
class FixedStructure:
    fix_d: list[int]
    theta: float | None
    x_td: list[int]
    fix: list[int]
    inclusion: bool

    def to_dict(self, space: FiniteSpace) -> dict:
        lab = space.labels
        return {
            "fix_d": [lab[i] for i in self.fix_d],
            "theta": self.theta,
            "x_td": [lab[i] for i in self.x_td],
            "fix": [lab[i] for i in self.fix],
            "x_td_in_fix": self.inclusion,
        }


def enumerate_fixed_structure(
    space: FiniteSpace, T: TableMap, tol: float = DEFAULT_TOL, hypotheses_verified: bool = False
) -> FixedStructure:
    """Exact d-fixed set, its least self-distance ``theta``, the argmin set and the true fixed set."""
    if not isinstance(space, FiniteSpace):
        raise TypeError("fixed structure is enumerated on finite spaces only")
    T.validate(space)
    t = T.array
    idx = np.arange(space.size)
    D = space.dtable
    fix_d = [int(i) for i in idx[np.abs(D[idx, t] - D[idx, idx]) <= tol]]
    fix = [int(i) for i in idx[t == idx]]
    if fix_d:
        theta = float(min(D[i, i] for i in fix_d))
        x_td = [i for i in fix_d if D[i, i] - theta <= tol]
    else:
        theta, x_td = None, []
    inclusion = set(x_td) <= set(fix)
    if hypotheses_verified and not inclusion:
        raise ConclusionViolated("least d-fixed points are fixed", f"X(T;d)={x_td}, Fix(T)={fix}")
    return FixedStructure(fix_d, theta, x_td, fix, inclusion)


@dataclass
class Theorem2Result:
    certificate: Certificate
    traces: list[OrbitTrace]
    structure: FixedStructure | None = None


def _require(hypotheses: dict[str, str]) -> None:
    for name in ("partial_metric", "contractive_b", "limit_normal", "psi_semi_coercive"):
        if hypotheses.get(name) in ("failed", "unchecked"):
            raise HypothesisFailed(name)


def solve_theorem2(
    space: PartialMetricSpace,
    T: SelfMap,
    gauge: Gauge,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    stop_tol: float = DEFAULT_STOP_TOL,
    starts: Sequence[Any] | None = None,
    sampler: Sampler | None = None,
    grid: GridSpec = DEFAULT_GRID,
    hypotheses: dict[str, str] | None = None,
) -> Theorem2Result:
    """Certify a unique true fixed point under the second theorem's hypotheses.

    Finite spaces: exact enumeration plus Picard runs from every point.
    Continuous spaces: Picard runs from ``starts`` (default 8 spread over the
    sampling region) must agree in ``e`` and end at a true fixed point.
    """
    if hypotheses is None:
        hypotheses = check_hypotheses(space, T, gauge, 2, tol, sampler, grid)
    _require(hypotheses)
    if isinstance(space, FiniteSpace):
        structure = enumerate_fixed_structure(space, T, tol, hypotheses_verified=True)
        if len(structure.fix) > 1:
            raise UniquenessViolated(f"{len(structure.fix)} fixed points", structure.fix)
        if not structure.fix:
            raise ConclusionViolated("fixed point exists", "Fix(T) is empty")
        if structure.x_td != structure.fix:
            raise ConclusionViolated("least d-fixed points are fixed", f"X(T;d)={structure.x_td}, Fix(T)={structure.fix}")
        z = structure.fix[0]
        traces = []
        for x0 in space.points():
            trace = iterate(space, T, x0, max_iter=max_iter, stop_tol=stop_tol)
            if trace.stop_reason != "converged" or trace.last != z:
                raise ConclusionViolated("every orbit reaches the fixed point", f"orbit of {space.labels[x0]} ends {trace.stop_reason}")
            traces.append(trace)
        cert = _point_certificate(
            space, T, z, "theorem2_unique", hypotheses, tol, theta=structure.theta, fix_d=structure.fix_d,
            x_td=structure.x_td, fix=structure.fix, starts=len(traces), gamma=space.d(z, z),
        )
        return Theorem2Result(cert, traces, structure)

    starts = list(starts) if starts is not None else space.grid_points(8)
    results = [solve_theorem1(space, T, gauge, x0, max_iter, stop_tol, tol, hypotheses=hypotheses) for x0 in starts]
    limits = [r.trace.last for r in results]
    for i, a in enumerate(limits):
        for b in limits[i + 1:]:
            if space.e(a, b) > tol:
                raise UniquenessViolated(
                    f"limits {space.render_point(a)} and {space.render_point(b)} are e-apart by {space.e(a, b)!r}",
                    (a, b),
                )
    best = min(results, key=lambda r: space.e(r.trace.last, T.apply(space, r.trace.last)))
    z = best.trace.last
    cert = _point_certificate(space, T, z, "theorem2_unique", hypotheses, tol, gamma=best.trace.gamma_estimate,
                              iterations=best.trace.steps, starts=len(starts))
    if cert.e_residual > tol:
        raise ConclusionViolated("limit is a true fixed point", f"e(x*,Tx*) = {cert.e_residual!r}")
    return Theorem2Result(cert, [r.trace for r in results])
