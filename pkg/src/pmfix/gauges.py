"""Gauge functions phi on R+ and numeric estimators for their limit classes.

A gauge is *normal* when ``phi(0) = 0`` and ``phi(t) < t`` for ``t > 0``;
*right-limit-normal* (``limit-normal``) when additionally the right-sided
(two-sided) upper limit of phi at every ``s > 0`` stays below ``s``.  With
``psi = t - phi``, the gauge is *semi-coercive* when ``liminf psi(t) > 0`` as
``t`` grows.

Strict inequalities over all of ``(0, inf)`` cannot be certified numerically.
:func:`classify` certifies them on a finite grid; where a margin is smaller than
what the sampling (or float64) can resolve, the point is counted as
*unresolved* and the closed-form family flag, if any, decides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EmptyPrefix, NegativeArgument, NonPositivePoint
from .expr import Expression, parse_expression

CLASSES = ("normal", "right_limit_normal", "limit_normal", "psi_semi_coercive")


@dataclass(frozen=True, eq=False)
class Gauge:
    """A function ``phi: R+ -> R+`` with a vectorised evaluator."""

    spec: str
    family: str
    fn: Callable[[np.ndarray], np.ndarray]
    psi_fn: Callable[[np.ndarray], np.ndarray] | None = None
    analytic: Mapping[str, bool] | None = None
    param: float | None = None

    def __repr__(self) -> str:
        return f"Gauge({self.spec!r})"

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t) -> float:
        t = float(t)
        if not t >= 0:
            raise NegativeArgument(f"gauge argument must be >= 0, got {t}")
        return float(self.fn(np.asarray(t)))

    def values(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < 0):
            raise NegativeArgument("gauge arguments must be >= 0")
        return np.asarray(self.fn(ts), dtype=float)

    def psi(self, ts) -> np.ndarray:
        """``t - phi(t)``, through a closed form when the family has one."""
        ts = np.asarray(ts, dtype=float)
        if self.psi_fn is not None:
            return np.asarray(self.psi_fn(ts), dtype=float)
        return ts - self.values(ts)


def linear(alpha: float) -> Gauge:
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha >= 0):
        raise ValueError(f"linear gauge needs a finite alpha >= 0, got {alpha}")
    ok = alpha < 1
    return Gauge(
        spec=f"linear:{alpha!r}",
        family="linear",
        fn=lambda t: alpha * t,
        psi_fn=lambda t: (1.0 - alpha) * t,
        analytic={name: ok for name in CLASSES},
        param=alpha,
    )


def rational() -> Gauge:
    return Gauge(
        spec="rational",
        family="rational",
        fn=lambda t: t / (1.0 + t),
        psi_fn=lambda t: t * t / (1.0 + t),
        analytic={name: True for name in CLASSES},
    )


def expsat() -> Gauge:
    # psi(t) = t e^{-t} -> 0: normal and continuous, never semi-coercive
    return Gauge(
        spec="expsat",
        family="expsat",
        fn=lambda t: -t * np.expm1(-t),
        psi_fn=lambda t: t * np.exp(-t),
        analytic={"normal": True, "right_limit_normal": True, "limit_normal": True, "psi_semi_coercive": False},
    )


def zero() -> Gauge:
    return linear(0.0)


def from_expression(src: str | Expression) -> Gauge:
    ex = src if isinstance(src, Expression) else parse_expression(src, ("t",))
    return Gauge(spec=f"expr:{ex}", family="expr", fn=lambda t: ex.evaluate(t, "t"))


def parse_gauge(spec: str) -> Gauge:
    """``linear:<alpha>``, ``rational``, ``expsat`` or ``expr:<expression in t>``."""
    spec = spec.strip()
    if spec.startswith("linear:"):
        try:
            alpha = float(spec.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad linear gauge parameter in {spec!r}") from None
        return linear(alpha)
    if spec == "rational":
        return rational()
    if spec == "expsat":
        return expsat()
    if spec.startswith("expr:"):
        return from_expression(spec[5:])
    raise ValueError(f"unknown gauge {spec!r}; use linear:A, rational, expsat or expr:<expression>")


# ---------------------------------------------------------------------------
# sampled upper limits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Sampling plan for :func:`classify` and the limsup estimators.

    Windows start at ``eps0 * min(1, s)`` when ``relative`` (else ``eps0``) and
    are halved ``halvings`` times, with ``samples`` points per window.
    """

    s_min: float = 1e-6
    s_max: float = 1e3
    n_points: int = 512
    eps0: float = 1.0
    halvings: int = 20
    samples: int = 64
    relative: bool = True
    alphas: tuple[float, ...] = tuple(float(a) for a in np.geomspace(1.0, 1e5, 11))
    t_far: float = 1e6
    tail_points: int = 2049
    semi_threshold: float = 1e-6

    def __post_init__(self) -> None:
        if not (0 < self.s_min <= self.s_max) or self.n_points < 1:
            raise ValueError("grid needs 0 < s_min <= s_max and n_points >= 1")
        if self.eps0 <= 0 or self.halvings < 0 or self.samples < 1:
            raise ValueError("grid needs eps0 > 0, halvings >= 0, samples >= 1")
        if not self.alphas or min(self.alphas) < 0 or max(self.alphas) >= self.t_far:
            raise ValueError("alpha grid must be non-negative and below t_far")

    def s_grid(self) -> np.ndarray:
        return np.geomspace(self.s_min, self.s_max, self.n_points)

    def eps_levels(self, s: np.ndarray) -> np.ndarray:
        """Window widths, shape ``(len(s), halvings + 1)``, decreasing along axis 1."""
        s = np.asarray(s, dtype=float)
        base = self.eps0 * np.minimum(1.0, s) if self.relative else np.full(s.shape, self.eps0)
        return base[:, None] * 0.5 ** np.arange(self.halvings + 1)[None, :]

    def tail_grid(self) -> np.ndarray:
        lo = max(min(self.alphas), 1e-12)
        return np.union1d(np.geomspace(lo, self.t_far, self.tail_points), np.asarray(self.alphas))


DEFAULT_GRID = GridSpec()


@dataclass
class LimitEstimate:
    """Sampled inf-of-sups (or sup-of-infs) together with its monotone trace."""

    value: float
    grid: np.ndarray
    trace: np.ndarray
    raw: np.ndarray
    point: float | None = None
    closed_form: float | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "point": self.point,
            "grid": [float(v) for v in self.grid],
            "trace": [float(v) for v in self.trace],
        }


def _window_sups(g: Gauge, s: np.ndarray, grid: GridSpec, two_sided: bool) -> tuple[np.ndarray, np.ndarray]:
    eps = grid.eps_levels(s)
    frac = np.arange(grid.samples) / grid.samples
    right = s[:, None, None] + eps[:, :, None] * frac[None, None, :]
    sups = g.values(right).max(axis=2)
    if two_sided:
        left = np.maximum(s[:, None, None] - eps[:, :, None] * frac[None, None, :], 0.0)
        sups = np.maximum(sups, g.values(left).max(axis=2))
    return eps, sups


def _limsup(g: Gauge, s: float, grid: GridSpec, two_sided: bool) -> LimitEstimate:
    s = float(s)
    if not s > 0:
        raise NonPositivePoint(f"limit point must be positive, got {s}")
    eps, sups = _window_sups(g, np.array([s]), grid, two_sided)
    trace = np.minimum.accumulate(sups[0])
    closed = None
    if g.family == "linear":
        closed = g.param * s
    return LimitEstimate(float(trace[-1]), eps[0], trace, sups[0], point=s, closed_form=closed)


def limsup_right(g: Gauge, s: float, grid: GridSpec = DEFAULT_GRID) -> LimitEstimate:
    """Estimate ``inf_eps sup{phi(t) : s <= t < s + eps}``."""
    return _limsup(g, s, grid, two_sided=False)


def limsup_sym(g: Gauge, s: float, grid: GridSpec = DEFAULT_GRID) -> LimitEstimate:
    """Estimate ``inf_eps sup{phi(t) : s - eps < t < s + eps}`` (window clipped at 0)."""
    return _limsup(g, s, grid, two_sided=True)


def psi_inf_profile(g: Gauge, grid: GridSpec = DEFAULT_GRID) -> LimitEstimate:
    """``Psi(alpha) = inf{psi(t) : t >= alpha}`` on the tail grid; non-decreasing in alpha."""
    tail = grid.tail_grid()
    psi = g.psi(tail)
    # suffix minima: Psi at tail[i] = min(psi[i:])
    suffix = np.minimum.accumulate(psi[::-1])[::-1]
    alphas = np.asarray(grid.alphas, dtype=float)
    idx = np.searchsorted(tail, alphas, side="left")
    values = suffix[idx]
    trace = np.maximum.accumulate(values)
    return LimitEstimate(float(trace[-1]), alphas, trace, values)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass
class ClassClaim:
    name: str
    passed: bool
    basis: str  # grid | analytic | grid-unresolved
    margin: float | None
    witness: float | None
    unresolved: int = 0
    checked: int = 0
    analytic: bool | None = None

    def to_dict(self) -> dict:
        return {
            "class": self.name,
            "passed": self.passed,
            "basis": self.basis,
            "margin": self.margin,
            "witness": self.witness,
            "unresolved": self.unresolved,
            "checked": self.checked,
            "analytic": self.analytic,
        }


@dataclass
class GaugeClass:
    gauge: str
    claims: dict[str, ClassClaim]
    psi_profile: LimitEstimate
    sandwich_ok: bool
    sandwich_flags: int = 0
    grid: GridSpec = field(default=DEFAULT_GRID, repr=False)

    def __getitem__(self, name: str) -> ClassClaim:
        return self.claims[name]

    def passes(self, name: str) -> bool:
        return self.claims[name].passed

    def to_dict(self) -> dict:
        return {
            "gauge": self.gauge,
            "claims": [self.claims[c].to_dict() for c in CLASSES],
            "psi_alphas": [float(a) for a in self.psi_profile.grid],
            "psi_inf": [float(v) for v in self.psi_profile.trace],
            "sandwich_ok": self.sandwich_ok,
            "sandwich_flags": self.sandwich_flags,
            "verdicts": "grid-certified unless basis says otherwise",
        }


def _decide(
    name: str,
    margins: np.ndarray,
    unresolved_mask: np.ndarray,
    s: np.ndarray,
    analytic: Mapping[str, bool] | None,
    prerequisite: bool = True,
) -> ClassClaim:
    failed = margins <= 0
    resolved_fail = failed & ~unresolved_mask
    n_unres = int(np.count_nonzero(failed & unresolved_mask))
    i = int(np.argmin(margins))
    flag = None if analytic is None else bool(analytic[name])
    common = dict(margin=float(margins[i]), witness=float(s[i]), unresolved=n_unres, checked=len(s), analytic=flag)
    if not prerequisite or resolved_fail.any():
        if resolved_fail.any():
            j = int(np.argmax(resolved_fail))
            common["witness"] = float(s[j])
            common["margin"] = float(margins[j])
        return ClassClaim(name, False, "grid", **common)
    if n_unres:
        if flag is None:
            return ClassClaim(name, False, "grid-unresolved", **common)
        return ClassClaim(name, flag, "analytic", **common)
    if flag is False:
        return ClassClaim(name, False, "analytic", **common)
    return ClassClaim(name, True, "grid", **common)


def classify(g: Gauge, grid: GridSpec = DEFAULT_GRID) -> GaugeClass:
    """Grid-relative verdicts for the four gauge classes (see module docstring)."""
    s = grid.s_grid()
    phi_s = g.values(s)
    ulp = 4.0 * np.spacing(s)

    psi_s = g.psi(s)
    zero_ok = float(g.eval(0.0)) == 0.0
    eps, right = _window_sups(g, s, grid, two_sided=False)
    _, both = _window_sups(g, s, grid, two_sided=True)
    r_est = np.minimum.accumulate(right, axis=1)[:, -1]
    s_est = np.minimum.accumulate(both, axis=1)[:, -1]
    nonneg = bool(np.all(phi_s >= 0) and np.all(right >= 0))

    normal = _decide(
        "normal", psi_s, np.abs(s - phi_s) <= ulp, s, g.analytic, prerequisite=zero_ok and nonneg
    )
    resolution = eps[:, -1] + ulp
    rln = _decide(
        "right_limit_normal", s - r_est, (r_est - s) <= resolution, s, g.analytic, prerequisite=normal.passed
    )
    ln = _decide("limit_normal", s - s_est, (s_est - s) <= resolution, s, g.analytic, prerequisite=normal.passed)

    profile = psi_inf_profile(g, grid)
    top = profile.value
    semi_flag = None if g.analytic is None else bool(g.analytic["psi_semi_coercive"])
    semi_pass = top > grid.semi_threshold and semi_flag is not False
    semi = ClassClaim(
        "psi_semi_coercive",
        semi_pass,
        "analytic" if (semi_flag is False and top > grid.semi_threshold) else "grid",
        float(top - grid.semi_threshold),
        float(profile.grid[-1]),
        0,
        len(profile.grid),
        semi_flag,
    )

    # phi(s) <= right limsup <= two-sided limsup (<= s for normal gauges, up to resolution)
    flags = (phi_s > r_est) | (r_est > s_est)
    if normal.passed:
        flags |= s_est > s + resolution
    return GaugeClass(
        g.spec,
        {"normal": normal, "right_limit_normal": rln, "limit_normal": ln, "psi_semi_coercive": semi},
        profile,
        sandwich_ok=not bool(flags.any()),
        sandwich_flags=int(np.count_nonzero(flags)),
        grid=grid,
    )


# ---------------------------------------------------------------------------
# sequence limits
# ---------------------------------------------------------------------------


def _tail(ts: Sequence[float], window: int) -> np.ndarray:
    arr = np.asarray(ts, dtype=float)
    if arr.size == 0:
        raise EmptyPrefix("sequence prefix is empty")
    if not 1 <= window <= arr.size:
        raise ValueError(f"window must lie in 1..{arr.size}, got {window}")
    return arr[-window:]


def limsup_seq(ts: Sequence[float], window: int) -> float:
    """Finite-prefix limsup: the sup of the trailing ``window`` terms."""
    return float(_tail(ts, window).max())


def liminf_seq(ts: Sequence[float], window: int) -> float:
    return float(_tail(ts, window).min())


def default_composer(a, b, c):
    return a + np.maximum(b, c)


@dataclass
class ComposeBound:
    lhs: float
    rhs: float
    passed: bool


def compose_bound_check(
    a: Sequence[float],
    b: Sequence[float],
    c: Sequence[float],
    window: int,
    composer: Callable = default_composer,
    tol: float = 1e-9,
) -> ComposeBound:
    """Check ``limsup F(a_n, b_n, c_n) <= F(limsup a, limsup b, limsup c)`` on prefixes."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    if not (a.size == b.size == c.size):
        raise ValueError("prefixes must have equal length")
    lhs = limsup_seq(composer(a, b, c), window)
    rhs = float(composer(limsup_seq(a, window), limsup_seq(b, window), limsup_seq(c, window)))
    return ComposeBound(lhs, rhs, lhs <= rhs + tol)
