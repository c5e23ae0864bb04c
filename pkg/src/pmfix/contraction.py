"""Self-maps, the comparison quantities M1/M2/M3 and the (M; g; phi) contraction test.

Throughout, ``M`` means ``M3 = max(M1, M2)`` with

    M1(x, y) = max(d(x, y), d(x, Tx), d(y, Ty))
    M2(x, y) = (d(x, Ty) + d(Tx, y)) / 2

and ``T`` is (M; g; phi)-contractive when
``d(Tx, Ty) <= max(phi(M(x, y)), g(x, y))`` for all x, y, with ``g`` one of b, c.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Any, Sequence

import numpy as np

from .errors import InvalidMap, InvalidSpace, NotDFixed, SamplerExhausted, UnknownPoint
from .expr import Expression, parse_expression
from .gauges import Gauge
from .spaces import ContinuousSpace, FiniteSpace, PartialMetricSpace, check_axioms

DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# self-maps
# ---------------------------------------------------------------------------


class SelfMap(ABC):
    name = ""

    @abstractmethod
    def _apply(self, x: Any) -> Any: ...

    def __call__(self, x: Any) -> Any:
        return self._apply(x)

    def apply(self, space: PartialMetricSpace, x: Any) -> Any:
        space.check_point(x)
        y = self._apply(x)
        try:
            space.check_point(y)
        except UnknownPoint as exc:
            raise InvalidMap(f"{self.name} maps {space.render_point(x)} outside the space: {exc}") from None
        return y

    def validate(self, space: PartialMetricSpace) -> None:
        """Raise :class:`InvalidMap` when the map cannot act on ``space``."""

    def power(self, x: Any, k: int) -> Any:
        for _ in range(k):
            x = self._apply(x)
        return x

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class TableMap(SelfMap):
    """Map on a finite space given by ``i -> table[i]``."""

    table: tuple[int, ...]

    name = "table"

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", tuple(int(j) for j in self.table))

    def _apply(self, x: int) -> int:
        return self.table[x]

    def validate(self, space: PartialMetricSpace) -> None:
        if not isinstance(space, FiniteSpace):
            raise InvalidMap("index tables act on finite spaces only")
        if len(self.table) != space.size:
            raise InvalidMap(f"map table has {len(self.table)} entries for {space.size} points")
        bad = [j for j in self.table if not 0 <= j < space.size]
        if bad:
            raise InvalidMap(f"map table entry {bad[0]} is not a point index")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=int)

    def to_dict(self) -> dict:
        return {"table": list(self.table)}


def _endpointwise(fn, x):
    if isinstance(x, tuple):
        a, b = fn(x[0]), fn(x[1])
        if a > b:
            raise InvalidMap(f"image of interval {x} is reversed")
        return (float(a), float(b))
    return fn(x)


@dataclass(frozen=True)
class Affine(SelfMap):
    """``x -> a x + b``; intervals are mapped endpoint by endpoint."""

    a: float
    b: float = 0.0

    name = "affine"

    def _apply(self, x):
        return _endpointwise(lambda v: self.a * v + self.b, x)

    def to_dict(self) -> dict:
        return {"family": "affine", "params": {"a": self.a, "b": self.b}}


@dataclass(frozen=True)
class Halving(SelfMap):
    name = "halving"

    def _apply(self, x):
        return _endpointwise(lambda v: v / 2.0, x)

    def to_dict(self) -> dict:
        return {"family": "halving", "params": {}}


@dataclass(frozen=True)
class ExprMap(SelfMap):
    expr: Expression

    name = "expr"

    def _apply(self, x):
        return _endpointwise(lambda v: self.expr.evaluate(float(v), "x"), x)

    def to_dict(self) -> dict:
        return {"expr": str(self.expr)}


def expr_map(src: str) -> ExprMap:
    return ExprMap(parse_expression(src, ("x",)))


# ---------------------------------------------------------------------------
# comparison quantities
# ---------------------------------------------------------------------------


def m_quantities(space: PartialMetricSpace, T: SelfMap, x: Any, y: Any) -> tuple[float, float, float]:
    """``(M1, M2, M3)`` at ``(x, y)``."""
    tx, ty = T.apply(space, x), T.apply(space, y)
    d = space.d
    m1 = max(d(x, y), d(x, tx), d(y, ty))
    m2 = 0.5 * (d(x, ty) + d(tx, y))
    return m1, m2, max(m1, m2)


def m_tables(space: FiniteSpace, T: TableMap) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All-pairs M1, M2, M3 on a finite space."""
    T.validate(space)
    D = space.dtable
    t = T.array
    disp = D[np.arange(space.size), t]
    m1 = np.maximum(D, np.maximum(disp[:, None], disp[None, :]))
    m2 = 0.5 * (D[:, t] + D[t, :])
    return m1, m2, np.maximum(m1, m2)


def _pair_quantities(space: PartialMetricSpace, T: SelfMap, xs: list, ys: list):
    tx = [T.apply(space, x) for x in xs]
    ty = [T.apply(space, y) for y in ys]
    dp = space.d_pairs
    dxy, dxtx, dyty = dp(xs, ys), dp(xs, tx), dp(ys, ty)
    m1 = np.maximum(dxy, np.maximum(dxtx, dyty))
    m2 = 0.5 * (dp(xs, ty) + dp(tx, ys))
    dxx, dyy = dp(xs, xs), dp(ys, ys)
    return dp(tx, ty), np.maximum(m1, m2), dxx, dyy


# ---------------------------------------------------------------------------
# contraction check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sampler:
    """Pairs for continuous checks: ``n_random`` uniform pairs plus all pairs of an ``n_grid`` grid."""

    n_random: int = 10_000
    n_grid: int = 64
    seed: int = 0
    region: tuple[float, float] | None = None

    def pairs(self, space: ContinuousSpace) -> tuple[list, list]:
        if self.region is not None:
            space = replace(space, region=tuple(self.region))
        grid = space.grid_points(self.n_grid) if self.n_grid > 0 else []
        xs = [a for a in grid for _ in grid]
        ys = [b for _ in grid for b in grid]
        if self.n_random > 0:
            rng = np.random.default_rng(self.seed)
            xs += space.random_points(rng, self.n_random)
            ys += space.random_points(rng, self.n_random)
        if not xs:
            raise SamplerExhausted("sampler produced no pairs")
        return xs, ys

    def points(self, space: ContinuousSpace) -> list:
        if self.region is not None:
            space = replace(space, region=tuple(self.region))
        pts = space.grid_points(self.n_grid) if self.n_grid > 0 else []
        if self.n_random > 0:
            pts += space.random_points(np.random.default_rng(self.seed), min(self.n_random, 256))
        if not pts:
            raise SamplerExhausted("sampler produced no points")
        return pts


@dataclass
class ContractionReport:
    passed: bool
    mode: str  # exhaustive | sampled
    g: str
    gauge: str
    tol: float
    pairs: int
    worst_margin: float
    witness: tuple | None
    lhs: float
    rhs: float
    phi_branch: int
    g_branch: int

    def to_dict(self, space: PartialMetricSpace | None = None) -> dict:
        witness = None
        if self.witness is not None:
            witness = [space.render_point(p) for p in self.witness] if space is not None else list(self.witness)
        return {
            "passed": self.passed,
            "mode": self.mode,
            "g": self.g,
            "gauge": self.gauge,
            "tol": self.tol,
            "pairs": self.pairs,
            "worst_margin": self.worst_margin,
            "witness": witness,
            "witness_lhs": self.lhs,
            "witness_rhs": self.rhs,
            "phi_branch": self.phi_branch,
            "g_branch": self.g_branch,
        }


def _g_values(g: str, dxx: np.ndarray, dyy: np.ndarray) -> np.ndarray:
    if g == "b":
        return 0.5 * (dxx + dyy)
    if g == "c":
        return np.maximum(dxx, dyy)
    raise ValueError(f"g must be 'b' or 'c', got {g!r}")


def verify_contractive(
    space: PartialMetricSpace,
    T: SelfMap,
    gauge: Gauge,
    g: str = "b",
    tol: float = DEFAULT_TOL,
    sampler: Sampler | None = None,
    check_space: bool = True,
) -> ContractionReport:
    """Check ``d(Tx, Ty) <= max(phi(M(x, y)), g(x, y)) + tol`` over all (or sampled) ordered pairs."""
    if isinstance(space, FiniteSpace):
        T.validate(space)
        if check_space:
            axioms = check_axioms(space)
            if not axioms.passed:
                raise InvalidSpace(f"partial metric axioms fail: {', '.join(axioms.failed())}")
        _, _, m3 = m_tables(space, T)
        t = T.array
        lhs = space.dtable[np.ix_(t, t)]
        diag = space.diag
        gv = np.broadcast_to(_g_values(g, diag[:, None], diag[None, :]), lhs.shape)
        phi = gauge.values(m3)
        n = space.size
        lhs, phi, gv = lhs.ravel(), phi.ravel(), gv.ravel()
        mode = "exhaustive"

        def index_of(k: int) -> tuple:
            return divmod(k, n)

    else:
        xs, ys = (sampler or Sampler()).pairs(space)
        lhs, m3, dxx, dyy = _pair_quantities(space, T, xs, ys)
        gv = _g_values(g, dxx, dyy)
        phi = gauge.values(m3)
        mode = "sampled"

        def index_of(k: int) -> tuple:
            return (xs[k], ys[k])

    rhs = np.maximum(phi, gv)
    margin = rhs - lhs
    k = int(np.argmin(margin))
    worst = float(margin[k])
    passed = worst >= -tol
    phi_branch = int(np.count_nonzero(phi >= gv))
    return ContractionReport(
        passed=passed,
        mode=mode,
        g=g,
        gauge=gauge.spec,
        tol=tol,
        pairs=len(margin),
        worst_margin=worst,
        witness=None if passed else index_of(k),
        lhs=float(lhs[k]),
        rhs=float(rhs[k]),
        phi_branch=phi_branch,
        g_branch=len(margin) - phi_branch,
    )


# ---------------------------------------------------------------------------
# identities at d-fixed points
# ---------------------------------------------------------------------------


@dataclass
class IdentityCheck:
    name: str
    passed: bool
    residual: float

    def to_dict(self) -> dict:
        return {"identity": self.name, "passed": self.passed, "residual": self.residual}


@dataclass
class IdentityReport:
    checks: dict[str, IdentityCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, name: str) -> IdentityCheck:
        return self.checks[name]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks.values()]}


def is_d_fixed(space: PartialMetricSpace, T: SelfMap, z: Any, tol: float = DEFAULT_TOL) -> bool:
    return abs(space.d(z, T.apply(space, z)) - space.d(z, z)) <= tol


def fixed_point_identities(
    space: PartialMetricSpace,
    T: SelfMap,
    z: Any,
    w: Any | None = None,
    tol: float = DEFAULT_TOL,
    ys: Sequence[Any] | None = None,
) -> IdentityReport:
    """Identities that hold at d-fixed points ``z`` and ``w`` of ``T``.

    * ``d(Tz, Tz) <= d(z, z)``
    * ``d(y, Tz) <= d(y, z)`` for every ``y`` (all points, or ``ys`` / a grid on continuous spaces)
    * ``e(z, Tz) = d(z, z) - d(Tz, Tz)``
    * ``M(z, w) = d(z, w)``
    """
    w = z if w is None else w
    for p in (z, w):
        if not is_d_fixed(space, T, p, tol):
            raise NotDFixed(
                f"{space.render_point(p)} is not d-fixed: d(p,Tp) - d(p,p) = "
                f"{space.d(p, T.apply(space, p)) - space.d(p, p)!r}"
            )
    tz = T.apply(space, z)
    if ys is None:
        ys = list(space.points()) if isinstance(space, FiniteSpace) else Sampler().points(space)
    ys = list(ys)
    checks = {}
    r = space.d(tz, tz) - space.d(z, z)
    checks["self_distance_nonincreasing"] = IdentityCheck("self_distance_nonincreasing", r <= tol, max(r, 0.0))
    r = float(np.max(space.d_pairs(ys, [tz] * len(ys)) - space.d_pairs(ys, [z] * len(ys))))
    checks["image_not_farther"] = IdentityCheck("image_not_farther", r <= tol, max(r, 0.0))
    r = abs(space.e(z, tz) - (space.d(z, z) - space.d(tz, tz)))
    checks["displacement_identity"] = IdentityCheck("displacement_identity", r <= tol, r)
    r = abs(m_quantities(space, T, z, w)[2] - space.d(z, w))
    checks["comparison_equals_distance"] = IdentityCheck("comparison_equals_distance", r <= tol, r)
    return IdentityReport(checks)


def comparison_identities(space: FiniteSpace, T: TableMap) -> tuple[float, float]:
    """Largest deviations of ``M(x, x) = d(x, Tx)`` and ``M(x, Tx) = max(d(x, Tx), d(Tx, T^2 x))``."""
    _, _, m3 = m_tables(space, T)
    n = space.size
    idx = np.arange(n)
    t = T.array
    D = space.dtable
    disp = D[idx, t]
    diag_dev = float(np.max(np.abs(m3[idx, idx] - disp)))
    orbit_dev = float(np.max(np.abs(m3[idx, t] - np.maximum(disp, D[t, t[t]]))))
    return diag_dev, orbit_dev
