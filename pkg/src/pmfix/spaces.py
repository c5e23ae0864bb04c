"""Partial metric spaces: finite tables, builtin continuous families, axiom checks.

A partial metric ``d`` may have ``d(x, x) > 0``.  The auxiliary maps are

    b(x, y) = (d(x, x) + d(y, y)) / 2
    c(x, y) = max(d(x, x), d(y, y))
    e(x, y) = 2 d(x, y) - d(x, x) - d(y, y)

and ``e`` is an ordinary metric whenever ``d`` satisfies the four axioms checked
by :func:`check_axioms`.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InvalidSpace, MalformedTable, NonPositiveRadius, UnknownPoint

AXIOMS = ("symmetry", "reflexive_triangular", "matthews", "weak_sufficiency")
DEFAULT_TOL = 1e-9


class PartialMetricSpace(ABC):
    """Common surface of finite and continuous spaces."""

    finite = False

    @abstractmethod
    def d(self, x: Any, y: Any) -> float:
        """Raw evaluation; continuous families skip point validation here (see :meth:`derive`)."""

    @abstractmethod
    def check_point(self, x: Any) -> None:
        """Raise :class:`UnknownPoint` unless ``x`` belongs to the space."""

    def contains(self, x: Any) -> bool:
        try:
            self.check_point(x)
        except UnknownPoint:
            return False
        return True

    def d_matrix(self, xs: Sequence[Any], ys: Sequence[Any] | None = None) -> np.ndarray:
        ys = xs if ys is None else ys
        out = np.empty((len(xs), len(ys)))
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                out[i, j] = self.d(x, y)
        return out

    def d_pairs(self, xs: Sequence[Any], ys: Sequence[Any]) -> np.ndarray:
        """Elementwise ``d(xs[i], ys[i])``."""
        return np.array([self.d(x, y) for x, y in zip(xs, ys)], dtype=float)

    def b(self, x: Any, y: Any) -> float:
        return 0.5 * (self.d(x, x) + self.d(y, y))

    def c(self, x: Any, y: Any) -> float:
        return max(self.d(x, x), self.d(y, y))

    def e(self, x: Any, y: Any) -> float:
        return 2.0 * self.d(x, y) - self.d(x, x) - self.d(y, y)

    def derive(self, which: str, x: Any, y: Any) -> float:
        self.check_point(x)
        self.check_point(y)
        try:
            fn = {"b": self.b, "c": self.c, "e": self.e, "d": self.d}[which]
        except KeyError:
            raise ValueError(f"unknown derived map {which!r}; use b, c or e") from None
        return fn(x, y)

    def sphere_contains(self, x: Any, eps: float, y: Any) -> bool:
        """Membership of ``y`` in the open d-sphere ``{y : d(x, y) < d(x, x) + eps}``."""
        if not eps > 0:
            raise NonPositiveRadius(f"radius must be positive, got {eps}")
        self.check_point(x)
        self.check_point(y)
        return self.d(x, y) < self.d(x, x) + eps

    def render_point(self, x: Any) -> str:
        return repr(x)


# ---------------------------------------------------------------------------
# finite spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteSpace(PartialMetricSpace):
    """Explicit point set with a full distance table; points are row indices."""

    labels: tuple[str, ...]
    dtable: np.ndarray

    finite = True

    def __post_init__(self) -> None:
        table = np.array(self.dtable, dtype=float, copy=True)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise MalformedTable(f"distance table must be square, got shape {table.shape}")
        if table.shape[0] == 0:
            raise MalformedTable("distance table must have at least one point")
        if not np.all(np.isfinite(table)):
            raise MalformedTable("distance table holds non-finite entries")
        if np.any(table < 0):
            i, j = np.argwhere(table < 0)[0]
            raise MalformedTable(f"negative entry d[{i}][{j}] = {table[i, j]}")
        labels = tuple(str(label) for label in self.labels)
        if len(labels) != table.shape[0]:
            raise MalformedTable(f"{len(labels)} labels for a {table.shape[0]}-point table")
        if len(set(labels)) != len(labels):
            raise MalformedTable("labels must be distinct")
        table.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dtable", table)

    @classmethod
    def from_table(cls, table, labels: Iterable[str] | None = None) -> "FiniteSpace":
        try:
            arr = np.asarray(table, dtype=float)
        except (TypeError, ValueError) as exc:
            raise MalformedTable(f"distance table is not a numeric square array: {exc}") from None
        n = arr.shape[0] if arr.ndim >= 1 else 0
        if labels is None:
            labels = [f"p{i}" for i in range(n)]
        return cls(tuple(labels), arr)

    @property
    def size(self) -> int:
        return len(self.labels)

    def points(self) -> range:
        return range(self.size)

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            self.check_point(int(label))
            return int(label)
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise UnknownPoint(f"no point labelled {label!r}") from None

    def check_point(self, x: Any) -> None:
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)) or not 0 <= x < self.size:
            raise UnknownPoint(f"{x!r} is not a point index in 0..{self.size - 1}")

    def d(self, x: int, y: int) -> float:
        self.check_point(x)
        self.check_point(y)
        return float(self.dtable[x, y])

    def d_matrix(self, xs, ys=None) -> np.ndarray:
        xs = np.asarray(xs, dtype=int)
        ys = xs if ys is None else np.asarray(ys, dtype=int)
        return self.dtable[np.ix_(xs, ys)]

    def d_pairs(self, xs, ys) -> np.ndarray:
        return self.dtable[np.asarray(xs, dtype=int), np.asarray(ys, dtype=int)]

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.dtable)

    def derived_table(self, which: str) -> np.ndarray:
        """Full table of ``b``, ``c``, ``e`` (or ``d`` itself)."""
        diag = self.diag
        if which == "b":
            return 0.5 * (diag[:, None] + diag[None, :])
        if which == "c":
            return np.maximum(diag[:, None], diag[None, :])
        if which == "e":
            return 2.0 * self.dtable - diag[:, None] - diag[None, :]
        if which == "d":
            return np.array(self.dtable)
        raise ValueError(f"unknown derived map {which!r}; use b, c or e")

    def render_point(self, x: int) -> str:
        return self.labels[x]


# ---------------------------------------------------------------------------
# continuous families
# ---------------------------------------------------------------------------


def _real(x: Any) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float, np.integer, np.floating)):
        raise UnknownPoint(f"{x!r} is not a real number")
    if not math.isfinite(x):
        raise UnknownPoint(f"{x!r} is not finite")
    return float(x)


@dataclass(frozen=True)
class ContinuousSpace(PartialMetricSpace):
    """Parametric family evaluated pointwise; ``region`` bounds sampling only."""

    region: tuple[float, float] = (0.0, 1.0)

    family = ""

    def __post_init__(self) -> None:
        lo, hi = (float(v) for v in self.region)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ValueError(f"bad sampling region {self.region}")
        object.__setattr__(self, "region", (lo, hi))

    @property
    def params(self) -> dict:
        return {"region": list(self.region)}

    def grid_points(self, k: int) -> list:
        lo, hi = self.region
        return [float(v) for v in np.linspace(lo, hi, k)]

    def random_points(self, rng: np.random.Generator, k: int) -> list:
        lo, hi = self.region
        return [float(v) for v in rng.uniform(lo, hi, k)]

    def restrict(self, points: Sequence[Any]) -> FiniteSpace:
        """Finite subspace on ``points`` (labels are rendered points)."""
        for p in points:
            self.check_point(p)
        labels = [f"{i}:{self.render_point(p)}" for i, p in enumerate(points)]
        return FiniteSpace(tuple(labels), self.d_matrix(list(points)))


@dataclass(frozen=True)
class MaxOnRPlus(ContinuousSpace):
    """``d(x, y) = max(x, y)`` on the non-negative reals; here ``e(x, y) = |x - y|``."""

    family = "max_on_rplus"

    def check_point(self, x: Any) -> None:
        if _real(x) < 0:
            raise UnknownPoint(f"{x!r} is negative")

    def d(self, x: float, y: float) -> float:
        return float(max(x, y))

    def d_matrix(self, xs, ys=None) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ys = xs if ys is None else np.asarray(ys, dtype=float)
        return np.maximum.outer(xs, ys)

    def d_pairs(self, xs, ys) -> np.ndarray:
        return np.maximum(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))

    def grid_points(self, k: int) -> list:
        lo, hi = self.region
        return [float(v) for v in np.linspace(max(lo, 0.0), max(hi, 0.0), k)]

    def random_points(self, rng, k):
        lo, hi = self.region
        return [float(v) for v in rng.uniform(max(lo, 0.0), max(hi, 0.0), k)]


@dataclass(frozen=True)
class Intervals(ContinuousSpace):
    """Closed intervals ``(a, b)``, ``a <= b``; ``d = max(b, d) - min(a, c)``."""

    family = "intervals"

    def check_point(self, x: Any) -> None:
        try:
            a, b = x
        except (TypeError, ValueError):
            raise UnknownPoint(f"{x!r} is not an interval pair") from None
        if _real(a) > _real(b):
            raise UnknownPoint(f"{x!r} has a > b")

    def d(self, x, y) -> float:
        return float(max(x[1], y[1]) - min(x[0], y[0]))

    def d_matrix(self, xs, ys=None) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1, 2)
        ys = xs if ys is None else np.asarray(ys, dtype=float).reshape(-1, 2)
        return np.maximum.outer(xs[:, 1], ys[:, 1]) - np.minimum.outer(xs[:, 0], ys[:, 0])

    def d_pairs(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1, 2)
        ys = np.asarray(ys, dtype=float).reshape(-1, 2)
        return np.maximum(xs[:, 1], ys[:, 1]) - np.minimum(xs[:, 0], ys[:, 0])

    def grid_points(self, k: int) -> list:
        lo, hi = self.region
        m = 1
        while m * (m + 1) // 2 < k:
            m += 1
        ends = np.linspace(lo, hi, m)
        pts = [(float(a), float(b)) for i, a in enumerate(ends) for b in ends[i:]]
        return pts[:k]

    def random_points(self, rng, k):
        lo, hi = self.region
        raw = np.sort(rng.uniform(lo, hi, (k, 2)), axis=1)
        return [(float(a), float(b)) for a, b in raw]

    def render_point(self, x) -> str:
        return f"[{x[0]!r}, {x[1]!r}]"


@dataclass(frozen=True)
class WeightedMetric(ContinuousSpace):
    """``d(x, y) = |x - y| + max(w(x), w(y))`` on the reals.

    ``w`` is the piecewise-linear interpolant of ``(knots, values)``, held
    constant outside the knot range.  Zero weights give the standard metric.
    """

    knots: tuple[float, ...] = (0.0,)
    values: tuple[float, ...] = (0.0,)

    family = "weighted"

    def __post_init__(self) -> None:
        super().__post_init__()
        knots = tuple(float(k) for k in self.knots)
        values = tuple(float(v) for v in self.values)
        if not knots or len(knots) != len(values):
            raise ValueError("weight knots and values must be non-empty and of equal length")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ValueError("weight knots must be strictly increasing")
        if not all(math.isfinite(k) for k in knots) or any(not math.isfinite(v) or v < 0 for v in values):
            raise ValueError("weights must be finite and non-negative")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @property
    def params(self) -> dict:
        return {"region": list(self.region), "knots": list(self.knots), "values": list(self.values)}

    def weight(self, x):
        return np.interp(x, self.knots, self.values)

    def check_point(self, x: Any) -> None:
        _real(x)

    def d(self, x: float, y: float) -> float:
        return float(abs(x - y) + max(self.weight(x), self.weight(y)))

    def d_matrix(self, xs, ys=None) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ys = xs if ys is None else np.asarray(ys, dtype=float)
        return np.abs(np.subtract.outer(xs, ys)) + np.maximum.outer(self.weight(xs), self.weight(ys))

    def d_pairs(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        return np.abs(xs - ys) + np.maximum(self.weight(xs), self.weight(ys))


# ---------------------------------------------------------------------------
# axiom verification
# ---------------------------------------------------------------------------


@dataclass
class AxiomResult:
    """Outcome of one axiom.

    ``margin`` is the worst slack found: for the three inequalities it is the
    minimum of (right side - left side), for weak sufficiency it is the smallest
    distance from equality over distinct pairs.  ``None`` when nothing was checked.
    """

    name: str
    passed: bool
    margin: float | None
    witness: tuple[int, ...] | None

    def to_dict(self, space: FiniteSpace | None = None) -> dict:
        witness = None
        if self.witness is not None:
            witness = [space.labels[i] for i in self.witness] if space is not None else list(self.witness)
        return {"axiom": self.name, "passed": self.passed, "margin": self.margin, "witness": witness}


@dataclass
class AxiomReport:
    results: dict[str, AxiomResult] = field(default_factory=dict)
    tol: float = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def __getitem__(self, name: str) -> AxiomResult:
        return self.results[name]

    def failed(self) -> list[str]:
        return [name for name, r in self.results.items() if not r.passed]

    def to_dict(self, space: FiniteSpace | None = None) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "axioms": [self.results[name].to_dict(space) for name in AXIOMS if name in self.results],
        }


def _worst(values: np.ndarray, largest: bool = False) -> tuple[float, tuple[int, ...]]:
    idx = np.argmax(values) if largest else np.argmin(values)
    where = np.unravel_index(idx, values.shape)
    return float(values[where]), tuple(int(i) for i in where)


def check_axioms(space: FiniteSpace, tol: float = DEFAULT_TOL) -> AxiomReport:
    """Exhaustively check symmetry, reflexive-triangularity, Matthews and weak sufficiency."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    D = space.dtable
    n = space.size
    diag = np.diag(D)
    report = AxiomReport(tol=tol)

    asym = np.abs(D - D.T)
    worst, where = _worst(asym, largest=True)
    report.results["symmetry"] = AxiomResult("symmetry", worst <= tol, 0.0 - worst, where if worst > tol else None)

    # d(x,z) <= d(x,y) + d(y,z) - d(y,y), scanned one middle point at a time
    best = math.inf
    best_at: tuple[int, ...] = (0, 0, 0)
    for y in range(n):
        slack = D[:, y][:, None] + D[y, :][None, :] - D[y, y] - D
        val, (x, z) = _worst(slack)
        if val < best:
            best, best_at = val, (x, y, z)
    report.results["reflexive_triangular"] = AxiomResult(
        "reflexive_triangular", best >= -tol, best, best_at if best < -tol else None
    )

    slack = D - np.maximum(diag[:, None], diag[None, :])
    worst, where = _worst(slack)
    report.results["matthews"] = AxiomResult("matthews", worst >= -tol, worst, where if worst < -tol else None)

    if n > 1:
        dev = np.maximum(np.abs(D - diag[:, None]), np.abs(D - diag[None, :]))
        dev[np.diag_indices(n)] = np.inf
        worst, where = _worst(dev)
        report.results["weak_sufficiency"] = AxiomResult(
            "weak_sufficiency", worst > tol, worst, where if worst <= tol else None
        )
    else:
        report.results["weak_sufficiency"] = AxiomResult("weak_sufficiency", True, None, None)
    return report


def derive(space: PartialMetricSpace, which: str, x: Any, y: Any) -> float:
    return space.derive(which, x, y)


def sphere_contains(space: PartialMetricSpace, x: Any, eps: float, y: Any) -> bool:
    return space.sphere_contains(x, eps, y)


@dataclass
class MetricCheck:
    name: str
    passed: bool
    margin: float | None
    witness: tuple[int, ...] | None

    def to_dict(self, space: FiniteSpace | None = None) -> dict:
        witness = None
        if self.witness is not None:
            witness = [space.labels[i] for i in self.witness] if space is not None else list(self.witness)
        return {"check": self.name, "passed": self.passed, "margin": self.margin, "witness": witness}


@dataclass
class MetricReport:
    checks: dict[str, MetricCheck]
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, name: str) -> MetricCheck:
        return self.checks[name]

    def to_dict(self, space: FiniteSpace | None = None) -> dict:
        return {"passed": self.passed, "tol": self.tol, "checks": [c.to_dict(space) for c in self.checks.values()]}


def check_e_is_metric(space: FiniteSpace, tol: float = DEFAULT_TOL) -> MetricReport:
    """Verify that the induced ``e`` is a metric and ``|d(x,x) - d(y,y)| <= e(x,y)``.

    Raises :class:`InvalidSpace` when the partial metric axioms fail, since the
    claim has no hypothesis to stand on then.
    """
    axioms = check_axioms(space, tol)
    if not axioms.passed:
        raise InvalidSpace(f"partial metric axioms fail: {', '.join(axioms.failed())}")
    E = space.derived_table("e")
    n = space.size
    diag = space.diag
    checks: dict[str, MetricCheck] = {}

    asym = np.abs(E - E.T)
    worst, where = _worst(asym, largest=True)
    checks["e_symmetry"] = MetricCheck("e_symmetry", worst <= tol, 0.0 - worst, where if worst > tol else None)

    self_dist = np.abs(np.diag(E))
    worst_i = int(np.argmax(self_dist))
    ok_zero = float(self_dist[worst_i]) <= tol
    if n > 1:
        off = E.copy()
        off[np.diag_indices(n)] = np.inf
        sep, sep_at = _worst(off)
        ok_sep = sep > tol
    else:
        sep, sep_at, ok_sep = math.inf, (0, 0), True
    if not ok_zero:
        ident = MetricCheck("e_identity", False, -float(self_dist[worst_i]), (worst_i, worst_i))
    elif not ok_sep:
        ident = MetricCheck("e_identity", False, sep, sep_at)
    else:
        ident = MetricCheck("e_identity", True, None if n == 1 else sep, None)
    checks["e_identity"] = ident

    best = math.inf
    best_at: tuple[int, ...] = (0, 0, 0)
    for y in range(n):
        slack = E[:, y][:, None] + E[y, :][None, :] - E
        val, (x, z) = _worst(slack)
        if val < best:
            best, best_at = val, (x, y, z)
    checks["e_triangle"] = MetricCheck("e_triangle", best >= -tol, best, best_at if best < -tol else None)

    slack = E - np.abs(diag[:, None] - diag[None, :])
    worst, where = _worst(slack)
    checks["self_distance_bound"] = MetricCheck(
        "self_distance_bound", worst >= -tol, worst, where if worst < -tol else None
    )
    return MetricReport(checks, tol)


# ---------------------------------------------------------------------------
# random generator
# ---------------------------------------------------------------------------


def generate_random_space(
    n: int,
    seed: int,
    w_max: float = 1.0,
    sites: int | None = None,
    scale: float = 1.0,
) -> FiniteSpace:
    """Random valid partial metric ``d(x, y) = m(x, y) + max(w(x), w(y))``.

    ``m`` is the Euclidean (pseudo)metric of random plane points and ``w`` is
    uniform on ``[0, w_max]``.  With ``sites < n`` several points share a plane
    location, so ``m`` is only a pseudometric; the distinct weights keep weak
    sufficiency, and such spaces carry d-fixed points that are not fixed points.
    Reflexive-triangularity follows from ``max(a, c) <= max(a, b) + max(b, c) - b``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if w_max < 0 or scale <= 0:
        raise ValueError("w_max must be >= 0 and scale > 0")
    sites = n if sites is None else int(sites)
    if not 1 <= sites <= n:
        raise ValueError(f"sites must lie in 1..{n}")
    if sites < n and w_max == 0:
        raise ValueError("co-located points need positive weights (w_max > 0)")
    rng = np.random.default_rng(seed)
    locations = rng.uniform(0.0, scale, (sites, 2))
    if sites == n:
        assign = np.arange(n)
    else:
        assign = np.concatenate([np.arange(sites), rng.integers(0, sites, n - sites)])
        rng.shuffle(assign)
    pts = locations[assign]
    weights = rng.uniform(0.0, w_max, n) if w_max > 0 else np.zeros(n)
    diff = pts[:, None, :] - pts[None, :, :]
    m = np.hypot(diff[..., 0], diff[..., 1])
    d = m + np.maximum(weights[:, None], weights[None, :])
    return FiniteSpace.from_table(d)
