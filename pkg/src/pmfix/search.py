"""Seeded random trials: check the fixed-point conclusions on machine-verified inputs.

A trial draws a finite space, a self-map and a gauge from its seed.  It checks
the enforced hypotheses exhaustively, and when they hold it checks every
conclusion.  One hypothesis may be ablated (dropped from the filter) to see
whether conclusions still survive without it.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np

from .contraction import TableMap, comparison_identities, fixed_point_identities, verify_contractive
from .dynamics import check_theorem1_trace, enumerate_fixed_structure, iterate
from .errors import ConclusionViolated, ConfigError
from .gauges import GaugeClass, classify, parse_gauge
from .spaces import AXIOMS, FiniteSpace, check_axioms, generate_random_space

HYPOTHESES = AXIOMS + ("contractive", "right_limit_normal", "limit_normal", "psi_semi_coercive")
MAP_SAMPLERS = ("uniform", "biased", "constant_argmin")
EPS_GRID = tuple(10.0**k for k in range(-6, 1))

_ALIASES = {"semi_coercive": "psi_semi_coercive", "contractivity": "contractive", "contraction": "contractive"}


def hypothesis_name(name: str) -> str:
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    key = _ALIASES.get(key, key)
    if key not in HYPOTHESES:
        raise ConfigError(f"unknown hypothesis {name!r}; expected one of {', '.join(HYPOTHESES)}")
    return key


def default_enforce(g: str) -> tuple[str, ...]:
    if g == "b":
        return AXIOMS + ("contractive", "limit_normal", "psi_semi_coercive")
    return AXIOMS + ("contractive", "right_limit_normal")


@dataclass(frozen=True)
class TrialSpec:
    """Everything a trial depends on; equal specs give equal outcomes."""

    seed: int
    n: int = 6
    n_min: int = 1
    w_max: float = 1.0
    sites: int | str | None = "random"
    map_sampler: str = "biased"
    gauge: str = "linear"
    alpha_range: tuple[float, float] = (0.0, 0.9)
    g: str = "b"
    enforce: tuple[str, ...] | None = None
    ablation: str | None = None
    table: tuple[tuple[float, ...], ...] | None = None
    map: tuple[int, ...] | None = None
    tol: float = 1e-9

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not 1 <= self.n_min <= self.n:
            raise ConfigError("need 1 <= n_min <= n")
        if not self.w_max >= 0:
            raise ConfigError("w_max must be non-negative")
        if self.map_sampler not in MAP_SAMPLERS:
            raise ConfigError(f"map_sampler must be one of {', '.join(MAP_SAMPLERS)}")
        if self.g not in ("b", "c"):
            raise ConfigError("g must be 'b' or 'c'")
        lo, hi = self.alpha_range
        if not 0 <= lo <= hi:
            raise ConfigError("alpha_range must satisfy 0 <= lo <= hi")
        if not (self.sites in (None, "random") or (isinstance(self.sites, int) and self.sites >= 1)):
            raise ConfigError("sites must be null, 'random' or a positive integer")
        if self.gauge != "linear":
            try:
                parse_gauge(self.gauge)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        object.__setattr__(self, "alpha_range", (float(lo), float(hi)))
        if self.enforce is not None:
            object.__setattr__(self, "enforce", tuple(hypothesis_name(h) for h in self.enforce))
        if self.ablation is not None:
            object.__setattr__(self, "ablation", hypothesis_name(self.ablation))
        if self.table is not None:
            object.__setattr__(self, "table", tuple(tuple(float(v) for v in row) for row in self.table))
        if self.map is not None:
            object.__setattr__(self, "map", tuple(int(j) for j in self.map))

    @property
    def hypotheses(self) -> tuple[str, ...]:
        return self.enforce if self.enforce is not None else default_enforce(self.g)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["alpha_range"] = list(self.alpha_range)
        for key in ("enforce", "map"):
            if out[key] is not None:
                out[key] = list(out[key])
        if self.table is not None:
            out["table"] = [list(r) for r in self.table]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrialSpec":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown trial fields: {', '.join(sorted(extra))}")
        if "seed" not in data:
            raise ConfigError("seed is required")
        kw = dict(data)
        for key in ("alpha_range", "enforce", "map"):
            if kw.get(key) is not None:
                kw[key] = tuple(kw[key])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class Trial:
    space: FiniteSpace
    T: TableMap
    gauge_spec: str


def _sample_map(space: FiniteSpace, kind: str, rng: np.random.Generator) -> TableMap:
    n = space.size
    diag = space.diag
    target = int(np.argmin(diag))
    if kind == "constant_argmin":
        return TableMap([target] * n)
    if kind == "uniform":
        return TableMap(rng.integers(0, n, n).tolist())
    # biased: each image is uniform, a point of smaller self-distance, or the minimiser
    table = []
    for i in range(n):
        u = rng.random()
        if u < 0.15:
            table.append(int(rng.integers(0, n)))
        elif u < 0.45:
            lower = np.nonzero(diag < diag[i])[0]
            table.append(int(rng.choice(lower)) if lower.size else i)
        else:
            table.append(target)
    return TableMap(table)


def build_trial(spec: TrialSpec) -> Trial:
    rng = np.random.default_rng(spec.seed)
    if spec.table is not None:
        space = FiniteSpace.from_table(spec.table)
    else:
        n = int(rng.integers(spec.n_min, spec.n + 1))
        if spec.sites == "random":
            sites = int(rng.integers(1, n + 1)) if spec.w_max > 0 else n
        else:
            sites = spec.sites if spec.sites is None else min(int(spec.sites), n)
        space = generate_random_space(n, int(rng.integers(2**32)), w_max=spec.w_max, sites=sites)
    T = TableMap(spec.map) if spec.map is not None else _sample_map(space, spec.map_sampler, rng)
    if spec.gauge == "linear":
        lo, hi = spec.alpha_range
        gauge_spec = f"linear:{float(rng.uniform(lo, hi))!r}"
    else:
        gauge_spec = spec.gauge
    return Trial(space, T, gauge_spec)


@lru_cache(maxsize=4096)
def _classify(gauge_spec: str) -> GaugeClass:
    return classify(parse_gauge(gauge_spec))


def gauge_classes(gauge_spec: str) -> dict[str, bool]:
    """Grid-certified class verdicts, cached per gauge spec."""
    cls = _classify(gauge_spec)
    return {name: cls.passes(name) for name in ("right_limit_normal", "limit_normal", "psi_semi_coercive")}


@dataclass
class TrialOutcome:
    status: str  # hypotheses_failed | pass | violation
    spec: TrialSpec
    hypotheses: dict[str, bool]
    failed: tuple[str, ...] = ()
    witness: dict | None = None
    fix: int | None = None
    fix_d: int | None = None

    @property
    def ablated_failed(self) -> bool:
        """The ablated hypothesis was false on this trial, so the trial probes the ablation."""
        return self.spec.ablation is not None and not self.hypotheses.get(self.spec.ablation, True)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "seed": self.spec.seed,
            "hypotheses": self.hypotheses,
            "failed": list(self.failed),
            "witness": self.witness,
            "fix": self.fix,
            "fix_d": self.fix_d,
        }


def _hypothesis_record(trial: Trial, spec: TrialSpec) -> dict[str, bool]:
    space, T = trial.space, trial.T
    record = {name: r.passed for name, r in check_axioms(space, spec.tol).results.items()}
    record["contractive"] = verify_contractive(space, T, parse_gauge(trial.gauge_spec), g=spec.g, tol=spec.tol,
                                               check_space=False).passed
    record.update(gauge_classes(trial.gauge_spec))
    return record


def _conclusions(trial: Trial, spec: TrialSpec) -> tuple[dict | None, int, int]:
    """First violated conclusion as a witness dict (or None), plus |Fix(T)| and |Fix(T;d)|."""
    space, T = trial.space, trial.T
    tol = spec.tol
    lab = space.labels
    for x0 in space.points():
        trace = iterate(space, T, x0, max_iter=space.size + 1)
        if trace.stop_reason != "converged":
            return {"conclusion": "orbit converges", "start": lab[x0], "stop_reason": trace.stop_reason}, 0, 0
        try:
            check_theorem1_trace(trace, tol)
        except ConclusionViolated as exc:
            return {"conclusion": exc.conclusion, "start": lab[x0], "detail": exc.detail}, 0, 0
        z = trace.last
        if abs(space.d(z, T.apply(space, z)) - space.d(z, z)) > tol:
            return {"conclusion": "orbit limit is d-fixed", "start": lab[x0]}, 0, 0

    diag_dev, orbit_dev = comparison_identities(space, T)
    if max(diag_dev, orbit_dev) > tol:
        return {"conclusion": "comparison identities", "deviation": max(diag_dev, orbit_dev)}, 0, 0

    structure = enumerate_fixed_structure(space, T, tol)
    for z in structure.fix_d:
        for w in structure.fix_d:
            report = fixed_point_identities(space, T, z, w, tol)
            if not report.passed:
                bad = [c.name for c in report.checks.values() if not c.passed]
                return {"conclusion": "d-fixed identities", "points": [lab[z], lab[w]], "failed": bad}, 0, 0
    nfix, nfix_d = len(structure.fix), len(structure.fix_d)
    if spec.g == "b":
        if nfix != 1:
            return {"conclusion": "exactly one fixed point", "fix": [lab[i] for i in structure.fix]}, nfix, nfix_d
        if structure.x_td != structure.fix:
            return {"conclusion": "least d-fixed points are the fixed points",
                    "x_td": [lab[i] for i in structure.x_td], "fix": [lab[i] for i in structure.fix]}, nfix, nfix_d
        D, t = space.dtable, T.array
        for eps in EPS_GRID:
            if not any(D[z, z] < structure.theta + eps and D[z, z] - D[t[z], t[z]] < 2 * eps for z in structure.fix_d):
                return {"conclusion": "near-least d-fixed point", "eps": eps}, nfix, nfix_d
    return None, nfix, nfix_d


def run_trial(spec: TrialSpec) -> TrialOutcome:
    """Build the trial, filter on its hypotheses and check the conclusions."""
    trial = build_trial(spec)
    record = _hypothesis_record(trial, spec)
    failed = tuple(h for h in spec.hypotheses if h != spec.ablation and not record[h])
    if failed:
        return TrialOutcome("hypotheses_failed", spec, record, failed)
    witness, nfix, nfix_d = _conclusions(trial, spec)
    if witness is not None:
        witness = {
            **witness,
            "table": trial.space.dtable.tolist(),
            "map": list(trial.T.table),
            "gauge": trial.gauge_spec,
        }
        return TrialOutcome("violation", spec, record, (), witness, nfix, nfix_d)
    return TrialOutcome("pass", spec, record, (), None, nfix, nfix_d)


@dataclass
class SearchReport:
    base: TrialSpec
    trials: int
    passing: int
    outcomes: Counter = field(default_factory=Counter)
    hypothesis_failures: Counter = field(default_factory=Counter)
    violations: list[TrialOutcome] = field(default_factory=list)
    ablation_probes: int = 0
    ablation_probe_violations: int = 0
    fix_sizes: Counter = field(default_factory=Counter)
    replay_files: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 1 if self.violations else 0

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "trials": self.trials,
            "passing_hypotheses": self.passing,
            "outcomes": dict(sorted(self.outcomes.items())),
            "hypothesis_failures": dict(sorted(self.hypothesis_failures.items())),
            "violations": [v.to_dict() for v in self.violations],
            "ablation": {
                "hypothesis": self.base.ablation,
                "probing_trials": self.ablation_probes,
                "probing_violations": self.ablation_probe_violations,
            },
            "fix_sizes": {str(k): v for k, v in sorted(self.fix_sizes.items())},
            "replay_files": self.replay_files,
        }


def _fold(report: SearchReport, outcome: TrialOutcome) -> None:
    report.outcomes[outcome.status] += 1
    for h in outcome.failed:
        report.hypothesis_failures[h] += 1
    if outcome.status == "hypotheses_failed":
        return
    report.passing += 1
    if outcome.fix is not None:
        report.fix_sizes[outcome.fix] += 1
    if outcome.ablated_failed:
        report.ablation_probes += 1
        report.ablation_probe_violations += outcome.status == "violation"
    if outcome.status == "violation":
        report.violations.append(outcome)


def trial_specs(base: TrialSpec, count: int) -> list[TrialSpec]:
    return [replace(base, seed=base.seed + i) for i in range(count)]


def write_replay(outcome: TrialOutcome, directory: str | Path) -> Path:
    """Standalone spec that reproduces a violating trial with :func:`run_trial`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"violation-{outcome.spec.seed}.json"
    payload = {"spec": outcome.spec.to_dict(), "witness": outcome.witness}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def run_campaign(
    base: TrialSpec, count: int, parallelism: int = 1, replay_dir: str | Path | None = None
) -> SearchReport:
    """Run ``count`` trials with seeds ``base.seed + i``; serial and parallel runs give the same report."""
    if count < 1:
        raise ConfigError("count must be at least 1")
    specs = trial_specs(base, count)
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(run_trial, specs, chunksize=max(1, count // (4 * parallelism))))
    else:
        outcomes = [run_trial(s) for s in specs]
    report = SearchReport(base, count, 0)
    for outcome in outcomes:
        _fold(report, outcome)
    if replay_dir is not None:
        report.replay_files = [str(write_replay(v, replay_dir)) for v in report.violations]
    return report


@dataclass(frozen=True)
class CampaignConfig:
    base: TrialSpec
    count: int
    parallelism: int = 1
    replay_dir: str | None = None

    @classmethod
    def from_dict(cls, data: Any) -> "CampaignConfig":
        if not isinstance(data, dict):
            raise ConfigError("campaign config must be a JSON object")
        data = dict(data)
        count = data.pop("count", None)
        parallelism = data.pop("parallelism", 1)
        replay_dir = data.pop("replay_dir", None)
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigError("count must be a positive integer")
        if isinstance(parallelism, bool) or not isinstance(parallelism, int) or parallelism < 1:
            raise ConfigError("parallelism must be a positive integer")
        return cls(TrialSpec.from_dict(data), count, parallelism, replay_dir)
