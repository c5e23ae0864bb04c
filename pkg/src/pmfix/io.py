"""File formats and report rendering.

Space files::

    {"labels": ["p0", ...], "d": [[...], ...]}            finite
    {"family": "max_on_rplus", "params": {"region": [0, 1]}}
    {"family": "intervals", "params": {...}}
    {"family": "weighted", "params": {"knots": [...], "values": [...]}}

Map files::

    {"table": [0, 0, 1]}          indices or labels
    {"family": "halving"}  |  {"family": "affine", "params": {"a": 0.5, "b": 0}}
    {"expr": "max(x/2, 0)"}

JSON output uses Python's shortest round-trip float repr, so written reports
read back bit-exactly.  Non-finite floats are written as strings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .contraction import Affine, Halving, SelfMap, TableMap, expr_map
from .errors import MalformedInput
from .spaces import FiniteSpace, Intervals, MaxOnRPlus, PartialMetricSpace, WeightedMetric

FAMILIES = {"max_on_rplus": MaxOnRPlus, "intervals": Intervals, "weighted": WeightedMetric}


def _reject_constant(name: str):
    raise MalformedInput(f"non-finite number {name} is not accepted")


def loads(text: str, what: str = "input") -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{what}: invalid JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None


def load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False)


def fmt(x: Any) -> str:
    """Six significant digits for human-readable output."""
    if x is None:
        return "-"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


# ---------------------------------------------------------------------------
# spaces and maps
# ---------------------------------------------------------------------------


def _object(data: Any, what: str) -> dict:
    if not isinstance(data, dict):
        raise MalformedInput(f"{what} must be a JSON object")
    return data


def _number(v: Any, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedInput(f"{what} must be a number, got {v!r}")
    return float(v)


def space_from_dict(data: Any) -> PartialMetricSpace:
    data = _object(data, "space")
    if "d" in data:
        extra = set(data) - {"labels", "d"}
        if extra:
            raise MalformedInput(f"unknown space keys: {', '.join(sorted(extra))}")
        table = data["d"]
        if not isinstance(table, list) or not all(isinstance(r, list) for r in table):
            raise MalformedInput("space 'd' must be a list of rows")
        rows = [[_number(v, "distance entry") for v in r] for r in table]
        labels = data.get("labels")
        if labels is not None and (not isinstance(labels, list) or not all(isinstance(s, str) for s in labels)):
            raise MalformedInput("space 'labels' must be a list of strings")
        return FiniteSpace.from_table(rows, labels)
    family = data.get("family")
    if family not in FAMILIES:
        raise MalformedInput(f"space needs 'd' or a family in {{{', '.join(FAMILIES)}}}, got {family!r}")
    params = _object(data.get("params", {}), "space params")
    kw: dict[str, Any] = {}
    for key, val in params.items():
        if key == "region" or (family == "weighted" and key in ("knots", "values")):
            if not isinstance(val, list):
                raise MalformedInput(f"space param {key!r} must be a list")
            kw[key] = tuple(_number(v, key) for v in val)
        else:
            raise MalformedInput(f"unknown param {key!r} for family {family}")
    return FAMILIES[family](**kw)


def space_to_dict(space: PartialMetricSpace) -> dict:
    if isinstance(space, FiniteSpace):
        return {"labels": list(space.labels), "d": space.dtable.tolist()}
    return {"family": space.family, "params": space.params}


def load_space(path: str | Path) -> PartialMetricSpace:
    return space_from_dict(load_json(path))


def parse_point(space: PartialMetricSpace, text: str) -> Any:
    """A point from its command-line or CSV text: a label or index (finite), a real, or ``a,b`` (intervals)."""
    text = text.strip()
    if isinstance(space, FiniteSpace):
        if text in space.labels:
            return space.labels.index(text)
        try:
            return space.index(int(text))
        except ValueError:
            raise MalformedInput(f"unknown point {text!r}") from None
    try:
        if isinstance(space, Intervals):
            a, b = (float(v) for v in text.strip("[]()").split(","))
            point: Any = (a, b)
        else:
            point = float(text)
    except ValueError:
        raise MalformedInput(f"cannot read a point of {space.family} from {text!r}") from None
    if not all(math.isfinite(v) for v in np.ravel(point)):
        raise MalformedInput(f"non-finite point {text!r}")
    space.check_point(point)
    return point


def map_from_dict(data: Any, space: PartialMetricSpace) -> SelfMap:
    data = _object(data, "map")
    if "table" in data:
        table = data["table"]
        if not isinstance(table, list):
            raise MalformedInput("map 'table' must be a list")
        if not isinstance(space, FiniteSpace):
            raise MalformedInput("table maps need a finite space")
        idx = []
        for j in table:
            if isinstance(j, str):
                idx.append(parse_point(space, j))
            elif isinstance(j, int) and not isinstance(j, bool):
                idx.append(j)
            else:
                raise MalformedInput(f"map table entry {j!r} is neither an index nor a label")
        T: SelfMap = TableMap(idx)
    elif "expr" in data:
        if not isinstance(data["expr"], str):
            raise MalformedInput("map 'expr' must be a string")
        T = expr_map(data["expr"])
    else:
        family = data.get("family")
        params = _object(data.get("params", {}), "map params")
        if family == "halving":
            if params:
                raise MalformedInput("halving takes no params")
            T = Halving()
        elif family == "affine":
            unknown = set(params) - {"a", "b"}
            if unknown or "a" not in params:
                raise MalformedInput("affine params are 'a' (required) and 'b'")
            T = Affine(_number(params["a"], "a"), _number(params.get("b", 0.0), "b"))
        else:
            raise MalformedInput(f"map needs 'table', 'expr' or a family in {{halving, affine}}, got {family!r}")
    T.validate(space)
    return T


def load_map(path: str | Path, space: PartialMetricSpace) -> SelfMap:
    return map_from_dict(load_json(path), space)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def read_sequence(path: str | Path, space: PartialMetricSpace) -> list:
    """One point per line; blank lines are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from None
    seq = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or not "".join(row).strip():
            continue
        try:
            seq.append(parse_point(space, ",".join(row)))
        except MalformedInput as exc:
            raise MalformedInput(f"{path}:{lineno}: {exc}") from None
    return seq


def trace_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def table_text(labels: list[str], table: np.ndarray) -> str:
    """Aligned matrix with row and column labels."""
    cells = [[""] + list(labels)] + [[lab] + [fmt(float(v)) for v in row] for lab, row in zip(labels, table)]
    width = max(len(c) for r in cells for c in r)
    return "\n".join("  ".join(c.rjust(width) for c in r) for r in cells)

