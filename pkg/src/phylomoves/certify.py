"""Move-sequence certificates and a verifier that trusts nothing.

The verifier deliberately re-derives everything from residues: flow checks,
per-column multisets and multiset subtraction are recomputed here instead of
being borrowed from the reducer.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .errors import PhyloMovesError
from .group import GroupSpec, parse_group
from .moves import Move, element_from_json, rows_to_json

NOT_A_FLOW = "NOT_A_FLOW"
SIGNATURE_MISMATCH = "SIGNATURE_MISMATCH"
DEGREE_EXCEEDED = "DEGREE_EXCEEDED"
INAPPLICABLE = "INAPPLICABLE"
FINAL_MISMATCH = "FINAL_MISMATCH"

KNOWN_FIELDS = ("group", "n", "k", "t0", "t1", "steps")


class CertificateParseError(PhyloMovesError, ValueError):
    def __init__(self, message, path="/"):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class Certificate:
    group: str
    n: int
    k: int
    t0: Tuple[Tuple[int, ...], ...]
    t1: Tuple[Tuple[int, ...], ...]
    steps: List[Tuple[int, Move]] = field(default_factory=list)

    @property
    def spec(self) -> GroupSpec:
        return parse_group(self.group)

    @property
    def max_degree(self) -> int:
        return max((m.degree for _, m in self.steps), default=0)

    @classmethod
    def from_trace(cls, t0, t1, trace) -> "Certificate":
        steps = [(s.side, s.move) for s in trace.steps]
        k = max(2, max((m.degree for _, m in steps), default=0))
        return cls(t0.spec.literal, t0.n, k, t0.key, t1.key, steps)

    def to_json(self) -> dict:
        spec = self.spec
        return {
            "group": self.group,
            "n": self.n,
            "k": self.k,
            "t0": rows_to_json(spec, sorted(self.t0)),
            "t1": rows_to_json(spec, sorted(self.t1)),
            "steps": [
                {"side": side, "removed": rows_to_json(spec, m.removed), "added": rows_to_json(spec, m.added)}
                for side, m in self.steps
            ],
        }

    def dumps(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json(), indent=indent)


def _int_field(obj, key, path):
    if key not in obj:
        raise CertificateParseError("missing field", f"{path}/{key}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise CertificateParseError(f"expected an integer, got {value!r}", f"{path}/{key}")
    return value


def _rows(spec: GroupSpec, value, n: int, path: str):
    if not isinstance(value, list):
        raise CertificateParseError("expected a list of rows", path)
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise CertificateParseError("expected a row (list of elements)", f"{path}/{i}")
        if len(row) != n:
            raise CertificateParseError(f"row has {len(row)} entries, expected n={n}", f"{path}/{i}")
        entries = []
        for c, x in enumerate(row):
            try:
                entries.append(element_from_json(spec, x))
            except (PhyloMovesError, ValueError) as exc:
                raise CertificateParseError(str(exc), f"{path}/{i}/{c}") from None
        rows.append(tuple(entries))
    return rows


def parse_certificate(data) -> Certificate:
    """Parse a JSON string or an already-decoded object."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CertificateParseError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise CertificateParseError("expected a JSON object")
    extra = sorted(set(data) - set(KNOWN_FIELDS))
    if extra:
        warnings.warn(f"ignoring unknown certificate fields: {', '.join(extra)}", stacklevel=2)
    if "group" not in data:
        raise CertificateParseError("missing field", "/group")
    if not isinstance(data["group"], str):
        raise CertificateParseError("expected a group literal", "/group")
    try:
        spec = parse_group(data["group"])
    except PhyloMovesError as exc:
        raise CertificateParseError(str(exc), "/group") from None
    n = _int_field(data, "n", "")
    if n < 1:
        raise CertificateParseError("n must be >= 1", "/n")
    k = _int_field(data, "k", "")
    for key in ("t0", "t1", "steps"):
        if key not in data:
            raise CertificateParseError("missing field", f"/{key}")
    t0 = _rows(spec, data["t0"], n, "/t0")
    t1 = _rows(spec, data["t1"], n, "/t1")
    if not isinstance(data["steps"], list):
        raise CertificateParseError("expected a list", "/steps")
    steps = []
    for i, raw in enumerate(data["steps"]):
        path = f"/steps/{i}"
        if not isinstance(raw, dict):
            raise CertificateParseError("expected an object", path)
        side = _int_field(raw, "side", path)
        if side not in (0, 1):
            raise CertificateParseError("side must be 0 or 1", f"{path}/side")
        for key in ("removed", "added"):
            if key not in raw:
                raise CertificateParseError("missing field", f"{path}/{key}")
        removed = _rows(spec, raw["removed"], n, f"{path}/removed")
        added = _rows(spec, raw["added"], n, f"{path}/added")
        steps.append((side, Move(tuple(removed), tuple(added))))
    return Certificate(spec.literal, n, k, tuple(sorted(t0)), tuple(sorted(t1)), steps)


def load_certificate(path) -> Certificate:
    with open(path, encoding="utf-8") as fh:
        return parse_certificate(fh.read())


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: Optional[str] = None
    step: Optional[int] = None
    detail: str = ""

    def __bool__(self):
        return self.accepted

    def __str__(self):
        if self.accepted:
            return "accept"
        where = "initial tables" if self.step is None else f"step {self.step}"
        return f"reject {self.reason} at {where}: {self.detail}"


def _reject(reason, step, detail):
    return Verdict(False, reason, step, detail)


def verify_certificate(cert: Certificate) -> Verdict:
    """Replay every step; ``step`` in a rejection is 0-based."""
    try:
        spec = parse_group(cert.group)
    except PhyloMovesError as exc:
        return _reject(INAPPLICABLE, None, f"bad group: {exc}")
    factors = spec.factors
    residues = [spec.residues(i) for i in range(spec.order)]
    n = cert.n

    def is_flow(row) -> bool:
        if len(row) != n:
            return False
        for f, m in enumerate(factors):
            if sum(residues[g][f] for g in row) % m:
                return False
        return True

    def columns(rows):
        return [Counter(row[c] for row in rows) for c in range(n)]

    for name, rows in (("t0", cert.t0), ("t1", cert.t1)):
        for i, row in enumerate(rows):
            if not is_flow(row):
                return _reject(NOT_A_FLOW, None, f"{name} row {i} is not a flow")
    state = [Counter(map(tuple, cert.t0)), Counter(map(tuple, cert.t1))]
    for idx, (side, move) in enumerate(cert.steps):
        removed = [tuple(r) for r in move.removed]
        added = [tuple(r) for r in move.added]
        if side not in (0, 1) or not removed:
            return _reject(INAPPLICABLE, idx, "a move must name side 0 or 1 and remove at least one row")
        if len(removed) > cert.k or len(added) > cert.k:
            return _reject(DEGREE_EXCEEDED, idx, f"degree {max(len(removed), len(added))} > k={cert.k}")
        for row in added:
            if not is_flow(row):
                return _reject(NOT_A_FLOW, idx, f"added row {row} is not a flow")
        if len(removed) != len(added) or columns(removed) != columns(added):
            return _reject(SIGNATURE_MISMATCH, idx, "removed and added rows differ column-wise")
        want = Counter(removed)
        have = state[side]
        if any(have[row] < c for row, c in want.items()):
            return _reject(INAPPLICABLE, idx, f"removed rows are not all present in table {side}")
        state[side] = have - want + Counter(added)
    if +state[0] != +state[1]:
        return _reject(FINAL_MISMATCH, len(cert.steps), "replayed tables differ")
    return Verdict(True)
