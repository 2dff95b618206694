"""Moves between tables: replace a few rows by column-compatible flows.

Moves name rows by value (with multiplicity), never by position, since tables
are multisets.  ``completions`` is the workhorse: it lists every multiset of
flows with a prescribed column signature, and both move enumeration and the
fiber engine are built on it.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .errors import CapacityError, InapplicableMoveError, InvalidMoveError, StructuralError
from .flows import Flow
from .group import GroupSpec
from .tables import Signature, Table, signature_of_rows

DEFAULT_COMPLETION_CAP = 10**6


def completion_cap() -> int:
    return int(os.environ.get("PHYLOMOVES_COMPLETION_CAP", DEFAULT_COMPLETION_CAP))


@dataclass(frozen=True)
class Move:
    removed: Tuple[Flow, ...]
    added: Tuple[Flow, ...]

    def __post_init__(self):
        object.__setattr__(self, "removed", tuple(sorted(tuple(r) for r in self.removed)))
        object.__setattr__(self, "added", tuple(sorted(tuple(r) for r in self.added)))

    @property
    def degree(self) -> int:
        return len(self.removed)

    @property
    def is_identity(self) -> bool:
        return self.removed == self.added

    def inverse(self) -> "Move":
        return Move(self.added, self.removed)


@dataclass(frozen=True)
class QuadraticMoveSpec:
    i: int
    j: int
    columns: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "columns", frozenset(self.columns))


def validate_move(m: Move, spec: GroupSpec, n: int) -> None:
    if m.degree < 1 or len(m.added) != m.degree:
        raise InvalidMoveError(f"move removes {len(m.removed)} rows and adds {len(m.added)}")
    for row in m.removed + m.added:
        if len(row) != n:
            raise StructuralError(f"move row {row} has {len(row)} entries, expected {n}")
    for row in m.added:
        if spec.total(row) != 0:
            raise InvalidMoveError(f"added row {row} is not a flow")
    if signature_of_rows(m.removed, n, spec.order) != signature_of_rows(m.added, n, spec.order):
        raise InvalidMoveError("removed and added rows have different column signatures")


def quadratic_rows(r: Sequence[int], s: Sequence[int], columns) -> Tuple[Flow, Flow]:
    """Swap the entries of two rows on ``columns``; no validity check."""
    cols = set(columns)
    new_r = tuple(s[k] if k in cols else r[k] for k in range(len(r)))
    new_s = tuple(r[k] if k in cols else s[k] for k in range(len(s)))
    return new_r, new_s


def make_quadratic_move(t: Table, qs: QuadraticMoveSpec) -> Move:
    """The degree-2 move swapping rows ``qs.i`` and ``qs.j`` on ``qs.columns`` (0-based)."""
    if qs.i == qs.j:
        raise InvalidMoveError("a quadratic move needs two distinct rows")
    for idx in (qs.i, qs.j):
        if not 0 <= idx < t.degree:
            raise InvalidMoveError(f"row index {idx} out of range for a table with {t.degree} rows")
    if not qs.columns:
        raise InvalidMoveError("the exchanged column set must be nonempty")
    if any(not 0 <= c < t.n for c in qs.columns):
        raise InvalidMoveError(f"column index out of range in {sorted(qs.columns)}")
    r, s = t.rows[qs.i], t.rows[qs.j]
    spec = t.spec
    diff = spec.total(spec.minus(r[c], s[c]) for c in qs.columns)
    if diff != 0:
        raise InvalidMoveError(
            f"differences on columns {sorted(qs.columns)} sum to {spec.format_element(diff)}, not zero"
        )
    new_r, new_s = quadratic_rows(r, s, qs.columns)
    return Move((r, s), (new_r, new_s))


def subtract_rows(rows: Sequence[Flow], removed: Sequence[Flow]) -> List[Flow]:
    """Multiset difference, keeping the order of ``rows``; raises if not a sub-multiset."""
    need = Counter(removed)
    out = []
    for row in rows:
        if need.get(row, 0) > 0:
            need[row] -= 1
        else:
            out.append(row)
    if any(v > 0 for v in need.values()):
        missing = [r for r, v in need.items() if v > 0]
        raise InapplicableMoveError(f"rows {missing} are not present in the table")
    return out


def replace_rows(rows: Sequence[Flow], m: Move) -> List[Flow]:
    """Apply ``m`` keeping the surviving rows in place and the added rows in the vacated slots."""
    need = Counter(m.removed)
    added = list(m.added)
    out = []
    for row in rows:
        if need.get(row, 0) > 0:
            need[row] -= 1
            out.append(added.pop(0))
        else:
            out.append(row)
    if any(v > 0 for v in need.values()):
        missing = [r for r, v in need.items() if v > 0]
        raise InapplicableMoveError(f"rows {missing} are not present in the table")
    return out


def apply_move(t: Table, m: Move) -> Table:
    if len(m.removed) != len(m.added):
        raise InvalidMoveError("removed and added sizes differ")
    rest = subtract_rows(t.rows, m.removed)
    return Table(t.spec, t.n, tuple(sorted(rest + list(m.added))))


def find_zero_sum_subset(deltas: Sequence, spec: GroupSpec) -> Optional[List[int]]:
    """Return 0-based positions of a nonempty zero-sum sub-collection, or None.

    Prefix sums are scanned first; the first repeated value gives a contiguous
    run, which always exists once ``len(deltas) >= |G|``.  Shorter lists that
    have no such run fall back to trying subsets by size, then lexicographically.
    """
    values = [spec.coerce(x) for x in deltas]
    add = spec.add_table
    seen = {0: 0}
    s = 0
    for pos, x in enumerate(values, start=1):
        s = add[s][x]
        if s in seen:
            return list(range(seen[s], pos))
        seen[s] = pos
    for size in range(1, len(values) + 1):
        for combo in combinations(range(len(values)), size):
            if spec.total(values[c] for c in combo) == 0:
                return list(combo)
    return None


def subsets_with_sum(values: Sequence[int], target: int, spec: GroupSpec, limit: int = 1,
                     max_size: int | None = None) -> List[Tuple[int, ...]]:
    """Index subsets (possibly empty) of ``values`` summing to ``target``, smallest first."""
    out = []
    top = len(values) if max_size is None else min(max_size, len(values))
    for size in range(0, top + 1):
        for combo in combinations(range(len(values)), size):
            if spec.total(values[c] for c in combo) == target:
                out.append(combo)
                if len(out) >= limit:
                    return out
    return out


@lru_cache(maxsize=1 << 16)
def _completions(spec: GroupSpec, sig: Signature, cap: int) -> Tuple[Tuple[Flow, ...], ...]:
    n = len(sig)
    d = sum(sig[0]) if n else 0
    order = spec.order
    add = spec.add_table
    neg = spec.neg_table
    counts = [list(c) for c in sig]
    results: List[Tuple[Flow, ...]] = []
    rows: List[Flow] = []

    def place_row(r: int):
        if r == d:
            results.append(tuple(rows))
            if len(results) > cap:
                raise CapacityError(
                    f"signature has more than {cap} completions", size=len(results), cap=cap, signature=sig
                )
            return
        prev = rows[-1] if rows else None
        fill(0, 0, prev is not None, prev, r, [0] * n)

    def fill(c: int, partial: int, tight: bool, prev, r: int, row: List[int]):
        cnt = counts[c]
        if c == n - 1:
            g = neg[partial]
            if cnt[g] == 0 or (tight and g < prev[c]):
                return
            row[c] = g
            cnt[g] -= 1
            rows.append(tuple(row))
            place_row(r + 1)
            rows.pop()
            cnt[g] += 1
            return
        lo = prev[c] if tight else 0
        for g in range(lo, order):
            if cnt[g] == 0:
                continue
            row[c] = g
            cnt[g] -= 1
            fill(c + 1, add[partial][g], tight and g == lo, prev, r, row)
            cnt[g] += 1

    if d == 0:
        return ((),)
    place_row(0)
    return tuple(results)


def completions(spec: GroupSpec, sig: Signature, cap: int | None = None) -> Tuple[Tuple[Flow, ...], ...]:
    """Every sorted multiset of flows with column signature ``sig``."""
    cap = completion_cap() if cap is None else cap
    sig = tuple(tuple(c) for c in sig)
    if len(sig) and any(len(c) != spec.order for c in sig):
        raise StructuralError("signature width does not match the group order")
    return _completions(spec, sig, cap)


def sub_multisets(rows: Sequence[Flow], size: int) -> List[Tuple[Flow, ...]]:
    """Distinct sorted sub-multisets of ``rows`` of the given size."""
    ordered = sorted(rows)
    seen = dict.fromkeys(combinations(ordered, size))
    return list(seen)


def enumerate_moves(t: Table, k: int, min_degree: int = 2) -> Iterator[Move]:
    """All non-identity moves of degree ``min_degree..k`` applicable to ``t``."""
    spec, n, order = t.spec, t.n, t.spec.order
    for size in range(max(2, min_degree), min(k, t.degree) + 1):
        for removed in sub_multisets(t.rows, size):
            sig = signature_of_rows(removed, n, order)
            for added in completions(spec, sig):
                if added != removed:
                    yield Move(removed, added)


def quadratic_moves_between(t: Table, i: int, j: int) -> Iterator[Tuple[FrozenSet[int], Move]]:
    """Every valid quadratic move on rows ``i`` and ``j`` (brute force over column sets)."""
    for size in range(1, t.n + 1):
        for cols in combinations(range(t.n), size):
            qs = QuadraticMoveSpec(i, j, frozenset(cols))
            try:
                yield qs.columns, make_quadratic_move(t, qs)
            except InvalidMoveError:
                continue


# JSON wire form: {"side": 0|1, "removed": [[...]], "added": [[...]]}

def element_to_json(spec: GroupSpec, g: int):
    if spec.rank == 1:
        return g
    return spec.format_element(g)


def element_from_json(spec: GroupSpec, value) -> int:
    if isinstance(value, bool):
        raise StructuralError(f"bad element literal {value!r}")
    if isinstance(value, int):
        if spec.rank != 1:
            raise StructuralError(f"integer literal {value} is ambiguous for {spec.literal}")
        if not 0 <= value < spec.order:
            raise StructuralError(f"residue {value} out of range for {spec.literal}")
        return value
    if isinstance(value, str):
        return spec.parse_element(value)
    raise StructuralError(f"bad element literal {value!r}")


def rows_to_json(spec: GroupSpec, rows) -> list:
    return [[element_to_json(spec, g) for g in row] for row in rows]


def move_to_json(spec: GroupSpec, side: int, m: Move) -> dict:
    return {"side": side, "removed": rows_to_json(spec, m.removed), "added": rows_to_json(spec, m.added)}
