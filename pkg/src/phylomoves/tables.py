"""Tables of flows, considered up to row permutation.

A :class:`Table` remembers the row order it was built with (the reducer needs
a fixed order to talk about "row i"), but equality and hashing only look at
the sorted rows.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from .errors import ParseError, StructuralError, ValidationError
from .flows import Flow
from .group import GroupSpec, parse_group

Signature = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class Table:
    spec: GroupSpec
    n: int
    rows: Tuple[Flow, ...]

    def __post_init__(self):
        if self.n < 1:
            raise StructuralError("tables need n >= 1 columns")
        rows = tuple(tuple(r) for r in self.rows)
        total = self.spec.total
        for pos, row in enumerate(rows):
            if len(row) != self.n:
                raise StructuralError(f"row {pos + 1} has {len(row)} entries, expected {self.n}")
            if total(row) != 0:
                raise ValidationError(f"row {pos + 1} ({self._fmt(row)}) is not a flow")
        object.__setattr__(self, "rows", rows)

    def _fmt(self, row):
        return " ".join(self.spec.format_element(e) for e in row)

    @classmethod
    def from_entries(cls, spec: GroupSpec, rows: Iterable[Iterable], n: int | None = None) -> "Table":
        """Build from rows of indices or residue vectors."""
        rows = [tuple(spec.coerce(e) for e in r) for r in rows]
        if n is None:
            if not rows:
                raise StructuralError("n is required for an empty table")
            n = len(rows[0])
        return cls(spec, n, tuple(rows))

    @property
    def degree(self) -> int:
        return len(self.rows)

    @property
    def key(self) -> Tuple[Flow, ...]:
        return tuple(sorted(self.rows))

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        return self.spec == other.spec and self.n == other.n and self.key == other.key

    def __hash__(self):
        return hash((self.spec, self.n, self.key))

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __repr__(self):
        body = "; ".join(self._fmt(r) for r in self.rows)
        return f"Table({self.spec.literal}, n={self.n}, [{body}])"

    def with_rows(self, rows) -> "Table":
        return Table(self.spec, self.n, tuple(rows))

    def column(self, i: int) -> Tuple[int, ...]:
        return tuple(r[i] for r in self.rows)


def signature_of_rows(rows: Iterable[Sequence[int]], n: int, order: int) -> Signature:
    counts = [[0] * order for _ in range(n)]
    for row in rows:
        for i, g in enumerate(row):
            counts[i][g] += 1
    return tuple(tuple(c) for c in counts)


def column_signature(t: Table) -> Signature:
    return signature_of_rows(t.rows, t.n, t.spec.order)


def signature_hash(sig: Signature) -> str:
    payload = ";".join(",".join(str(c) for c in col) for col in sig).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def _check_same_shape(a: Table, b: Table):
    if a.spec != b.spec:
        raise StructuralError(f"tables over different groups: {a.spec.literal} vs {b.spec.literal}")
    if a.n != b.n:
        raise StructuralError(f"tables with different column counts: {a.n} vs {b.n}")


def compatible(a: Table, b: Table) -> bool:
    _check_same_shape(a, b)
    return column_signature(a) == column_signature(b)


def canonicalize(t: Table) -> Table:
    return Table(t.spec, t.n, t.key)


# text format

def serialize_table(t: Table, canonical: bool = True) -> str:
    rows = t.key if canonical else t.rows
    lines = [f"group: {t.spec.literal}", f"n: {t.n}", "rows:"]
    lines.extend(t._fmt(r) for r in rows)
    return "\n".join(lines) + "\n"


def serialize_pair(t0: Table, t1: Table, canonical: bool = True) -> str:
    return serialize_table(t0, canonical) + "---\n" + serialize_table(t1, canonical)


def _parse_block(lines: List[Tuple[int, str]]) -> Table:
    spec = None
    n = None
    rows = []
    row_lines = []
    in_rows = False
    for lineno, raw in lines:
        text = raw.strip()
        if in_rows:
            tokens = []
            pos = 0
            for tok in raw.split():
                col = raw.index(tok, pos)
                pos = col + len(tok)
                tokens.append((tok, col + 1))
            if len(tokens) != n:
                raise ParseError(f"row has {len(tokens)} entries, expected n={n}", lineno)
            rows.append(tuple(spec.parse_element(tok, lineno, col) for tok, col in tokens))
            row_lines.append(lineno)
            continue
        key, sep, value = text.partition(":")
        key = key.strip().lower()
        if not sep:
            raise ParseError(f"expected 'key: value', got {text!r}", lineno)
        if key == "group":
            spec = parse_group(value)
        elif key == "n":
            try:
                n = int(value)
            except ValueError:
                raise ParseError(f"bad column count {value.strip()!r}", lineno) from None
            if n < 1:
                raise ParseError("n must be >= 1", lineno)
        elif key == "rows":
            if spec is None or n is None:
                raise ParseError("'group' and 'n' must precede 'rows'", lineno)
            in_rows = True
        else:
            raise ParseError(f"unknown key {key!r}", lineno)
    if spec is None or n is None or not in_rows:
        raise ParseError("table block needs 'group', 'n' and 'rows'")
    for row, lineno in zip(rows, row_lines):
        if spec.total(row) != 0:
            raise ValidationError(
                f"line {lineno}: row ({' '.join(spec.format_element(e) for e in row)}) is not a flow"
            )
    return Table(spec, n, tuple(rows))


def _blocks(text: str) -> List[List[Tuple[int, str]]]:
    blocks = [[]]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped == "---":
            blocks.append([])
            continue
        blocks[-1].append((lineno, raw))
    return blocks


def parse_table(text: str) -> Table:
    blocks = _blocks(text)
    if len(blocks) != 1:
        raise ParseError(f"expected one table block, found {len(blocks)}")
    return _parse_block(blocks[0])


def parse_pair(text: str) -> Tuple[Table, Table]:
    blocks = _blocks(text)
    if len(blocks) != 2:
        raise ParseError(f"a pair file needs exactly two blocks separated by '---', found {len(blocks)}")
    return _parse_block(blocks[0]), _parse_block(blocks[1])
