"""Finite abelian groups presented as products of cyclic groups.

Elements travel through the library as integer indices in ``[0, |G|)``
(mixed radix, first factor most significant).  Residue vectors are only used
at the edges: literals, the ``add``/``neg`` helpers below, and I/O.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from math import prod
from typing import Sequence, Tuple

from .errors import ParseError, StructuralError

Residues = Tuple[int, ...]

_FACTOR_RE = re.compile(r"z(\d+)", re.IGNORECASE)


@dataclass(frozen=True)
class GroupSpec:
    factors: Tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(m) for m in self.factors)
        if not factors:
            raise StructuralError("a group needs at least one cyclic factor")
        for m in factors:
            if m < 2:
                raise StructuralError(f"cyclic factor must be >= 2, got {m}")
        object.__setattr__(self, "factors", factors)

    @property
    def order(self) -> int:
        return prod(self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def literal(self) -> str:
        return "x".join(f"Z{m}" for m in self.factors)

    def __str__(self):
        return self.literal

    @cached_property
    def _weights(self) -> Tuple[int, ...]:
        weights = []
        w = 1
        for m in reversed(self.factors):
            weights.append(w)
            w *= m
        return tuple(reversed(weights))

    @cached_property
    def add_table(self) -> Tuple[Tuple[int, ...], ...]:
        elems = [self.residues(i) for i in range(self.order)]
        return tuple(
            tuple(self.index(tuple((x + y) % m for x, y, m in zip(a, b, self.factors))) for b in elems)
            for a in elems
        )

    @cached_property
    def neg_table(self) -> Tuple[int, ...]:
        return tuple(
            self.index(tuple((-x) % m for x, m in zip(self.residues(i), self.factors)))
            for i in range(self.order)
        )

    def index(self, residues: Sequence[int]) -> int:
        if len(residues) != len(self.factors):
            raise StructuralError(
                f"element has {len(residues)} residues, {self.literal} has {len(self.factors)} factors"
            )
        return sum((r % m) * w for r, m, w in zip(residues, self.factors, self._weights))

    def residues(self, index: int) -> Residues:
        if not 0 <= index < self.order:
            raise StructuralError(f"element index {index} out of range for {self.literal}")
        return tuple((index // w) % m for m, w in zip(self.factors, self._weights))

    def coerce(self, x) -> int:
        """Accept an index or a residue vector, return the index."""
        if isinstance(x, (tuple, list)):
            return self.index(x)
        x = int(x)
        if not 0 <= x < self.order:
            raise StructuralError(f"element index {x} out of range for {self.literal}")
        return x

    # index-level arithmetic, the hot path
    def plus(self, i: int, j: int) -> int:
        return self.add_table[i][j]

    def minus(self, i: int, j: int) -> int:
        return self.add_table[i][self.neg_table[j]]

    def total(self, indices) -> int:
        table = self.add_table
        s = 0
        for i in indices:
            s = table[s][i]
        return s

    def format_element(self, index: int) -> str:
        return ",".join(str(r) for r in self.residues(index))

    def parse_element(self, text: str, line=None, column=None) -> int:
        parts = text.strip().split(",")
        if len(parts) != len(self.factors):
            raise ParseError(
                f"element literal {text!r} needs {len(self.factors)} residue(s) for {self.literal}",
                line, column,
            )
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise ParseError(f"bad element literal {text!r}", line, column) from None
        for v, m in zip(values, self.factors):
            if not 0 <= v < m:
                raise ParseError(f"residue {v} out of range in {text!r} for {self.literal}", line, column)
        return self.index(values)


def parse_group(literal: str) -> GroupSpec:
    """``Z2``, ``Z2xZ2``, ``z4XZ2`` ... -> GroupSpec."""
    text = literal.strip()
    parts = re.split(r"[xX]", text)
    factors = []
    for part in parts:
        m = _FACTOR_RE.fullmatch(part.strip())
        if not m:
            raise ParseError(f"bad group literal {literal!r}")
        factors.append(int(m.group(1)))
    try:
        return GroupSpec(tuple(factors))
    except StructuralError as exc:
        raise ParseError(f"bad group literal {literal!r}: {exc}") from None


def _check(a: Sequence[int], spec: GroupSpec):
    if len(a) != spec.rank:
        raise StructuralError(f"element {tuple(a)} has wrong length for {spec.literal}")


def add(a: Sequence[int], b: Sequence[int], spec: GroupSpec) -> Residues:
    _check(a, spec)
    _check(b, spec)
    return tuple((x + y) % m for x, y, m in zip(a, b, spec.factors))


def neg(a: Sequence[int], spec: GroupSpec) -> Residues:
    _check(a, spec)
    return tuple((-x) % m for x, m in zip(a, spec.factors))


def zero(spec: GroupSpec) -> Residues:
    return (0,) * spec.rank


def element_index(a: Sequence[int], spec: GroupSpec) -> int:
    _check(a, spec)
    return spec.index(a)


def index_element(i: int, spec: GroupSpec) -> Residues:
    return spec.residues(i)


def enumerate_elements(spec: GroupSpec) -> list:
    return [spec.residues(i) for i in range(spec.order)]
