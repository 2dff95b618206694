"""Flows: n-tuples of group elements summing to zero, and their lattice points.

A flow is stored as a plain tuple of element indices.  Enumeration order is
lexicographic in those indices, which is also the order in which the vertex
matrix is emitted.
"""

from __future__ import annotations

import os
from itertools import product
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import CapacityError, StructuralError, ValidationError
from .group import GroupSpec

Flow = Tuple[int, ...]

DEFAULT_FLOW_CAP = 10**7


def flow_cap() -> int:
    return int(os.environ.get("PHYLOMOVES_FLOW_CAP", DEFAULT_FLOW_CAP))


def is_flow(entries: Sequence[int], spec: GroupSpec) -> bool:
    return len(entries) >= 1 and spec.total(entries) == 0


def make_flow(entries: Iterable, spec: GroupSpec) -> Flow:
    """Coerce entries (indices or residue vectors) and check the zero sum."""
    flow = tuple(spec.coerce(e) for e in entries)
    if not flow:
        raise StructuralError("a flow has at least one entry")
    if spec.total(flow) != 0:
        raise ValidationError(
            f"({' '.join(spec.format_element(e) for e in flow)}) does not sum to zero in {spec.literal}"
        )
    return flow


def count_flows(spec: GroupSpec, n: int) -> int:
    if n < 1:
        raise StructuralError("n must be >= 1")
    return spec.order ** (n - 1)


def iter_flows(spec: GroupSpec, n: int):
    neg = spec.neg_table
    for head in product(range(spec.order), repeat=n - 1):
        yield head + (neg[spec.total(head)],)


def enumerate_flows(spec: GroupSpec, n: int, cap: int | None = None) -> List[Flow]:
    total = count_flows(spec, n)
    cap = flow_cap() if cap is None else cap
    if total > cap:
        raise CapacityError(f"{total} flows for {spec.literal}, n={n} exceeds cap {cap}", size=total, cap=cap)
    return list(iter_flows(spec, n))


def flow_to_vertex(flow: Sequence[int], spec: GroupSpec) -> Tuple[int, ...]:
    size = spec.order
    coords = [0] * (len(flow) * size)
    for i, g in enumerate(flow):
        coords[i * size + g] = 1
    return tuple(coords)


def polytope_vertices(spec: GroupSpec, n: int, cap: int | None = None) -> np.ndarray:
    flows = enumerate_flows(spec, n, cap)
    size = spec.order
    out = np.zeros((len(flows), n * size), dtype=np.int64)
    for r, flow in enumerate(flows):
        for i, g in enumerate(flow):
            out[r, i * size + g] = 1
    return out


def format_matrix(matrix) -> str:
    matrix = np.asarray(matrix)
    rows, cols = matrix.shape
    lines = [f"{rows} {cols}"]
    lines.extend(" ".join(str(int(x)) for x in row) for row in matrix)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    rows, cols = (int(x) for x in lines[0].split())
    data = [[int(x) for x in ln.split()] for ln in lines[1 : rows + 1]]
    if len(data) != rows or any(len(r) != cols for r in data):
        raise StructuralError("matrix body does not match its header")
    return np.array(data, dtype=np.int64).reshape(rows, cols)


def translate_flow(flow: Sequence[int], by: Sequence[int], spec: GroupSpec) -> Flow:
    """Coordinatewise action of the flow group."""
    add = spec.add_table
    return tuple(add[a][b] for a, b in zip(flow, by))
