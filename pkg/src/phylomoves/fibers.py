"""Fibers, their connectivity under bounded-degree moves, and Markov widths.

A fiber is the set of all tables sharing one column signature.  Two tables
are joined by an edge of degree k when one becomes the other after replacing
k rows.  The width of a fiber is the least k for which that graph is
connected; the width of (G, n, d) is the maximum over all fibers of degree d.
Widths only ever look at finitely many degrees, so they give lower bounds on
the phylogenetic complexity and evidence (not proof) for upper bounds.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, permutations
from math import comb
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import CapacityError, StructuralError
from .flows import Flow, enumerate_flows, iter_flows
from .group import GroupSpec, parse_group
from .moves import completions
from .tables import Signature, Table, signature_hash, signature_of_rows

log = logging.getLogger(__name__)

DEFAULT_FIBER_CAP = 10**6
DEFAULT_TABLE_CAP = 5 * 10**6

TRUNCATION_CAVEAT = (
    "Widths are computed only for tables of degree <= d_max. The reported value is a lower bound "
    "on phi(G,n); generation in that degree is verified only up to the degree-d_max truncation."
)

RowKey = Tuple[Flow, ...]


def fiber_cap() -> int:
    return int(os.environ.get("PHYLOMOVES_FIBER_CAP", DEFAULT_FIBER_CAP))


def table_cap() -> int:
    return int(os.environ.get("PHYLOMOVES_TABLE_CAP", DEFAULT_TABLE_CAP))


class UnionFind:
    """Union by size with path halving."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size
        self.components = size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


@dataclass(frozen=True)
class FiberKey:
    spec: GroupSpec
    n: int
    d: int
    signature: Signature

    def __post_init__(self):
        sig = tuple(tuple(int(c) for c in col) for col in self.signature)
        if len(sig) != self.n:
            raise StructuralError(f"signature has {len(sig)} columns, expected {self.n}")
        for col in sig:
            if len(col) != self.spec.order or sum(col) != self.d or min(col, default=0) < 0:
                raise StructuralError("every signature column must count d entries over |G| elements")
        weighted = 0
        for col in sig:
            for g, c in enumerate(col):
                for _ in range(c % max(1, self.spec.order)):
                    weighted = self.spec.plus(weighted, g)
        if weighted != 0:
            raise StructuralError("signature is not the signature of any table of flows")
        object.__setattr__(self, "signature", sig)

    @classmethod
    def of(cls, t: Table) -> "FiberKey":
        return cls(t.spec, t.n, t.degree, signature_of_rows(t.rows, t.n, t.spec.order))

    @property
    def hash(self) -> str:
        return signature_hash(self.signature)


def enumerate_fiber(key: FiberKey, cap: int | None = None) -> List[Table]:
    cap = fiber_cap() if cap is None else cap
    keys = completions(key.spec, key.signature, cap)
    return [Table(key.spec, key.n, rows) for rows in keys]


def _neighbours(rows: RowKey, size: int, spec: GroupSpec, n: int):
    """Tables reachable from ``rows`` by one move of degree exactly ``size``."""
    order = spec.order
    seen = set()
    d = len(rows)
    for pos in combinations(range(d), size):
        removed = tuple(rows[p] for p in pos)
        if removed in seen:
            continue
        seen.add(removed)
        chosen = set(pos)
        rest = [rows[p] for p in range(d) if p not in chosen]
        for added in completions(spec, signature_of_rows(removed, n, order)):
            if added != removed:
                yield tuple(sorted(rest + list(added)))


def fiber_min_degree(spec: GroupSpec, n: int, tables: Sequence[RowKey], k_max: int):
    """Least k <= k_max connecting the fiber, or None; plus a witness pair.

    The witness is a pair of tables that are not connected by moves of degree
    below the returned value (or of degree <= k_max when None is returned).
    """
    tables = [tuple(sorted(t)) for t in tables]
    if len(tables) <= 1:
        return 2, None
    index = {t: i for i, t in enumerate(tables)}
    if len(index) != len(tables):
        raise StructuralError("fiber tables must be distinct")
    uf = UnionFind(len(tables))
    d = len(tables[0])
    witness = None
    for k in range(2, k_max + 1):
        witness = _split_pair(uf, tables)
        if k <= d:
            for i, t in enumerate(tables):
                for other in _neighbours(t, k, spec, n):
                    j = index.get(other)
                    if j is None:
                        raise StructuralError("move left the fiber; the table list is incomplete")
                    uf.union(i, j)
                if uf.components == 1:
                    break
        if uf.components == 1:
            return k, witness
    return None, _split_pair(uf, tables)


def fiber_components(spec: GroupSpec, n: int, tables: Sequence[RowKey], k: int) -> List[int]:
    """Component label (smallest member index) of each table under moves of degree <= k."""
    tables = [tuple(sorted(t)) for t in tables]
    index = {t: i for i, t in enumerate(tables)}
    uf = UnionFind(len(tables))
    for size in range(2, k + 1):
        for i, t in enumerate(tables):
            if size > len(t):
                continue
            for other in _neighbours(t, size, spec, n):
                uf.union(i, index[other])
    first: Dict[int, int] = {}
    return [first.setdefault(uf.find(i), i) for i in range(len(tables))]


def _split_pair(uf: UnionFind, tables):
    root = uf.find(0)
    for i in range(1, len(tables)):
        if uf.find(i) != root:
            return tables[0], tables[i]
    return None


def min_connecting_degree(key: FiberKey, k_max: int, cap: int | None = None) -> Optional[int]:
    """Least k <= k_max such that degree-<=k moves connect the fiber; None if none does."""
    cap = fiber_cap() if cap is None else cap
    tables = completions(key.spec, key.signature, cap)
    k, _ = fiber_min_degree(key.spec, key.n, tables, k_max)
    return k


# symmetry: column permutations and zero-sum column translations

def transform_signature(sig: Signature, perm: Sequence[int], shift: Sequence[int], spec: GroupSpec) -> Signature:
    """Column i of the result is column perm[i] of ``sig`` translated by shift[i]."""
    add = spec.add_table
    out = []
    for i, src in enumerate(perm):
        col = sig[src]
        new = [0] * len(col)
        t = shift[i]
        for g, c in enumerate(col):
            new[add[g][t]] = c
        out.append(tuple(new))
    return tuple(out)


def transform_rows(rows: Sequence[Flow], perm: Sequence[int], shift: Sequence[int], spec: GroupSpec) -> RowKey:
    add = spec.add_table
    return tuple(sorted(tuple(add[row[src]][shift[i]] for i, src in enumerate(perm)) for row in rows))


def orbit_key(sig: Signature, spec: GroupSpec) -> Signature:
    n = len(sig)
    shifts = list(iter_flows(spec, n))
    return min(transform_signature(sig, perm, shift, spec) for perm in permutations(range(n)) for shift in shifts)


# result cache

class ResultCache:
    """Append-only JSON-lines log of per-fiber minimal degrees."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._data: Dict[Tuple[str, int, int, str], Tuple[Optional[int], int]] = {}
        if self.path.exists():
            self._replay()

    def _replay(self):
        with self.path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    key = (str(rec["group"]), int(rec["n"]), int(rec["d"]), str(rec["sig"]))
                    md = rec["min_degree"]
                    self._data[key] = (None if md is None else int(md), int(rec["k_max"]))
                except (ValueError, KeyError, TypeError):
                    log.warning("skipping corrupt cache line %d in %s", lineno, self.path)

    def get(self, group: str, n: int, d: int, sig: str, k_max: int):
        """(hit, min_degree) for a query at ``k_max``."""
        rec = self._data.get((group, n, d, sig))
        if rec is None:
            return False, None
        md, cached_kmax = rec
        if md is not None:
            return True, md if md <= k_max else None
        if cached_kmax >= k_max:
            return True, None
        return False, None

    def put(self, group: str, n: int, d: int, sig: str, min_degree: Optional[int], k_max: int):
        with self._lock:
            self._data[(group, n, d, sig)] = (min_degree, k_max)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"group": group, "n": n, "d": d, "sig": sig,
                                     "min_degree": min_degree, "k_max": k_max}) + "\n")

    def __len__(self):
        return len(self._data)


# widths

@dataclass
class FiberResult:
    signature: Signature
    size: int
    min_degree: Optional[int]
    witness: Optional[Tuple[RowKey, RowKey]] = None
    cached: bool = False


@dataclass
class WidthReport:
    spec: GroupSpec
    n: int
    d: int
    k_max: int
    width: Optional[int]
    vacuous: bool
    fibers_total: int
    fibers_examined: int
    tables_total: int
    degree_histogram: Dict[int, int]
    witness: Optional[FiberResult]
    exceeded: List[FiberResult] = field(default_factory=list)
    capped: List[Signature] = field(default_factory=list)
    results: List[FiberResult] = field(default_factory=list)

    @property
    def exceeds(self) -> bool:
        return self.width is None


def group_by_signature(spec: GroupSpec, n: int, d: int, cap: int | None = None) -> Dict[Signature, List[RowKey]]:
    """All d-row tables over (G, n), grouped into fibers (sorted by signature)."""
    flows = enumerate_flows(spec, n)
    total = comb(len(flows) + d - 1, d)
    cap = table_cap() if cap is None else cap
    if total > cap:
        raise CapacityError(f"{total} tables of degree {d} exceed the table cap {cap}", size=total, cap=cap)
    order = spec.order
    groups: Dict[Signature, List[RowKey]] = defaultdict(list)
    for rows in combinations_with_replacement(flows, d):
        groups[signature_of_rows(rows, n, order)].append(rows)
    return dict(sorted(groups.items()))


def _fiber_job(args):
    factors, n, tables, k_max = args
    spec = GroupSpec(factors)
    return fiber_min_degree(spec, n, tables, k_max)


def _run_jobs(jobs_args, jobs: int):
    if jobs <= 1 or len(jobs_args) <= 1:
        return [_fiber_job(a) for a in jobs_args]
    chunk = max(1, len(jobs_args) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_fiber_job, jobs_args, chunksize=chunk))


def markov_width(spec: GroupSpec, n: int, d: int, k_max: int, *, jobs: int = 1,
                 cache: ResultCache | None = None, symmetry: bool = False,
                 fiber_size_cap: int | None = None, skip_capped: bool = False) -> WidthReport:
    """Width of all degree-d fibers over (G, n), each searched up to ``k_max``."""
    if k_max < 2:
        raise StructuralError("k_max must be at least 2")
    size_cap = fiber_cap() if fiber_size_cap is None else fiber_size_cap
    fibers = group_by_signature(spec, n, d)
    tables_total = sum(len(v) for v in fibers.values())

    capped: List[Signature] = []
    results: Dict[Signature, FiberResult] = {}
    pending: List[Signature] = []
    orbit_of: Dict[Signature, Signature] = {}
    representative: Dict[Signature, Signature] = {}

    for sig, tables in fibers.items():
        if len(tables) <= 1:
            results[sig] = FiberResult(sig, len(tables), 2)
            continue
        if len(tables) > size_cap:
            if not skip_capped:
                raise CapacityError(
                    f"fiber {signature_hash(sig)} has {len(tables)} tables, cap {size_cap}",
                    size=len(tables), cap=size_cap, signature=sig,
                )
            capped.append(sig)
            continue
        if symmetry:
            okey = orbit_key(sig, spec)
            orbit_of[sig] = okey
            if okey in representative:
                continue
            representative[okey] = sig
        if cache is not None:
            hit, md = cache.get(spec.literal, n, d, signature_hash(sig), k_max)
            if hit:
                results[sig] = FiberResult(sig, len(tables), md, cached=True)
                continue
        pending.append(sig)

    computed = _run_jobs([(spec.factors, n, fibers[s], k_max) for s in pending], jobs)
    for sig, (md, witness) in zip(pending, computed):
        results[sig] = FiberResult(sig, len(fibers[sig]), md, witness)
        if cache is not None:
            cache.put(spec.literal, n, d, signature_hash(sig), md, k_max)

    if symmetry:
        for sig, okey in orbit_of.items():
            if sig not in results:
                rep = results[representative[okey]]
                results[sig] = FiberResult(sig, len(fibers[sig]), rep.min_degree)

    ordered = [results[s] for s in fibers if s in results]
    nontrivial = [r for r in ordered if r.size >= 2]
    exceeded = [r for r in nontrivial if r.min_degree is None]
    histogram = Counter(r.min_degree for r in nontrivial if r.min_degree is not None)
    if exceeded:
        width = None
        witness = exceeded[0]
    elif nontrivial:
        width = max(r.min_degree for r in nontrivial)
        witness = next(r for r in nontrivial if r.min_degree == width and r.witness is not None) \
            if any(r.min_degree == width and r.witness is not None for r in nontrivial) else None
    else:
        width = 2
        witness = None
    return WidthReport(
        spec=spec, n=n, d=d, k_max=k_max, width=width, vacuous=not nontrivial and not capped,
        fibers_total=len(fibers), fibers_examined=len(computed) + sum(r.cached for r in ordered),
        tables_total=tables_total, degree_histogram=dict(sorted(histogram.items())),
        witness=witness, exceeded=exceeded, capped=capped, results=ordered,
    )


@dataclass
class PhiEvidence:
    spec: GroupSpec
    n: int
    d_max: int
    k_max: int
    reports: List[WidthReport]

    @property
    def width(self) -> Optional[int]:
        if any(r.width is None for r in self.reports):
            return None
        return max([r.width for r in self.reports], default=2)

    @property
    def vacuous(self) -> bool:
        return all(r.vacuous for r in self.reports)

    @property
    def capped(self) -> bool:
        return any(r.capped for r in self.reports)

    @property
    def fibers_examined(self) -> int:
        return sum(r.fibers_examined for r in self.reports)

    def witness_report(self) -> Optional[WidthReport]:
        bad = [r for r in self.reports if r.width is None]
        if bad:
            return bad[0]
        target = self.width
        for r in reversed(self.reports):
            if r.width == target and r.witness is not None:
                return r
        return None

    def degree_histogram(self) -> Dict[int, int]:
        total: Counter = Counter()
        for r in self.reports:
            total.update(r.degree_histogram)
        return dict(sorted(total.items()))

    def to_json(self, config: dict | None = None) -> dict:
        spec = self.spec
        wr = self.witness_report()
        witness = None
        if wr is not None and wr.witness is not None:
            fr = wr.witness
            witness = {
                "d": wr.d,
                "signature": [list(c) for c in fr.signature],
                "signature_hash": signature_hash(fr.signature),
                "min_degree": fr.min_degree,
                "tables": [
                    [[spec.format_element(g) for g in row] for row in t] for t in (fr.witness or ())
                ],
            }
        out = {
            "group": spec.literal,
            "n": self.n,
            "d_max": self.d_max,
            "k_max": self.k_max,
            "width": self.width,
            "vacuous": self.vacuous,
            "witness": witness,
            "fibers_examined": self.fibers_examined,
            "capped": self.capped,
            "degree_histogram": {str(k): v for k, v in self.degree_histogram().items()},
            "per_degree": [
                {"d": r.d, "width": r.width, "vacuous": r.vacuous, "fibers": r.fibers_total,
                 "tables": r.tables_total, "capped_fibers": len(r.capped)}
                for r in self.reports
            ],
            "caveat": TRUNCATION_CAVEAT,
        }
        if config is not None:
            out["config"] = config
        return out


def phi_evidence(spec: GroupSpec, n: int, d_max: int, k_max: int, **kwargs) -> PhiEvidence:
    """Widths for every degree 1..d_max; the maximum is the reported evidence."""
    reports = [markov_width(spec, n, d, k_max, **kwargs) for d in range(1, d_max + 1)]
    return PhiEvidence(spec, n, d_max, k_max, reports)
