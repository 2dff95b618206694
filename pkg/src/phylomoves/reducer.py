"""Constructive connection of compatible tables.

The pipeline for a compatible pair on n columns:

1. rows common to both tables are set aside (a move on a sub-multiset is a
   move on the whole table);
2. per-row dot counts are normalized with quadratic moves;
3. a pair of adjacent columns j, j+1 is aligned: quadratic moves on one side
   make the multiset of (column j, column j+1) pairs equal in both tables;
4. columns j and j+1 are summed in both tables, the (n-1)-column pair is
   connected recursively, and every recursive move is lifted back;
5. the lifted tables can differ only in how the (a, b) pairs are spread
   over rows with equal sums, which pairwise swaps repair.

Small instances (n <= base_n) and alignment failures fall back to a breadth
first search through the fiber.
"""

from __future__ import annotations

import heapq
import itertools
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import PreconditionError, ProgressError, ReductionFailure, StructuralError
from .flows import Flow
from .group import GroupSpec
from .moves import (
    Move,
    completions,
    find_zero_sum_subset,
    quadratic_rows,
    replace_rows,
    subsets_with_sum,
)
from .tables import Table, column_signature, signature_of_rows


def default_threshold(spec: GroupSpec) -> int:
    g = spec.order
    return g * g + 3 * g + 1


@dataclass(frozen=True)
class FrequencyProfile:
    threshold: int
    degree: int
    counts: Tuple[int, ...]
    frequent: frozenset
    dot_mask: Tuple[Tuple[bool, ...], ...]
    regime: bool

    def dots_per_row(self) -> List[int]:
        return [sum(row) for row in self.dot_mask]


def frequency_profile(t: Table, F: int) -> FrequencyProfile:
    if F < 1:
        raise StructuralError("the frequency threshold must be >= 1")
    counts = [0] * t.spec.order
    for row in t.rows:
        for g in row:
            counts[g] += 1
    frequent = frozenset(h for h, c in enumerate(counts) if c > F * t.degree)
    mask = tuple(tuple(g not in frequent for g in row) for row in t.rows)
    g = t.spec.order
    return FrequencyProfile(F, t.degree, tuple(counts), frequent, mask, F > g * g + 3 * g)


def restrict_to_frequent_columns(t: Table, g: int) -> List[int]:
    """Columns (0-based) in which ``g`` is one of the most frequent elements."""
    out = []
    for c in range(t.n):
        col = Counter(r[c] for r in t.rows)
        if col.get(g, 0) >= max(col.values(), default=0):
            out.append(c)
    return out


def best_reference_element(t: Table) -> Tuple[int, List[int]]:
    best = None
    for g in range(t.spec.order):
        cols = restrict_to_frequent_columns(t, g)
        if best is None or len(cols) > len(best[1]):
            best = (g, cols)
    return best


def find_row_with_zeros(mask: Sequence[Sequence[int]], z: int, epsilon) -> int:
    """First row of a 0/1 table holding at least ``z`` zeros."""
    for i, row in enumerate(mask):
        if sum(1 for x in row if not x) >= z:
            return i
    d = len(mask)
    n = len(mask[0]) if d else 0
    eps = Fraction(epsilon)
    held = d > 0 and n > z / eps and all(sum(1 for r in mask if not r[c]) >= eps * d for c in range(n))
    if held:
        raise AssertionError("double counting guarantees a row; the mask must be malformed")
    raise ProgressError(
        f"no row has {z} zeros: the columns do not all carry {eps}*d zeros or n <= z/epsilon"
    )


def normalize_row_dots(t: Table, F: int, bound: int | None = None) -> Tuple[Table, List[Move]]:
    """Quadratic moves until no row holds more than ``bound`` dots.

    ``bound`` defaults to |G|(F+1).  Each round trades dots of a fullest row
    against frequent entries of an emptiest row on a zero-sum column set.
    """
    spec = t.spec
    profile = frequency_profile(t, F)
    frequent = profile.frequent
    bound = spec.order * (F + 1) if bound is None else bound
    rows = list(t.rows)
    moves: List[Move] = []
    while rows:
        dots = [sum(g not in frequent for g in row) for row in rows]
        top = max(dots)
        if top <= bound:
            break
        at_top = dots.count(top)
        i_max = dots.index(top)
        i_min = dots.index(min(dots))
        r_max, r_min = rows[i_max], rows[i_min]
        cols = [c for c in range(t.n) if r_max[c] not in frequent and r_min[c] in frequent]
        subset = find_zero_sum_subset([spec.minus(r_max[c], r_min[c]) for c in cols], spec)
        if subset is None or dots[i_min] + len(subset) >= top:
            raise ProgressError(
                f"cannot lower the dot count of row {i_max + 1} ({top} dots, bound {bound}) at this table size"
            )
        chosen = [cols[s] for s in subset]
        new_max, new_min = quadratic_rows(r_max, r_min, chosen)
        moves.append(Move((r_max, r_min), (new_max, new_min)))
        rows[i_max], rows[i_min] = new_max, new_min
        after = [sum(g not in frequent for g in row) for row in rows]
        assert max(after) < top or after.count(top) < at_top
    return t.with_rows(rows), moves


def merge_rows(rows: Sequence[Flow], j: int, spec: GroupSpec) -> List[Flow]:
    add = spec.add_table
    return [row[:j] + (add[row[j]][row[j + 1]],) + row[j + 2:] for row in rows]


def merge_columns(t: Table, j: int) -> Table:
    """Sum columns j and j+1 (0-based) into one."""
    if not 0 <= j < t.n - 1:
        raise StructuralError(f"cannot merge columns {j} and {j + 1} of a table with {t.n} columns")
    return Table(t.spec, t.n - 1, tuple(merge_rows(t.rows, j, t.spec)))


def lift_move(m: Move, j: int, context: Sequence[Tuple[int, int]], spec: GroupSpec) -> Move:
    """Lift a move on merged tables back to the original columns.

    ``context[i]`` is the (column j, column j+1) pair of the original row
    behind ``m.removed[i]``.  Pairs are handed to added rows by matching
    sums, lexicographically least pair first.
    """
    if len(context) != len(m.removed):
        raise StructuralError("one (a, b) pair is needed per removed row")
    add = spec.add_table
    removed = []
    for row, (a, b) in zip(m.removed, context):
        if add[a][b] != row[j]:
            raise StructuralError(f"pair {(a, b)} does not sum to the merged entry {row[j]}")
        removed.append(row[:j] + (a, b) + row[j + 1:])
    pool = sorted(context)
    added = []
    for row in m.added:
        for idx, (a, b) in enumerate(pool):
            if add[a][b] == row[j]:
                added.append(row[:j] + (a, b) + row[j + 1:])
                del pool[idx]
                break
        else:
            raise AssertionError(f"no (a, b) pair left with sum {row[j]}; the merged move is not valid")
    return Move(tuple(removed), tuple(added))


def fixup_merged_columns(t0: Table, t1: Table, j: int) -> List[Move]:
    """Quadratic swaps on columns j, j+1 turning ``t0`` into ``t1``."""
    rows = list(t0.rows)
    moves = _fixup(rows, list(t1.rows), j, t0.spec)
    return moves


def _fixup(rows0: List[Flow], rows1: Sequence[Flow], j: int, spec: GroupSpec) -> List[Move]:
    def rest(row):
        return row[:j] + row[j + 2:]

    if Counter(map(rest, rows0)) != Counter(map(rest, rows1)):
        raise PreconditionError("tables differ outside the two merged columns")
    if Counter(r[j:j + 2] for r in rows0) != Counter(r[j:j + 2] for r in rows1):
        raise PreconditionError("the (column j, column j+1) pairs differ as multisets")

    by_rest0: Dict[tuple, List[int]] = defaultdict(list)
    for pos, row in enumerate(rows0):
        by_rest0[rest(row)].append(pos)
    target_pairs: Dict[tuple, List[tuple]] = defaultdict(list)
    for row in rows1:
        target_pairs[rest(row)].append(row[j:j + 2])

    # slot = row position in rows0 together with the pair it has to end up with
    target: Dict[int, tuple] = {}
    for key, positions in by_rest0.items():
        wanted = Counter(target_pairs[key])
        loose = []
        for pos in positions:
            pair = rows0[pos][j:j + 2]
            if wanted[pair] > 0:
                wanted[pair] -= 1
                target[pos] = pair
            else:
                loose.append(pos)
        leftovers = sorted(wanted.elements())
        for pos, pair in zip(loose, leftovers):
            target[pos] = pair

    moves = []
    cols = (j, j + 1)
    for pos in sorted(target):
        want = target[pos]
        if rows0[pos][j:j + 2] == want:
            continue
        partner = None
        for other in sorted(target):
            have = rows0[other][j:j + 2]
            if other != pos and have == want and target[other] != have:
                partner = other
                if target[other] == rows0[pos][j:j + 2]:
                    break
        if partner is None:
            raise AssertionError("pair multisets agree, so a partner must exist")
        r, s = rows0[pos], rows0[partner]
        new_r, new_s = quadratic_rows(r, s, cols)
        moves.append(Move((r, s), (new_r, new_s)))
        rows0[pos], rows0[partner] = new_r, new_s
    return moves


# alignment search

@dataclass
class AlignBudget:
    max_nodes: int = 3000
    max_compensations: int = 3
    k: int = 2


@dataclass
class AlignResult:
    j: int
    moves0: List[Move]
    moves1: List[Move]
    rows0: List[Flow]
    rows1: List[Flow]
    nodes: int


def _pair_gap(rows: Sequence[Flow], target: Counter, j: int) -> int:
    have = Counter(r[j:j + 2] for r in rows)
    return sum((target - have).values())


def _align_successors(rows: Tuple[Flow, ...], j: int, spec: GroupSpec, budget: AlignBudget,
                      reference: Optional[int]):
    """Quadratic moves that re-pair columns j, j+1, then staging moves elsewhere."""
    n = len(rows[0])
    others = [c for c in range(n) if c not in (j, j + 1)]
    neg = spec.neg_table
    seen_pairs = set()
    repair, staging = [], []
    for a, b in itertools.combinations(range(len(rows)), 2):
        r, s = rows[a], rows[b]
        if r == s or (r, s) in seen_pairs:
            continue
        seen_pairs.add((r, s))
        deltas = [spec.minus(r[c], s[c]) for c in others]
        for c in (j, j + 1):
            if r[c] == s[c]:
                continue
            need = neg[spec.minus(r[c], s[c])]
            for subset in subsets_with_sum(deltas, need, spec, limit=budget.max_compensations):
                cols = [c] + [others[x] for x in subset]
                repair.append((a, b, cols))
        # staging: a zero-sum exchange away from the aligned columns, preferring
        # ones that hand the reference element to the row lacking it
        nz = [x for x, dl in enumerate(deltas) if dl != 0]
        found = find_zero_sum_subset([deltas[x] for x in nz], spec) if nz else None
        if found:
            cols = [others[nz[x]] for x in found]
            score = 0
            if reference is not None:
                score = -sum((s[c] == reference) - (r[c] == reference) for c in cols)
            staging.append((score, a, b, cols))
    staging.sort(key=lambda item: item[0])
    for a, b, cols in repair:
        yield a, b, cols
    for _, a, b, cols in staging:
        yield a, b, cols


def _align_side(rows: Sequence[Flow], target_rows: Sequence[Flow], j: int, spec: GroupSpec,
                budget: AlignBudget, reference: Optional[int]):
    target = Counter(r[j:j + 2] for r in target_rows)
    start = tuple(sorted(rows))
    gap0 = _pair_gap(start, target, j)
    if gap0 == 0:
        return [], list(start), 0
    counter = itertools.count()
    heap = [(gap0, 0, next(counter), start)]
    parent: Dict[tuple, Optional[Tuple[tuple, Move]]] = {start: None}
    nodes = 0
    while heap and nodes < budget.max_nodes:
        gap, depth, _, state = heapq.heappop(heap)
        nodes += 1
        for a, b, cols in _align_successors(state, j, spec, budget, reference):
            r, s = state[a], state[b]
            new_r, new_s = quadratic_rows(r, s, cols)
            nxt = list(state)
            nxt[a], nxt[b] = new_r, new_s
            nxt = tuple(sorted(nxt))
            if nxt in parent:
                continue
            parent[nxt] = (state, Move((r, s), (new_r, new_s)))
            g = _pair_gap(nxt, target, j)
            if g == 0:
                path = []
                cur = nxt
                while parent[cur] is not None:
                    prev, mv = parent[cur]
                    path.append(mv)
                    cur = prev
                return path[::-1], list(nxt), nodes
            heapq.heappush(heap, (g, depth + 1, next(counter), nxt))
    return None, None, nodes


def _simultaneous_order(rows0: Sequence[Flow], rows1: Sequence[Flow], j: int):
    key = lambda r: (r[j:j + 2], r)
    return sorted(rows0, key=key), sorted(rows1, key=key)


def align_two_columns(t0: Table, t1: Table, budget: AlignBudget | None = None) -> AlignResult:
    """Quadratic moves after which columns j, j+1 agree row by row in both tables.

    Every adjacent pair j is tried, those inside the reference element's
    frequent columns first; within each, side 0 is moved towards side 1's
    pairing, then the other way round.  Raises ReductionFailure when the
    node budget runs out everywhere.
    """
    budget = budget or AlignBudget()
    if t0.spec != t1.spec or t0.n != t1.n:
        raise PreconditionError("tables must share group and column count")
    if column_signature(t0) != column_signature(t1):
        raise PreconditionError("tables are not compatible")
    if t0.n < 2:
        raise PreconditionError("alignment needs at least two columns")
    spec = t0.spec
    rows0, rows1 = list(t0.rows), list(t1.rows)
    ref, freq_cols = best_reference_element(t0)
    freq = set(freq_cols)
    candidates = []
    for j in range(t0.n - 1):
        gap = _pair_gap(rows0, Counter(r[j:j + 2] for r in rows1), j)
        inside = j in freq and j + 1 in freq
        candidates.append((gap, not inside, j))
    candidates.sort()
    tried = []
    for gap, _, j in candidates:
        if gap == 0:
            o0, o1 = _simultaneous_order(rows0, rows1, j)
            return AlignResult(j, [], [], o0, o1, 0)
        for side in (0, 1):
            mine, theirs = (rows0, rows1) if side == 0 else (rows1, rows0)
            path, new_rows, nodes = _align_side(mine, theirs, j, spec, budget, ref)
            tried.append((j, side, nodes))
            if path is None:
                continue
            if side == 0:
                o0, o1 = _simultaneous_order(new_rows, rows1, j)
                return AlignResult(j, path, [], o0, o1, nodes)
            o0, o1 = _simultaneous_order(rows0, new_rows, j)
            return AlignResult(j, [], path, o0, o1, nodes)
    raise ReductionFailure("column alignment exhausted its budget", phase="align",
                           diagnostics={"attempts": tried})


# connecting tables

@dataclass
class ReducerConfig:
    k: Optional[int] = None
    base_n: int = 4
    F: Optional[int] = None
    bfs_cap: int = 200_000
    align: AlignBudget = field(default_factory=AlignBudget)
    normalize: bool = True
    strip_common: bool = True

    def max_degree(self, spec: GroupSpec) -> int:
        return self.k if self.k is not None else max(2, spec.order)


@dataclass
class Step:
    side: int
    move: Move
    phase: str


@dataclass
class ReductionTrace:
    steps: List[Step] = field(default_factory=list)
    log: List[str] = field(default_factory=list)

    @property
    def max_degree(self) -> int:
        return max((s.move.degree for s in self.steps), default=0)

    def phases(self) -> Counter:
        return Counter(s.phase.split(":")[0] for s in self.steps)


def _multiset_minus(a: Sequence[Flow], b: Sequence[Flow]) -> List[Flow]:
    need = Counter(b)
    out = []
    for row in a:
        if need[row] > 0:
            need[row] -= 1
        else:
            out.append(row)
    return out


def fiber_bfs(rows0: Sequence[Flow], rows1: Sequence[Flow], spec: GroupSpec, k_max: int,
              cap: int) -> Tuple[List[Move], int]:
    """Shortest move path from rows0 to rows1 using the least degree that works."""
    start, goal = tuple(sorted(rows0)), tuple(sorted(rows1))
    if start == goal:
        return [], 2
    n = len(start[0])
    order = spec.order
    for k in range(2, k_max + 1):
        parent: Dict[tuple, Optional[Tuple[tuple, Move]]] = {start: None}
        queue = deque([start])
        found = False
        while queue and not found:
            state = queue.popleft()
            for size in range(2, min(k, len(state)) + 1):
                for pos in dict.fromkeys(itertools.combinations(range(len(state)), size)):
                    removed = tuple(state[p] for p in pos)
                    rest = [state[p] for p in range(len(state)) if p not in pos]
                    for added in completions(spec, signature_of_rows(removed, n, order)):
                        if added == removed:
                            continue
                        nxt = tuple(sorted(rest + list(added)))
                        if nxt in parent:
                            continue
                        parent[nxt] = (state, Move(removed, added))
                        if nxt == goal:
                            found = True
                            break
                        if len(parent) > cap:
                            raise ReductionFailure(f"fiber search passed {cap} tables", phase="bfs")
                        queue.append(nxt)
                    if found:
                        break
                if found:
                    break
        if found:
            path = []
            cur = goal
            while parent[cur] is not None:
                prev, mv = parent[cur]
                path.append(mv)
                cur = prev
            return path[::-1], k
    raise ReductionFailure(f"tables are not connected by moves of degree <= {k_max}", phase="bfs")


class _Reducer:
    def __init__(self, spec: GroupSpec, config: ReducerConfig, trace: ReductionTrace):
        self.spec = spec
        self.config = config
        self.trace = trace
        self.k_max = config.max_degree(spec)
        self.F = config.F if config.F is not None else default_threshold(spec)

    def note(self, depth, msg):
        self.trace.log.append("  " * depth + msg)

    def connect(self, rows0: List[Flow], rows1: List[Flow], n: int, depth: int) -> List[Step]:
        spec = self.spec
        if self.config.strip_common:
            rows0, rows1 = _multiset_minus(rows0, rows1), _multiset_minus(rows1, rows0)
        if sorted(rows0) == sorted(rows1):
            return []
        d = len(rows0)
        self.note(depth, f"n={n}: {d} differing rows")
        if n <= self.config.base_n:
            return self.bfs(rows0, rows1, depth, "bfs")

        steps: List[Step] = []
        cur = [list(rows0), list(rows1)]
        if self.config.normalize:
            for side in (0, 1):
                t = Table(spec, n, tuple(cur[side]))
                try:
                    t_new, moves = normalize_row_dots(t, self.F)
                except ProgressError as exc:
                    self.note(depth, f"normalize side {side}: {exc}")
                    continue
                cur[side] = list(t_new.rows)
                steps.extend(Step(side, m, "normalize") for m in moves)

        try:
            aligned = align_two_columns(Table(spec, n, tuple(cur[0])), Table(spec, n, tuple(cur[1])),
                                        self.config.align)
        except ReductionFailure as exc:
            self.note(depth, f"alignment failed ({exc}); searching the fiber directly")
            return steps + self.bfs(cur[0], cur[1], depth, "fallback")
        j = aligned.j
        self.note(depth, f"aligned columns {j + 1},{j + 2} with {len(aligned.moves0)}+{len(aligned.moves1)} moves")
        steps.extend(Step(0, m, "align") for m in aligned.moves0)
        steps.extend(Step(1, m, "align") for m in aligned.moves1)
        cur = [list(aligned.rows0), list(aligned.rows1)]

        merged0 = merge_rows(cur[0], j, spec)
        merged1 = merge_rows(cur[1], j, spec)
        inner = self.connect(merged0, merged1, n - 1, depth + 1)
        for step in inner:
            rows = cur[step.side]
            used = set()
            context = []
            for mrow in step.move.removed:
                best = None
                for pos, row in enumerate(rows):
                    if pos in used:
                        continue
                    if row[:j] + (spec.plus(row[j], row[j + 1]),) + row[j + 2:] == mrow:
                        if best is None or row < rows[best]:
                            best = pos
                if best is None:
                    raise AssertionError("lifted table lost track of its merged image")
                used.add(best)
                context.append(rows[best][j:j + 2])
            lifted = lift_move(step.move, j, context, spec)
            cur[step.side] = replace_rows(rows, lifted)
            steps.append(Step(step.side, lifted, f"merge-{n}:{step.phase}"))

        fix = _fixup(cur[0], cur[1], j, spec)
        self.note(depth, f"fixup on columns {j + 1},{j + 2}: {len(fix)} swaps")
        steps.extend(Step(0, m, "fixup") for m in fix)
        return steps

    def bfs(self, rows0, rows1, depth, phase) -> List[Step]:
        path, k = fiber_bfs(rows0, rows1, self.spec, self.k_max, self.config.bfs_cap)
        self.note(depth, f"{phase}: {len(path)} moves of degree <= {k}")
        return [Step(0, m, phase) for m in path]


def reduce_pair(t0: Table, t1: Table, config: ReducerConfig | None = None) -> ReductionTrace:
    config = config or ReducerConfig()
    if t0.spec != t1.spec or t0.n != t1.n:
        raise PreconditionError("tables must share group and column count")
    if column_signature(t0) != column_signature(t1):
        raise PreconditionError("tables are not compatible")
    trace = ReductionTrace()
    reducer = _Reducer(t0.spec, config, trace)
    trace.steps = reducer.connect(list(t0.rows), list(t1.rows), t0.n, 0)
    return trace


def connect_tables(t0: Table, t1: Table, config: ReducerConfig | None = None):
    """Certificate connecting ``t0`` and ``t1``; see :mod:`phylomoves.certify`."""
    from .certify import Certificate

    trace = reduce_pair(t0, t1, config)
    return Certificate.from_trace(t0, t1, trace), trace


def format_trace(trace: ReductionTrace, spec: GroupSpec) -> str:
    lines = list(trace.log)
    for i, step in enumerate(trace.steps, start=1):
        fmt = lambda rows: " | ".join(" ".join(spec.format_element(g) for g in r) for r in rows)
        lines.append(f"step {i} [{step.phase}] side {step.side}: {fmt(step.move.removed)}  ->  {fmt(step.move.added)}")
    return "\n".join(lines) + "\n"
