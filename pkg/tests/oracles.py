"""Independent reference computations used only by the tests.

Nothing here calls into the code paths being checked: enumeration is brute
force over all tuples or subsets, adjacency is read off multiset differences.
"""

from collections import Counter
from itertools import combinations, combinations_with_replacement, product


def mixed_radix_elements(factors):
    """All residue vectors, first factor most significant."""
    return [tuple(v) for v in product(*(range(m) for m in factors))]


def brute_flows(factors, n):
    out = []
    for tup in product(mixed_radix_elements(factors), repeat=n):
        if all(sum(e[f] for e in tup) % m == 0 for f, m in enumerate(factors)):
            out.append(tup)
    return out


def exhaustive_zero_sum_exists(values, order, add):
    for size in range(1, len(values) + 1):
        for combo in combinations(values, size):
            s = 0
            for x in combo:
                s = add[s][x]
            if s == 0:
                return True
    return False


def signature(rows, n, order):
    return tuple(tuple(sum(1 for r in rows if r[c] == g) for g in range(order)) for c in range(n))


def brute_fiber(flows, sig, d, n, order):
    return sorted(
        rows for rows in combinations_with_replacement(sorted(flows), d) if signature(rows, n, order) == sig
    )


def row_difference(a, b):
    """Rows of ``a`` not matched in ``b``; a single move of this degree joins them."""
    return sum((Counter(a) - Counter(b)).values())


def reachability_components(tables, k):
    tables = [tuple(sorted(t)) for t in tables]
    m = len(tables)
    labels = [None] * m
    for s in range(m):
        if labels[s] is not None:
            continue
        labels[s] = s
        stack = [s]
        while stack:
            a = stack.pop()
            for b in range(m):
                if labels[b] is None and row_difference(tables[a], tables[b]) <= k:
                    labels[b] = s
                    stack.append(b)
    return labels


def brute_min_degree(tables, k_max):
    if len(tables) <= 1:
        return 2
    for k in range(2, k_max + 1):
        if len(set(reachability_components(tables, k))) == 1:
            return k
    return None
