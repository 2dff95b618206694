"""Fixed benchmark suites; results are deterministic for a given seed, timings are not."""

from __future__ import annotations

import random
import time

from .certify import verify_certificate
from .fibers import FiberKey, enumerate_fiber, phi_evidence
from .flows import polytope_vertices
from .group import parse_group
from .reducer import connect_tables
from .tables import Table


def random_flow(spec, n, rng):
    head = [rng.randrange(spec.order) for _ in range(n - 1)]
    return tuple(head) + (spec.neg_table[spec.total(head)],)


def random_compatible_pair(spec, n_range, d_range, rng, fiber_cap=20_000):
    """A random table and a different random member of its fiber."""
    while True:
        n = rng.randint(*n_range)
        d = rng.randint(*d_range)
        t0 = Table(spec, n, tuple(random_flow(spec, n, rng) for _ in range(d)))
        try:
            others = [t for t in enumerate_fiber(FiberKey.of(t0), cap=fiber_cap) if t != t0]
        except Exception:
            continue
        if others:
            return t0, rng.choice(others)


def _phi(group, n, d_max, k_max):
    ev = phi_evidence(parse_group(group), n, d_max, k_max)
    return ev.width, f"width={ev.width}"


def _certs(group, count, n_range, d_range, seed):
    rng = random.Random(seed)
    spec = parse_group(group)
    worst = 0
    for _ in range(count):
        t0, t1 = random_compatible_pair(spec, n_range, d_range, rng)
        cert, _ = connect_tables(t0, t1)
        if not verify_certificate(cert):
            return False, "certificate rejected"
        worst = max(worst, cert.max_degree)
    return True, f"{count} certificates, max degree {worst}"


SUITES = {
    "small": [
        ("polytope Z2 3", lambda seed: (polytope_vertices(parse_group("Z2"), 3).shape == (4, 6), "4x6")),
        ("phi Z2 n=4 d<=4", lambda seed: (lambda w: (w[0] == 2, w[1]))(_phi("Z2", 4, 4, 4))),
        ("phi Z3 n=3 d<=4", lambda seed: (lambda w: (w[0] is not None and w[0] <= 3, w[1]))(_phi("Z3", 3, 4, 4))),
        ("certificates Z2 n<=8 d<=4", lambda seed: _certs("Z2", 50, (3, 8), (2, 4), seed)),
        ("certificates Z3 n<=6 d<=3", lambda seed: _certs("Z3", 30, (3, 6), (2, 3), seed)),
    ],
    "medium": [
        ("phi Z2 n=5 d<=5", lambda seed: (lambda w: (w[0] == 2, w[1]))(_phi("Z2", 5, 5, 3))),
        ("phi Z3 n=4 d<=4", lambda seed: (lambda w: (w[0] is not None and w[0] <= 3, w[1]))(_phi("Z3", 4, 4, 3))),
        ("phi Z2xZ2 n=3 d<=3", lambda seed: (lambda w: (w[0] is not None and w[0] <= 4, w[1]))(_phi("Z2xZ2", 3, 3, 4))),
        ("certificates Z2 n<=8 d<=4", lambda seed: _certs("Z2", 200, (3, 8), (2, 4), seed)),
    ],
}


def run_suite(name: str, seed: int = 0):
    out = []
    for label, job in SUITES[name]:
        start = time.perf_counter()
        ok, summary = job(seed)
        out.append({"name": label, "ok": bool(ok), "result": summary,
                    "seconds": round(time.perf_counter() - start, 4), "seed": seed})
    return out
