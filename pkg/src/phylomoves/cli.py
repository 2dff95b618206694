"""Command line interface.

Exit codes: 0 success, 1 a negative answer (reject, incompatible, fiber not
connected within k_max), 2 usage, capacity or other operational errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from . import __version__
from .certify import load_certificate, verify_certificate
from .errors import CapacityError, PhyloMovesError, ReductionFailure
from .fibers import DEFAULT_FIBER_CAP, ResultCache, phi_evidence
from .flows import DEFAULT_FLOW_CAP, count_flows, enumerate_flows, format_matrix, polytope_vertices
from .group import parse_group
from .reducer import ReducerConfig, connect_tables, format_trace
from .tables import compatible, parse_pair

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2

ENV_PREFIX = "PHYLOMOVES_"


@dataclass
class RunConfig:
    command: str
    group: Optional[str] = None
    n: Optional[int] = None
    d_max: Optional[int] = None
    k_max: Optional[int] = None
    flow_cap: int = DEFAULT_FLOW_CAP
    fiber_cap: int = DEFAULT_FIBER_CAP
    cache: Optional[str] = None
    jobs: int = 1
    seed: int = 0
    output: Optional[str] = None
    version: str = __version__


def _env_int(name, default):
    value = os.environ.get(ENV_PREFIX + name)
    return int(value) if value else default


def _config(args, **overrides) -> RunConfig:
    cfg = RunConfig(
        command=args.command,
        flow_cap=args.flow_cap if args.flow_cap is not None else _env_int("FLOW_CAP", DEFAULT_FLOW_CAP),
        fiber_cap=args.fiber_cap if args.fiber_cap is not None else _env_int("FIBER_CAP", DEFAULT_FIBER_CAP),
        cache=getattr(args, "cache", None) or os.environ.get(ENV_PREFIX + "CACHE"),
        jobs=getattr(args, "jobs", None) or os.cpu_count() or 1,
        seed=args.seed,
        output=getattr(args, "out", None),
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_flows(args) -> int:
    spec = parse_group(args.group)
    cfg = _config(args, group=spec.literal, n=args.n)
    if args.count:
        print(count_flows(spec, args.n))
        return EXIT_OK
    for flow in enumerate_flows(spec, args.n, cap=cfg.flow_cap):
        print(" ".join(spec.format_element(g) for g in flow))
    return EXIT_OK


def cmd_polytope(args) -> int:
    spec = parse_group(args.group)
    cfg = _config(args, group=spec.literal, n=args.n)
    _emit(format_matrix(polytope_vertices(spec, args.n, cap=cfg.flow_cap)), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    t0, t1 = parse_pair(Path(args.pairfile).read_text(encoding="utf-8"))
    if compatible(t0, t1):
        print(f"compatible, d={t0.degree}")
        return EXIT_OK
    print("not compatible")
    return EXIT_NEGATIVE


def cmd_phi(args) -> int:
    spec = parse_group(args.group)
    cfg = _config(args, group=spec.literal, n=args.n, d_max=args.dmax, k_max=args.kmax)
    cache = ResultCache(cfg.cache) if cfg.cache else None
    evidence = phi_evidence(spec, args.n, args.dmax, args.kmax, jobs=cfg.jobs, cache=cache,
                            symmetry=args.symmetry, fiber_size_cap=cfg.fiber_cap, skip_capped=True)
    report = evidence.to_json(asdict(cfg))
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    if evidence.capped:
        return EXIT_ERROR
    return EXIT_OK if evidence.width is not None else EXIT_NEGATIVE


def cmd_connect(args) -> int:
    t0, t1 = parse_pair(Path(args.pairfile).read_text(encoding="utf-8"))
    if not compatible(t0, t1):
        print("not compatible", file=sys.stderr)
        return EXIT_NEGATIVE
    config = ReducerConfig(k=args.k, base_n=args.base_n)
    cert, trace = connect_tables(t0, t1, config)
    if args.trace:
        sys.stderr.write(format_trace(trace, t0.spec))
    _emit(cert.dumps(indent=None) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    verdict = verify_certificate(load_certificate(args.certfile))
    print(verdict)
    return EXIT_OK if verdict.accepted else EXIT_NEGATIVE


def cmd_bench(args) -> int:
    from .bench import run_suite

    cfg = _config(args)
    results = run_suite(args.suite, seed=args.seed)
    if args.json:
        print(json.dumps({"suite": args.suite, "config": asdict(cfg), "results": results}, indent=2))
    else:
        for r in results:
            print(f"{r['name']:<40} {r['seconds']:8.3f}s  {r['result']}")
    return EXIT_OK if all(r["ok"] for r in results) else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phylomoves", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="random seed, echoed in JSON output")
    parser.add_argument("--flow-cap", type=int, default=None)
    parser.add_argument("--fiber-cap", type=int, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flows", help="list flows of length n")
    p.add_argument("group")
    p.add_argument("n", type=int)
    p.add_argument("--count", action="store_true")
    p.set_defaults(func=cmd_flows)

    p = sub.add_parser("polytope", help="vertex matrix of the polytope")
    p.add_argument("group")
    p.add_argument("n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_polytope)

    p = sub.add_parser("check", help="compatibility of a pair file")
    p.add_argument("pairfile")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("phi", help="truncated Markov width evidence")
    p.add_argument("group")
    p.add_argument("n", type=int)
    p.add_argument("--dmax", type=int, default=4)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--cache")
    p.add_argument("--symmetry", action="store_true", help="one fiber per symmetry orbit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("connect", help="certificate connecting a compatible pair")
    p.add_argument("pairfile")
    p.add_argument("--out")
    p.add_argument("--k", type=int, default=None, help="largest move degree for fiber searches")
    p.add_argument("--base-n", type=int, default=4)
    p.add_argument("--trace", action="store_true", help="phase log on stderr")
    p.set_defaults(func=cmd_connect)

    p = sub.add_parser("verify", help="replay a certificate")
    p.add_argument("certfile")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="timed runs of a fixed suite")
    p.add_argument("suite", nargs="?", default="small", choices=["small", "medium"])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    random.seed(args.seed)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ReductionFailure as exc:
        print(f"reduction failed in phase {exc.phase}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (PhyloMovesError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
