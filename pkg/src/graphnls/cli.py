"""Command-line front end.

Subcommands cover the full workflow: validate a graph file, run a single
constrained minimization, print threshold reports, search for nonexistence
certificates, sweep a parameter axis into a phase-diagram CSV, and run the
randomized property-check suites.

Exit codes: 0 ok, 1 usage/validation, 2 certificate-not-found, 3 internal.
CSV outputs are byte-identical for identical inputs and seed, apart from the
versioned header line. All JSON payloads carry a schema_version field.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .checks import SUITES, run_checks
from .energy import SCHEMA_VERSION
from .functions import Mesh, save_function
from .graphs import (
    GraphFormatError,
    InvalidGraphError,
    Partition,
    core_measure,
    homothety,
    load_graph,
    validate,
)
from .solver import (
    INCONCLUSIVE,
    ZERO_INFIMUM_SUSPECTED,
    SolverConfig,
    existence_dichotomy,
    initializer_soliton,
    minimize,
)
from .thresholds import (
    certify_nonexistence,
    threshold_exist,
    threshold_nonexist,
    threshold_report,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_CERTIFICATE = 2
EXIT_INTERNAL = 3

try:
    from importlib.metadata import version as _dist_version

    _VERSION = _dist_version("graphnls")
except Exception:  # pragma: no cover - metadata missing in odd installs
    _VERSION = "unknown"


def _csv_header() -> str:
    return f"# graphnls {_VERSION} schema_version={SCHEMA_VERSION}\n"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # the exit-code contract reserves 1 for usage errors; argparse's default
    # error() would sys.exit(2), which is the certificate-not-found code
    def error(self, message: str):
        raise _UsageError(message)


def _check_p(p: float) -> None:
    if not 2.0 < p < 6.0:
        raise _UsageError("p must be in (2,6)")


def _check_mu(mu: float) -> None:
    if not mu > 0.0:
        raise _UsageError("mu must be positive")


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    graph = load_graph(args.graph)
    report = validate(graph)
    if report.ok:
        print(
            f"valid: {len(graph.edges)} edge(s), core measure {core_measure(graph)!r}, "
            f"{graph.n_half_lines} half-line(s)"
        )
        return EXIT_OK
    print("invalid:")
    for violation in report.violations:
        print(f"  - {violation}")
    return EXIT_USAGE


# ---------------------------------------------------------------------------
# minimize


def _solver_config(args) -> SolverConfig:
    cfg = SolverConfig()
    updates: dict = {"initializer": args.init, "seed": args.seed}
    if args.h is not None:
        updates["h_max"] = args.h
    if args.rcut is not None:
        try:
            schedule = tuple(float(tok) for tok in args.rcut.split(",") if tok.strip())
        except ValueError:
            raise _UsageError(f"--rcut expects comma-separated numbers, got {args.rcut!r}")
        if not schedule:
            raise _UsageError("--rcut schedule is empty")
        updates["r_cut_schedule"] = schedule
    if args.max_iters is not None:
        updates["max_iters"] = args.max_iters
    return replace(cfg, **updates)


def cmd_minimize(args) -> int:
    _check_p(args.p)
    _check_mu(args.mu)
    graph = load_graph(args.graph)
    graph.require_valid()
    cfg = _solver_config(args)

    initial = None
    if args.init_edge is not None or args.init_offset is not None:
        if args.init != "soliton":
            raise _UsageError("--init-edge/--init-offset require --init soliton")
        from .solver import _resolved_schedule

        first_cut = _resolved_schedule(graph, args.mu, cfg)[0]
        mesh0 = Mesh(graph, h_max=cfg.h_max, r_cut=first_cut)
        initial = initializer_soliton(
            graph,
            args.mu,
            args.p,
            center_edge=args.init_edge,
            center_offset=args.init_offset,
            mesh=mesh0,
        )

    result = minimize(graph, args.mu, args.p, cfg, initial=initial)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    payload = result.to_dict()
    payload.update(
        {
            "graph_file": str(args.graph),
            "initializer": cfg.initializer,
            "seed": cfg.seed,
            "h_max": cfg.h_max,
        }
    )
    (out_dir / "result.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    with open(out_dir / "trace.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(_csv_header())
        fh.write("iter,energy,grad_norm,step\n")
        for it, energy, grad_norm, step in result.trace:
            fh.write(f"{it},{energy!r},{grad_norm!r},{step!r}\n")

    save_function(result.function, out_dir / "state.csv")

    print(f"verdict: {result.verdict}")
    print(f"energy: {result.energy!r}")
    print(f"wrote {out_dir / 'result.json'}, trace.csv, state.csv")
    return EXIT_OK


# ---------------------------------------------------------------------------
# thresholds


def cmd_thresholds(args) -> int:
    _check_p(args.p)
    _check_mu(args.mu)
    if args.N < 1:
        raise _UsageError("N must be at least 1")
    if args.p < 4.0:
        # below the L^2-critical power of the half-line problem the ground
        # state is attained for every mass and every core measure
        print("existence unconditional")
        payload = {
            "schema_version": SCHEMA_VERSION,
            "p": args.p,
            "mu": args.mu,
            "n_half_lines": args.N,
            "existence": "unconditional",
            "l1_exist": 0.0,
            "l2_nonexist": 0.0,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_OK
    report = threshold_report(args.p, args.mu, args.N, C=args.C, c=args.c)
    rows = [
        ("p", report.p),
        ("mu", report.mu),
        ("half-lines", report.n_half_lines),
        ("gn constant c", report.c),
        ("gn constant C", report.C),
        ("L1 (exists above)", report.l1_exist),
        ("L2 (none below)", report.l2_nonexist),
        ("coefficient C_p", report.c_p),
        ("consistent (L2 <= L1)", report.consistent),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value!r}")
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify


def _read_partition_file(path) -> list[frozenset[str]]:
    """One part per line: whitespace-separated edge ids; # starts a comment."""
    parts: list[frozenset[str]] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        ids = line.split()
        if len(set(ids)) != len(ids):
            raise _UsageError(f"partition file line {lineno}: repeated edge id")
        parts.append(frozenset(ids))
    if not parts:
        raise _UsageError("partition file defines no parts")
    return parts


def cmd_certify(args) -> int:
    _check_p(args.p)
    _check_mu(args.mu)
    if args.p < 4.0:
        raise _UsageError(
            "nonexistence certification applies to p in [4,6); "
            "for p in (2,4) existence is unconditional"
        )
    graph = load_graph(args.graph)
    graph.require_valid()
    partitions = None
    if args.partition is not None:
        partitions = [Partition(tuple(_read_partition_file(args.partition)))]
    certificate = certify_nonexistence(graph, args.p, args.mu, partitions=partitions)
    print(json.dumps(certificate.to_dict(), indent=2, sort_keys=True))
    if certificate.valid:
        where = "whole graph" if certificate.whole_graph else (
            f"partition into {len(certificate.partition.parts)} regions"
        )
        print(f"certificate found ({where}): largest region core measure "
              f"{certificate.max_part_measure!r} < threshold {certificate.threshold!r}")
        return EXIT_OK
    print("certificate not found")
    return EXIT_NO_CERTIFICATE


# ---------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple[float, ...]
    graph_file: Path
    mu: float
    p: float
    out_dir: Path
    threads: int
    seed: int
    solver: dict

    @staticmethod
    def from_file(path) -> "SweepSpec":
        sweep_path = Path(path)
        try:
            data = json.loads(sweep_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise _UsageError(f"sweep file is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise _UsageError("sweep file must hold a JSON object")
        for key in ("axis", "grid", "graph"):
            if key not in data:
                raise _UsageError(f"sweep file missing required key {key!r}")
        axis = data["axis"]
        if axis not in ("core_scale", "mu", "p"):
            raise _UsageError("axis must be one of core_scale, mu, p")
        try:
            grid = tuple(float(v) for v in data["grid"])
        except (TypeError, ValueError):
            raise _UsageError("grid must be a list of numbers")
        if not grid:
            raise _UsageError("grid must be nonempty")
        for v in grid:
            if axis == "p":
                if not 2.0 < v < 6.0:
                    raise _UsageError(f"grid value {v!r} outside (2,6) for axis p")
            elif v <= 0.0:
                raise _UsageError(f"grid value {v!r} must be positive for axis {axis}")
        graph_file = Path(data["graph"])
        if not graph_file.is_absolute():
            # relative paths resolve next to the sweep file itself
            graph_file = sweep_path.parent / graph_file
        out_dir = Path(data.get("out_dir", "sweep_out"))
        if not out_dir.is_absolute():
            out_dir = sweep_path.parent / out_dir
        mu = float(data.get("mu", 1.0))
        p = float(data.get("p", 4.0))
        if axis != "mu" and mu <= 0:
            raise _UsageError("mu must be positive")
        if axis != "p" and not 2.0 < p < 6.0:
            raise _UsageError("p must be in (2,6)")
        threads = int(data.get("threads", 1))
        if threads < 1:
            raise _UsageError("threads must be at least 1")
        solver = data.get("solver", {})
        if not isinstance(solver, dict):
            raise _UsageError("solver overrides must be a JSON object")
        if "r_cut_schedule" in solver:
            solver = dict(solver)
            solver["r_cut_schedule"] = tuple(float(v) for v in solver["r_cut_schedule"])
        return SweepSpec(
            axis=axis,
            grid=grid,
            graph_file=graph_file,
            mu=mu,
            p=p,
            out_dir=out_dir,
            threads=threads,
            seed=int(data.get("seed", 0)),
            solver=solver,
        )


def _band(meas: float, p: float, mu: float, n: int) -> tuple[float, float, str]:
    """Analytic bands: above L1 existence is guaranteed, below L2 it is
    ruled out, in between the theory leaves the question open."""
    if p < 4.0:
        return 0.0, 0.0, "EXIST_BAND"
    l1 = threshold_exist(p, mu, n)
    l2 = threshold_nonexist(p, mu, n_half_lines=n)
    if meas > l1:
        return l1, l2, "EXIST_BAND"
    if meas < l2:
        return l1, l2, "NONEXIST_BAND"
    return l1, l2, "GAP"


def _sweep_point(base, spec: SweepSpec, axis_value: float):
    graph, mu, p = base, spec.mu, spec.p
    if spec.axis == "core_scale":
        graph = homothety(base, axis_value)
    elif spec.axis == "mu":
        mu = axis_value
    else:
        p = axis_value
    try:
        l1, l2, band = _band(core_measure(graph), p, mu, graph.n_half_lines)
    except Exception:
        l1 = l2 = float("nan")
        band = "GAP"
    try:
        cfg = replace(SolverConfig(seed=spec.seed), **spec.solver)
        result = existence_dichotomy(graph, mu, p, cfg)
        return (axis_value, result.best_energy, result.verdict, l1, l2, band)
    except Exception:
        # a failed point must not kill the sweep; record it as undecided
        return (axis_value, float("nan"), INCONCLUSIVE, l1, l2, band)


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_file(args.sweep)
    base = load_graph(spec.graph_file)
    base.require_valid()

    workers = spec.threads
    env_cap = os.environ.get("GRAPHNLS_THREADS")
    if env_cap is not None:
        try:
            workers = min(workers, max(1, int(env_cap)))
        except ValueError:
            raise _UsageError(f"GRAPHNLS_THREADS must be an integer, got {env_cap!r}")
    workers = max(1, min(workers, len(spec.grid)))

    # dispatch concurrently, then collect strictly in grid order
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_point, base, spec, v) for v in spec.grid]
        rows = [f.result() for f in futures]

    spec.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = spec.out_dir / "phase.csv"
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_csv_header())
        fh.write("axis_value,E_min,verdict,L1,L2,band\n")
        for value, e_min, verdict, l1, l2, band in rows:
            fh.write(f"{value!r},{e_min!r},{verdict},{l1!r},{l2!r},{band}\n")

    for value, e_min, verdict, l1, l2, band in rows:
        print(f"{spec.axis}={value!r}: {verdict} E_min={e_min!r} band={band}")
    print(f"wrote {out_path}")

    unsound = [
        row for row in rows if row[5] == "EXIST_BAND" and row[2] == ZERO_INFIMUM_SUSPECTED
    ]
    if unsound:
        values = ", ".join(repr(row[0]) for row in unsound)
        print(
            "sweep soundness violation: zero infimum reported inside the "
            f"guaranteed-existence band at {spec.axis} in {{{values}}}",
            file=sys.stderr,
        )
        return EXIT_INTERNAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    names = None
    if args.suite is not None:
        names = [tok.strip() for tok in args.suite.split(",") if tok.strip()]
        unknown = [n for n in names if n not in SUITES]
        if unknown:
            raise _UsageError(
                f"unknown suite(s) {', '.join(unknown)}; available: {', '.join(SUITES)}"
            )
    results = run_checks(names, seed=args.seed, gn_c=args.gn_c)
    for res in results:
        print(res.summary())
    failed = [res for res in results if not res.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    return EXIT_OK if not failed else EXIT_USAGE


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    ap = _Parser(
        prog="graphnls",
        description=(
            "Ground states of the focusing NLS energy on metric graphs with "
            "the nonlinearity confined to the compact core"
        ),
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="parse and validate a graph file")
    sp.add_argument("graph", help="graph text file")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("minimize", help="run a single constrained minimization")
    sp.add_argument("graph", help="graph text file")
    sp.add_argument("--mu", type=float, default=1.0, help="mass constraint (default 1)")
    sp.add_argument("--p", type=float, default=4.0, help="nonlinearity power in (2,6)")
    sp.add_argument("--h", type=float, default=None, help="target mesh width")
    sp.add_argument(
        "--rcut",
        default=None,
        help="comma-separated half-line truncation schedule, e.g. 10,20,40",
    )
    sp.add_argument(
        "--init",
        choices=("competitor", "soliton", "random"),
        default="competitor",
        help="initial guess family",
    )
    sp.add_argument("--init-edge", default=None, help="core edge id for the soliton center")
    sp.add_argument(
        "--init-offset",
        type=float,
        default=None,
        help="soliton center offset along --init-edge",
    )
    sp.add_argument("--seed", type=int, default=0, help="seed for the random initializer")
    sp.add_argument("--max-iters", type=int, default=None, help="iteration cap per stage")
    sp.add_argument("--out", default="run_out", help="output directory for artifacts")
    sp.set_defaults(func=cmd_minimize)

    sp = sub.add_parser("thresholds", help="print the analytic threshold report")
    sp.add_argument("--p", type=float, required=True, help="nonlinearity power in (2,6)")
    sp.add_argument("--mu", type=float, default=1.0, help="mass constraint (default 1)")
    sp.add_argument("--N", type=int, default=2, help="number of half-lines (default 2)")
    sp.add_argument("--c", type=float, default=None, help="override sup-norm constant")
    sp.add_argument("--C", type=float, default=None, help="override L^p constant")
    sp.set_defaults(func=cmd_thresholds)

    sp = sub.add_parser("certify", help="search for a nonexistence certificate")
    sp.add_argument("graph", help="graph text file")
    sp.add_argument("--p", type=float, required=True, help="nonlinearity power in [4,6)")
    sp.add_argument("--mu", type=float, default=1.0, help="mass constraint (default 1)")
    sp.add_argument(
        "--partition",
        default=None,
        help="file with one region per line (whitespace-separated edge ids)",
    )
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("sweep", help="run a parameter sweep into phase.csv")
    sp.add_argument("sweep", help="JSON sweep file (axis, grid, graph, solver)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("check", help="run the randomized property-check suites")
    sp.add_argument(
        "--suite",
        default=None,
        help=f"comma-separated suite names (default: all of {', '.join(SUITES)})",
    )
    sp.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    sp.add_argument(
        "--gn-c",
        type=float,
        default=None,
        dest="gn_c",
        help="override the sup-norm interpolation constant (fault injection)",
    )
    sp.set_defaults(func=cmd_check)

    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphFormatError, InvalidGraphError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
