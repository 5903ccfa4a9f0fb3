"""Command line driver exposing the pipeline with file-based inputs.

Subcommands map one-to-one onto library entry points: focal scanning,
the full index identity check, the index evolution trace, plain and
perturbation-voted signed counts, the geometric reduction, and a report
mode that renders figures next to the delimited tables. All numeric
outputs embed the tolerance set that produced them, and identical
configuration plus seed yields byte-identical files.

Exit codes: 0 success, 1 invalid input or failed identity, 2 scan or
agreement trouble, 3 witness trouble, 4 mesh refinement did not settle.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .errors import (
    AllTrialsDegenerate,
    DegenerateFocalInstant,
    EndpointFocal,
    MissingSeed,
    MorseSturmError,
    NoAgreement,
    NotStabilized,
    NotTimelike,
    UnresolvedRoot,
)
from .focal import maslov_index, maslov_robust, scan_focal
from .geometry import GeodesicSeed, SubmanifoldGerm, chart_by_name, trivialize_from_seed
from .indexform import evolution_trace, verify
from .problem import fixture_path, list_fixtures, load, save, validate
from .solver import solve_fundamental

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SCAN = 2
EXIT_WITNESS = 3
EXIT_UNSTABLE = 4

SCAN_ERRORS = (
    UnresolvedRoot,
    EndpointFocal,
    DegenerateFocalInstant,
    NoAgreement,
    AllTrialsDegenerate,
)
WITNESS_ERRORS = (NotTimelike, MissingSeed)

MESH_SCHEDULE = (32, 64, 128, 256, 512)
GRID_SIZE = 2048
T_GUARD = 0.01


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one invocation, defaults centralized here."""

    subcommand: str
    input_path: str | None = None
    mesh: int = 64
    ode_tol: float = 1e-10
    tol_rank: float = 1e-7
    tol_eig: float = 1e-9
    refine_tol: float = 1e-10
    t_grid: str = "0.05:1.0:0.05"
    seed: int = 0
    eps: float = 1e-4
    trials: int = 8
    output: str | None = None
    chart: str | None = None
    param_length: float = 1.0

    def __post_init__(self):
        problems = []
        if self.mesh < 2:
            problems.append(f"mesh must be at least 2, got {self.mesh}")
        for name in ("ode_tol", "tol_rank", "tol_eig", "refine_tol", "eps"):
            value = getattr(self, name)
            if not value > 0.0:
                problems.append(f"{name} must be positive, got {value}")
        if self.trials < 1:
            problems.append(f"trials must be at least 1, got {self.trials}")
        if not self.param_length > 0.0:
            problems.append(
                f"parameter length must be positive, got {self.param_length}"
            )
        if problems:
            raise ValueError("; ".join(problems))

    def tolerance_header(self) -> list[str]:
        pairs = (
            ("mesh", self.mesh),
            ("ode_tol", self.ode_tol),
            ("tol_rank", self.tol_rank),
            ("tol_eig", self.tol_eig),
            ("refine_tol", self.refine_tol),
            ("t_guard", T_GUARD),
            ("grid_size", GRID_SIZE),
        )
        return [f"# {key}={value}" for key, value in pairs]


def parse_t_grid(spec: str) -> np.ndarray:
    """Expand an ``a:b:step`` range into an inclusive evaluation grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"t-grid must look like a:b:step, got {spec!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0.0:
        raise ValueError(f"t-grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"t-grid range is empty: {spec!r}")
    count = int(round((stop - start) / step)) + 1
    grid = start + step * np.arange(count)
    grid = grid[(grid > 0.0) & (grid <= min(stop, 1.0) + 1e-12)]
    if grid.size == 0:
        raise ValueError(f"t-grid {spec!r} contains no points in (0, 1]")
    return np.round(grid, 12)


def resolve_input(path_str: str) -> Path:
    """Accept a filesystem path or the bare name of a bundled fixture."""
    path = Path(path_str)
    if path.exists():
        return path
    name = path.name
    known = set(list_fixtures())
    if name in known or f"{name}.msp.json" in known:
        return fixture_path(name)
    raise FileNotFoundError(
        f"no such file or bundled fixture: {path_str} "
        f"(bundled: {', '.join(sorted(known))})"
    )


def load_checked(cfg: RunConfig):
    problem = load(resolve_input(cfg.input_path))
    violations = validate(problem)
    if violations:
        for line in violations:
            print(f"invalid: {line}", file=sys.stderr)
        return None
    return problem


def emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)
        print(f"wrote {output}")


def focal_table(scan, header: list[str]) -> str:
    lines = list(header)
    lines.append("t,multiplicity,signature,degenerate")
    for inst in scan.instants:
        flag = "true" if inst.degenerate else "false"
        lines.append(f"{inst.t:.6f},{inst.multiplicity},{inst.signature},{flag}")
    return "\n".join(lines) + "\n"


def evolution_tables(trace, header: list[str]) -> tuple[str, str]:
    main_lines = list(header)
    main_lines.append("t,i_t")
    for t, i in zip(trace.ts, trace.i_of_t):
        main_lines.append(f"{t:.6f},{i}")
    jump_lines = list(header)
    jump_lines.append("t_jump,delta_i,matched_focal_t,matched_signature")
    for jump in trace.jumps:
        matched_t = "" if jump.matched_focal_t is None else f"{jump.matched_focal_t:.6f}"
        matched_s = "" if jump.matched_signature is None else str(jump.matched_signature)
        jump_lines.append(f"{jump.t_jump:.6f},{jump.delta_i},{matched_t},{matched_s}")
    return "\n".join(main_lines) + "\n", "\n".join(jump_lines) + "\n"


def jumps_sibling(output: str) -> str:
    path = Path(output)
    return str(path.with_name(path.stem + ".jumps" + (path.suffix or ".csv")))


def cmd_focal(cfg: RunConfig) -> int:
    problem = load_checked(cfg)
    if problem is None:
        return EXIT_INVALID
    solution = solve_fundamental(problem, grid_size=GRID_SIZE, ode_tol=cfg.ode_tol)
    scan = scan_focal(
        solution,
        tol_rank=cfg.tol_rank,
        refine_tol=cfg.refine_tol,
        t_guard=T_GUARD,
        tol_eig=cfg.tol_eig,
    )
    emit(focal_table(scan, cfg.tolerance_header()), cfg.output)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    problem = load_checked(cfg)
    if problem is None:
        return EXIT_INVALID
    report = verify(
        problem,
        mesh_schedule=MESH_SCHEDULE,
        tol_eig=cfg.tol_eig,
        tol_rank=cfg.tol_rank,
        refine_tol=cfg.refine_tol,
        t_guard=T_GUARD,
        grid_size=GRID_SIZE,
        ode_tol=cfg.ode_tol,
        robust_eps=cfg.eps,
        robust_trials=cfg.trials,
        robust_seed=cfg.seed,
    )
    document = json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"
    emit(document, cfg.output)
    return EXIT_OK if report.residual == 0 else EXIT_INVALID


def cmd_evolve(cfg: RunConfig) -> int:
    problem = load_checked(cfg)
    if problem is None:
        return EXIT_INVALID
    trace = evolution_trace(
        problem,
        mesh=cfg.mesh,
        t_grid=parse_t_grid(cfg.t_grid),
        tol_eig=cfg.tol_eig,
        tol_rank=cfg.tol_rank,
        grid_size=GRID_SIZE,
        ode_tol=cfg.ode_tol,
    )
    main_csv, jumps_csv = evolution_tables(trace, cfg.tolerance_header())
    if cfg.output is None:
        sys.stdout.write(main_csv)
        sys.stdout.write("\n")
        sys.stdout.write(jumps_csv)
    else:
        emit(main_csv, cfg.output)
        emit(jumps_csv, jumps_sibling(cfg.output))
    return EXIT_OK


def cmd_maslov(cfg: RunConfig) -> int:
    problem = load_checked(cfg)
    if problem is None:
        return EXIT_INVALID
    solution = solve_fundamental(problem, grid_size=GRID_SIZE, ode_tol=cfg.ode_tol)
    scan = scan_focal(
        solution,
        tol_rank=cfg.tol_rank,
        refine_tol=cfg.refine_tol,
        t_guard=T_GUARD,
        tol_eig=cfg.tol_eig,
    )
    value = maslov_index(scan)
    lines = cfg.tolerance_header() + ["maslov", str(value)]
    emit("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


def cmd_perturb(cfg: RunConfig) -> int:
    problem = load_checked(cfg)
    if problem is None:
        return EXIT_INVALID
    agreement = maslov_robust(
        problem,
        eps=cfg.eps,
        n_trials=cfg.trials,
        seed=cfg.seed,
        grid_size=GRID_SIZE,
        ode_tol=cfg.ode_tol,
        tol_rank=cfg.tol_rank,
        refine_tol=cfg.refine_tol,
        t_guard=T_GUARD,
        tol_eig=cfg.tol_eig,
    )
    lines = cfg.tolerance_header()
    lines.append(f"# eps={cfg.eps}")
    lines.append(f"# consensus={agreement.value}")
    lines.append("trial_seed,status,value")
    for record in agreement.trials:
        value = "" if record.value is None else str(record.value)
        lines.append(f"{record.seed},{record.status},{value}")
    emit("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


def cmd_trivialize(cfg: RunConfig) -> int:
    chart = chart_by_name(cfg.chart)
    n = chart.dim
    start = np.zeros(n)
    velocity = np.zeros(n)
    velocity[0] = 1.0
    seed = GeodesicSeed(start, velocity, T=cfg.param_length)
    germ = SubmanifoldGerm(np.zeros((n, 0)), np.zeros((0, 0)))
    problem = trivialize_from_seed(chart, seed, germ, ode_tol=cfg.ode_tol)
    output = cfg.output or f"{cfg.chart}.msp.json"
    save(problem, output)
    print(f"wrote {output}")
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    problem = load_checked(cfg)
    if problem is None:
        return EXIT_INVALID
    from .report import render_report

    out_dir = cfg.output or f"report_{Path(cfg.input_path).stem.split('.')[0]}"
    written = render_report(problem, cfg, out_dir)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


DISPATCH = {
    "focal": cmd_focal,
    "verify": cmd_verify,
    "evolve": cmd_evolve,
    "maslov": cmd_maslov,
    "perturb": cmd_perturb,
    "trivialize": cmd_trivialize,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    d = RunConfig("focal")
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--mesh", type=int, default=d.mesh)
    shared.add_argument("--ode-tol", type=float, default=d.ode_tol)
    shared.add_argument("--tol-rank", type=float, default=d.tol_rank)
    shared.add_argument("--tol-eig", type=float, default=d.tol_eig)
    shared.add_argument("--refine-tol", type=float, default=d.refine_tol)
    shared.add_argument("--t-grid", default=d.t_grid, metavar="A:B:STEP")
    shared.add_argument("--seed", type=int, default=d.seed)
    shared.add_argument("--eps", type=float, default=d.eps)
    shared.add_argument("--trials", type=int, default=d.trials)
    shared.add_argument("--output", default=None)
    shared.add_argument(
        "--show-config",
        action="store_true",
        help="print the resolved configuration as JSON and exit",
    )

    parser = argparse.ArgumentParser(
        prog="morsesturm",
        description="Focal instants and constrained index counts for "
        "second order systems with indefinite symmetry.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    for name, blurb in (
        ("focal", "scan for focal instants and print the table"),
        ("verify", "check the index identity and print the report"),
        ("evolve", "trace the constrained index over a t grid"),
        ("maslov", "signed count over interior focal instants"),
        ("perturb", "perturbation-voted signed count"),
        ("report", "write tables and rendered figures to a directory"),
    ):
        p = sub.add_parser(name, parents=[shared], help=blurb)
        p.add_argument("input", help="problem file or bundled fixture name")

    p = sub.add_parser(
        "trivialize",
        parents=[shared],
        help="reduce a chart geodesic to a problem file",
    )
    p.add_argument("--chart", required=True, help="built-in chart name")
    p.add_argument(
        "--T",
        dest="param_length",
        type=float,
        default=d.param_length,
        help="parameter length of the geodesic",
    )
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        input_path=getattr(args, "input", None),
        mesh=args.mesh,
        ode_tol=args.ode_tol,
        tol_rank=args.tol_rank,
        tol_eig=args.tol_eig,
        refine_tol=args.refine_tol,
        t_grid=args.t_grid,
        seed=args.seed,
        eps=args.eps,
        trials=args.trials,
        output=args.output,
        chart=getattr(args, "chart", None),
        param_length=getattr(args, "param_length", 1.0),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.show_config:
        print(json.dumps(dataclasses.asdict(cfg), indent=2, sort_keys=True))
        return EXIT_OK
    try:
        return DISPATCH[cfg.subcommand](cfg)
    except NotStabilized as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except WITNESS_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WITNESS
    except UnresolvedRoot as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.bracket is not None:
            print(f"bracket: {exc.bracket}", file=sys.stderr)
        return EXIT_SCAN
    except SCAN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCAN
    except (MorseSturmError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
