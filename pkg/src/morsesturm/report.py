"""Rendered report: delimited tables plus figures in one directory.

Kept separate from the pipeline subcommands so that matplotlib is only
imported when a report is actually requested.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .focal import scan_focal
from .indexform import evolution_trace
from .solver import solve_fundamental

PNG_META = {"Software": "morsesturm report"}


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def _traces_csv(scan, header) -> str:
    lines = list(header)
    lines.append("t,det,sigma_min")
    for t, det, sig in zip(scan.ts, scan.det_trace, scan.sigma_min_trace):
        lines.append(f"{t:.6f},{det:.9e},{sig:.9e}")
    return "\n".join(lines) + "\n"


def _fundamental_csv(solution, header) -> str:
    n = solution.columns.shape[1]
    k = solution.columns.shape[2]
    names = [f"M{i}{j}" for i in range(n) for j in range(k)]
    names += [f"Mp{i}{j}" for i in range(n) for j in range(k)]
    lines = list(header)
    lines.append("t," + ",".join(names))
    for t, m, mp in zip(solution.ts, solution.columns, solution.columns_deriv):
        row = np.concatenate([m.ravel(), mp.ravel()])
        lines.append(f"{t:.6f}," + ",".join(f"{x:.9e}" for x in row))
    return "\n".join(lines) + "\n"


def _traces_figure(scan, path: Path) -> Path:
    fig, (ax_sig, ax_det) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 5.0))
    ax_sig.plot(scan.ts, scan.sigma_min_trace, color="tab:blue", lw=1.0)
    ax_sig.set_ylabel("smallest singular value")
    ax_det.plot(scan.ts, scan.det_trace, color="tab:green", lw=1.0)
    ax_det.axhline(0.0, color="0.6", lw=0.7)
    ax_det.set_ylabel("determinant")
    ax_det.set_xlabel("t")
    for inst in scan.instants:
        for ax in (ax_sig, ax_det):
            ax.axvline(inst.t, color="tab:red", lw=0.8, ls="--")
    ax_sig.set_title("focal detection traces")
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_META)
    plt.close(fig)
    return path


def _staircase_figure(trace, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    ax.step(trace.ts, trace.i_of_t, where="post", color="tab:blue", lw=1.4)
    for jump in trace.jumps:
        ax.axvline(jump.t_jump, color="tab:red", lw=0.8, ls="--")
        if jump.matched_focal_t is not None:
            ax.plot([jump.matched_focal_t], [min(trace.i_of_t)], "rv", ms=6)
    ax.set_xlabel("t")
    ax.set_ylabel("index i(t)")
    ax.set_title("index evolution")
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_META)
    plt.close(fig)
    return path


def render_report(problem, cfg, out_dir) -> list[Path]:
    """Scan, trace, and render one problem into ``out_dir``.

    Writes the focal table, the detection traces, the solution family
    dump, the evolution and jump tables, and two figures. Returns the
    written paths in a fixed order.
    """
    from .cli import GRID_SIZE, T_GUARD, evolution_tables, focal_table, parse_t_grid

    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    header = cfg.tolerance_header()

    solution = solve_fundamental(problem, grid_size=GRID_SIZE, ode_tol=cfg.ode_tol)
    scan = scan_focal(
        solution,
        tol_rank=cfg.tol_rank,
        refine_tol=cfg.refine_tol,
        t_guard=T_GUARD,
        tol_eig=cfg.tol_eig,
    )
    trace = evolution_trace(
        problem,
        mesh=cfg.mesh,
        t_grid=parse_t_grid(cfg.t_grid),
        scan=scan,
        tol_eig=cfg.tol_eig,
        tol_rank=cfg.tol_rank,
        grid_size=GRID_SIZE,
        ode_tol=cfg.ode_tol,
    )
    evolution_csv, jumps_csv = evolution_tables(trace, header)

    written = [
        _write(directory / "focal.csv", focal_table(scan, header)),
        _write(directory / "traces.csv", _traces_csv(scan, header)),
        _write(directory / "fundamental.csv", _fundamental_csv(solution, header)),
        _write(directory / "evolution.csv", evolution_csv),
        _write(directory / "jumps.csv", jumps_csv),
        _traces_figure(scan, directory / "traces.png"),
        _staircase_figure(trace, directory / "staircase.png"),
    ]
    return written
