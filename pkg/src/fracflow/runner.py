"""Execute a RunConfig and collect tabular outputs in memory.

Nothing here touches the file system: every entry point returns a
``RunResult`` whose tables the CLI writes once all solves are done.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .catalog import catalog_entry
from .config import RunConfig
from .coupled import (
    RESERVOIRS,
    build_coupled_mesh,
    coupled_difference_study,
    diffusive_capacity,
    solve_coupled_original,
    solve_coupled_reduced,
)
from .errors import FracflowError
from .fracture import (
    compare_fracture_solutions,
    line_grid,
    make_fracture_scenario,
    original_grid,
    solve_original,
    solve_reduced_I,
    solve_reduced_II,
    well_flux,
)

log = logging.getLogger(__name__)

PI_HEADER = ("H", "beta", "PI_PD", "PI_R1", "rel_err", "status")
TDIFF_HEADER = ("h", "grad_diff_sq", "qbar_over_h_max", "PI_PD", "PI_R1")


@dataclass
class Table:
    header: tuple
    rows: list = field(default_factory=list)


@dataclass
class RunResult:
    tables: dict = field(default_factory=dict)  # file name -> Table
    solves: list = field(default_factory=list)  # manifest diagnostics, one dict per solve
    summary: dict = field(default_factory=dict)
    failed: bool = False


def _diag(label, info, n_dofs, flux=None):
    out = {
        "solve": label,
        "dofs": int(n_dofs),
        "iterations": int(info["iterations"]),
        "relaxation": float(info["relaxation"]),
        "final_residual": float(info["final_residual"]),
    }
    if flux is not None:
        out["well_flux"] = float(flux)
    return out


# -- single fracture ---------------------------------------------------------------


def fracture_scenario(cfg: RunConfig):
    entry = catalog_entry(cfg.name)
    return make_fracture_scenario(
        entry.patch(), entry.thickness(cfg.H), cfg.fluid, cfg.q_plus, cfg.q_minus, name=cfg.name, qtilde_at=cfg.qtilde_at
    )


def run_fracture(cfg: RunConfig) -> RunResult:
    scn = fracture_scenario(cfg)
    grid2 = original_grid(scn, cfg.mesh["n_u"], cfg.mesh["n_s"])
    grid1 = line_grid(scn, cfg.mesh["n_line"])
    orig = solve_original(scn, grid2, cfg.picard)
    red1 = solve_reduced_I(scn, grid1, cfg.picard)
    red2 = solve_reduced_II(scn, grid1, cfg.picard)

    res = RunResult()
    res.tables["profile_original.csv"] = Table(("u", "W"), list(zip(grid2.u_nodes, grid2.center_line(orig.W))))
    res.tables["profile_reduced1.csv"] = Table(("u", "W"), list(zip(grid1.nodes, red1.W)))
    res.tables["profile_reduced2.csv"] = Table(("u", "W"), list(zip(grid1.nodes, red2.W)))
    cmp_rows = []
    for tag, field_ in (("reduced1", red1), ("reduced2", red2)):
        c = compare_fracture_solutions(orig, field_, scn)
        cmp_rows.append((tag, c["max_rel_diff_on_line"], c["l32_grad_u_diff"], c["l32_W_lambda"]))
        res.summary[f"max_rel_diff_{tag}"] = c["max_rel_diff_on_line"]
    res.tables["comparison.csv"] = Table(("model", "max_rel_diff_on_line", "l32_grad_u_diff", "l32_W_lambda"), cmp_rows)
    if cfg.fields:
        uv = grid2.coords
        res.tables["field_original.csv"] = Table(("u", "lam", "W"), [(a, b, w) for (a, b), w in zip(uv, orig.W)])
    for tag, f_, n in (("original", orig, grid2.n_nodes), ("reduced1", red1, grid1.n_nodes), ("reduced2", red2, grid1.n_nodes)):
        res.solves.append(_diag(tag, f_.info, n, well_flux(f_)))
    return res


# -- coupled reservoir -------------------------------------------------------------


def coupled_scenario(cfg: RunConfig, H=None, beta=None):
    fluid = cfg.fluid if beta is None else cfg.fluid.with_(beta=beta)
    return RESERVOIRS[cfg.name](cfg.H if H is None else H, fluid, cfg.mesh_controls())


def pi_cell(cfg: RunConfig, H, beta):
    """Both coupled models for one (H, beta) cell; returns (row, diagnostics, solutions)."""
    scn = coupled_scenario(cfg, H, beta)
    mesh = build_coupled_mesh(scn)
    pd = solve_coupled_original(scn, cfg.picard, mesh)
    r1 = solve_coupled_reduced(scn, cfg.picard, mesh)
    a, b = diffusive_capacity(pd), diffusive_capacity(r1)
    row = (H, beta, a, b, abs(a - b) / a, "OK")
    diags = [
        _diag(f"PD(H={H!r},beta={beta!r})", pd.info, mesh.n_nodes, pd.well_flux),
        _diag(f"R1(H={H!r},beta={beta!r})", r1.info, mesh.n_nodes, r1.well_flux),
    ]
    return row, diags, (pd, r1)


def _safe_cell(cfg, H, beta):
    try:
        row, diags, _ = pi_cell(cfg, H, beta)
        return row, diags
    except FracflowError as exc:
        log.error("cell H=%r beta=%r failed: %s", H, beta, exc)
        nan = float("nan")
        return (H, beta, nan, nan, nan, "FAILED"), [{"solve": f"cell(H={H!r},beta={beta!r})", "error": str(exc)}]


def run_coupled(cfg: RunConfig, threads=1, sweep=False) -> RunResult:
    """Solve every (H, beta) cell; ``sweep`` also runs the thickness study.

    Cells are dispatched to a thread pool but collected in cell order, so the
    output does not depend on ``threads``.
    """
    res = RunResult()
    cells = cfg.cells
    if len(cells) == 1 and not cfg.has_table:
        row, diags, (pd, r1) = pi_cell(cfg, *cells[0])
        results = [(row, diags)]
        for tag, sol in (("original", pd), ("reduced1", r1)):
            rows = [(k, u, w) for k, (u, W) in enumerate(sol.lines) for u, w in zip(u, W)]
            res.tables[f"profile_{tag}.csv"] = Table(("fracture", "u", "W"), rows)
            if cfg.fields:
                res.tables[f"field_{tag}.csv"] = Table(("x", "z", "W"), [(p[0], p[1], w) for p, w in zip(sol.mesh.points, sol.W)])
    elif threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: _safe_cell(cfg, *c), cells))
    else:
        results = [_safe_cell(cfg, *c) for c in cells]
    res.tables["pi_table.csv"] = Table(PI_HEADER, [r for r, _ in results])
    for _, diags in results:
        res.solves.extend(diags)
    res.failed = any(r[-1] == "FAILED" for r, _ in results)

    if sweep and cfg.h_list:
        beta = cfg.beta_list[0] if cfg.beta_list else cfg.fluid.beta
        rows, slope = coupled_difference_study(lambda h: coupled_scenario(cfg, h, beta), cfg.h_list, cfg.picard)
        res.tables["tdifference.csv"] = Table(TDIFF_HEADER, rows)
        res.summary["tdifference_slope"] = slope
        res.summary["tdifference_beta"] = beta
    return res


def execute(cfg: RunConfig, threads=1, sweep=False) -> RunResult:
    if cfg.kind == "fracture":
        return run_fracture(cfg)
    return run_coupled(cfg, threads=threads, sweep=sweep)


def fmt_cell(x):
    """Full-precision decimal text for CSV cells."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)
