"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""
import time
from pathlib import Path

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid

from fracflow.catalog import CATALOG, constant_thickness, plane, sine2, tilted_plane
from fracflow.cli import main
from fracflow.config import load_config, parse_config
from fracflow.coupled import (
    MeshControls,
    build_coupled_mesh,
    coupled_difference_study,
    coupled_ex6,
    coupled_ex6_orthogonal,
    coupled_ex7,
    pss_reconstruct,
    solve_coupled_original,
    solve_coupled_reduced,
)
from fracflow.coupled.solver import PssState
from fracflow.discretization import Grid1D, PicardConfig
from fracflow.flowlaw import FluidParams, f_beta, monotonicity_gap
from fracflow.fracture import (
    make_fracture_scenario,
    original_grid,
    solve_original,
    solve_reduced_I,
    solve_reduced_II,
    well_flux,
)
from fracflow.geometry import detG_quartic, eval_quartic, geometry_at, gram_metric
from fracflow.runner import execute, run_coupled

CONFIGS = Path(__file__).parents[1] / "configs"
H_LIST = (0.01, 0.05, 0.1)
BETA_LIST = (0.0, 0.001, 1.0, 10.0, 50.0, 100.0)

# published (PI_PD, PI_R1) for the one-fracture reservoir, keyed by (H, beta)
REFERENCE_PI = {
    (0.01, 0.0): (0.035027478, 0.03524709),
    (0.01, 0.001): (0.034974637, 0.03519495),
    (0.01, 1.0): (0.027792767, 0.028039564),
    (0.01, 10.0): (0.025385268, 0.025591167),
    (0.01, 50.0): (0.024668646, 0.024847989),
    (0.01, 100.0): (0.024491447, 0.024661886),
    (0.05, 0.0): (0.05875387, 0.057609773),
    (0.05, 0.001): (0.058705992, 0.057564145),
    (0.05, 1.0): (0.041956574, 0.041597979),
    (0.05, 10.0): (0.030338957, 0.03057647),
    (0.05, 50.0): (0.026591578, 0.027038853),
    (0.05, 100.0): (0.025662443, 0.026149571),
    (0.1, 0.0): (0.076646162, 0.071405654),
    (0.1, 0.001): (0.076612623, 0.071375039),
    (0.1, 1.0): (0.058528659, 0.055027505),
    (0.1, 10.0): (0.037144807, 0.036224497),
    (0.1, 50.0): (0.02924881, 0.029500624),
    (0.1, 100.0): (0.027264275, 0.027825031),
}


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return emit


def _order(hs, errs):
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def test_criterion_1_quartic_matches_gram_determinant(report):
    rng = np.random.default_rng(1)
    names = ("saddle", "cylinder", "sphere", "sine2", "tilted_plane")
    t0 = time.perf_counter()
    worst = 0.0
    for name in names:
        entry = CATALOG[name]
        d = entry.domain
        u = rng.uniform(d[0], d[1], 100)
        v = rng.uniform(d[2], d[3], 100)
        lam = rng.uniform(-0.2, 0.2, 100)
        geo = geometry_at(entry.patch(), u, v)
        q = eval_quartic(detG_quartic(geo.forms, geo.frame), lam)
        brute = np.linalg.det(gram_metric(entry.patch(), u, v, lam))
        worst = max(worst, float(np.max(np.abs(q - brute) / np.abs(brute))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 1.0
    report(1, ok, f"max rel err {worst:.2e} over {len(names)}x100 points in {elapsed:.3f} s")
    assert ok


def test_criterion_2_constitutive_law(report):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    alpha = 10.0 ** rng.uniform(-2, 2, 10_000)
    beta = np.concatenate([[0.0], 10.0 ** rng.uniform(-4, 2, 9_999)])
    zeta = 10.0 ** rng.uniform(-6, 4, 10_000)
    f = f_beta(alpha, beta, zeta)
    residual = float(np.max(np.abs(beta * zeta * f * f + alpha * f - 1.0)))
    darcy_exact = bool(np.all(f_beta(alpha, 0.0, zeta) == 1.0 / alpha))
    e1 = rng.normal(scale=10.0, size=(10_000, 3))
    e2 = rng.normal(scale=10.0, size=(10_000, 3))
    gap = min(float(np.min(monotonicity_gap(e1, e2, FluidParams(beta=b)))) for b in (0.0, 1.0, 100.0))
    elapsed = time.perf_counter() - t0
    ok = residual <= 1e-12 and darcy_exact and gap >= -1e-12 and elapsed < 1.0
    report(2, ok, f"residual {residual:.2e}, Darcy exact {darcy_exact}, min gap {gap:.3e}, {elapsed:.3f} s")
    assert ok


def test_criterion_3_closed_form_solves(report):
    t0 = time.perf_counter()
    c = 0.5
    scn = make_fracture_scenario(tilted_plane(c), constant_thickness(0.05), FluidParams(Q=1.0))
    p = scn.params
    exact = lambda u: p.alpha * (1 + c * c) * p.source_density * (u - u * u / 2)  # L = 1
    xg, wg = leggauss(5)
    hs, errs = [], []
    for n in (8, 16, 32, 64):
        g = Grid1D.uniform(0.0, 1.0, n)
        W = solve_reduced_II(scn, g, PicardConfig(rel_tol=1e-12)).W
        half = 0.5 * np.diff(g.nodes)
        u = 0.5 * (g.nodes[:-1] + g.nodes[1:])[:, None] + half[:, None] * xg
        err = np.interp(u, g.nodes, W) - exact(u)
        hs.append(1 / n)
        errs.append(np.sqrt(np.sum(half[:, None] * wg * err**2)))
    order = _order(hs, errs)

    h, qp, qm = 0.02, 1.5, 0.5
    flat = make_fracture_scenario(plane(), constant_thickness(2 * h), FluidParams(), qp, qm)
    field = solve_original(flat, original_grid(flat, 400, 16))
    grid = field.grid
    avg = trapezoid(field.W.reshape(grid.nu + 1, grid.ns + 1), grid.s_nodes, axis=1) / 2.0
    un = grid.u_nodes
    closed = flat.params.alpha * (flat.params.source_density + (qp + qm) / (2 * h)) * (un - un**2 / 2)
    flat_err = float(np.max(np.abs(avg - closed)) / np.max(closed))
    elapsed = time.perf_counter() - t0
    ok = abs(order - 2.0) <= 0.2 and flat_err <= 1e-3 and elapsed < 30
    report(3, ok, f"tilted-plane order {order:.3f}, flat lambda-average rel err {flat_err:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_4_halfcircle_line_differences(report):
    t0 = time.perf_counter()
    thin = execute(load_config(CONFIGS / "ex1_thin.cfg")).summary
    thick = execute(load_config(CONFIGS / "ex1_thick.cfg")).summary
    elapsed = time.perf_counter() - t0
    t1, t2 = thin["max_rel_diff_reduced1"], thin["max_rel_diff_reduced2"]
    k1, k2 = thick["max_rel_diff_reduced1"], thick["max_rel_diff_reduced2"]
    ok = t1 <= 0.02 and t2 <= 0.02 and k1 < k2 and elapsed < 120
    report(4, ok, f"thin R1 {t1:.2e} R2 {t2:.2e}; thick R1 {k1:.3e} < R2 {k2:.3e}; {elapsed:.1f} s")
    assert ok


@pytest.mark.slow
def test_criterion_5_capacity_table(report):
    cfg = load_config(CONFIGS / "table1.cfg")
    t0 = time.perf_counter()
    res = run_coupled(cfg, threads=4, sweep=True)
    elapsed = time.perf_counter() - t0
    rows = res.tables["pi_table.csv"].rows
    pi = {(r[0], r[1]): (r[2], r[3]) for r in rows}
    assert sorted(pi) == sorted(REFERENCE_PI)
    inc_H = all(pi[H_LIST[i], b][m] < pi[H_LIST[i + 1], b][m] for b in BETA_LIST for i in range(2) for m in (0, 1))
    dec_beta = all(
        pi[H, BETA_LIST[i]][m] > pi[H, BETA_LIST[i + 1]][m] for H in H_LIST for i in range(len(BETA_LIST) - 1) for m in (0, 1)
    )
    worst_rel = max(r[4] for r in rows)
    ok = inc_H and dec_beta and worst_rel <= 0.1 and not res.failed and elapsed < 900
    stretch = [abs(pi[k][m] - REFERENCE_PI[k][m]) / REFERENCE_PI[k][m] for k in pi for m in (0, 1)]
    within = sum(s <= 0.25 for s in stretch)
    report(
        5,
        ok,
        f"increasing in H {inc_H}, decreasing in beta {dec_beta}, max rel_err {worst_rel:.2e}, {elapsed:.1f} s"
        f" | stretch: {within}/{len(stretch)} values within 25% of the published table (max dev {max(stretch):.2f})",
    )
    assert ok


@pytest.mark.slow
def test_criterion_6_thickness_study(report):
    cfg = load_config(CONFIGS / "hsweep.cfg")
    mc = cfg.mesh_controls()
    t0 = time.perf_counter()
    rows, slope = coupled_difference_study(lambda h: coupled_ex6_orthogonal(h, cfg.fluid, mc), cfg.h_list, cfg.picard)
    elapsed = time.perf_counter() - t0
    qbar = max(r[2] for r in rows)
    _, oblique = coupled_difference_study(lambda h: coupled_ex6(h, cfg.fluid, mc), cfg.h_list, cfg.picard)
    ok = slope >= 2.0 and elapsed < 900
    diffs = ", ".join(f"{r[1]:.3e}" for r in rows)
    report(
        6,
        ok,
        f"slope {slope:.3f} (differences {diffs}), max|qbar/h| {qbar:.3f}, {elapsed:.1f} s"
        f" | unrotated one-fracture reservoir slope {oblique:.3f}",
    )
    assert ok


def test_criterion_7_conservation_and_pss(report):
    worst_flux = 0.0
    fr = make_fracture_scenario(sine2(), constant_thickness(0.2), FluidParams(beta=1.0, Q=1.0))
    cfg = PicardConfig(rel_tol=1e-10)
    for field in (solve_original(fr, original_grid(fr, 200, 8), cfg), solve_reduced_I(fr, cfg=cfg), solve_reduced_II(fr, cfg=cfg)):
        worst_flux = max(worst_flux, abs(well_flux(field) - 1.0))
    pss_worst = 0.0
    mc = MeshControls(n_u=100)
    for make in (coupled_ex6, coupled_ex7):
        for beta in (0.0, 10.0):
            scn = make(0.1, FluidParams(beta=beta, Q=1.0), mc)
            mesh = build_coupled_mesh(scn)
            for solver in (solve_coupled_original, solve_coupled_reduced):
                sol = solver(scn, cfg, mesh)
                worst_flux = max(worst_flux, abs(sol.well_flux - scn.params.Q) / scn.params.Q)
                state = PssState.from_solution(sol, K=2.5)
                ref = pss_reconstruct(state, 0.0)
                for t in (1e-3, 1.0, 250.0, 1e5):
                    p = pss_reconstruct(state, t)
                    pss_worst = max(
                        pss_worst,
                        abs(p.pdd() - ref.pdd()) / abs(ref.pdd()),
                        abs(p.productivity() - ref.productivity()) / abs(ref.productivity()),
                    )
    ok = worst_flux <= 1e-6 and pss_worst <= 1e-14
    report(7, ok, f"max rel well-flux error {worst_flux:.2e}, max PDD/J drift across t {pss_worst:.1e}")
    assert ok


def test_criterion_8_sweep_is_deterministic(tmp_path, report):
    text = (CONFIGS / "small_sweep.cfg").read_text() + "h = 0.1, 0.05\n"
    parse_config(text)
    cfg = tmp_path / "det.cfg"
    cfg.write_text(text)
    outs = [tmp_path / "first", tmp_path / "second", tmp_path / "threaded"]
    codes = [main(["sweep", str(cfg), "--out", str(o), "--threads", t]) for o, t in zip(outs, ("1", "1", "4"))]
    csvs = sorted(p.name for p in outs[0].glob("*.csv"))
    same = all((o / n).read_bytes() == (outs[0] / n).read_bytes() for o in outs[1:] for n in csvs)
    same_manifest = all((o / "manifest.json").read_bytes() == (outs[0] / "manifest.json").read_bytes() for o in outs[1:])
    ok = codes == [0, 0, 0] and {"pi_table.csv", "tdifference.csv"} <= set(csvs) and same and same_manifest
    report(8, ok, f"{len(csvs)} CSVs byte-identical over 3 sweeps (1, 1, 4 threads): {same}; manifests identical: {same_manifest}")
    assert ok
