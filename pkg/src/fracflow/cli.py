"""Command line entry point: ``fracflow run|sweep|compare``.

Exit codes: 0 success, 2 invalid config or mismatched inputs, 3 solver
failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigError, FracflowError
from .runner import RunResult, Table, execute, fmt_cell

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
OUT_ENV = "FRACFLOW_OUT"

log = logging.getLogger("fracflow")


class UsageError(Exception):
    """Inputs that are well-formed but cannot be processed together."""


def csv_text(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([fmt_cell(x) for x in row])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def output_dir(cfg: RunConfig, cfg_path, override=None) -> Path:
    if override:
        return Path(override)
    if cfg.out_dir:
        return Path(cfg.out_dir)
    root = os.environ.get(OUT_ENV, "fracflow_out")
    return Path(root) / Path(cfg_path).stem


def write_outputs(out: Path, files: dict):
    """Write ``{name: text}`` into ``out``; text is encoded as UTF-8 with ``\\n`` endings."""
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(files[name])


def render_run(cfg: RunConfig, res: RunResult, command: str) -> dict:
    files = {name: csv_text(t) for name, t in res.tables.items()}
    manifest = {
        "command": command,
        "version": __version__,
        "scenario": {"kind": cfg.kind, "name": cfg.name},
        "config_sha256": cfg.digest(),
        "config": cfg.source,
        "solver": {"rel_tol": cfg.picard.rel_tol, "max_iter": cfg.picard.max_iter},
        "solves": res.solves,
        "summary": res.summary,
        "files": {n: hashlib.sha256(files[n].encode()).hexdigest() for n in sorted(files)},
    }
    files["manifest.json"] = json.dumps(_json_safe(manifest), indent=2, sort_keys=True) + "\n"
    return files


def cmd_run(args, sweep=False):
    cfg = load_config(args.config)
    if args.tol is not None:
        cfg = cfg.with_tol(args.tol)
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    out = output_dir(cfg, args.config, args.out)
    res = execute(cfg, threads=args.threads, sweep=sweep)
    files = render_run(cfg, res, "sweep" if sweep else "run")
    write_outputs(out, files)
    for k, v in sorted(res.summary.items()):
        print(f"{k} = {v!r}")
    print(f"wrote {len(files)} files to {out}")
    return EXIT_SOLVER if res.failed else EXIT_OK


# -- compare -------------------------------------------------------------------------


def _read_csv(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise UsageError(f"{path} has no header row")
    return rows[0], rows[1:]


def _numeric_columns(header, rows):
    cols = {}
    for j, name in enumerate(header):
        try:
            cols[name] = np.array([float(r[j]) for r in rows])
        except ValueError:
            continue
    return cols


def _profile_differences(run: Path):
    """Per-u relative differences of every reduced profile against the original one."""
    ref_path = run / "profile_original.csv"
    if not ref_path.exists():
        return None, {}
    h0, r0 = _read_csv(ref_path)
    ref = _numeric_columns(h0, r0)
    frac = ref.get("fracture", np.zeros(len(r0)))
    header, columns, worst = ["u", "W_original"], [ref["u"], ref["W"]], {}
    if "fracture" in ref:
        header.insert(0, "fracture")
        columns.insert(0, frac)
    for name in ("reduced1", "reduced2"):
        p = run / f"profile_{name}.csv"
        if not p.exists():
            continue
        h, r = _read_csv(p)
        red = _numeric_columns(h, r)
        rfrac = red.get("fracture", np.zeros(len(r)))
        on, rel = np.empty_like(ref["W"]), np.empty_like(ref["W"])
        for k in np.unique(frac):
            a, b = frac == k, rfrac == k
            on[a] = np.interp(ref["u"][a], red["u"][b], red["W"][b])
            scale = np.max(np.abs(ref["W"][a]))
            rel[a] = np.abs(ref["W"][a] - on[a]) / (scale if scale > 0 else 1.0)
        header += [f"W_{name}", f"rel_diff_{name}"]
        columns += [on, rel]
        worst[name] = float(np.max(rel))
    return Table(tuple(header), [tuple(c[i] for c in columns) for i in range(len(ref["u"]))]), worst


def cmd_compare(args):
    runs = [Path(d) for d in args.runs]
    manifests = []
    for d in runs:
        mpath = d / "manifest.json"
        if not mpath.exists():
            raise UsageError(f"{d} is not a run directory (no manifest.json)")
        manifests.append(json.loads(mpath.read_text(encoding="utf-8")))
    scen = {json.dumps(m.get("scenario"), sort_keys=True) for m in manifests}
    if len(scen) > 1:
        raise UsageError(f"runs do not share a scenario: {sorted(scen)}")

    files, lines = {}, []
    prof, worst = _profile_differences(runs[0])
    if prof is not None:
        files["compare_profiles.csv"] = csv_text(prof)
        for k, v in worst.items():
            lines.append(f"max relative line difference original vs {k}: {v:.6e}")
    cmp_path = runs[0] / "comparison.csv"
    if cmp_path.exists():
        h, r = _read_csv(cmp_path)
        for row in r:
            lines.append("  ".join(f"{a}={b}" for a, b in zip(h, row)))
    pi_path = runs[0] / "pi_table.csv"
    if pi_path.exists():
        h, r = _read_csv(pi_path)
        rel = _numeric_columns(h, r).get("rel_err", np.array([]))
        if rel.size:
            lines.append(f"PI rel_err max over {rel.size} cells: {np.nanmax(rel):.6e}")

    # cross-run differences of every shared CSV, against the first run
    rows = []
    for other in runs[1:]:
        shared = sorted({p.name for p in runs[0].glob("*.csv")} & {p.name for p in other.glob("*.csv")})
        for name in shared:
            ha, ra = _read_csv(runs[0] / name)
            hb, rb = _read_csv(other / name)
            if ha != hb or len(ra) != len(rb):
                raise UsageError(f"{name} differs in layout between {runs[0]} and {other}")
            ca, cb = _numeric_columns(ha, ra), _numeric_columns(hb, rb)
            for col in ha:
                if col in ca and col in cb:
                    d = np.abs(ca[col] - cb[col])
                    d = d[~(np.isnan(ca[col]) & np.isnan(cb[col]))]
                    rows.append((name, str(other), col, float(np.max(d)) if d.size else 0.0))
    if len(runs) > 1:
        files["compare_runs.csv"] = csv_text(Table(("file", "run", "column", "max_abs_diff"), rows))
        worst_cross = max((r[3] for r in rows), default=0.0)
        lines.append(f"max absolute difference across runs: {worst_cross:.6e}")

    out = Path(args.out) if args.out else runs[0]
    write_outputs(out, files)
    report = "\n".join(lines) + "\n"
    write_outputs(out, {"compare_report.txt": report})
    sys.stdout.write(report)
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="fracflow", description="Fracture and reservoir flow runs")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "solve one configuration"), ("sweep", "parallel (H, beta) sweep and thickness study")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")
        p.add_argument("--out", help=f"output directory (default: ${OUT_ENV}/<config stem>)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tol", type=float, help="override [solver] rel_tol")
    p = sub.add_parser("compare", help="compare run directories")
    p.add_argument("runs", nargs="+")
    p.add_argument("--out", help="directory for the comparison files (default: first run)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compare":
            return cmd_compare(args)
        return cmd_run(args, sweep=args.command == "sweep")
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FracflowError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
