"""Experiment runner: named presets plus free-form parameter overrides.

Each preset reproduces the data behind one figure of the study. Outputs are
CSV tables plus a ``meta.json`` sidecar under ``<out>/<preset>/``; runs are
fully deterministic, so re-running a preset reproduces byte-identical files.

Exit codes: 0 success, 2 usage error, 3 convergence failure (a diagnostic
``error.json`` is written in the latter case).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .evolve import IntegrationError, LeakageError, propagate_sweep
from .fock import FockSpace
from .model import ArrayConfig, OscillatorParams, SweepSchedule
from .opensys import (
    DissipationParams,
    SteadyStateError,
    laplacian_at_origin,
    laplacian_from_grid,
    liouvillian,
    scan_laplacian,
    semiclassical_steady_state,
    steady_state,
    wigner,
)
from .povm import measurement_set
from .spectra import array_low_spectrum, dominant_orbit
from .symmetry import config_orbit

USAGE_EXIT = 2
CONVERGENCE_EXIT = 3

_CONVERGENCE_ERRORS = (LeakageError, IntegrationError, SteadyStateError, RuntimeError)


# --- option plumbing ----------------------------------------------------------


def _coerce(key: str, raw: str, default):
    """Parse a --set value string with the type of the preset default."""
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def _apply_overrides(defaults: dict, overrides: dict) -> dict:
    cfg = dict(defaults)
    for key, raw in overrides.items():
        if key not in cfg:
            raise KeyError(key)
        cfg[key] = _coerce(key, raw, cfg[key])
    return cfg


def _write_meta(outdir: Path, preset: str, cfg: dict, started: float, diagnostics: dict):
    meta = {
        "preset": preset,
        "config": cfg,
        "diagnostics": diagnostics,
        "wall_clock_seconds": round(time.time() - started, 3),
        "version": __version__,
    }
    with open(outdir / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _sweep(cfg: dict, n_sites: int, coupling: float, cutoff: int):
    params = OscillatorParams(delta=0.0, drive=0.0, kerr=1.0, drive_order=cfg["drive_order"])
    ring = ArrayConfig.ring(n_sites, coupling)
    schedule = SweepSchedule(r_max=cfg["r_max"], delta_ini=cfg["delta_ini"], t_f=cfg["t_f"])
    space = FockSpace(cutoff, n_sites)
    return propagate_sweep(
        params,
        ring,
        schedule,
        space,
        n_records=cfg["n_records"],
        leak_tol=cfg["leak_tol"],
    )


def _spectrum_csv(path: Path, result, space=None, mset=None):
    """index, energy, symmetric flag, and dominant orbit for symmetric states."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "energy", "symmetric", "dominant_orbit"])
        for i, energy in enumerate(result.eigenvalues):
            flag = int(result.symmetric_flags[i])
            orbit = ""
            if flag and mset is not None and result.vectors is not None:
                rep, _ = dominant_orbit(result.state(space, i), mset)
                orbit = "".join(map(str, rep))
            w.writerow([i, repr(float(energy)), flag, orbit])


def _endpoint_spectrum(cfg: dict, n_sites: int, coupling: float, cutoff: int, k: int, outpath: Path):
    params = OscillatorParams(
        delta=0.0, drive=cfg["r_max"], kerr=1.0, drive_order=cfg["drive_order"]
    )
    ring = ArrayConfig.ring(n_sites, coupling)
    space = FockSpace(cutoff, n_sites)
    result = array_low_spectrum(params, ring, space, k)
    mset = measurement_set(cfg["drive_order"], FockSpace(cutoff, 1))
    _spectrum_csv(outpath, result, space, mset)
    return result


# --- presets ------------------------------------------------------------------


def preset_fig1c(cfg, outdir, threads):
    space = FockSpace(cfg["cutoff"], 1)
    rs = np.linspace(0.0, cfg["r_max"], cfg["path_points"])
    points = [(r, cfg["delta_ini"] * (1.0 - r / cfg["r_max"])) for r in rs]
    from .spectra import single_spectrum_path

    results = single_spectrum_path(points, space, cfg["levels"])
    with open(outdir / "spectrum.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "delta"] + [f"e_{i}" for i in range(cfg["levels"])])
        for (r, delta), res in zip(points, results):
            w.writerow([repr(float(r)), repr(float(delta))] + [repr(float(e)) for e in res.eigenvalues])
    return {"path_points": cfg["path_points"]}


preset_fig1c.defaults = {
    "cutoff": 30,
    "r_max": 1.4,
    "delta_ini": 6.0,
    "path_points": 41,
    "levels": 12,
    "drive_order": "tripling",
}


def preset_fig1b(cfg, outdir, threads):
    space = FockSpace(cfg["cutoff"], 1)
    params = OscillatorParams(delta=cfg["delta"], drive=cfg["r"], kerr=1.0, drive_order="tripling")
    result = array_low_spectrum(params, ArrayConfig(1), space, cfg["levels"])
    sym = np.nonzero(result.symmetric_flags)[0]
    if len(sym) == 0:
        raise SteadyStateError("no symmetric eigenstate among the lowest levels")
    state = result.state(space, int(sym[0])).to_density()
    grid = wigner(state, half_width=cfg["half_width"], npts=cfg["npts"], params=params)
    grid.to_csv(outdir / "wigner.csv")
    return {
        "symmetric_index": int(sym[0]),
        "energy": float(result.eigenvalues[sym[0]]),
        "wigner_mass": grid.mass_captured,
    }


preset_fig1b.defaults = {
    "cutoff": 40,
    "r": 1.4,
    "delta": 0.0,
    "levels": 6,
    "half_width": 5.0,
    "npts": 151,
}


def _sweep_preset(n_sites, coupling_sign, cutoff, with_spectrum, spectrum_k):
    def run(cfg, outdir, threads):
        traj = _sweep(cfg, cfg["n_sites"], coupling_sign * cfg["coupling"], cfg["cutoff"])
        traj.to_csv(outdir / "trajectory.csv")
        diag = {
            "max_leakage": float(np.max(traj.leakage)),
            "final_norm": float(traj.norms[-1]),
            "final_symmetric_weight": float(traj.symmetric_weights[-1]),
        }
        if with_spectrum:
            result = _endpoint_spectrum(
                cfg,
                cfg["n_sites"],
                coupling_sign * cfg["coupling"],
                cfg["cutoff"],
                cfg["spectrum_levels"],
                outdir / "spectrum.csv",
            )
            diag["n_symmetric"] = result.n_symmetric()
        return diag

    run.defaults = {
        "n_sites": n_sites,
        "coupling": 0.4,
        "cutoff": cutoff,
        "r_max": 1.4,
        "delta_ini": 6.0,
        "t_f": 100.0,
        "n_records": 200,
        "leak_tol": 1e-3,
        "drive_order": "tripling",
    }
    if with_spectrum:
        run.defaults["spectrum_levels"] = spectrum_k
    return run


def preset_fig4a(cfg, outdir, threads):
    space = FockSpace(cfg["cutoff"], 1)
    params = OscillatorParams(delta=cfg["delta"], drive=0.0, kerr=1.0, drive_order="tripling")
    diss = DissipationParams(kappa=cfg["kappa_max"], nbar=cfg["nbar"])
    table = scan_laplacian(
        ("r", np.linspace(0.0, cfg["r_max"], cfg["scan_points"])),
        ("kappa", np.linspace(cfg["kappa_min"], cfg["kappa_max"], cfg["scan_points"])),
        params,
        diss,
        space,
        threads=threads,
    )
    table.to_csv(outdir / "scan.csv")
    failures = sum(1 for row in table.rows if row[4] is not None)
    return {"points": len(table.rows), "failed_points": failures}


preset_fig4a.defaults = {
    "cutoff": 40,
    "delta": 0.0,
    "nbar": 0.0,
    "r_max": 1.5,
    "kappa_min": 0.05,
    "kappa_max": 1.0,
    "scan_points": 21,
}


def preset_fig4b(cfg, outdir, threads):
    space = FockSpace(cfg["cutoff"], 1)
    diss = DissipationParams(kappa=cfg["kappa"], nbar=cfg["nbar"])
    rows = []
    for r in np.linspace(0.0, cfg["r_max"], cfg["path_points"]):
        params = OscillatorParams(delta=cfg["delta"], drive=float(r), kerr=1.0, drive_order="tripling")
        rho = steady_state(liouvillian(params, diss, space))
        lap_q = laplacian_at_origin(rho)
        lap_c = laplacian_from_grid(semiclassical_steady_state(params, diss)) if r > 0 else None
        rows.append((float(r), lap_q, lap_c))
    with open(outdir / "cut.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "laplacian_quantum", "laplacian_semiclassical"])
        for r, lq, lc in rows:
            w.writerow([repr(r), repr(float(lq)), "" if lc is None else repr(float(lc))])
    return {"points": len(rows)}


preset_fig4b.defaults = {
    "cutoff": 40,
    "delta": 0.0,
    "kappa": 0.5,
    "nbar": 0.0,
    "r_max": 1.5,
    "path_points": 31,
}


def _wigner_pair(cfg, outdir, threads):
    space = FockSpace(cfg["cutoff"], 1)
    params = OscillatorParams(delta=cfg["delta"], drive=cfg["r"], kerr=1.0, drive_order="tripling")
    diss = DissipationParams(kappa=cfg["kappa"], nbar=cfg["nbar"])
    rho = steady_state(liouvillian(params, diss, space))
    grid_q = wigner(rho, half_width=cfg["half_width"], npts=cfg["npts"], params=params)
    grid_q.to_csv(outdir / "wigner_quantum.csv")
    grid_c = semiclassical_steady_state(params, diss, half_width=cfg["half_width"], npts=cfg["npts"])
    grid_c.to_csv(outdir / "wigner_semiclassical.csv")
    return {
        "laplacian_quantum": laplacian_at_origin(rho),
        "laplacian_semiclassical": laplacian_from_grid(grid_c),
        "wigner_mass": grid_q.mass_captured,
    }


def preset_fig4cd(cfg, outdir, threads):
    return _wigner_pair(cfg, outdir, threads)


preset_fig4cd.defaults = {
    "cutoff": 40,
    "r": 1.0,
    "delta": 0.0,
    "kappa": 0.5,
    "nbar": 0.0,
    "half_width": 5.0,
    "npts": 121,
}

preset_figA3 = _wigner_pair
# separate defaults: same pair of tables at the weaker drive point
preset_figA3_defaults = dict(preset_fig4cd.defaults, r=0.75)


def preset_figA1(cfg, outdir, threads):
    diag = {}
    for label, sign in (("ferro", 1.0), ("antiferro", -1.0)):
        traj = _sweep(cfg, cfg["n_sites"], sign * cfg["coupling"], cfg["cutoff"])
        traj.to_csv(outdir / f"trajectory_{label}.csv")
        _endpoint_spectrum(
            cfg,
            cfg["n_sites"],
            sign * cfg["coupling"],
            cfg["cutoff"],
            cfg["spectrum_levels"],
            outdir / f"spectrum_{label}.csv",
        )
        diag[f"max_leakage_{label}"] = float(np.max(traj.leakage))
    return diag


preset_figA1.defaults = {
    "n_sites": 2,
    "coupling": 0.4,
    "cutoff": 20,
    "r_max": 1.4,
    "delta_ini": 6.0,
    "t_f": 100.0,
    "n_records": 200,
    "leak_tol": 1e-3,
    "spectrum_levels": 9,
    "drive_order": "tripling",
}


def preset_figA2(cfg, outdir, threads):
    space = FockSpace(cfg["cutoff"], 1)
    params = OscillatorParams(delta=0.0, drive=0.0, kerr=1.0, drive_order="tripling")
    diss = DissipationParams(kappa=cfg["kappa"], nbar=0.0)
    rs = np.linspace(0.0, cfg["r_max"], cfg["scan_points"])
    table_a = scan_laplacian(
        ("r", rs),
        ("nbar", np.linspace(0.0, cfg["nbar_max"], cfg["scan_points"])),
        params,
        diss,
        space,
        threads=threads,
    )
    table_a.to_csv(outdir / "scan_nbar.csv")
    table_b = scan_laplacian(
        ("r", rs),
        ("delta", np.linspace(cfg["delta_min"], cfg["delta_max"], cfg["scan_points"])),
        params,
        diss,
        space,
        threads=threads,
    )
    table_b.to_csv(outdir / "scan_delta.csv")
    failures = sum(1 for t in (table_a, table_b) for row in t.rows if row[4] is not None)
    return {"points": len(table_a.rows) + len(table_b.rows), "failed_points": failures}


preset_figA2.defaults = {
    "cutoff": 40,
    "kappa": 0.01,
    "r_max": 1.5,
    "nbar_max": 0.3,
    "delta_min": -1.0,
    "delta_max": 1.0,
    "scan_points": 21,
}


def preset_figC_sweeps(cfg, outdir, threads):
    diag = {}
    for n_sites, cutoff in ((3, cfg["cutoff_3"]), (4, cfg["cutoff_4"])):
        for label, sign in (("ferro", 1.0), ("antiferro", -1.0)):
            traj = _sweep(dict(cfg, n_sites=n_sites), n_sites, sign * cfg["coupling"], cutoff)
            traj.to_csv(outdir / f"trajectory_{n_sites}_{label}.csv")
            diag[f"max_leakage_{n_sites}_{label}"] = float(np.max(traj.leakage))
    return diag


preset_figC_sweeps.defaults = {
    "coupling": 0.4,
    "cutoff_3": 14,
    "cutoff_4": 12,
    "r_max": 2.0,
    "delta_ini": 6.0,
    "t_f": 25.0,
    "n_records": 200,
    "leak_tol": 1e-3,
    "drive_order": "doubling",
}


def _ideal_final_probability(cfg, order, v, delta_ini, t_f, cutoff):
    local = {
        "drive_order": order,
        "r_max": 2.0 if order == "doubling" else 1.4,
        "delta_ini": delta_ini,
        "t_f": t_f,
        "n_records": 2,
        "leak_tol": cfg["leak_tol"],
    }
    traj = _sweep(local, cfg["n_sites"], v, cutoff)
    table = traj.final_table()
    modulus = table.n_outcomes
    # orbit-summed weight of the uniform configuration favored by attraction
    total = 0.0
    for key, p in table.table.items():
        if config_orbit(key, modulus=modulus).representative == (0,) * cfg["n_sites"]:
            total += p
    return total


def preset_figC_scans(cfg, outdir, threads):
    vs = np.linspace(cfg["v_min"], cfg["v_max"], cfg["scan_points"])
    tables = {
        "doubling_v_tf": ("doubling", "t_f", np.linspace(cfg["tf_min"], cfg["tf_max"], cfg["scan_points"])),
        "doubling_v_delta": ("doubling", "delta_ini", np.linspace(cfg["delta_min"], cfg["delta_max"], cfg["scan_points"])),
        "tripling_v_tf": ("tripling", "t_f", np.linspace(cfg["tf_min"], cfg["tf_max"], cfg["scan_points"])),
        "tripling_v_delta": ("tripling", "delta_ini", np.linspace(cfg["delta_min"], cfg["delta_max"], cfg["scan_points"])),
    }
    from concurrent.futures import ThreadPoolExecutor

    failures = 0
    for name, (order, axis2, vals2) in tables.items():
        cutoff = cfg["cutoff_doubling"] if order == "doubling" else cfg["cutoff_tripling"]
        fixed_tf = cfg["tf_doubling_fixed"] if order == "doubling" else cfg["tf_tripling_fixed"]

        def point(args, order=order, axis2=axis2, cutoff=cutoff, fixed_tf=fixed_tf):
            v, val2 = args
            delta_ini = val2 if axis2 == "delta_ini" else cfg["delta_ini"]
            t_f = val2 if axis2 == "t_f" else fixed_tf
            try:
                return (v, val2, _ideal_final_probability(cfg, order, v, delta_ini, t_f, cutoff), "")
            except _CONVERGENCE_ERRORS as exc:
                return (v, val2, None, str(exc))

        points = [(float(v), float(x)) for v in vs for x in vals2]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(point, points))
        else:
            rows = [point(pt) for pt in points]
        failures += sum(1 for row in rows if row[2] is None)
        with open(outdir / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["v", axis2, "p_ideal"])
            for v, val2, p, _err in rows:
                w.writerow([repr(v), repr(val2), "" if p is None else repr(float(p))])
    return {"tables": len(tables), "failed_points": failures}


preset_figC_scans.defaults = {
    "n_sites": 3,
    "cutoff_doubling": 10,
    "cutoff_tripling": 12,
    "scan_points": 21,
    "v_min": 0.05,
    "v_max": 0.8,
    "tf_min": 2.0,
    "tf_max": 40.0,
    "delta_min": 0.5,
    "delta_max": 10.0,
    "delta_ini": 6.0,
    "tf_doubling_fixed": 12.0,
    "tf_tripling_fixed": 30.0,
    "leak_tol": 1.0,
}


def preset_frustrated(cfg, outdir, threads):
    v = cfg["coupling"]
    ring = ArrayConfig(3, ((0, 1, v), (1, 2, v), (0, 2, -v)))
    params = OscillatorParams(delta=cfg["delta"], drive=cfg["r"], kerr=1.0, drive_order="tripling")
    space = FockSpace(cfg["cutoff"], 3)
    result = array_low_spectrum(params, ring, space, cfg["spectrum_levels"])
    mset = measurement_set("tripling", FockSpace(cfg["cutoff"], 1))
    _spectrum_csv(outdir / "spectrum.csv", result, space, mset)
    sym = np.nonzero(result.symmetric_flags)[0]
    if len(sym) == 0:
        raise SteadyStateError("no symmetric eigenstate among the lowest levels")
    rep, totals = dominant_orbit(result.state(space, int(sym[0])), mset)
    return {
        "lowest_symmetric_energy": float(result.eigenvalues[sym[0]]),
        "lowest_symmetric_dominant_orbit": "".join(map(str, rep)),
    }


preset_frustrated.defaults = {
    "coupling": 0.4,
    "r": 1.4,
    "delta": 0.0,
    "cutoff": 14,
    "spectrum_levels": 12,
}


def _make_presets():
    fig2f = _sweep_preset(3, 1.0, 20, True, 27)
    fig2a = _sweep_preset(3, -1.0, 20, True, 27)
    fig3f = _sweep_preset(4, 1.0, 14, False, 0)
    fig3a = _sweep_preset(4, -1.0, 14, False, 0)
    preset_figA3_run = lambda cfg, outdir, threads: _wigner_pair(cfg, outdir, threads)  # noqa: E731
    preset_figA3_run.defaults = preset_figA3_defaults
    return {
        "fig1c": preset_fig1c,
        "fig1b": preset_fig1b,
        "fig2-ferro": fig2f,
        "fig2-antiferro": fig2a,
        "fig3-ferro": fig3f,
        "fig3-antiferro": fig3a,
        "fig4a": preset_fig4a,
        "fig4b": preset_fig4b,
        "fig4cd": preset_fig4cd,
        "figA1-2osc": preset_figA1,
        "figA2-scans": preset_figA2,
        "figA3-wigner-pair": preset_figA3_run,
        "figC-doubling-sweeps": preset_figC_sweeps,
        "figC-2dscans": preset_figC_scans,
        "frustrated-triangle": preset_frustrated,
    }


PRESETS = _make_presets()


# --- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrchain",
        description="Run driven Kerr-oscillator array experiments; writes CSV + JSON.",
    )
    parser.add_argument("--preset", help="named experiment (see --list-presets)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a preset parameter (repeatable)",
    )
    parser.add_argument("--out", default="runs", help="output directory root")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for scans")
    parser.add_argument("--list-presets", action="store_true", help="print preset names and exit")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_presets:
        for name in sorted(PRESETS):
            print(name)
        return 0
    if not args.preset:
        parser.print_usage(sys.stderr)
        print("error: --preset is required (see --list-presets)", file=sys.stderr)
        return USAGE_EXIT
    if args.preset not in PRESETS:
        print(f"error: unknown preset {args.preset!r}", file=sys.stderr)
        return USAGE_EXIT

    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return USAGE_EXIT
        key, _, value = item.partition("=")
        overrides[key] = value

    runner = PRESETS[args.preset]
    try:
        cfg = _apply_overrides(runner.defaults, overrides)
    except KeyError as exc:
        print(f"error: unknown parameter {exc.args[0]!r} for preset {args.preset}", file=sys.stderr)
        return USAGE_EXIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT

    outdir = Path(args.out) / args.preset
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    try:
        diagnostics = runner(cfg, outdir, max(1, args.threads))
    except _CONVERGENCE_ERRORS as exc:
        with open(outdir / "error.json", "w") as fh:
            json.dump(
                {"preset": args.preset, "config": cfg, "error": str(exc), "type": type(exc).__name__},
                fh,
                indent=2,
                sort_keys=True,
                default=str,
            )
            fh.write("\n")
        print(f"error: convergence failure: {exc}", file=sys.stderr)
        return CONVERGENCE_EXIT
    _write_meta(outdir, args.preset, cfg, started, diagnostics)
    return 0


if __name__ == "__main__":
    sys.exit(main())
