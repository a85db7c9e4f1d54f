import json

import pytest

from kerrchain.cli import PRESETS, main

EXPECTED_PRESETS = {
    "fig1c",
    "fig1b",
    "fig2-ferro",
    "fig2-antiferro",
    "fig3-ferro",
    "fig3-antiferro",
    "fig4a",
    "fig4b",
    "fig4cd",
    "figA1-2osc",
    "figA2-scans",
    "figA3-wigner-pair",
    "figC-doubling-sweeps",
    "figC-2dscans",
    "frustrated-triangle",
}


def test_preset_registry_complete():
    assert set(PRESETS) == EXPECTED_PRESETS


def test_list_presets(capsys):
    assert main(["--list-presets"]) == 0
    out = capsys.readouterr().out.split()
    assert set(out) == EXPECTED_PRESETS


def test_missing_preset_is_usage_error(tmp_path, capsys):
    assert main(["--out", str(tmp_path)]) == 2
    assert not any(tmp_path.iterdir())


def test_unknown_preset_is_usage_error(tmp_path):
    assert main(["--preset", "fig9z", "--out", str(tmp_path)]) == 2
    assert not any(tmp_path.iterdir())


def test_unknown_override_key_is_usage_error(tmp_path):
    rc = main(["--preset", "fig1c", "--set", "bogus_knob=3", "--out", str(tmp_path)])
    assert rc == 2
    assert not any(tmp_path.iterdir())


def test_malformed_override_is_usage_error(tmp_path):
    assert main(["--preset", "fig1c", "--set", "cutoff", "--out", str(tmp_path)]) == 2
    assert main(["--preset", "fig1c", "--set", "cutoff=abc", "--out", str(tmp_path)]) == 2
    assert not any(tmp_path.iterdir())


def _run_fig1c(out):
    return main(
        [
            "--preset",
            "fig1c",
            "--out",
            str(out),
            "--set",
            "path_points=3",
            "--set",
            "levels=3",
            "--set",
            "cutoff=16",
        ]
    )


def test_fig1c_outputs_and_meta(tmp_path):
    assert _run_fig1c(tmp_path) == 0
    outdir = tmp_path / "fig1c"
    csv_path = outdir / "spectrum.csv"
    meta_path = outdir / "meta.json"
    assert csv_path.exists() and meta_path.exists()
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "r,delta,e_0,e_1,e_2"
    assert len(lines) == 4  # header + 3 path points
    first = lines[1].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) == 6.0
    meta = json.loads(meta_path.read_text())
    assert meta["preset"] == "fig1c"
    assert meta["config"]["path_points"] == 3
    assert meta["config"]["cutoff"] == 16
    assert "wall_clock_seconds" in meta and "version" in meta


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run_fig1c(a) == 0
    assert _run_fig1c(b) == 0
    csv_a = (a / "fig1c" / "spectrum.csv").read_bytes()
    csv_b = (b / "fig1c" / "spectrum.csv").read_bytes()
    assert csv_a == csv_b


def test_convergence_failure_writes_error_json(tmp_path, capsys):
    rc = main(
        [
            "--preset",
            "fig2-ferro",
            "--out",
            str(tmp_path),
            "--set",
            "cutoff=6",
            "--set",
            "t_f=5",
            "--set",
            "n_records=10",
            "--set",
            "leak_tol=1e-9",
        ]
    )
    assert rc == 3
    err = json.loads((tmp_path / "fig2-ferro" / "error.json").read_text())
    assert err["preset"] == "fig2-ferro"
    assert err["type"] == "LeakageError"
    assert not (tmp_path / "fig2-ferro" / "meta.json").exists()


def test_frustrated_preset_small(tmp_path):
    rc = main(
        [
            "--preset",
            "frustrated-triangle",
            "--out",
            str(tmp_path),
            "--set",
            "cutoff=6",
            "--set",
            "spectrum_levels=6",
        ]
    )
    assert rc == 0
    outdir = tmp_path / "frustrated-triangle"
    lines = (outdir / "spectrum.csv").read_text().strip().splitlines()
    assert lines[0] == "index,energy,symmetric,dominant_orbit"
    assert len(lines) == 7
    meta = json.loads((outdir / "meta.json").read_text())
    assert "lowest_symmetric_dominant_orbit" in meta["diagnostics"]


def test_every_preset_has_typed_defaults():
    for name, runner in PRESETS.items():
        assert isinstance(runner.defaults, dict) and runner.defaults, name
        for key, val in runner.defaults.items():
            assert isinstance(val, (bool, int, float, str)), (name, key)
