"""Command-line interface and preset plumbing."""

import json

import pytest

from heterosim.cli import main
from heterosim.config import RunConfig
from heterosim.errors import PresetError
from heterosim.presets import run_preset


def test_unknown_preset_rejected():
    with pytest.raises(PresetError):
        run_preset("fig3")


def test_cli_exit_code_on_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[vegetation]\nmu = -2\n")
    code = main(["simulate", "--config", str(bad), "--out", str(tmp_path / "out")])
    captured = capsys.readouterr()
    assert code != 0
    assert captured.err.startswith("error kind=ConfigError")


def test_cli_simulate_and_render(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[run]\nmodel = GrassForest\n[grid]\nn = 120\n[kernels]\nsigma = 0.02\n"
        "[ic]\nkind = seed\nlocation = 0.9\n[time]\nt_end = 5.0\nsnapshot_stride = 20\n"
    )
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(ini), "--out", str(out)]) == 0
    bin_path = out / "field_spacetime.bin"
    assert bin_path.exists()
    assert (out / "manifest.json").exists()
    assert main(["render", str(bin_path), "--out", str(out / "again.ppm")]) == 0
    header = (out / "again.ppm").read_bytes()[:2]
    assert header == b"P6"


def test_cli_steady(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[run]\nmodel = GrassForest\n[grid]\nn = 150\n[kernels]\nsigma = 0.02\n"
        "[ic]\nkind = seed\nlocation = 0.9\n[time]\nt_end = 200.0\n"
    )
    out = tmp_path / "steady"
    assert main(["steady", "--config", str(ini), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["diagnostics"]["residual"] <= 1e-9


def test_cli_turing_map_small_domain(tmp_path):
    out = tmp_path / "tm"
    code = main(["turing-map", "--out", str(out), "--resolution", "50",
                 "--rho-min", "0.15", "--rho-max", "0.3"])
    assert code == 0
    assert (out / "growth_map.ppm").exists()


def test_cli_bifurcate(tmp_path):
    out = tmp_path / "bif"
    code = main(["bifurcate", "--out", str(out), "--at", "0.5", "--stable-only"])
    assert code == 0
    assert (out / "branch_00.csv").exists()
    header = (out / "branch_00.csv").read_text().splitlines()[0]
    assert header == "parameter,state_0,max_re_eigenvalue,stability,event"


def test_cli_sweep_dispersal(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\nmodel = GrassForest\n[grid]\nn = 120\n")
    out = tmp_path / "sweep"
    code = main(["sweep-dispersal", "--config", str(ini), "--out", str(out),
                 "--sigma-min", "0.03", "--sigma-max", "0.06", "--sigma-count", "3"])
    assert code == 0
    assert (out / "branch_00.csv").exists()


def test_cli_two_param(tmp_path):
    out = tmp_path / "tp"
    code = main(["two-param", "--out", str(out), "--alpha-min", "1.8",
                 "--alpha-max", "2.0", "--beta-min", "0.05", "--beta-max", "0.2",
                 "--resolution", "50"])
    assert code == 0
    text = (out / "two_param_map.csv").read_text().splitlines()
    assert text[0] == "alpha,beta,stable_count,oscillating"
    assert len(text) == 1 + 50 * 50


def test_cli_areal_sim(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\nmodel = Areal\n[time]\nt_end = 5.0\n")
    out = tmp_path / "areal"
    assert main(["areal-sim", "--config", str(ini), "--out", str(out)]) == 0
    assert (out / "final_fields.csv").exists()


def test_cli_preset_subcommand(tmp_path):
    out = tmp_path / "p"
    assert main(["preset", "fig8a", "--out", str(out), "--seed", "1"]) == 0
    assert (out / "manifest.json").exists()


def test_preset_fig8a_writes_artifacts(tmp_path):
    manifest = run_preset("fig8a", tmp_path / "fig8a", seed=0)
    assert manifest["diagnostics"]["outcome"] == "front"
    root = tmp_path / "fig8a"
    for name in ("config.ini", "manifest.json", "final_fields.csv",
                 "marker_e_spacetime.bin", "marker_e_spacetime.ppm"):
        assert (root / name).exists(), name


def test_preset_reruns_bitwise_identical(tmp_path):
    run_preset("fig8a", tmp_path / "a", seed=0)
    run_preset("fig8a", tmp_path / "b", seed=0)
    for name in ("final_fields.csv", "marker_e_spacetime.bin", "marker_e_final.csv",
                 "marker_e_spacetime.ppm"):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes(), name


def test_manifest_embeds_reproducible_config(tmp_path):
    manifest = run_preset("fig8a", tmp_path / "m", seed=3)
    from heterosim.config import parse_config
    config = parse_config(manifest["config"])
    assert isinstance(config, RunConfig)
    assert config.seed == 3


def test_preset_fig7_cusp_geometry(tmp_path):
    manifest = run_preset("fig7", tmp_path / "fig7", seed=0)
    d = manifest["diagnostics"]
    assert d["window_at_rho_n_0.1"] is not None
    cusp_e, cusp_n = d["cusp_estimate"]
    assert abs(cusp_e - 0.25) <= 0.01
    assert abs(cusp_n - 0.25) <= 0.01
    assert (tmp_path / "fig7" / "fold_curves.csv").exists()


def test_preset_fig5c_classifies_aperiodic(tmp_path):
    manifest = run_preset("fig5c", tmp_path / "fig5c", seed=0)
    assert manifest["diagnostics"]["classification"] == "aperiodic"
    assert (tmp_path / "fig5c" / "forest_mean_series.csv").exists()


def test_preset_fig8d_instability_map(tmp_path):
    manifest = run_preset("fig8d", tmp_path / "fig8d", seed=0)
    d = manifest["diagnostics"]
    assert d["positive_fraction"] > 0
    assert d["swap_symmetry_deviation"] <= 1e-10
    assert d["default_path_crosses"] is True
    assert (tmp_path / "fig8d" / "growth_map.ppm").exists()


def test_patterning_preset_refuses_stable_path(tmp_path, monkeypatch):
    # a morphogen path that never enters the instability region is refused
    # with an explicit message instead of producing a meaningless run
    import heterosim.presets as presets

    def stable_config(width, seed, out_dir):
        # stays on the N-dominant side of the diagonal, far from instability
        config = RunConfig(model="Areal", seed=seed, out_dir=str(out_dir),
                           ramp_lo=20 - width / 2, ramp_hi=20 + width / 2,
                           rho_e_start=0.02, rho_n_start=0.45,
                           rho_e_end=0.12, rho_n_end=0.28)
        return config

    monkeypatch.setattr(presets, "_areal_config", stable_config)
    with pytest.raises(PresetError) as err:
        run_preset("fig8c", tmp_path / "refused", seed=0)
    assert "pattern-forming region" in str(err.value)
