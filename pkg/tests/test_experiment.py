import json
import math

import numpy as np
import pytest

from uasim.config import PRESETS, CONFIG_SCHEMA, load_config, parse_config, preset_jobs
from uasim.errors import ConfigError
from uasim.experiment import (
    CSV_VERSION_LINE,
    RESULT_COLUMNS,
    fmt,
    format_csv,
    oracle_check_command,
    powerlaw_rows,
    read_result_keys,
    read_sidecar,
    run_command,
    sidecar_dir,
    sidecar_path,
    sweep_command,
)
from uasim.circuit import NoiseModel
from uasim.protocol import UAConfig, run_ensemble


def base_config(**overrides):
    data = {
        "schema_version": 1,
        "modes": 2,
        "replicas": 2,
        "squeezing": [0.5, 0.7],
        "circuit": {"preset": "clements", "seed": 42},
        "sigma": 0.05,
        "samples": 400,
        "seed": 42,
    }
    data.update(overrides)
    return data


def quiet(*_):
    pass


def test_schema_requires_version():
    data = base_config()
    del data["schema_version"]
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config(data)


@pytest.mark.parametrize(
    "override,field",
    [
        ({"sigma": {"from": 0, "to": 0.1, "steps": 1}}, "sigma"),
        ({"squeezing": [0.5]}, "squeezing"),
        ({"replicas": 3}, "replicas"),
        ({"circuit": {"preset": "random"}}, "circuit"),
        ({"weighting": "flat"}, "weighting"),
    ],
)
def test_invalid_configs_name_the_field(override, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(base_config(**override))


def test_json_syntax_error_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "modes": 2,\n  oops\n}')
    with pytest.raises(ConfigError, match="line 3"):
        load_config(path)


def test_schema_is_object():
    assert CONFIG_SCHEMA["type"] == "object"


def test_config_expansion():
    cfg = parse_config(base_config(sigma={"from": 0.0, "to": 0.1, "steps": 3}, squeezing=0.2))
    assert cfg.sigmas() == [0.0, 0.05, 0.1]
    assert cfg.squeezing_for(2) == (0.2, 0.2)
    assert cfg.target_for(2).noisy_param_count == 3
    assert cfg.target_for(1).noisy_param_count == 1
    multi = parse_config(base_config(squeezing={"2": [0.1, 0.2], "3": [0.1, 0.2, 0.3]}, grid={"N": [2, 3]}))
    assert multi.squeezing_for(3) == (0.1, 0.2, 0.3)
    with pytest.raises(ConfigError):
        parse_config(base_config(grid={"N": [2, 4]}, squeezing={"2": [0.1, 0.2]}))


def test_explicit_gate_list():
    gates = [{"type": "phase", "mode": 0, "phi": 0.1}, {"type": "beamsplitter", "i": 0, "j": 1, "theta": 0.3}]
    cfg = parse_config(base_config(circuit={"gates": gates}))
    assert cfg.target_for(2).noisy_param_count == 2
    with pytest.raises(ConfigError):
        parse_config(base_config(circuit={"gates": gates}, grid={"N": [2, 3]},
                                 squeezing=0.1))


def test_config_round_trip():
    cfg = parse_config(base_config(record_samples=[0], grid={"n": [1, 2]}))
    assert parse_config(cfg.to_dict()) == cfg


def test_fmt():
    assert fmt(0.1234567891234) == "0.123456789"
    assert fmt(3) == "3"
    assert fmt(float("nan")) == "nan"
    assert fmt(-0.0) == "0"
    assert fmt(1e-12) == "1e-12"


def test_noiseless_row(tmp_path):
    cfg = parse_config(base_config(sigma=0.0))
    (row,) = run_command(cfg, threads=1, out=tmp_path / "o.csv", echo=quiet)
    assert row.fidelity == 1.0 and row.prob_exact == 1.0 and row.prob_approx == 1.0
    assert math.isnan(row.enhancement_vs_n1)


def test_row_matches_direct_ensemble():
    cfg = parse_config(base_config())
    (row,) = run_command(cfg, threads=1, echo=quiet)
    res = run_ensemble(UAConfig(2, 2, (0.5, 0.7)), cfg.target_for(2), NoiseModel(0.05), 400, 42)
    assert row.fidelity == res.fidelity and row.prob_exact == res.exact_p
    assert row.k == 3 and row.samples == 400 and row.seed == 42
    assert row.wallclock == 0.0


def test_csv_layout(tmp_path):
    out = tmp_path / "o.csv"
    run_command(parse_config(base_config()), threads=1, out=out, echo=quiet)
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_VERSION_LINE
    assert lines[1].split(",") == RESULT_COLUMNS
    assert len(lines) == 3


def test_csv_bit_identical_across_threads(tmp_path):
    cfg = parse_config(base_config(grid={"n": [1, 2], "sigma": [0.02, 0.08]}, samples=900))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_command(cfg, threads=1, out=a, echo=quiet)
    run_command(cfg, threads=4, out=b, echo=quiet)
    run_command(cfg, threads=1, out=tmp_path / "c.csv", echo=quiet)
    assert a.read_bytes() == b.read_bytes() == (tmp_path / "c.csv").read_bytes()


def test_sweep_cardinality_and_resume(tmp_path):
    out = tmp_path / "sweep.csv"
    cfg = parse_config(base_config(grid={"sigma": [0.0, 0.05], "n": [1, 2]}, output=str(out)))
    rows = sweep_command(cfg, threads=1, echo=quiet)
    assert len(rows) == 4
    assert len(read_result_keys(out)) == 4
    before = out.read_bytes()
    assert sweep_command(cfg, resume=True, threads=1, echo=quiet) == []
    assert out.read_bytes() == before


def test_resume_appends_missing_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    small = parse_config(base_config(grid={"sigma": [0.05], "n": [1, 2]}, output=str(out)))
    sweep_command(small, threads=1, echo=quiet)
    first = out.read_text()
    full = parse_config(base_config(grid={"sigma": [0.05, 0.1], "n": [1, 2]}, output=str(out)))
    new = sweep_command(full, resume=True, threads=1, echo=quiet)
    assert [(r.sigma, r.n) for r in new] == [(0.1, 1), (0.1, 2)]
    text = out.read_text()
    assert text.startswith(first)
    assert len(read_result_keys(out)) == 4


def test_resume_rejects_foreign_csv(tmp_path):
    out = tmp_path / "x.csv"
    out.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_result_keys(out)


def test_grid_over_modes_is_monotone_in_replicas():
    cfg = parse_config(base_config(
        squeezing={"3": [0.5, 0.6, 0.7], "4": [0.3, 0.4, 0.5, 0.6]},
        grid={"N": [3, 4], "n": [1, 2], "sigma": [0.05, 0.1]}, samples=600))
    rows = run_command(cfg, threads=2, echo=quiet)
    by_key = {(r.sigma, r.N, r.n): r for r in rows}
    for sigma in (0.05, 0.1):
        for N in (3, 4):
            assert by_key[(sigma, N, 2)].fidelity >= by_key[(sigma, N, 1)].fidelity
    assert all(0 <= r.fidelity <= 1 and 0 <= r.prob_exact <= 1 for r in rows)


def test_sidecars_round_trip(tmp_path):
    out = tmp_path / "o.csv"
    cfg = parse_config(base_config(record_samples=[0, 3], output=str(out)))
    run_command(cfg, threads=1, echo=quiet)
    path = sidecar_path(sidecar_dir(cfg), 2, 2, 0.05, 3)
    rec = read_sidecar(path)
    assert rec["draws"].shape == (2, 3)
    assert rec["sample"] == 3 and rec["seed"] == 42
    from uasim.protocol import sample_draws

    np.testing.assert_array_equal(rec["draws"], sample_draws(42, 3, 2, 3, 0.05))


def test_oracle_check_passes_in_regime(tmp_path):
    cfg = parse_config(base_config(output=str(tmp_path / "o.csv")))
    report = oracle_check_command(cfg, 0)
    assert report.passed and report.in_regime
    assert report.cov_deviation <= 5e-3 and report.prob_deviation <= 1e-3
    assert "PASS" in report.summary()


def test_oracle_check_replays_recorded_draw(tmp_path):
    cfg = parse_config(base_config(output=str(tmp_path / "o.csv")))
    path = sidecar_path(sidecar_dir(cfg), 2, 2, 0.05, 0)
    path.parent.mkdir(parents=True)
    record = {"schema_version": 1, "seed": 0, "sample": 0, "sigma": 0.05, "N": 2, "n": 2, "k": 3,
              "draws": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]}
    path.write_text(json.dumps(record))
    report = oracle_check_command(cfg, 0)
    assert report.prob_gaussian == pytest.approx(1.0, abs=1e-12)


def test_oracle_check_noiseless(tmp_path):
    cfg = parse_config(base_config(sigma=0.0, output=str(tmp_path / "o.csv")))
    report = oracle_check_command(cfg, 0)
    assert report.cov_deviation <= 1e-4
    assert report.prob_deviation <= 1e-6


def test_oracle_check_out_of_regime(tmp_path):
    cfg = parse_config(base_config(sigma=0.3, output=str(tmp_path / "o.csv")))
    report = oracle_check_command(cfg, 0)
    assert not report.passed and not report.in_regime
    assert "out of validated regime" in report.summary()


def test_oracle_check_needs_single_point(tmp_path):
    cfg = parse_config(base_config(grid={"n": [1, 2]}, output=str(tmp_path / "o.csv")))
    with pytest.raises(ConfigError):
        oracle_check_command(cfg, 0)


def test_powerlaw_flat_at_zero_noise():
    rows = powerlaw_rows(modes=[216], ns=[1, 2], sigma_from=0.0, sigma_to=0.01, steps=2)
    zero = [r for r in rows if r[0] == 0.0]
    assert all(r[6] == 1.0 and r[7] == 1.0 for r in zero)


def test_powerlaw_matches_direct_two_mode():
    rows = powerlaw_rows(modes=[2], ns=[1, 2], sigma_from=0.005, sigma_to=0.02, steps=4, r_base=0.1)
    for sigma, N, n, k, *_rest in rows:
        F_pl = _rest[2]
        cfg = UAConfig(2, n, (0.1, 0.1))
        target = parse_config(base_config()).target_for(2)
        F = run_ensemble(cfg, target, NoiseModel(sigma), 2000, 1).fidelity
        assert F == pytest.approx(F_pl, abs=0.01)


def test_powerlaw_argument_checks():
    with pytest.raises(ConfigError):
        powerlaw_rows(modes=[2], ks=[3])
    with pytest.raises(ConfigError):
        powerlaw_rows(modes=[1])
    with pytest.raises(ConfigError):
        powerlaw_rows(modes=[2], steps=1)
    with pytest.raises(ConfigError):
        powerlaw_rows(modes=[2], sigma_to=0.3)


def test_presets_parse():
    for preset in PRESETS:
        for job in preset_jobs(preset):
            if job["kind"] == "run":
                parse_config(job["config"])
    assert set(PRESETS) == {"fig-fid2mode", "fig-345modes", "fig-10mode", "fig-powerlaw-agreement",
                            "fig-216mode", "fig-enhancement"}
    with pytest.raises(ConfigError):
        preset_jobs("fig-none")


def test_format_csv_locale_free():
    text = format_csv(["a", "b"], [[1.5, 2]])
    assert text.splitlines()[2] == "1.5,2"
