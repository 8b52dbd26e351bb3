import json
import subprocess
import sys

import numpy as np
import pytest

from koblab.cli import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_PARTIAL,
    ExperimentConfig,
    UsageError,
    build_parser,
    config_from_args,
    main,
    parse_deltas,
    parse_vector,
    parse_window,
)

SADDLE = """\
name: saddle
dimension: 2
defining_function: "+ re(2) * -1 abs2(1)"
enclosing_radius: 2
witness_point: ["0", "-0.5"]
tubular_radius: 0.25
"""


def test_parse_helpers():
    np.testing.assert_array_equal(parse_vector("e2", 2), [0, 1])
    np.testing.assert_array_equal(parse_vector("0", 3), [0, 0, 0])
    np.testing.assert_array_equal(parse_vector("0.5,1+2j", 2), [0.5, 1 + 2j])
    np.testing.assert_allclose(parse_deltas("1e-2:1e-4:3", 1.0), [1e-2, 1e-3, 1e-4])
    assert parse_window("lower:-0.8:-0.7") == ("lower", (-0.8, -0.7))
    for bad in [lambda: parse_vector("e3", 2), lambda: parse_vector("1,2,3", 2),
                lambda: parse_deltas("1e-3,1e-2", 1.0), lambda: parse_deltas("a:b:c", 1.0),
                lambda: parse_window("middle:0:1"), lambda: parse_window("lower:1:0")]:
        with pytest.raises(UsageError):
            bad()


def test_threads_env_override(monkeypatch):
    args = build_parser().parse_args(["probe", "--domain", "ball", "--threads", "4"])
    assert config_from_args(args).threads == 4
    monkeypatch.setenv("KOBLAB_THREADS", "2")
    assert config_from_args(args).threads == 2
    monkeypatch.setenv("KOBLAB_THREADS", "0")
    with pytest.raises(UsageError):
        config_from_args(args)
    monkeypatch.setenv("KOBLAB_THREADS", "many")
    with pytest.raises(UsageError):
        ExperimentConfig("probe")


def test_bound_at_ball_centre(tmp_path, capsys):
    code = main(["bound", "--domain", "ball", "--point", "0", "--direction", "e1", "--out", str(tmp_path),
                 "--tag", "t"])
    assert code == EXIT_OK
    rec = json.loads((tmp_path / "ball2_bound_t.json").read_text())
    assert rec["lower"] == pytest.approx(1.0, abs=1e-12)
    assert rec["lower"] <= rec["upper"] <= 1 + 1e-9
    assert "lower" in capsys.readouterr().out


def test_bound_errors(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(SADDLE.replace("abs2(1)", "abz2(1)"))
    assert main(["bound", "--domain", str(bad), "--point", "0", "--direction", "e1",
                 "--out", str(tmp_path)]) == EXIT_ERROR
    assert "(line 3, column 34)" in capsys.readouterr().err
    assert main(["bound", "--domain", "ball", "--point", "2,0", "--direction", "e1",
                 "--out", str(tmp_path)]) == EXIT_ERROR
    assert "point not interior" in capsys.readouterr().err
    assert main(["bound", "--domain", "nowhere", "--point", "0", "--direction", "e1"]) == EXIT_ERROR


def test_sweep_output_is_deterministic_across_threads(tmp_path):
    outs = []
    for threads in ("1", "3"):
        d = tmp_path / threads
        code = main(["sweep", "--preset", "omega-m2", "--threads", threads, "--seed", "5", "--out", str(d),
                     "--tag", "run"])
        assert code == EXIT_OK
        outs.append(d)
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == ["omega2_omega-m2_run.csv", "omega2_omega-m2_run.dat", "omega2_omega-m2_run.json"]
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    summary = json.loads((outs[0] / names[2]).read_text())
    assert summary["window_status"] == {"lower": "ok", "upper": "ok"}


def test_sweep_partial_with_few_samples(tmp_path):
    code = main(["sweep", "--preset", "omega-m2", "--deltas", "1e-2,1e-3", "--out", str(tmp_path), "--tag", "x"])
    assert code == EXIT_PARTIAL


def test_sweep_window_miss_is_partial(tmp_path):
    code = main(["sweep", "--preset", "omega-m2", "--window", "lower:-0.3:-0.2", "--out", str(tmp_path),
                 "--tag", "x"])
    assert code == EXIT_PARTIAL


def test_model_sweep_on_file_domain(tmp_path):
    f = tmp_path / "saddle.yaml"
    f.write_text(SADDLE)
    code = main(["sweep", "--domain", str(f), "--point", "0", "--direction", "1,1", "--m", "2",
                 "--out", str(tmp_path), "--tag", "m2"])
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "saddle_sweep_m2.json").read_text())
    assert summary["sandwich_ok"]
    for side in ("lower", "upper"):
        assert abs(summary["fits"][side]["slope"] + 0.75) <= 0.05
    dat = (tmp_path / "saddle_sweep_m2.dat").read_text().splitlines()
    assert dat[0].startswith("#") and len(dat) == 9


def test_probe_and_map_regularity(tmp_path):
    assert main(["probe", "--domain", "saddle", "--budget", "30", "--out", str(tmp_path), "--tag", "p"]) == EXIT_OK
    rec = json.loads((tmp_path / "saddle_probe_p.json").read_text())
    assert rec["witness"] is True
    assert main(["map-regularity", "--map", "identity", "--domain", "ball", "--count", "10",
                 "--out", str(tmp_path), "--tag", "m"]) == EXIT_OK
    rec = json.loads((tmp_path / "ball2_map-regularity-identity_m.json").read_text())
    assert rec["normal_preservation_sup_ratio"] == pytest.approx(1, abs=1e-12)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "koblab", "bound", "--domain", "disc", "--point", "0.5",
                           "--direction", "1", "--out", str(tmp_path), "--tag", "s"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == EXIT_OK, proc.stderr
    assert (tmp_path / "disc_bound_s.json").exists()
