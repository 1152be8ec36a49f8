import json
from pathlib import Path

import numpy as np
import pytest

from cvorient.angles import angle_diff
from cvorient.cli import main
from cvorient.features import circular_shift, read_fmap, write_fmap
from cvorient.imaging import load_png, save_png

SMOKE = Path(__file__).resolve().parents[1] / "configs" / "smoke.toml"


@pytest.fixture
def pano_png(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "pano.png"
    save_png(path, rng.uniform(size=(128, 512, 3)))
    return path


def test_augment_prints_ground_truth(pano_png, tmp_path, capsys):
    assert main(["augment", str(pano_png), str(tmp_path / "out.png"), "--shift", "128", "--fov", "360"]) == 0
    out = capsys.readouterr().out
    assert "w_gt=48\n" in out and "theta_gt=270\n" in out
    shifted = load_png(tmp_path / "out.png")
    np.testing.assert_array_equal(shifted[:, 128:], load_png(pano_png)[:, :384])


def test_augment_random_uses_seed(pano_png, capsys):
    main(["--seed", "4", "augment", str(pano_png), "--fov", "180"])
    first = capsys.readouterr().out
    main(["augment", str(pano_png), "--fov", "180", "--seed", "4"])
    assert capsys.readouterr().out == first


def test_extract_and_estimate(pano_png, tmp_path, capsys):
    assert main(["extract", str(pano_png), str(tmp_path / "s.fmap")]) == 0
    fs = read_fmap(tmp_path / "s.fmap")
    assert fs.shape == (4, 64, 16)
    write_fmap(circular_shift(fs, 5), tmp_path / "g.fmap")
    assert main(["estimate", str(tmp_path / "g.fmap"), str(tmp_path / "s.fmap"),
                 "--method", "cs", "--scale", "10"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["w_est"] * 10 == pytest.approx(round(doc["w_est"] * 10))
    assert doc["theta_est"] == pytest.approx(doc["w_est"] / 64 * 360)
    assert doc["w_est"] == 5.0 and doc["method"] == "cs"


def test_polar(tmp_path):
    save_png(tmp_path / "sat.png", np.full((64, 64, 3), 0.5))
    assert main(["polar", str(tmp_path / "sat.png"), str(tmp_path / "p.png"), "--height", "32", "--width", "96"]) == 0
    assert load_png(tmp_path / "p.png").shape == (32, 96, 3)


def test_smoke_pipeline(tmp_path, capsys):
    cfg = ["--config", str(SMOKE)]
    assert main(cfg + ["synth", str(tmp_path / "scenes")]) == 0
    assert main(cfg + ["retrieve", str(tmp_path / "scenes"), "--out", str(tmp_path / "rec.json")]) == 0
    assert main(cfg + ["evaluate", str(tmp_path / "rec.json"), "--report", str(tmp_path / "rep.json"),
                       "--histogram", str(tmp_path / "h.csv")]) == 0
    report = json.loads((tmp_path / "rep.json").read_text())
    assert "r@1" in report["metrics"] and "r@2deg" in report["metrics"]
    assert report["config"]["pool_size"] == 6
    assert len((tmp_path / "h.csv").read_text().splitlines()) == 181


def test_retrieve_jobs_byte_identical(tmp_path):
    main(["--seed", "3", "synth", str(tmp_path / "s"), "--n", "4"])
    main(["--jobs", "1", "retrieve", str(tmp_path / "s"), "--out", str(tmp_path / "a.json")])
    main(["--jobs", "3", "retrieve", str(tmp_path / "s"), "--out", str(tmp_path / "b.json")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_gradcheck(capsys):
    assert main(["gradcheck", "--trials", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_fit_toy(capsys):
    assert main(["fit-toy", "--steps", "20", "--batch", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["final_combined"] < doc["initial_combined"]


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as info:
        main(["estimate", "a", "b", "--bogus"])
    assert info.value.code == 2


def test_runtime_failure_exits_1(tmp_path, capsys):
    (tmp_path / "bad.fmap").write_bytes(b"NOPE!" + bytes(20))
    assert main(["estimate", str(tmp_path / "bad.fmap"), str(tmp_path / "bad.fmap")]) == 1
    assert "bad magic" in capsys.readouterr().err


def test_retrieve_honours_config_fov(tmp_path):
    main(["--seed", "2", "synth", str(tmp_path / "s"), "--n", "3", "--side", "256", "--height", "64", "--width", "256"])
    cfg = tmp_path / "c.toml"
    cfg.write_text("[retrieval]\nfov = 90\n")
    assert main(["--config", str(cfg), "retrieve", str(tmp_path / "s"), "--out", str(tmp_path / "r.json")]) == 0
    recs = json.loads((tmp_path / "r.json").read_text())
    assert all(r["rank"] == 1 and angle_diff(r["theta_est"], r["theta_gt"]) < 3 for r in recs)
