import pytest

from tunnelnav.cli import main
from tunnelnav.config import ConfigError, RunConfig, load_config, parse_config_text


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_config_parsing(tmp_path):
    assert parse_config_text("# c\n\nseed = 4  # trailing\n") == {"seed": "4"}
    with pytest.raises(ConfigError):
        parse_config_text("seed 4")
    p = tmp_path / "c.txt"
    p.write_text("seed = 9\nvelocities = 0.1, 1.0\nuse_lidar = yes\n")
    cfg = load_config(p, {"seed": "2"})
    assert cfg.seed == 2 and cfg.velocities == (0.1, 1.0) and cfg.use_lidar is True
    with pytest.raises(ConfigError):
        load_config(None, {"colour": "red"})
    with pytest.raises(ConfigError):
        load_config(None, {"epochs": "many"})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.txt")


def test_config_echo_round_trips():
    cfg = RunConfig(seed=3, velocities=(0.5,), use_lidar=True)
    assert load_config(None, parse_config_text(cfg.to_text())) == cfg


def test_gen_tunnel(tmp_path, capsys):
    code, _, _ = run(capsys, "gen-tunnel", "--out", tmp_path / "a")
    assert code == 0
    text = (tmp_path / "a" / "tunnel.txt").read_text()
    for line in ("width = 6.0", "height = 4.0", "length = 300.0", "arc_angle_deg = 45.0"):
        assert line in text
    assert (tmp_path / "a" / "config.txt").is_file()
    run(capsys, "gen-tunnel", "--out", tmp_path / "b")
    assert (tmp_path / "b" / "tunnel.txt").read_bytes() == (tmp_path / "a" / "tunnel.txt").read_bytes()
    code, _, err = run(capsys, "gen-tunnel", "--out", tmp_path / "c", "--set", "width=0")
    assert code == 1 and err.startswith("error:")


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["gen-tunnel", "--seed", "1", "--out", str(root / "tunnel")]) == 0
    assert main(["gen-dataset", "--tunnel", str(root / "tunnel" / "tunnel.txt"), "--out", str(root / "data"),
                 "--set", "n_per_class=10"]) == 0
    return root


def test_gen_dataset_counts(small_run, capsys):
    files = sorted(p.relative_to(small_run / "data") for p in (small_run / "data").rglob("*.pgm"))
    assert len(files) == 30
    assert {p.parts[0] for p in files} == {"left", "center", "right"}
    code, _, err = run(capsys, "gen-dataset", "--tunnel", small_run / "nope.txt", "--out", small_run / "x")
    assert code == 1 and "tunnel file" in err


TRAIN_ARGS = ("--set", "epochs=1", "--set", "steps_per_epoch=2", "--set", "batch_size=4")


def test_train_is_deterministic_and_echoes_schedule(small_run, capsys):
    code, out, _ = run(capsys, "train", "--dataset", small_run / "data", "--out", small_run / "m1", *TRAIN_ARGS)
    assert code == 0 and "epochs=1 steps_per_epoch=2" in out
    run(capsys, "train", "--dataset", small_run / "data", "--out", small_run / "m2", *TRAIN_ARGS)
    a = (small_run / "m1" / "model.tpcnn").read_bytes()
    assert a == (small_run / "m2" / "model.tpcnn").read_bytes()
    assert "epochs = 1" in (small_run / "m1" / "config.txt").read_text()
    assert (small_run / "m1" / "history.csv").is_file()
    assert "epochs = 25\nsteps_per_epoch = 200" in RunConfig().to_text()


def test_train_errors(small_run, tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    code, _, err = run(capsys, "train", "--dataset", tmp_path / "empty", "--out", tmp_path / "o")
    assert code == 1 and err.startswith("error:")
    code, _, _ = run(capsys, "train", "--dataset", tmp_path / "missing", "--out", tmp_path / "o")
    assert code == 1


def test_eval_oracles(small_run, tmp_path, capsys):
    code, out, _ = run(capsys, "eval", "--dataset", small_run / "data", "--oracle", "center", "--out", tmp_path / "e")
    assert code == 0 and "accuracy: 33.3% (10/30)" in out
    assert (tmp_path / "e" / "report.csv").is_file()
    # a center-only smoke set is classified perfectly by the center oracle
    smoke = tmp_path / "smoke" / "center"
    smoke.mkdir(parents=True)
    for p in sorted((small_run / "data" / "center").glob("*.pgm"))[:3]:
        (smoke / p.name).write_bytes(p.read_bytes())
    code, out, _ = run(capsys, "eval", "--dataset", tmp_path / "smoke", "--oracle", "center", "--out", tmp_path / "f")
    assert code == 0 and "accuracy: 100.0% (3/3)" in out
    code, _, err = run(capsys, "eval", "--dataset", small_run / "data", "--model", tmp_path / "no.tpcnn",
                       "--out", tmp_path / "g")
    assert code == 1 and "model" in err


FLY_SHORT = ("--set", "length=20", "--set", "arc_angle_deg=0", "--set", "roughness=0", "--set", "v_dx=1.0")


def test_fly_center_oracle(tmp_path, capsys):
    code, out, _ = run(capsys, "fly", "--oracle", "center", "--out", tmp_path, *FLY_SHORT)
    assert code == 0 and "completed" in out
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[1].startswith("1,0,completed")
    assert (tmp_path / "flight_v1_seed0.csv").is_file()


def test_fly_velocity_sweep(tmp_path, capsys):
    code, out, _ = run(capsys, "fly", "--oracle", "center", "--velocity-sweep", "--out", tmp_path,
                       *FLY_SHORT, "--set", "max_time=1")
    assert code == 0
    rows = (tmp_path / "summary.csv").read_text().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["0.1", "0.5", "1"]


def test_fly_invalid_rate(tmp_path, capsys):
    code, _, err = run(capsys, "fly", "--oracle", "center", "--out", tmp_path, "--set", "control_rate=7")
    assert code == 1 and "control period" in err
    code, _, _ = run(capsys, "fly", "--oracle", "center", "--out", tmp_path, "--set", "control_rate=-5")
    assert code == 1


def test_classify(small_run, tmp_path, capsys):
    model = small_run / "m1" / "model.tpcnn"
    if not model.exists():
        main(["train", "--dataset", str(small_run / "data"), "--out", str(small_run / "m1"), *TRAIN_ARGS])
    img = sorted((small_run / "data" / "center").glob("*.pgm"))[0]
    code, out, _ = run(capsys, "classify", "--model", model, img, img)
    assert code == 0
    first, second = out.splitlines()
    assert first == second and len(first.split("\t")) == 5
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    code, _, err = run(capsys, "classify", "--model", model, bad)
    assert code == 1 and err.startswith("error:")


def test_usage_error_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code != 0
