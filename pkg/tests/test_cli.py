import csv

import numpy as np
import pytest

from tiltbandit.cli import build_config, main, read_config_file
from tiltbandit.core import Dataset, load_dataset, save_dataset
from tiltbandit.models import PolicyNet, save_checkpoint


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def assert_single_line_error(rc, err, fragment):
    assert rc != 0
    lines = err.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("tiltbandit: error: ")
    assert fragment in lines[0]


@pytest.fixture(scope="module")
def small_data(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "d.csv"
    assert main(["generate", "--n", "20000", "--seed", "3", "--out", str(path)]) == 0
    return path


def test_generate_is_byte_deterministic(tmp_path, capsys):
    for sub in "ab":
        rc, _, _ = run(capsys, "generate", "--n", 1000, "--seed", 7, "--out", tmp_path / sub / "d.csv")
        assert rc == 0
    for name in ("d.csv", "d.csv.provenance"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    side = (tmp_path / "a" / "d.csv.provenance").read_text()
    assert "config_digest" in side and "run.seed = 7" in side


def test_provenance_sidecar_reloads_as_config(tmp_path, capsys):
    run(capsys, "generate", "--n", 10, "--seed", 4, "--set", "env.noise_std=0.2", "--out", tmp_path / "d.csv")
    cfg = build_config(read_config_file(tmp_path / "d.csv.provenance"))
    assert cfg.env.noise_std == 0.2 and cfg.seed == 4


def test_generate_rejects_zero_n(tmp_path, capsys):
    rc, _, err = run(capsys, "generate", "--n", 0, "--out", tmp_path / "d.csv")
    assert_single_line_error(rc, err, "n must be ≥ 1")


def test_generate_default_action_mix(tmp_path, capsys):
    run(capsys, "generate", "--n", 100_000, "--out", tmp_path / "d.csv")
    d = load_dataset(tmp_path / "d.csv")
    assert 0.6 <= np.mean(d.actions == 0) <= 0.95


def test_config_file_and_overrides(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\nenv.noise_std = 0.0\ntrain.epochs = 7\nrun.seed = 11\n")
    cfg = build_config(read_config_file(conf))
    assert cfg.env.noise_std == 0.0 and cfg.train.epochs == 7 and cfg.seed == 11
    rc, _, _ = run(capsys, "generate", "--config", conf, "--seed", 12, "--n", 50, "--out", tmp_path / "d.csv")
    assert rc == 0 and "run.seed = 12" in (tmp_path / "d.csv.provenance").read_text()
    # noiseless no-change rows have exactly zero loss
    d = load_dataset(tmp_path / "d.csv")
    assert np.all(d.losses[d.actions == 0] == 0)


def test_unknown_config_key_rejected(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("env.noise = 0.1\n")
    rc, _, err = run(capsys, "generate", "--config", conf, "--n", 5, "--out", tmp_path / "d.csv")
    assert_single_line_error(rc, err, "unknown config key")


def test_invalid_config_value_rejected(tmp_path, capsys):
    rc, _, err = run(capsys, "generate", "--set", "env.logging_smoothing=0.5", "--n", 5, "--out", tmp_path / "d.csv")
    assert_single_line_error(rc, err, "logging_smoothing")


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    rc, _, err = run(capsys, "generate", "--n", 5, "--out", blocker / "d.csv")
    assert_single_line_error(rc, err, "error")


def test_fit_propensity_reports_tv_for_softmax_logging(tmp_path, capsys):
    run(capsys, "generate", "--n", 100_000, "--set", "env.logging_kind=softmax", "--out", tmp_path / "d.csv")
    args = ["fit-propensity", tmp_path / "d.csv", "--set", "env.logging_kind=softmax", "--reference-env"]
    rc, out, _ = run(capsys, *args, "--out", tmp_path / "m1.csv")
    assert rc == 0
    report = dict(line.split("=", 1) for line in out.split())
    assert float(report["mean_tv_to_logging_policy"]) < 0.02
    assert float(report["cross_entropy"]) > 0
    run(capsys, *args, "--out", tmp_path / "m2.csv")
    assert (tmp_path / "m1.csv").read_bytes() == (tmp_path / "m2.csv").read_bytes()


def test_fit_propensity_single_sample_fails(tmp_path, capsys):
    save_dataset(Dataset([[0.2, 0.3]], [0], [0.0], [0.9]), tmp_path / "one.csv")
    rc, _, err = run(capsys, "fit-propensity", tmp_path / "one.csv", "--out", tmp_path / "m.csv")
    assert_single_line_error(rc, err, "DatasetError")


def test_train_dm_objective_decreases(small_data, tmp_path, capsys):
    rc, _, _ = run(capsys, "train", small_data, "--estimator", "dm", "--out", tmp_path / "dm.csv")
    assert rc == 0
    hist = rows(tmp_path / "dm_history.csv")
    assert len(hist) == 100
    assert float(hist[-1]["objective"]) < float(hist[0]["objective"])


def test_train_is_deterministic(small_data, tmp_path, capsys):
    for name in "ab":
        rc, _, _ = run(capsys, "train", small_data, "--estimator", "ips", "--set", "train.epochs=3",
                       "--out", tmp_path / f"{name}.csv")
        assert rc == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a_history.csv").read_bytes() == (tmp_path / "b_history.csv").read_bytes()
    assert (tmp_path / "a_propensity.csv").exists()


def test_train_with_propensity_model_file(small_data, tmp_path, capsys):
    run(capsys, "fit-propensity", small_data, "--out", tmp_path / "lam.csv")
    rc, _, _ = run(capsys, "train", small_data, "--estimator", "ips", "--propensity", tmp_path / "lam.csv",
                   "--set", "train.epochs=2", "--out", tmp_path / "p.csv")
    assert rc == 0


def test_train_ips_logged_without_propensity_column(tmp_path, capsys):
    rng = np.random.default_rng(0)
    save_dataset(Dataset(rng.random((100, 2)), rng.integers(-1, 2, 100), rng.uniform(-0.1, 0.1, 100)),
                 tmp_path / "np.csv")
    rc, _, err = run(capsys, "train", tmp_path / "np.csv", "--estimator", "ips", "--propensity", "logged",
                     "--out", tmp_path / "p.csv")
    assert_single_line_error(rc, err, "propensity")


def test_train_unknown_estimator(small_data, capsys):
    rc, _, err = run(capsys, "train", small_data, "--estimator", "dr")
    assert_single_line_error(rc, err, "invalid choice")


def test_train_grid_search(small_data, tmp_path, capsys):
    rc, _, _ = run(capsys, "train", small_data, "--estimator", "dm", "--grid-search", "--set", "train.epochs=1",
                   "--out", tmp_path / "g.csv")
    assert rc == 0
    grid = rows(tmp_path / "g_grid.csv")
    assert len(grid) == 15
    assert {float(r["lr"]) for r in grid} == {0.0001, 0.0005, 0.001, 0.005, 0.01}


def test_evaluate_single_split_has_empty_std(small_data, tmp_path, capsys):
    rc, _, _ = run(capsys, "evaluate", small_data, "--splits", 1, "--lambda-eval", "logged",
                   "--set", "train.propensity_source=logged", "--set", "train.epochs=1", "--out", tmp_path / "r.csv")
    assert rc == 0
    table = rows(tmp_path / "r.csv")
    assert list(table[0]) == ["policy", "dataset_variant", "mean_test_loss", "std_test_loss"]
    assert [r["policy"] for r in table] == ["lambda", "ips", "dm"]
    assert all(r["std_test_loss"] == "" for r in table)


def test_evaluate_deterministic_and_thread_independent(small_data, tmp_path, capsys):
    base = ["evaluate", small_data, "--splits", 3, "--downsample", "--set", "train.epochs=2"]
    run(capsys, *base, "--out", tmp_path / "a.csv")
    run(capsys, *base, "--out", tmp_path / "b.csv")
    run(capsys, *base, "--workers", 3, "--out", tmp_path / "c.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()
    table = rows(tmp_path / "a.csv")
    assert {r["dataset_variant"] for r in table} == {"complete", "downsampled"}
    assert len(rows(tmp_path / "a_splits.csv")) == 3 * len(table)


def test_evaluate_extra_checkpoint(small_data, tmp_path, capsys):
    save_checkpoint(PolicyNet(seed=1), tmp_path / "mine.csv")
    rc, _, _ = run(capsys, "evaluate", small_data, "--splits", 1, "--policy", tmp_path / "mine.csv",
                   "--set", "train.epochs=1", "--curves", "--out", tmp_path / "r.csv")
    assert rc == 0
    assert "ckpt:mine" in [r["policy"] for r in rows(tmp_path / "r.csv")]
    assert len(rows(tmp_path / "r_curves.csv")) == 2


def test_heatmap_zero_policy_and_corners(tmp_path, capsys):
    save_checkpoint(PolicyNet(params=np.zeros(PolicyNet().n_params)), tmp_path / "z.csv")
    rc, _, _ = run(capsys, "heatmap", tmp_path / "z.csv", "--grid", 2, "--out", tmp_path / "h.csv")
    assert rc == 0
    grid = rows(tmp_path / "h.csv")
    assert [(float(r["q"]), float(r["c"])) for r in grid] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    for r in grid:
        assert [float(r[k]) for k in ("p_down", "p_nochange", "p_up")] == pytest.approx([1 / 3] * 3)


def test_heatmap_rejects_small_grid(tmp_path, capsys):
    save_checkpoint(PolicyNet(), tmp_path / "z.csv")
    rc, _, err = run(capsys, "heatmap", tmp_path / "z.csv", "--grid", 1)
    assert_single_line_error(rc, err, "grid")


def test_heatmap_of_trained_policy_is_context_sensitive(small_data, tmp_path, capsys):
    run(capsys, "train", small_data, "--estimator", "ips", "--set", "train.epochs=20", "--out", tmp_path / "p.csv")
    run(capsys, "heatmap", tmp_path / "p.csv", "--grid", 11, "--out", tmp_path / "h.csv")
    grid = rows(tmp_path / "h.csv")
    probs = np.array([[float(r[k]) for k in ("p_down", "p_nochange", "p_up")] for r in grid]).reshape(11, 11, 3)
    best = probs.argmax(axis=2)  # indexed [q, c]
    assert any(len(set(best[:, j])) > 1 for j in range(11))


def test_diagnose_writes_report(tmp_path, capsys):
    rc, out, _ = run(capsys, "diagnose", "--estimator", "ips", "--n-list", "200,400", "--replicates", 30,
                     "--set", "oracle.n_mc=20000", "--out", tmp_path / "d.csv")
    assert rc == 0 and "variance_slope" in out
    assert [r["N"] for r in rows(tmp_path / "d.csv")] == ["200", "400"]


@pytest.mark.parametrize("n_list", ["", "500,abc", "1,100"])
def test_diagnose_invalid_n_list(n_list, capsys):
    rc, _, err = run(capsys, "diagnose", "--estimator", "ips", "--n-list", n_list)
    assert_single_line_error(rc, err, "n-list")


def test_diagnose_needs_30_replicates(capsys):
    rc, _, err = run(capsys, "diagnose", "--estimator", "dm", "--replicates", 29)
    assert_single_line_error(rc, err, "replicates")
