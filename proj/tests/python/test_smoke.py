import csv
import json

import jsonschema
import numpy as np
import pytest

import sqrdln

SMALL_MODEL = {
    "head": "dln",
    "hidden_size": 4,
    "num_layers": 1,
    "dln": {"feature_calib_keypoints": 5, "lattice_keypoints": 3, "output_calib_keypoints": 7},
}


@pytest.fixture(scope="module")
def sine():
    return sqrdln.Dataset.synthetic("heteroscedastic-sine", length=600, seed=2, window=24, horizon=6)


def ref_pinball(y, f, tau):
    d = y - f
    return np.where(d >= 0, tau * d, (tau - 1.0) * d)


def test_pinball_and_crps_match_numpy():
    rng = np.random.default_rng(0)
    taus = sqrdln.default_quantile_grid()
    y = rng.normal(size=(5, 3))
    f = np.sort(rng.normal(size=(5, len(taus), 3)), axis=1)
    assert sqrdln.pinball_loss(y, f[:, 0, :], 0.3) == pytest.approx(ref_pinball(y, f[:, 0, :], 0.3).mean())
    ref = sum(ref_pinball(y, f[:, k, :], t).mean() for k, t in enumerate(taus))
    assert sqrdln.crps(y, f, taus) == pytest.approx(ref, abs=1e-12)
    assert sqrdln.crossover_rate(f, taus) == 0.0
    assert 0.0 <= sqrdln.ace(y, f, taus) <= 1.0
    with pytest.raises(ValueError):
        sqrdln.crps(y, f[:, :3, :], taus)


def test_isotonic_and_lattice():
    assert sqrdln.isotonic_regression([3.0, 1.0, 2.0]) == pytest.approx([2.0, 2.0, 2.0])
    assert sqrdln.lattice_forward([0.0, 2.0, 1.0, 3.0], 2, 2, [0.25, 0.75]) == pytest.approx(1.75)


def test_train_evaluate_forecast(sine):
    model = sqrdln.Model(sine, SMALL_MODEL, seed=3)
    assert model.head == "dln"
    assert model.parameter_count > 0
    log = model.train(sine, {"epochs": 2, "batch_size": 32, "learning_rate": 0.01}, seed=3)
    assert [row["epoch"] for row in log] == [1, 2]
    assert all(np.isfinite(row["validation_crps"]) for row in log)

    with pytest.warns(UserWarning, match="skill score"):
        report = model.evaluate(sine, "test")
    jsonschema.validate(report, sqrdln.metric_report_schema())
    assert report["crossover_rate"] == 0.0
    assert report["ss"] is None

    grid = [i / 100 for i in range(101)]
    model.reset_embed_calls()
    fc = model.forecast(sine, "test", 0, grid)
    assert fc.shape == (101, 6)
    assert model.embed_calls == 1
    assert np.all(np.diff(fc, axis=0) >= -1e-9)


def test_checkpoint_round_trip(sine, tmp_path):
    model = sqrdln.Model(sine, SMALL_MODEL, seed=5)
    path = tmp_path / "m.ckpt"
    model.save(path)
    loaded = sqrdln.Model.load(path)
    np.testing.assert_array_equal(model.forecast(sine), loaded.forecast(sine))


def test_command_wrappers(tmp_path):
    config = {
        "data": {
            "synthetic": {"kind": "clear-sky-ramp", "length": 600, "seed": 2},
            "window": 24,
            "horizon": 6,
        },
        "model": SMALL_MODEL,
        "train": {"epochs": 1, "batch_size": 64},
    }
    ckpt, log = sqrdln.run_train(config, tmp_path / "train")
    assert ckpt.exists() and log.exists()
    lines = log.read_text().strip().splitlines()
    assert json.loads(lines[0])["epoch"] == 1

    report = sqrdln.run_eval(ckpt, config, "test", None, tmp_path / "eval")
    jsonschema.validate(report, sqrdln.metric_report_schema())
    assert report["ss"] is not None

    code, failures = sqrdln.run_experiment(config, [1, 1], tmp_path / "exp")
    assert code == 0 and failures == []
    with open(tmp_path / "exp" / "experiment.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["model"] == "SP"
    for row in rows:
        for key, value in row.items():
            if key.endswith("_std") and value:
                assert float(value) == 0.0


def test_config_errors():
    with pytest.raises(sqrdln.ConfigError):
        sqrdln.Dataset({"data": {"window": 24}, "bogus": 1})
