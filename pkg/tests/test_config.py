import json

import pytest
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from randpoly.errors import ConfigError
from utils.config_utils import (
    Budgets,
    ExperimentConfig,
    apply_overrides,
    config_from_dict,
    config_hash,
    default_out_root,
    load_config,
)
from utils.manifest_utils import (
    MANIFEST_NAME,
    finish_manifest,
    read_manifest,
    start_manifest,
    verify_manifest,
    write_manifest,
)


def test_scalar_fields_become_lists():
    cfg = config_from_dict({"experiment": "quermass", "n": 4, "N": 16, "k": 2, "q": 3})
    assert cfg.N == [16]
    assert cfg.k == [2]
    assert cfg.q == [3.0]
    assert cfg.budgets == Budgets()


def test_partial_budgets_keep_defaults():
    cfg = config_from_dict({"experiment": "widths", "budgets": {"sphere": 500}})
    assert cfg.budgets.sphere == 500
    assert cfg.budgets.pool == Budgets().pool


@pytest.mark.parametrize("data,field", [
    ({"experiment": "widths", "colour": 1}, "colour"),
    ({"n": 4}, "experiment"),
    ({"experiment": "dance"}, "experiment"),
    ({"experiment": "widths", "distribution": "cauchy"}, "distribution"),
    ({"experiment": "widths", "n": 8, "N": [16, 4]}, "N"),
    ({"experiment": "widths", "n": 4, "k": [5]}, "k"),
    ({"experiment": "widths", "q": [0.5]}, "q"),
    ({"experiment": "widths", "t": [0]}, "t"),
    ({"experiment": "widths", "trials": 0}, "trials"),
    ({"experiment": "widths", "budgets": {"sphere": 0}}, "budgets.sphere"),
    ({"experiment": "widths", "budgets": {"spheres": 10}}, "budgets.spheres"),
    ({"experiment": "sections", "budgets": {"directions": 10}}, "budgets.directions"),
    ({"experiment": "widths", "N": ["many"]}, "N"),
])
def test_invalid_configs_name_the_field(data, field):
    with pytest.raises(ConfigError) as info:
        config_from_dict(data)
    assert info.value.field == field


def test_small_N_message():
    with pytest.raises(ConfigError, match="N=4 < n=8"):
        config_from_dict({"experiment": "widths", "n": 8, "N": 4})


def test_load_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"experiment": "entropy", "n": 3, "N": 9, "seed": 7}))
    cfg = load_config(path)
    assert (cfg.experiment, cfg.n, cfg.N, cfg.seed) == ("entropy", 3, [9], 7)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_overrides():
    cfg = config_from_dict({"experiment": "widths", "budgets": {"sphere": 1000}})
    out = apply_overrides(cfg, seed=9, out="/tmp/x", workers=3, budget_scale=0.001)
    assert out.seed == 9 and out.workers == 3
    assert str(out.out_dir) == "/tmp/x"
    assert out.budgets.sphere == 1
    assert out.budgets.directions == 50
    with pytest.raises(ConfigError):
        apply_overrides(cfg, budget_scale=0.0)
    with pytest.raises(ConfigError):
        apply_overrides(cfg, workers=0)


def test_hash_ignores_output_location():
    cfg = ExperimentConfig("widths")
    assert config_hash(cfg) == config_hash(apply_overrides(cfg, out="/elsewhere", workers=4))
    assert config_hash(cfg) != config_hash(apply_overrides(cfg, seed=1))


def test_default_out_root(monkeypatch):
    monkeypatch.setenv("RANDPOLY_OUT", "/data/runs")
    assert str(default_out_root()) == "/data/runs"
    monkeypatch.delenv("RANDPOLY_OUT")
    assert str(default_out_root()) == "runs"


def _written(tmp_path, key=None):
    csv = tmp_path / "widths.csv"
    csv.write_text("trial,functional\n0,R\n")
    manifest = finish_manifest(start_manifest(ExperimentConfig("widths")), [csv], True, key)
    write_manifest(tmp_path, manifest)
    return csv


def test_manifest_round_trip(tmp_path):
    _written(tmp_path)
    manifest = read_manifest(tmp_path)
    assert manifest.complete
    assert list(manifest.digests) == ["widths.csv"]
    assert manifest.finished >= manifest.started
    assert verify_manifest(tmp_path, manifest) == []
    assert not list(tmp_path.glob(".manifest-*"))


def test_manifest_detects_changes(tmp_path):
    csv = _written(tmp_path)
    csv.write_text("trial,functional\n0,M\n")
    assert verify_manifest(tmp_path, read_manifest(tmp_path)) == ["widths.csv: digest mismatch"]
    csv.unlink()
    assert verify_manifest(tmp_path, read_manifest(tmp_path)) == ["widths.csv: missing"]


def test_signed_manifest(tmp_path):
    _written(tmp_path, Ed25519PrivateKey.generate())
    manifest = read_manifest(tmp_path)
    assert manifest.signature and manifest.public_key
    assert verify_manifest(tmp_path, manifest) == []
    data = json.loads((tmp_path / MANIFEST_NAME).read_text())
    data["seed"] = 99
    (tmp_path / MANIFEST_NAME).write_text(json.dumps(data))
    assert "signature does not verify" in verify_manifest(tmp_path, read_manifest(tmp_path))


def test_incomplete_run_reported(tmp_path):
    csv = tmp_path / "x.csv"
    csv.write_text("a\n")
    write_manifest(tmp_path, finish_manifest(start_manifest(ExperimentConfig("widths")), [csv], False))
    assert verify_manifest(tmp_path, read_manifest(tmp_path)) == ["run marked incomplete"]
