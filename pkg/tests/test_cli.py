import csv
import json
from pathlib import Path

import numpy as np
import pytest

from cohchaos.cli import ENV_OUTPUT_DIR, main, run
from cohchaos.config import EXPERIMENTS, ConfigError, serialize, validate

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

XXZ = """\
experiment: eigencoherence
model:
  kind: xxz_defect
  L: 8
  n_up: 3
  delta: {delta}
basis: site
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def errors_of(text):
    with pytest.raises(ConfigError) as exc:
        validate(text)
    return exc.value.errors


def test_validation_messages():
    errs = errors_of(XXZ.format(delta=9))
    assert any(e.startswith("model.delta") and "defect site out of range" in e for e in errs)
    errs = errors_of("experiment: spectral\n")
    assert "valid kinds" in errs[0] and all(name in errs[0] for name in EXPERIMENTS)
    errs = errors_of("experiment: rmt\nensemble:\n  kind: GUE\n  d: 8\n  samples: 10\n")
    assert any("seed is mandatory" in e for e in errs)
    errs = errors_of("experiment: rmt\nensemble: [1, 2\n")
    assert errs[0].startswith("line ")


def test_validation_collects_every_error():
    errs = errors_of(XXZ.format(delta=0).replace("L: 8", "L: 8\n  bogus: 1") + "basis2: x\n")
    assert len(errs) >= 3


def test_round_trip():
    for path in sorted(CONFIGS.glob("*.yaml")):
        cfg = validate(path.read_text())
        assert validate(serialize(cfg)) == cfg
        assert serialize(validate(serialize(cfg))) == serialize(cfg)


def test_exit_codes(tmp_path, capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in EXPERIMENTS)
    assert main(["validate", write(tmp_path, XXZ.format(delta=4))]) == 0
    assert main(["validate", write(tmp_path, XXZ.format(delta=40))]) == 2
    assert "model.delta" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.yaml")]) == 2
    np.save(tmp_path / "b.npy", np.eye(3))
    bad = XXZ.format(delta=4).replace("basis: site", f"basis:\n  file: {tmp_path / 'b.npy'}")
    assert main(["run", write(tmp_path, bad), "--output-dir", str(tmp_path / "o")]) == 1
    assert "dimension" in capsys.readouterr().err


def test_run_is_byte_deterministic(tmp_path):
    cfg = validate((CONFIGS / "rmt_gue_d8.yaml").read_text().replace("samples: 200", "samples: 12"))
    m1 = run(cfg, str(tmp_path / "a"))
    m2 = run(cfg, str(tmp_path / "b"))
    assert [f["sha256"] for f in m1.files] == [f["sha256"] for f in m2.files]
    for f in m1.files:
        assert (tmp_path / "a" / f["name"]).read_bytes() == (tmp_path / "b" / f["name"]).read_bytes()
    assert m1.config_sha256 == m2.config_sha256


def test_manifest_matches_files(tmp_path):
    assert main(["run", write(tmp_path, XXZ.format(delta=4)), "--output-dir", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["experiment"] == "eigencoherence"
    for f in manifest["files"]:
        with open(tmp_path / "o" / f["name"], newline="") as fh:
            assert len(list(csv.reader(fh))) - 1 == f["rows"]
    assert "hamiltonian_min_gap" in manifest["flags"]


def test_eigencoherence_l12_table(tmp_path):
    cfg = validate((CONFIGS / "eigencoherence_xxz_L12.yaml").read_text())
    manifest = run(cfg, str(tmp_path))
    assert manifest.files[0]["rows"] == 495
    with open(tmp_path / "eigencoherence.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 496 and all(len(r) == 8 for r in rows)
    energies = [float(r[1]) for r in rows[1:]]
    assert energies == sorted(energies)


def test_output_dir_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(target))
    assert main(["run", write(tmp_path, XXZ.format(delta=2))]) == 0
    assert (target / "manifest.json").exists()
    override = tmp_path / "flag"
    assert main(["run", write(tmp_path, XXZ.format(delta=2)), "--output-dir", str(override)]) == 0
    assert (override / "eigencoherence.csv").exists()


@pytest.mark.parametrize("name", ["spectrum_xxz_L12", "majorization_xxz_L12", "shorttime_klocal"])
def test_shipped_configs_run(tmp_path, name):
    manifest = run(validate((CONFIGS / f"{name}.yaml").read_text()), str(tmp_path))
    assert manifest.files and all(f["rows"] > 0 for f in manifest.files)
