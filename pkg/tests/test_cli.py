import json
import math
from pathlib import Path

import pytest

from holderdini.cli import (
    EXIT_CHECK,
    EXIT_INVALID,
    EXIT_OK,
    EXIT_RUNTIME,
    ExperimentConfig,
    evaluate_checks,
    main,
    validate,
)
from holderdini.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "examples_configs"


def _write(tmp_path, text, name="c.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path, capsys):
    assert main(["validate", str(path)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "OK"


def test_non_flow_drift_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, 'experiment = "zvonkin-sim"\n[drift]\nkind = "log_power_example"\nbeta = -1.5\n')
    assert main(["validate", cfg]) == EXIT_INVALID
    assert "INVALID drift.beta" in capsys.readouterr().out


def test_embedding_above_threshold_accepted():
    cfg = ExperimentConfig.from_dict({"experiment": "embedding", "modulus": {"beta": -2.0},
                                      "label": {"alpha": 0.2, "p": 2.0}, "source": {"kind": "holder_dini"}})
    assert validate(cfg) == []


def test_embedding_below_threshold_rejected():
    cfg = ExperimentConfig.from_dict({"experiment": "embedding", "modulus": {"beta": -2.0},
                                      "label": {"alpha": 0.2, "p": 1.5}, "source": {"kind": "holder_dini"}})
    assert any(v.startswith("label.alpha") for v in validate(cfg))


def test_unknown_key():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"experiment": "kolmogorov", "colour": 1})
    assert info.value.violations == ["unknown key: colour"]


@pytest.mark.parametrize("raw, field", [
    ({"experiment": "nope"}, "experiment"),
    ({"experiment": "kolmogorov", "lambda": -1.0}, "lambda"),
    ({"experiment": "kolmogorov", "grid": {"N": 100}}, "grid"),
    ({"experiment": "modulus-report", "modulus": {"kind": "wavelet"}}, "modulus"),
    ({"experiment": "zvonkin-sim", "sim": {"T": 1.0}, "grid": {"T": 0.5}}, "sim.T"),
    ({"experiment": "drifted", "drift": {"kind": "supercritical"}, "modulus": {"beta": -2.0}}, "drift"),
    ({"experiment": "supercritical-demo", "options": {"eps": [0.1]}}, "options.eps"),
    ({"experiment": "modulus-report", "checks": [{"quantity": "x"}]}, "checks[0]"),
])
def test_field_level_violations(raw, field):
    violations = validate(ExperimentConfig.from_dict(raw))
    assert any(v.startswith(field) for v in violations), violations


def test_bad_toml(tmp_path, capsys):
    assert main(["validate", _write(tmp_path, "experiment = ")]) == EXIT_INVALID
    assert capsys.readouterr().out.startswith("INVALID config")


def test_evaluate_checks():
    summary = {"a": 1.0, "b": math.inf}
    res = evaluate_checks([{"quantity": "a", "expected": 1.0, "tol": 0.0}, {"quantity": "a", "max": 0.5},
                           {"quantity": "b", "expected": math.inf}, {"quantity": "c", "min": 0}], summary)
    assert [ok for _, ok, _ in res] == [True, False, True, False]


def test_run_modulus_report(tmp_path, capsys):
    out = tmp_path / "m"
    assert main(["run", str(CONFIGS / "modulus_report.toml"), "--out", str(out)]) == EXIT_OK
    assert "PASS dini_integral" in capsys.readouterr().out
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 0 and manifest["config"]["experiment"] == "modulus-report"
    assert {"versions", "backend", "timing", "checks"} <= set(manifest)
    assert (out / "results" / "modulus.csv").exists()


def test_failed_check_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, 'experiment = "modulus-report"\n[modulus]\nbeta = -2.0\n'
                           '[[checks]]\nquantity = "dini_integral"\nexpected = 1.0\ntol = 1e-6\n')
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == EXIT_CHECK
    assert "FAIL dini_integral" in capsys.readouterr().out


def test_runtime_error_exit_code(tmp_path, capsys):
    # a large drift at a fixed small lambda cannot contract
    cfg = _write(tmp_path, 'experiment = "kolmogorov"\nlambda = 0.01\n[drift]\nkind = "sine"\namplitude = 50.0\n'
                           '[grid]\nN = 128\nM = 16\n')
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == EXIT_RUNTIME
    assert "ERROR" in capsys.readouterr().out
    assert "error" in json.loads((tmp_path / "o" / "manifest.json").read_text())


def _tree(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and p.name != "manifest.json"}


@pytest.mark.parametrize("name", ["zvonkin_constant", "kolmogorov", "modulus_report"])
def test_byte_identical_reruns(name, tmp_path):
    cfg = str(CONFIGS / f"{name}.toml")
    assert main(["run", cfg, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["run", cfg, "--out", str(tmp_path / "b")]) == EXIT_OK
    a, b = _tree(tmp_path / "a"), _tree(tmp_path / "b")
    assert a and a == b


def test_seed_override_changes_paths(tmp_path):
    cfg = str(CONFIGS / "zvonkin_constant.toml")
    main(["run", cfg, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["run", cfg, "--out", str(tmp_path / "b"), "--seed", "2"])
    path = Path("fields") / "paths.ndjson"
    assert _tree(tmp_path / "a")[path] != _tree(tmp_path / "b")[path]
    assert json.loads((tmp_path / "a" / "manifest.json").read_text())["seed"] == 1
