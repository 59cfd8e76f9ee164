import json

import pytest
import yaml

from subshiftlab.cli import main
from subshiftlab.suite import ConfigError, SuiteConfig, builtin_suite, chain_consistent, emit_report, load_config, run_suite
from subshiftlab.verdict import ProbeVerdict, Verdict

SMALL = {
    "seed": 5,
    "horizon": 4096,
    "budget": 16,
    "systems": [{"name": "single_one"}, {"name": "full_shift", "label": "coin"}],
    "probes": [
        {"kind": "mean_eq", "epsilon": "0.1", "radii": [4]},
        {"kind": "diam_mean", "u": "0000", "r": 1},
        {"kind": "independence", "k": 2, "label": "indep2", "systems": ["coin"]},
    ],
}


def pv(kind, verdict):
    return ProbeVerdict(kind, {}, verdict, witness=None if verdict is not Verdict.FAIL else {"w": 1})


class TestChainConsistency:
    def test_null_pass_with_diam_fail(self):
        assert not chain_consistent({"a": pv("null", Verdict.PASS), "b": pv("diam_mean", Verdict.FAIL)})

    def test_diam_pass_with_mean_fail(self):
        assert not chain_consistent({"a": pv("diam_mean", Verdict.PASS), "b": pv("mean_eq", Verdict.FAIL)})

    def test_consistent(self):
        assert chain_consistent({"a": pv("mean_eq", Verdict.PASS), "b": pv("diam_mean", Verdict.FAIL), "c": pv("null", Verdict.FAIL)})
        assert chain_consistent({"a": pv("diam_mean", Verdict.INCONCLUSIVE), "b": pv("mean_eq", Verdict.FAIL)})


class TestConfig:
    def test_seed_mandatory(self):
        with pytest.raises(ConfigError, match="seed"):
            SuiteConfig.from_dict({k: v for k, v in SMALL.items() if k != "seed"})

    def test_unknown_probe(self):
        with pytest.raises(ConfigError, match="probe kind"):
            SuiteConfig.from_dict({**SMALL, "probes": [{"kind": "entropy"}]})

    def test_unknown_model(self):
        with pytest.raises(ConfigError, match="unknown model"):
            SuiteConfig.from_dict({**SMALL, "systems": [{"name": "nope"}]})

    def test_unknown_target(self):
        with pytest.raises(ConfigError, match="unknown system"):
            SuiteConfig.from_dict({**SMALL, "probes": [{"kind": "mean_eq", "systems": ["x"]}]})

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            SuiteConfig.from_dict({**SMALL, "colour": "red"})

    def test_yaml_and_json(self, tmp_path):
        (tmp_path / "a.yaml").write_text(yaml.safe_dump(SMALL))
        (tmp_path / "a.json").write_text(json.dumps(SMALL))
        assert load_config(tmp_path / "a.yaml") == load_config(tmp_path / "a.json")

    def test_builtin_targets_exist(self):
        cfg = builtin_suite()
        assert [s["name"] for s in cfg.systems] == ["single_one", "powers", "regular_toeplitz"]


class TestRunSuite:
    @pytest.fixture(scope="class")
    @classmethod
    def rows(cls):
        return run_suite(SuiteConfig.from_dict(SMALL))

    def test_rows(self, rows):
        by = {r.system: r for r in rows}
        assert set(by) == {"single_one", "coin"}
        assert by["single_one"].verdicts["mean_eq"].verdict is Verdict.PASS
        assert by["single_one"].verdicts["diam_mean"].verdict is Verdict.FAIL
        assert by["coin"].verdicts["mean_eq"].verdict is Verdict.FAIL
        assert by["coin"].verdicts["indep2"].verdict is Verdict.FAIL
        assert "indep2" not in by["single_one"].verdicts

    def test_parameters_recorded(self, rows):
        for r in rows:
            for v in r.verdicts.values():
                assert v.parameters["seed"] == 5 and "horizon" in v.parameters

    def test_json_deterministic(self, rows):
        again = run_suite(SuiteConfig.from_dict(SMALL))
        assert emit_report(rows, "json") == emit_report(again, "json")

    def test_csv(self, rows):
        lines = emit_report(rows, "csv").splitlines()
        assert lines[0].startswith("system,chain_consistent,seed,diam_mean.verdict,diam_mean.statistic,diam_mean.horizon")
        assert lines[1].startswith("single_one,true,5,fail,1.0,")

    def test_probe_errors_recorded(self):
        cfg = SuiteConfig.from_dict({**SMALL, "probes": [{"kind": "fiber"}]})
        rows = run_suite(cfg)
        assert all("fiber" in r.errors and not r.verdicts for r in rows)

    def test_empty_report_rejected(self):
        with pytest.raises(ValueError):
            emit_report([], "json")


class TestCli:
    def run(self, capsys, *argv):
        code = main(list(argv))
        out = capsys.readouterr()
        return code, out.out, out.err

    def test_build_text(self, capsys):
        code, out, _ = self.run(capsys, "build", "toeplitz", "--text", "--length", "16")
        assert code == 0 and out.strip() == "0010001000100110"

    def test_build_json(self, capsys):
        code, out, _ = self.run(capsys, "build", "sturmian", "--words", "3")
        assert code == 0 and json.loads(out)["language_sizes"] == {"1": 2, "2": 3, "3": 4}

    def test_db(self, capsys):
        code, out, _ = self.run(capsys, "db", "periodic:01", "periodic:10", "--horizon", "2^12")
        assert code == 0 and json.loads(out)["symbolic_limsup"] == 1.0

    def test_classify_and_report(self, capsys, tmp_path):
        cfg = tmp_path / "s.yaml"
        cfg.write_text(yaml.safe_dump(SMALL))
        code, out, _ = self.run(capsys, "classify", "--config", str(cfg))
        assert code == 0
        saved = tmp_path / "r.json"
        saved.write_text(out)
        code, csv_text, _ = self.run(capsys, "report", str(saved), "--format", "csv")
        assert code == 0 and csv_text.splitlines()[0].startswith("system,chain_consistent")
        code, csv_direct, _ = self.run(capsys, "classify", "--config", str(cfg), "--format", "csv")
        assert csv_direct == csv_text

    def test_seqentropy(self, capsys):
        code, out, _ = self.run(capsys, "seqentropy", "full_shift", "--positions", "pow2:8", "--horizon", "2^12")
        assert code == 0 and abs(json.loads(out)["rate_bits"] - 1) < 1e-9

    def test_seqentropy_builder(self, capsys):
        code, out, _ = self.run(capsys, "seqentropy", "full_shift", "--builder", "1", "--steps", "4", "--horizon", "2^12")
        assert code == 0 and json.loads(out)["times"] == [0, 1, 2, 3]

    def test_independence(self, capsys):
        code, out, _ = self.run(capsys, "independence", "powers", "--max-k", "4")
        data = json.loads(out)
        assert code == 0 and data["outcome"] == "certificate" and data["size"] == 4

    def test_regularity(self, capsys):
        code, out, _ = self.run(capsys, "regularity", "periodic:011", "--max-period", "4", "--horizon", "256")
        assert code == 0 and json.loads(out)["verdict"] == "pass"

    def test_config_error_exit_2(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"systems": [], "probes": []}))
        code, _, err = self.run(capsys, "classify", "--config", str(cfg))
        assert code == 2 and "seed" in err

    def test_runtime_error_exit_1(self, capsys):
        code, _, err = self.run(capsys, "regularity", "constant:0", "--max-period", "64", "--horizon", "100")
        assert code == 1 and "ValueError" in err
