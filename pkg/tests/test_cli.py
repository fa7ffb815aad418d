"""Command-line interface contract checks (run in process via main())."""

import json

import pytest

import squidfan
import squidfan.cli as cli


def run(argv, capsys=None):
    code = cli.main(argv)
    return code


def read_lines(path):
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    return text.splitlines()


@pytest.fixture
def collection_config(tmp_path):
    path = tmp_path / "collection.json"
    path.write_text(json.dumps({
        "ic_uA": 300.0, "l_dc1_pH": 10.0, "l_dc3_pH": 100.0,
        "k1": 0.5, "k2": 0.5, "gamma": 1.0,
    }))
    return str(path)


@pytest.fixture
def no_collection_config(tmp_path):
    path = tmp_path / "nc.json"
    path.write_text(json.dumps({"ic_dr_uA": 300.0, "k": 0.5}))
    return str(path)


class TestResponseCommand:
    def test_full_figure_row_count(self, tmp_path):
        out = tmp_path / "resp.csv"
        code = run(["response", "--bias", "0.5,0.7,0.9", "--range", "0:2",
                    "--points", "201", "--output", str(out)])
        assert code == 0
        lines = read_lines(out)
        assert lines[0].startswith("# squidfan 0.1.0 :: squidfan response")
        assert lines[1] == "bias_ratio,phi_over_phi0,r_fq_normalized"
        assert len(lines) - 2 == 603

    def test_block_structure_and_threshold(self, tmp_path):
        out = tmp_path / "resp.csv"
        assert run(["response", "--bias", "0.7", "--range", "0:1",
                    "--points", "21", "--output", str(out)]) == 0
        rows = [line.split(",") for line in read_lines(out)[2:]]
        data = {float(phi): float(rate) for _bias, phi, rate in rows}
        assert all(data[phi] == 0.0 for phi in data if phi <= 0.30)
        assert data[0.5] == max(data.values()) > 0.0
        assert data[0.4] > 0.0

    def test_byte_identical_reruns(self, tmp_path):
        out = tmp_path / "resp.csv"
        args = ["response", "--bias", "0.9", "--range", "0:0.5", "--points", "11",
                "--output", str(out)]
        assert run(args) == 0
        first = out.read_bytes()
        assert run(args) == 0
        assert out.read_bytes() == first

    def test_json_format(self, tmp_path):
        out = tmp_path / "resp.json"
        assert run(["response", "--bias", "0.7", "--range", "0:0.5",
                    "--points", "6", "--format", "json", "--output", str(out)]) == 0
        obj = json.loads(out.read_text())
        assert obj["columns"] == ["bias_ratio", "phi_over_phi0", "r_fq_normalized"]
        assert len(obj["rows"]) == 6

    def test_usage_errors_exit_2(self, capsys):
        assert run(["response", "--bias", "abc"]) == 2
        assert run(["response"]) == 2
        assert run(["response", "--bias", "0.7", "--range", "1:0"]) == 2

    def test_numerical_failure_exit_3(self, monkeypatch):
        def boom(*args, **kwargs):
            raise squidfan.IntegrationError("forced failure")

        monkeypatch.setattr(cli, "sweep_response", boom)
        assert run(["response", "--bias", "0.7"]) == 3


class TestActivityCommand:
    def test_reference_rows(self, tmp_path):
        out = tmp_path / "act.csv"
        assert run(["activity", "--bias-range", "0.7:0.7:0.1",
                    "--h-list", "1,5", "--output", str(out)]) == 0
        rows = [line.split(",") for line in read_lines(out)[2:]]
        table = {int(h): float(frac) for _b, h, frac, _u in rows}
        assert table[1] == pytest.approx(0.5454929658551372, rel=1e-11)
        assert table[5] == pytest.approx(0.04829984906633274, rel=1e-11)

    def test_unreachable_marker(self, tmp_path):
        out = tmp_path / "act.csv"
        assert run(["activity", "--bias-range", "0.40:0.40:0.1",
                    "--h-list", "1", "--output", str(out)]) == 0
        row = read_lines(out)[2].split(",")
        assert float(row[2]) > 1.0
        assert row[3] == "1"

    def test_critical_bias_rows_are_zero(self, tmp_path):
        out = tmp_path / "act.csv"
        assert run(["activity", "--bias-range", "1.0:1.0:0.1",
                    "--h-list", "1,3", "--output", str(out)]) == 0
        for line in read_lines(out)[2:]:
            assert float(line.split(",")[2]) == 0.0

    def test_integer_mode_requires_fan_in(self):
        assert run(["activity", "--bias-range", "0.7:0.9:0.1", "--integer"]) == 2

    def test_integer_mode_uses_ceiling(self, tmp_path):
        out = tmp_path / "act.csv"
        assert run(["activity", "--bias-range", "0.7:0.7:0.1", "--h-list", "2",
                    "--integer", "--fan-in", "10", "--output", str(out)]) == 0
        row = read_lines(out)[2].split(",")
        assert float(row[2]) == pytest.approx(0.36, rel=1e-12)  # (6/10)**2

    def test_bad_grid_exits_2(self):
        assert run(["activity", "--bias-range", "0.9:0.5:0.1"]) == 2
        assert run(["activity", "--bias-range", "0.5:2.0:0.1"]) == 2


class TestDesignCommand:
    def test_collection_sweep_decreases(self, tmp_path, collection_config):
        out = tmp_path / "design.csv"
        assert run(["design", "--config", collection_config, "--mode", "collection",
                    "--sweep", "n=2:100", "--output", str(out)]) == 0
        lines = read_lines(out)
        assert lines[1] == "n,l_di2_pH"
        values = [float(line.split(",")[1]) for line in lines[2:]]
        assert len(values) == 99
        assert all(b < a for a, b in zip(values, values[1:]))
        report = json.loads((tmp_path / "design.csv.report.json").read_text())
        assert report["mode"] == "collection"

    def test_no_collection_inverse_scaling_and_warnings(self, tmp_path, no_collection_config):
        out = tmp_path / "nc.csv"
        assert run(["design", "--config", no_collection_config, "--mode", "no_collection",
                    "--sweep", "n=50:200:50", "--output", str(out),
                    "--report", str(tmp_path / "nc-report.json")]) == 0
        rows = [line.split(",") for line in read_lines(out)[2:]]
        values = {int(n): float(l) for n, l in rows}
        assert values[100] == pytest.approx(values[50] / 2, rel=1e-12)
        assert values[200] == pytest.approx(values[50] / 4, rel=1e-12)
        report = json.loads((tmp_path / "nc-report.json").read_text())
        # 200 inputs at k = 0.5 push the coil below the 0.1 pH line.
        assert any(w["n"] == 200 for w in report["feasibility_warnings"])

    def test_sfq_mode_reference_coupling(self, tmp_path):
        cfg = tmp_path / "sfq.json"
        cfg.write_text(json.dumps({"ic_uA": 300.0}))
        out = tmp_path / "sfq.csv"
        assert run(["design", "--config", str(cfg), "--mode", "sfq",
                    "--sweep", "n=2", "--output", str(out)]) == 0
        n, k, l_di2 = read_lines(out)[2].split(",")
        assert (int(n), float(k)) == (2, 0.5)
        assert float(l_di2) == pytest.approx(6.89278, rel=1e-4)

    def test_vary_ic_emits_consistency_report(self, tmp_path, no_collection_config):
        out = tmp_path / "vary.csv"
        assert run(["design", "--config", no_collection_config, "--mode", "vary_ic",
                    "--sweep", "n=4", "--output", str(out)]) == 0
        row = read_lines(out)[2].split(",")
        assert float(row[1]) == pytest.approx(300.0, rel=1e-12)  # ic_di = ic_dr at n=4, k=0.5
        report = json.loads((tmp_path / "vary.csv.report.json").read_text())
        entry = report["sfq_ic_consistency"][0]
        assert entry["ic_di_ratio"] == pytest.approx(2.0, rel=1e-12)
        assert entry["achieved_flux_phi0"] == pytest.approx(2**-0.5, rel=1e-12)

    def test_unknown_config_key_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"ic_uA": 300.0, "bogus": 1}))
        assert run(["design", "--config", str(cfg), "--mode", "collection",
                    "--sweep", "n=2:4"]) == 2

    def test_missing_config_exits_2(self):
        assert run(["design", "--config", "/nonexistent.json",
                    "--mode", "collection", "--sweep", "n=2:4"]) == 2

    def test_internal_constraint_failure_exits_4(self, monkeypatch, tmp_path, collection_config):
        def broken(design, rel_tol=1e-9):
            raise squidfan.ConstraintViolationError("forced")

        monkeypatch.setattr(cli.dsg, "verify_collection_design", broken)
        assert run(["design", "--config", collection_config, "--mode", "collection",
                    "--sweep", "n=2:4", "--output", str(tmp_path / "x.csv")]) == 4


class TestTreeVerifyCommand:
    def test_reference_instance(self, tmp_path):
        out = tmp_path / "verify.json"
        assert run(["tree-verify", "2", "3", "0.7", "--output", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["agree"] is True
        assert report["P_analytic"] == 8
        assert report["P_bruteforce"] == 8
        assert report["p"] == 2
        assert report["witness"] == list(range(8))

    def test_single_synapse_instances(self, tmp_path):
        for n, h, bias in ((2, 3, 0.9), (3, 2, 0.99)):
            out = tmp_path / f"verify-{n}-{h}.json"
            assert run(["tree-verify", str(n), str(h), str(bias),
                        "--output", str(out)]) == 0
            report = json.loads(out.read_text())
            assert report["agree"] is True and report["P_analytic"] == 1

    def test_constructive_mode(self, tmp_path):
        out = tmp_path / "verify.json"
        assert run(["tree-verify", "5", "3", "0.9", "--mode", "constructive",
                    "--output", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["agree"] is True
        assert report["P_analytic"] == len(report["witness"])

    def test_dynamical_mode(self, tmp_path):
        out = tmp_path / "verify.json"
        assert run(["tree-verify", "2", "2", "0.9", "--mode", "dynamical",
                    "--output", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["agree"] is True
        assert report["all_saturated_fires"] is True
        assert report["quiet_fires"] is False
        assert len(report["nodes"]) == 7

    def test_disagreement_exits_5(self, monkeypatch, tmp_path):
        def wrong(tree, mode="exhaustive"):
            return 999, frozenset()

        monkeypatch.setattr(cli, "min_active_synapses", wrong)
        out = tmp_path / "verify.json"
        assert run(["tree-verify", "2", "2", "0.9", "--output", str(out)]) == 5
        assert json.loads(out.read_text())["agree"] is False

    def test_unreachable_bias_exits_2(self):
        assert run(["tree-verify", "2", "2", "0.3"]) == 2

    def test_exhaustive_capacity_exits_2(self):
        assert run(["tree-verify", "5", "2", "0.9"]) == 2


class TestTopLevel:
    def test_version_exits_0(self, capsys):
        assert run(["--version"]) == 0
        assert "squidfan 0.1.0" in capsys.readouterr().out

    def test_unknown_command_exits_2(self):
        assert run(["frobnicate"]) == 2
