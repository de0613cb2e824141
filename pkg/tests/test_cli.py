"""Command-line surface: formats, determinism, exit codes."""

import json

import pytest

from ringcache import cli


def run(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestTradeoff:
    def test_corner_curve_even_instance(self, capsys):
        code, out, _ = run(capsys, ["tradeoff", "--K", "4", "--a", "4", "--b", "2",
                                    "--m-grid", "0,6,10"])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "M,R_ach,R_star_u,R_cutset"
        assert lines[1] == "0,4,4,2"
        assert lines[2] == "6,3/2,3/2,4/5"
        assert lines[3] == "10,0,0,0"

    def test_larger_shared_part(self, capsys):
        code, out, _ = run(capsys, ["tradeoff", "--K", "4", "--a", "10", "--b", "2",
                                    "--m-grid", "0,12,22"])
        assert code == 0
        rows = [line.split(",") for line in out.strip().split("\n")[1:]]
        assert [r[2] for r in rows] == ["4", "3/2", "0"]

    def test_uncoded_regime_is_linear(self, capsys):
        code, out, _ = run(capsys, ["tradeoff", "--K", "4", "--a", "1", "--b", "2",
                                    "--m-grid", "0,2,4"])
        assert code == 0
        rows = [line.split(",") for line in out.strip().split("\n")[1:]]
        assert [r[2] for r in rows] == ["4", "2", "0"]

    def test_deterministic_output(self, capsys):
        argv = ["tradeoff", "--K", "3", "--a", "2", "--b", "1", "--m-steps", "5"]
        _, first, _ = run(capsys, argv)
        _, second, _ = run(capsys, argv)
        assert first == second

    def test_multiaccess_column(self, capsys):
        code, out, _ = run(capsys, ["tradeoff", "--K", "4", "--a", "1", "--b", "1",
                                    "--L", "2", "--m-grid", "0,1,2"])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "M,R_ach,R_star_u,R_cutset,R_multi"
        assert lines[1].split(",")[4] == "4"
        assert lines[3].split(",")[4] == "0"

    def test_lp_column(self, capsys):
        code, out, _ = run(capsys, ["tradeoff", "--K", "2", "--a", "1", "--b", "1",
                                    "--m-grid", "0,2,3", "--lp"])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].endswith(",R_lp")
        for line in lines[1:]:
            cells = line.split(",")
            assert cells[2] == cells[-1]  # LP column equals R_star_u

    def test_json_and_decimal(self, capsys):
        code, out, _ = run(capsys, ["tradeoff", "--K", "3", "--a", "2", "--b", "1",
                                    "--m-grid", "0,5", "--format", "json",
                                    "--decimal", "3"])
        assert code == 0
        doc = json.loads(out)
        assert doc["points"][0]["R_star_u"] == "3.000"

    def test_grid_outside_range_is_usage_error(self, capsys):
        code, _, err = run(capsys, ["tradeoff", "--K", "3", "--a", "2", "--b", "1",
                                    "--m-grid", "0,9"])
        assert code == 2
        assert "error" in err

    def test_budget_exceeded_exit_code(self, capsys):
        code, _, err = run(capsys, ["tradeoff", "--K", "9", "--a", "4", "--b", "3",
                                    "--m-grid", "0"])
        assert code == 3
        assert "budget" in err


class TestSimulate:
    def test_running_example(self, capsys):
        code, out, _ = run(capsys, ["simulate", "--K", "3", "--a", "2", "--b", "1",
                                    "--M", "3", "--demand", "1,6,7"])
        assert code == 0
        doc = json.loads(out)
        assert doc["load"] == "1"
        assert doc["loads_agree"] is True
        assert all(doc["decode_ok"].values())

    def test_zero_memory(self, capsys):
        code, out, _ = run(capsys, ["simulate", "--K", "3", "--a", "2", "--b", "1",
                                    "--M", "0", "--seed", "3"])
        assert code == 0
        assert json.loads(out)["load"] == "3"

    def test_multiaccess_silent_corner(self, capsys):
        code, out, _ = run(capsys, ["simulate", "--K", "4", "--a", "1", "--b", "1",
                                    "--L", "2", "--M", "2", "--seed", "1"])
        assert code == 0
        doc = json.loads(out)
        assert doc["load"] == "0" and doc["messages"] == 0

    def test_invalid_demand_is_usage_error(self, capsys):
        code, _, err = run(capsys, ["simulate", "--K", "3", "--a", "2", "--b", "1",
                                    "--M", "3", "--demand", "9,6,7"])
        assert code == 2
        assert "region" in err

    def test_transcript_dump(self, capsys, tmp_path):
        dump = tmp_path / "transcript.bin"
        code, out, _ = run(capsys, ["simulate", "--K", "2", "--a", "1", "--b", "1",
                                    "--M", "2", "--demand", "1,3", "--seed", "9",
                                    "--dump", str(dump)])
        assert code == 0
        data = dump.read_bytes()
        assert int.from_bytes(data[:4], "big") == json.loads(out)["messages"]


class TestLpCommand:
    def test_matches_closed_form(self, capsys):
        code, out, _ = run(capsys, ["lp", "--K", "3", "--a", "2", "--b", "1", "--M", "3"])
        assert code == 0
        doc = json.loads(out)
        assert doc["lp_optimum"] == "1"
        assert doc["matches_rstar_u"] is True

    def test_case_split_example(self, capsys):
        # b(K-1) = 3 >= 2a = 2, so the uncoded-regime line applies: 4 - 8/3.
        code, out, _ = run(capsys, ["lp", "--K", "4", "--a", "1", "--b", "1", "--M", "2"])
        assert code == 0
        doc = json.loads(out)
        assert doc["lp_optimum"] == "4/3"
        assert doc["matches_rstar_u"] is True

    def test_sum_all_reference(self, capsys):
        code, out, _ = run(capsys, ["lp", "--K", "3", "--a", "2", "--b", "1",
                                    "--M", "3", "--sum-all"])
        assert code == 0
        doc = json.loads(out)
        assert doc["sum_all_bound"] == "54/95"
        assert doc["matches_reference"] is True

    def test_certificates_and_export(self, capsys, tmp_path):
        lp_path = tmp_path / "program.lp"
        code, out, _ = run(capsys, ["lp", "--K", "2", "--a", "1", "--b", "1",
                                    "--M", "1", "--certificates",
                                    "--export", str(lp_path)])
        assert code == 0
        doc = json.loads(out)
        assert doc["certificates"]["high_m"]["ok"] is True
        assert doc["certificates"]["large_b"]["ok"] is False
        text = lp_path.read_text()
        assert text.startswith("min R\n")

    def test_selected_family_flag(self, capsys):
        code, out, _ = run(capsys, ["lp", "--K", "3", "--a", "2", "--b", "1",
                                    "--M", "5", "--family", "high_m"])
        assert code == 0
        assert json.loads(out)["lp_optimum"] == "0"


class TestGap:
    def test_odd_instance(self, capsys):
        code, out, _ = run(capsys, ["gap", "--K", "3", "--a", "2", "--b", "1"])
        assert code == 0
        doc = json.loads(out)
        assert doc["ratio"] == "3" and doc["bound"] == 3 and doc["pass"] is True


class TestVerify:
    def test_single_instance_battery(self, capsys):
        code, out, _ = run(capsys, ["verify", "--K", "2", "--a", "1", "--b", "1",
                                    "--trials", "3"])
        assert code == 0
        lines = [ln for ln in out.strip().split("\n") if ln.startswith("[criterion")]
        assert len(lines) == 8
        assert all("PASS" in ln for ln in lines)

    def test_json_summary(self, capsys, tmp_path):
        path = tmp_path / "summary.json"
        code, _, _ = run(capsys, ["verify", "--K", "2", "--a", "0", "--b", "1",
                                  "--trials", "2", "--json", str(path)])
        assert code == 0
        doc = json.loads(path.read_text())
        assert [entry["criterion"] for entry in doc] == list(range(1, 9))


class TestConfig:
    def test_config_document_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "instance.json"
        cfg.write_text(json.dumps({"K": 3, "a": 2, "b": 1, "M": "0"}))
        code, out, _ = run(capsys, ["simulate", "--config", str(cfg), "--M", "3",
                                    "--demand", "1,6,7"])
        assert code == 0
        assert json.loads(out)["instance"]["M"] == "3"

    def test_missing_parameters_is_usage_error(self, capsys):
        code, _, err = run(capsys, ["gap", "--K", "3"])
        assert code == 2
        assert "missing" in err
