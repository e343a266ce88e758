import json
import subprocess
import sys

import pytest

from rainbowlcc.cli import RunManifest, help_selftest, main, manifest_path


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def had4(tmp_path):
    path = tmp_path / "h4.json"
    assert run("gen", "hadamard", "--k", 4, "--seed", 1, "--out", path, "--quiet") == 0
    return path


class TestGenValidate:
    def test_pipeline(self, had4, capsys):
        assert run("validate", had4) == 0
        assert "PASS" in capsys.readouterr().out.upper()

    def test_k3_packing_shortfall(self, tmp_path, capsys):
        assert run("gen", "hadamard", "--k", 3, "--seed", 1, "--out", tmp_path / "h3.json") == 4
        assert "packing shortfall" in capsys.readouterr().err
        assert not (tmp_path / "h3.json").exists()

    def test_planted_bad_triple(self, had4, tmp_path, capsys):
        data = json.loads(had4.read_text())
        key = next(iter(data["matchings"]))
        first, second = data["matchings"][key][:2]
        # swapping one index between two triples keeps them disjoint but breaks both sums
        first[0], second[0] = second[0], first[0]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        assert run("validate", bad) == 1
        assert "counterexample" in capsys.readouterr().err

    def test_stdout_json(self, capsys):
        assert run("gen", "hypercube", "--d", 2) == 0
        assert len(json.loads(capsys.readouterr().out)["edges"]) == 4

    @pytest.mark.parametrize(
        "argv",
        [["gen", "kernel", "--n", 14, "--per-target", 2],
         ["gen", "hadamard-ldc", "--k", 3, "--q", 3]],
    )
    def test_other_generators(self, argv, tmp_path):
        path = tmp_path / "inst.json"
        assert run(*argv, "--out", path, "--quiet") == 0
        assert run("validate", path, "--quiet") == 0


class TestSearchCommands:
    def test_hypercube_absent(self, tmp_path, capsys):
        graph = tmp_path / "hypercube_d4.json"
        assert run("gen", "hypercube", "--d", 4, "--out", graph, "--quiet") == 0
        assert run("rainbow", "--graph", graph, "--json") == 0
        assert json.loads(capsys.readouterr().out)["outcome"] == "AbsentProven"

    def test_budget_exit(self, tmp_path):
        graph = tmp_path / "q6.json"
        run("gen", "hypercube", "--d", 6, "--out", graph, "--quiet")
        assert run("rainbow", "--graph", graph, "--budget", 10, "--quiet") == 3

    def test_even_cover_and_direct_sum(self, tmp_path, capsys):
        inst = tmp_path / "kern.json"
        run("gen", "kernel", "--n", 14, "--per-target", 2, "--out", inst, "--quiet")
        assert run("even-cover", "--instance", inst, "--json") == 0
        assert json.loads(capsys.readouterr().out)["outcome"] == "Found"
        # triples have odd size, so the direct sum is a precondition violation
        assert run("direct-sum", "--instance", inst, "--ell", 2, "--quiet") == 4

    def test_missing_file(self, tmp_path):
        assert run("rainbow", "--graph", tmp_path / "nope.json") == 2
        assert run("validate", tmp_path / "nope.json") == 2

    def test_corrupt_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run("validate", bad) == 2

    def test_bad_flag(self):
        assert run("rainbow") == 2


class TestExperiments:
    def test_compress_and_replay(self, had4, tmp_path, capsys):
        csv = tmp_path / "c.csv"
        assert run("compress", "--instance", had4, "--samples", 6, "--min-part-size", 1, "--csv", csv, "--quiet") == 0
        lines = csv.read_text().splitlines()
        assert lines[0] == "x_id,initial_len,final_len,rounds,cycles_found,budget_spent,seed" and len(lines) == 7
        manifest = RunManifest.read(manifest_path(csv))
        assert manifest.subcommand == "compress" and manifest.csv_sha256
        assert run("replay", manifest_path(csv), "--json") == 0
        assert json.loads(capsys.readouterr().out)["identical"] is True

    def test_cover_ldc_replay(self, tmp_path, capsys):
        ldc = tmp_path / "ldc.json"
        run("gen", "hadamard-ldc", "--k", 4, "--q", 3, "--out", ldc, "--quiet")
        csv = tmp_path / "span.csv"
        assert run("ldc", "span", "--instance", ldc, "--samples", 5, "--seed", 3, "--csv", csv, "--quiet") == 0
        assert csv.read_text().startswith("x_id,w_initial,steps,retries_total,I_size,verified\n")
        assert run("replay", manifest_path(csv), "--quiet") == 0
        assert (tmp_path / "span.csv.replay").read_bytes() == csv.read_bytes()

    def test_cover_exhaustive(self, had4, capsys):
        assert run("cover", "--instance", had4, "--min-part-size", 1, "--json") == 0
        assert json.loads(capsys.readouterr().out)["count"] == 16

    def test_ldc_contract(self, tmp_path):
        ldc = tmp_path / "ldc.json"
        run("gen", "hadamard-ldc", "--k", 5, "--out", ldc, "--quiet")
        assert run("ldc", "contract", "--instance", ldc, "--x", "1,0,1,1,0", "--quiet") == 0
        assert run("ldc", "contract", "--instance", ldc, "--x", "0,0,0,0,0", "--quiet") == 4

    def test_replay_detects_edit(self, had4, tmp_path):
        csv = tmp_path / "c.csv"
        run("compress", "--instance", had4, "--samples", 2, "--min-part-size", 1, "--csv", csv, "--quiet")
        data = json.loads(manifest_path(csv).read_text())
        data["csv_sha256"] = "0" * 64
        manifest_path(csv).write_text(json.dumps(data))
        assert run("replay", manifest_path(csv), "--quiet") == 1

    def test_wrong_instance_kind(self, had4):
        assert run("ldc", "span", "--instance", had4, "--quiet") == 4


class TestHelp:
    def test_selftest(self):
        assert help_selftest() == []

    def test_console_script(self):
        out = subprocess.run([sys.executable, "-m", "rainbowlcc.cli", "--help"], capture_output=True, text=True)
        assert out.returncode == 0 and "compress" in out.stdout
