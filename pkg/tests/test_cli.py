import json
from pathlib import Path

import pytest

from qhc import ConfigError, KeySet, builtin
from qhc.cli import _resolve_threads, main, parse_config


def run_cli(*argv: str) -> int:
    return main(list(argv))


def write_config(tmp_path: Path, doc: dict, name: str = "config.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


EQ2_EXACT = {
    "function": {"name": "EQ", "n": 2},
    "delta": 0.3,
    "keys": {"search": {"log2_n": 10, "seed": 7}},
    "mode": "exact",
    "input": {"alice": "10", "bob": "10"},
}


# ----------------------------------------------------------------- verify


class TestVerify:
    @pytest.mark.parametrize(
        "argv",
        [
            ("verify", "--function", "EQ", "--n", "3"),
            ("verify", "--function", "MOD", "--n", "5", "--m", "3"),
            ("verify", "--function", "PALINDROME", "--n", "5"),
            ("verify", "--function", "PERM", "--n", "2"),
            ("verify", "--function", "CONJ", "--n", "6"),
        ],
    )
    def test_builtins_are_valid(self, argv, capsys):
        assert run_cli(*argv) == 0
        assert capsys.readouterr().out.startswith("valid:")

    def test_corrupted_polynomial_exits_1(self, tmp_path, capsys):
        good = builtin("EQ", 2).characteristic.polynomials[0]
        doc = good.to_json()
        doc["constant"] = "1"
        poly = tmp_path / "bad.json"
        poly.write_text(json.dumps(doc))
        assert run_cli("verify", "--function", "EQ", "--n", "2", "--poly", str(poly)) == 1
        assert "counterexample" in capsys.readouterr().out

    def test_enumeration_guard_exits_2(self, capsys):
        assert run_cli("verify", "--function", "EQ", "--n", "13") == 2
        assert "guard" in capsys.readouterr().err

    def test_unknown_function_exits_3(self, capsys):
        assert run_cli("verify", "--function", "XOR", "--n", "2") == 3
        assert "config error" in capsys.readouterr().err

    def test_mod_without_modulus_exits_3(self):
        assert run_cli("verify", "--function", "MOD", "--n", "4") == 3


# ------------------------------------------------------------ search-keys


class TestSearchKeys:
    def test_writes_certified_key_set(self, tmp_path, capsys):
        out = tmp_path / "keys.json"
        rc = run_cli(
            "search-keys", "--log2-n", "10", "--delta", "0.3", "--seed", "7",
            "--out", str(out),
        )
        assert rc == 0
        ks = KeySet.from_json(json.loads(out.read_text()))
        assert ks.d == 170
        assert ks.certified and ks.certification.max_bias < 0.3
        assert "certified:" in capsys.readouterr().out

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run_cli(
                "search-keys", "--log2-n", "8", "--delta", "0.4", "--seed", "3",
                "--out", str(out),
            ) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_stdout_mode(self, capsys):
        assert run_cli("search-keys", "--log2-n", "6", "--delta", "0.3", "--seed", "0") == 0
        out = capsys.readouterr().out
        doc = json.loads(out[: out.rindex("}") + 1])
        assert doc["N"] == str(64)
        assert "-> stdout" in out

    def test_bad_width_exits_3(self, capsys):
        assert run_cli("search-keys", "--log2-n", "0", "--delta", "0.3", "--seed", "0") == 3

    def test_bad_delta_exits_3(self):
        assert run_cli("search-keys", "--log2-n", "6", "--delta", "1.5", "--seed", "0") == 3


# -------------------------------------------------------------------- run


class TestRun:
    def test_exact_equal_inputs(self, tmp_path, capsys):
        config = write_config(tmp_path, EQ2_EXACT)
        assert run_cli("run", "--config", config) == 0
        doc = json.loads(capsys.readouterr().out)
        assert list(doc) == ["tool", "version", "config", "result", "wall_clock_s"]
        assert doc["tool"] == "qhc"
        result = doc["result"]
        assert result["f"] == 1 and result["exact_accept"] == 1.0
        assert result["bounds"]["certified"] is True
        assert result["qubits"]["alice_to_bob"] == 9  # d = 170 -> 9 qubits

    def test_sampled_seed_override_wins(self, tmp_path, capsys):
        doc = dict(EQ2_EXACT, mode="sampled", trials=50, seed=1,
                   input={"alice": "10", "bob": "01"})
        config = write_config(tmp_path, doc)
        assert run_cli("run", "--config", config, "--seed", "9") == 0
        report = json.loads(capsys.readouterr().out)["result"]
        assert report["sampled"]["seed"] == 9
        assert report["sampled"]["trials"] == 50

    def test_repeat_runs_identical_up_to_wall_clock(self, tmp_path, capsys):
        doc = dict(EQ2_EXACT, mode="sampled", trials=40, seed=5,
                   input={"alice": "11", "bob": "00"})
        config = write_config(tmp_path, doc)
        envelopes = []
        for _ in range(2):
            assert run_cli("run", "--config", config) == 0
            env = json.loads(capsys.readouterr().out)
            env.pop("wall_clock_s")
            envelopes.append(env)
        assert envelopes[0] == envelopes[1]

    def test_smp_topology_routes_to_referee(self, tmp_path, capsys):
        doc = dict(EQ2_EXACT, topology="smp")
        config = write_config(tmp_path, doc)
        assert run_cli("run", "--config", config) == 0
        qubits = json.loads(capsys.readouterr().out)["result"]["qubits"]
        assert qubits["alice_to_referee"] == qubits["bob_to_referee"] == 9

    def test_key_file_source(self, tmp_path, capsys):
        keys = tmp_path / "keys.json"
        assert run_cli(
            "search-keys", "--log2-n", "10", "--delta", "0.3", "--seed", "7",
            "--out", str(keys),
        ) == 0
        capsys.readouterr()
        doc = {
            "function": {"name": "EQ", "n": 2},
            "keys": {"file": "keys.json"},
            "input": {"alice": "01", "bob": "00"},
        }
        config = write_config(tmp_path, doc)
        assert run_cli("run", "--config", config) == 0
        result = json.loads(capsys.readouterr().out)["result"]
        assert result["f"] == 0
        assert 0.5 <= result["exact_accept"] <= 0.545 + 1e-9

    def test_out_file_and_summary_line(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        config = write_config(tmp_path, dict(EQ2_EXACT, out=str(out)))
        assert run_cli("run", "--config", config) == 0
        assert json.loads(out.read_text())["result"]["f"] == 1
        assert "exact_accept=1.0" in capsys.readouterr().out

    def test_missing_input_exits_3(self, tmp_path, capsys):
        doc = {k: v for k, v in EQ2_EXACT.items() if k != "input"}
        assert run_cli("run", "--config", write_config(tmp_path, doc)) == 3
        assert "input" in capsys.readouterr().err

    def test_missing_config_file_exits_3(self, tmp_path):
        assert run_cli("run", "--config", str(tmp_path / "nope.json")) == 3

    def test_malformed_json_exits_3(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert run_cli("run", "--config", str(path)) == 3

    def test_missing_required_flag_exits_3(self, capsys):
        assert run_cli("run") == 3
        assert "config error" in capsys.readouterr().err


# ---------------------------------------------------------------- profile


class TestProfile:
    def profile_config(self, tmp_path: Path) -> str:
        doc = {
            "function": {"name": "EQ", "n": 2},
            "delta": 0.3,
            "keys": {"search": {"log2_n": 10, "seed": 7}},
        }
        return write_config(tmp_path, doc)

    def test_csv_grid(self, tmp_path, capsys):
        out = tmp_path / "profile.csv"
        assert run_cli("profile", "--config", self.profile_config(tmp_path),
                       "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "sigma,gamma,f,exact_accept"
        assert len(lines) == 1 + 16
        assert lines[1] == "00,00,1,1.0"
        stdout = capsys.readouterr().out
        assert "worst false accept:" in stdout
        assert "certified bound:" in stdout

    def test_repeat_runs_byte_identical(self, tmp_path):
        config = self.profile_config(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run_cli("profile", "--config", config, "--out", str(out)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_uncertified_keys_warn(self, tmp_path, capsys):
        keys = tmp_path / "keys.json"
        keys.write_text(json.dumps(KeySet(modulus=16, keys=(1, 3, 7)).to_json()))
        doc = {
            "function": {"name": "EQ", "n": 2},
            "keys": {"file": "keys.json"},
        }
        out = tmp_path / "profile.csv"
        assert run_cli("profile", "--config", write_config(tmp_path, doc),
                       "--out", str(out)) == 0
        assert "bounds unproven" in capsys.readouterr().out

    def test_enumeration_guard_exits_2(self, tmp_path, capsys):
        doc = {
            "function": {"name": "EQ", "n": 11},
            "delta": 0.3,
            "keys": {"search": {"log2_n": 11, "seed": 0}},
        }
        rc = run_cli("profile", "--config", write_config(tmp_path, doc),
                     "--out", str(tmp_path / "x.csv"))
        assert rc == 2
        assert "guard" in capsys.readouterr().err


# ----------------------------------------------------------- config parse


class TestParseConfig:
    def parse(self, doc, base=Path(".")):
        return parse_config(doc, base)

    def error_path(self, doc) -> str:
        with pytest.raises(ConfigError) as info:
            self.parse(doc)
        return str(info.value)

    def test_parse_is_deterministic(self, tmp_path):
        assert self.parse(dict(EQ2_EXACT)) == self.parse(dict(EQ2_EXACT))

    def test_missing_function(self):
        assert self.error_path({}).startswith("function:")

    def test_unknown_name(self):
        assert self.error_path({"function": {"name": "NOPE"}}).startswith("function.name")

    def test_bad_cut(self):
        doc = dict(EQ2_EXACT, split={"n1": 9})
        assert self.error_path(doc).startswith("split.n1")

    def test_forwarded_out_of_range(self):
        doc = dict(EQ2_EXACT, split={"n1": 2, "forwarded": [3]})
        assert self.error_path(doc).startswith("split.forwarded")

    def test_forwarded_duplicates(self):
        doc = dict(EQ2_EXACT, split={"n1": 2, "forwarded": [1, 1]})
        assert self.error_path(doc).startswith("split.forwarded")

    def test_delta_domain(self):
        assert self.error_path(dict(EQ2_EXACT, delta=1.0)).startswith("delta")

    def test_two_key_sources(self):
        doc = dict(EQ2_EXACT, keys={"search": {"log2_n": 6}, "file": "k.json"})
        assert self.error_path(doc).startswith("keys:")

    def test_search_needs_delta(self):
        doc = {k: v for k, v in EQ2_EXACT.items() if k != "delta"}
        assert self.error_path(doc).startswith("delta")

    def test_search_modulus_must_cover_polynomial(self):
        doc = dict(EQ2_EXACT, keys={"search": {"log2_n": 1, "seed": 0}})
        assert self.error_path(doc).startswith("keys.search")

    def test_bad_topology(self):
        assert self.error_path(dict(EQ2_EXACT, topology="mesh")).startswith("topology")

    def test_bad_mode(self):
        assert self.error_path(dict(EQ2_EXACT, mode="fast")).startswith("mode")

    def test_input_needs_both_parties(self):
        assert self.error_path(dict(EQ2_EXACT, input={"alice": "01"})).startswith("input")

    def test_input_rejects_non_bits(self):
        doc = dict(EQ2_EXACT, input={"alice": "01", "bob": "2x"})
        assert self.error_path(doc).startswith("input")

    def test_file_count_must_match_pairs(self):
        doc = {
            "function": {"name": "CONJ", "n_a": 2, "n_b": 2},
            "keys": {"files": ["a.json", "b.json", "c.json"]},
        }
        assert self.error_path(doc).startswith("keys.files")


# ----------------------------------------------------------------- plumbing


class TestThreads:
    def test_explicit_argument_wins(self, monkeypatch):
        monkeypatch.setenv("QHC_THREADS", "6")
        assert _resolve_threads(2) == 2

    def test_environment_fallback(self, monkeypatch):
        monkeypatch.setenv("QHC_THREADS", "3")
        assert _resolve_threads(None) == 3

    def test_floor_of_one(self, monkeypatch):
        monkeypatch.delenv("QHC_THREADS", raising=False)
        assert _resolve_threads(0) == 1


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        run_cli("--version")
    assert info.value.code == 0
    assert capsys.readouterr().out.startswith("qhc ")
