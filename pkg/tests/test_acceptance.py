"""End-to-end acceptance gates.

Each test checks one headline guarantee of the package at its stated
tolerance and prints a single PASS line (run with ``pytest -v -s`` to see
them); a pytest failure on any test is the corresponding FAIL line.
"""

import json
import math
import time

import numpy as np
import pytest

from qhc import (
    KeySet,
    build_spec,
    builtin,
    comm_cost,
    conjunction,
    error_profile,
    hash_qubits,
    required_keys,
    run_exact,
    run_sampled,
    run_smp,
    search_key_set,
    swap_test,
    verify_resistance,
)
from qhc.cli import main
from qhc.qhash import build_hash
from qhc.util import rand_below

from oracles import swap_circuit_accept


def _pass(num: int, text: str) -> None:
    print(f"\nPASS c{num:02d}: {text}")


def test_c01_builtin_characteristics_all_verify(capsys):
    start = time.perf_counter()
    jobs = [
        ("EQ", "4", None),
        ("MOD", "9", "3"),
        ("MODBIN", "8", "5"),
        ("PALINDROME", "4", None),
        ("PALINDROME", "5", None),
        ("PALINDROME", "9", None),
        ("PERM", "2", None),
        ("PERM", "3", None),
    ]
    for name, n, m in jobs:
        argv = ["verify", "--function", name, "--n", n]
        if m is not None:
            argv += ["--m", m]
        assert main(argv) == 0, f"verify refused {name} n={n}"
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    capsys.readouterr()
    _pass(1, f"8 builtin characteristics verified exhaustively in {elapsed:.2f}s")


def test_c02_one_sided_error_full_enumeration(certified_n64):
    for instance in (builtin("EQ", 3), builtin("MOD", 6, m=3)):
        spec = build_spec(instance, certified_n64)
        prof = error_profile(spec)
        ones = prof.accept_grid[prof.f_grid == 1]
        assert ones.size > 0
        assert np.all(np.abs(ones - 1.0) <= 1e-12)
    _pass(2, "every 1-input accepted with certainty (EQ 3+3 and MOD_3 3+3)")


def test_c03_soundness_bound_certified_profile(certified_n64):
    start = time.perf_counter()
    assert certified_n64.modulus == 1 << 6 and certified_n64.delta == 0.3
    prof = error_profile(build_spec(builtin("EQ", 3), certified_n64))
    bound = 0.5 + 0.3**2 / 2
    assert prof.worst_false_accept <= bound + 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    _pass(
        3,
        f"EQ 3+3 worst false accept {prof.worst_false_accept:.6f} "
        f"<= {bound} (delta=0.3, N=2^6)",
    )


def test_c04_key_search_hits_hoeffding_size():
    start = time.perf_counter()
    ks = search_key_set(1 << 10, 0.3, seed=7)
    elapsed = time.perf_counter() - start
    assert ks.d == 170 == required_keys(1 << 10, 0.3)
    assert ks.certified and ks.certification.mode == "exact"
    report = verify_resistance(ks, 0.3)  # independent exact re-sweep, all 1023 diffs
    assert report.certified and report.max_bias < 0.3
    assert elapsed < 10.0
    _pass(
        4,
        f"search over N=2^10 certified d=170 keys (max bias "
        f"{report.max_bias:.4f}) in {elapsed:.2f}s",
    )


@pytest.mark.parametrize("d", [1, 2, 4])
def test_c05_swap_formula_matches_statevector(d):
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(max(d, 2), 1 << 12))
        keys = tuple(sorted(rng.choice(n, size=d, replace=False).tolist()))
        ks = KeySet(modulus=n, keys=keys)
        a = build_hash(ks, int(rng.integers(n)))
        b = build_hash(ks, int(rng.integers(n)))
        circuit = swap_circuit_accept(a.amplitudes, b.amplitudes)
        closed_form = swap_test(a, b).accept_probability
        assert abs(circuit - closed_form) <= 1e-10
    _pass(5, f"SWAP circuit statevector == (1+F^2)/2 on 20 instances (d={d})")


def test_c06_sampled_frequencies_within_binomial_bands(certified_n64):
    master = np.random.default_rng(0)
    instances = [
        builtin("EQ", 3),
        builtin("MOD", 6, m=3),
        builtin("PALINDROME", 6),
        builtin("MODBIN", 5, m=5),
        conjunction(2, 2),
    ]
    trials = 100_000
    for instance in instances:
        spec = build_spec(instance, certified_n64)
        arity = instance.function.arity
        while True:
            bits = tuple(int(b) for b in master.integers(0, 2, size=arity))
            if instance.function(bits) == 0:
                break
        sigma, gamma = bits[: spec.n1], bits[spec.n1 :]
        seed = int(master.integers(1 << 31))
        report = run_sampled(spec, sigma, gamma, seed=seed, trials=trials)
        p = report.exact_accept
        band = 3 * math.sqrt(trials * p * (1 - p))
        assert abs(report.sample_accepts - trials * p) <= band, instance.function.name
    _pass(6, "5 sampled 0-input runs stayed inside 3-sigma of exact_accept")


def test_c07_qubit_cost_beats_sending_the_input():
    expected = {8: 1248, 16: 2357, 32: 4575, 64: 9011}
    costs = {}
    for n, d in expected.items():
        assert required_keys(1 << n, 0.1) == d
        costs[n] = hash_qubits(d)  # single pair, no forwarded bits
    assert costs == {8: 12, 16: 13, 32: 14, 64: 15}
    for n in (32, 64):
        assert costs[n] < n
    for small, large in ((8, 16), (16, 32), (32, 64)):
        assert costs[large] - costs[small] <= 1

    # the accounting is also what a concrete (uncertified) key set reports
    rng = np.random.default_rng(1)
    for n in (16, 32, 64):
        modulus = 1 << n
        keys: set[int] = set()
        while len(keys) < expected[n]:
            keys.add(rand_below(rng, modulus))
        ks = KeySet(modulus=modulus, keys=tuple(sorted(keys)))
        cost = comm_cost(build_spec(builtin("EQ", n), ks))
        assert cost.total == costs[n]
        assert cost.classical_baseline == n
    _pass(7, "EQ costs 12/13/14/15 qubits for n=8/16/32/64 (vs n classical bits)")


def test_c08_referee_route_agrees_with_one_way(certified_n64):
    rng = np.random.default_rng(2026)
    checked = 0
    for instance in (builtin("EQ", 3), builtin("PALINDROME", 6)):
        spec = build_spec(instance, certified_n64)
        for _ in range(50):
            bits = tuple(int(b) for b in rng.integers(0, 2, size=instance.function.arity))
            sigma, gamma = bits[: spec.n1], bits[spec.n1 :]
            gap = abs(
                run_smp(spec, sigma, gamma).exact_accept
                - run_exact(spec, sigma, gamma).exact_accept
            )
            assert gap <= 1e-12
            checked += 1
    assert checked == 100
    _pass(8, "SMP and one-way acceptance agree to 1e-12 on 100 random inputs")


def test_c09_two_polynomial_conjunction(certified_n64):
    spec = build_spec(conjunction(3, 3), certified_n64)
    assert spec.l == 2
    prof = error_profile(spec)  # raises if any 1-input is not accepted surely
    bound = 0.5 * (1 + 0.3**2)
    assert prof.worst_false_accept <= bound + 1e-9
    cost = comm_cost(spec)
    assert cost.total == spec.l * hash_qubits(certified_n64)
    _pass(
        9,
        f"conjunction: one-sided, worst {prof.worst_false_accept:.4f} <= {bound}, "
        f"cost {cost.total} = 2 hashes",
    )


def test_c10_seeded_commands_are_canonically_deterministic(tmp_path, capsys):
    # key search: byte-identical files
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(
            ["search-keys", "--log2-n", "10", "--delta", "0.3", "--seed", "7",
             "--out", str(out)]
        ) == 0
    assert a.read_bytes() == b.read_bytes()
    capsys.readouterr()

    # sampled run: identical reports once the wall clock is dropped
    config = tmp_path / "run.json"
    config.write_text(
        json.dumps(
            {
                "function": {"name": "EQ", "n": 3},
                "delta": 0.3,
                "keys": {"search": {"log2_n": 10, "seed": 7}},
                "mode": "sampled",
                "trials": 1000,
                "seed": 13,
                "input": {"alice": "101", "bob": "100"},
            }
        )
    )
    envelopes = []
    for _ in range(2):
        assert main(["run", "--config", str(config)]) == 0
        doc = json.loads(capsys.readouterr().out)
        doc.pop("wall_clock_s")
        envelopes.append(doc)
    assert envelopes[0] == envelopes[1]

    # profile: byte-identical CSV
    prof_config = tmp_path / "profile.json"
    prof_config.write_text(
        json.dumps(
            {
                "function": {"name": "EQ", "n": 3},
                "delta": 0.3,
                "keys": {"search": {"log2_n": 10, "seed": 7}},
            }
        )
    )
    c, d = tmp_path / "c.csv", tmp_path / "d.csv"
    for out in (c, d):
        assert main(["profile", "--config", str(prof_config), "--out", str(out)]) == 0
    capsys.readouterr()
    assert c.read_bytes() == d.read_bytes()
    _pass(10, "search-keys, sampled run, and profile repeat bit-for-bit")
