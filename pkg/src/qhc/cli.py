"""Config-driven command-line front end.

Subcommands:

* ``verify``      — exhaustively check a builtin (or file-supplied)
                    characteristic; exit 0 valid, 1 counterexample.
* ``search-keys`` — randomized search for a certified key set, JSON out.
* ``run``         — execute one protocol input (exact or sampled), JSON out.
* ``profile``     — full-grid error profile, CSV out (sigma,gamma,f,exact_accept).

Exit codes: 0 success; 1 mathematical counterexample or refuted bound;
2 resource-guard refusal; 3 malformed input.  Everything is deterministic
for fixed seeds except the ``wall_clock_s`` field, which is excluded from
the comparison canon.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .boolfn import (
    BooleanFunction,
    Characteristic,
    FunctionInstance,
    LinearPolynomial,
    builtin,
    conjunction,
    split_polynomial,
    verify_characteristic,
)
from .errors import CharacteristicError, ConfigError, GuardError, SearchError
from .protocol import ProtocolSpec, build_spec, error_profile, run_exact, run_sampled, run_smp
from .qhash import KeySet, search_key_set
from .util import parse_bits

_BUILTINS = ("EQ", "MOD", "MODBIN", "PALINDROME", "PERM")


class _Parser(argparse.ArgumentParser):
    """argparse's own exit code for bad flags is 2; our contract reserves
    2 for guard refusals, so flag errors are rerouted to the config path."""

    def error(self, message: str):
        raise ConfigError("argv", message)


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("QHC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _instance_from_polys(
    polys: Sequence[LinearPolynomial], n1: int | None = None
) -> FunctionInstance:
    """Treat a polynomial set as its own function: f = 1 iff all vanish."""
    arity = polys[0].arity
    fn = BooleanFunction(
        "POLY", arity, lambda bits: all(p.evaluate(bits) == 0 for p in polys)
    )
    char = Characteristic(function=fn, polynomials=tuple(polys))
    cut = arity // 2 if n1 is None else n1
    splits = tuple(split_polynomial(p, cut) for p in polys)
    return FunctionInstance(function=fn, characteristic=char, splits=splits)


def _load_polys(path: Path) -> list[LinearPolynomial]:
    doc = json.loads(path.read_text())
    docs = doc if isinstance(doc, list) else [doc]
    if not docs:
        raise ConfigError(str(path), "empty polynomial file")
    return [LinearPolynomial.from_json(d) for d in docs]


def _resolve_builtin(name: str, n: int | None, m: int | None) -> FunctionInstance:
    name = name.upper()
    if name == "CONJ":
        if n is None or n < 2:
            raise ConfigError("function.n", "CONJ needs n >= 2 total bits")
        return conjunction(n_a=n - n // 2, n_b=n // 2)
    if name not in _BUILTINS:
        raise ConfigError(
            "function.name", f"unknown builtin {name!r} (expected {', '.join(_BUILTINS)} or CONJ)"
        )
    if n is None:
        raise ConfigError("function.n", f"{name} needs --n")
    return builtin(name, n, m=m)


# ---------------------------------------------------------------- configs


@dataclass
class ExperimentConfig:
    raw: dict
    instance: FunctionInstance
    n1: int
    forwarded: tuple[int, ...]
    topology: str
    mode: str
    delta: float | None
    key_search: dict | None  # {"seed", "attempts", "modulus", "trials"}
    key_files: list[Path] | None
    trials: int
    seed: int | None
    input_bits: tuple[tuple[int, ...], tuple[int, ...]] | None
    out: str | None


def parse_config(doc: dict, base_dir: Path) -> ExperimentConfig:
    """Validate an experiment document; the first problem wins and is
    reported with its JSON path."""
    if not isinstance(doc, dict):
        raise ConfigError("$", "config must be a JSON object")

    fdoc = doc.get("function")
    if not isinstance(fdoc, dict):
        raise ConfigError("function", "missing function descriptor")
    if "poly" in fdoc or "poly_file" in fdoc:
        if "poly" in fdoc:
            polys = [LinearPolynomial.from_json(fdoc["poly"])]
        else:
            polys = _load_polys(base_dir / fdoc["poly_file"])
        instance = _instance_from_polys(polys)
    else:
        name = str(fdoc.get("name", "")).upper()
        if name == "CONJ":
            try:
                instance = conjunction(
                    n_a=int(fdoc["n_a"]),
                    n_b=int(fdoc["n_b"]),
                    m_a=int(fdoc.get("m_a", 3)),
                    m_b=int(fdoc.get("m_b", 4)),
                )
            except KeyError as e:
                raise ConfigError("function", f"CONJ needs n_a and n_b (missing {e})")
            except ValueError as e:
                raise ConfigError("function", str(e))
        elif name in _BUILTINS:
            if "n" not in fdoc:
                raise ConfigError("function.n", f"{name} needs n")
            m = int(fdoc["m"]) if "m" in fdoc else None
            try:
                instance = builtin(name, int(fdoc["n"]), m=m)
            except ValueError as e:
                raise ConfigError("function", str(e))
        else:
            raise ConfigError("function.name", f"unknown function {name!r}")

    arity = instance.function.arity
    sdoc = doc.get("split", {})
    if not isinstance(sdoc, dict):
        raise ConfigError("split", "split must be an object")
    n1 = int(sdoc.get("n1", instance.n1))
    if not 0 <= n1 <= arity:
        raise ConfigError("split.n1", f"cut {n1} outside 0..{arity}")
    forwarded = tuple(int(i) for i in sdoc.get("forwarded", ()))
    for i in forwarded:
        if not 1 <= i <= n1:
            raise ConfigError("split.forwarded", f"index {i} outside Alice's 1..{n1}")
    if len(set(forwarded)) != len(forwarded):
        raise ConfigError("split.forwarded", "indices must be distinct")

    delta = doc.get("delta")
    if delta is not None:
        delta = float(delta)
        if not 0.0 < delta < 1.0:
            raise ConfigError("delta", f"delta out of (0,1): {delta}")

    kdoc = doc.get("keys")
    if not isinstance(kdoc, dict) or not (
        ("search" in kdoc) ^ ("file" in kdoc or "files" in kdoc)
    ):
        raise ConfigError("keys", "need exactly one key source: search, file, or files")
    key_search = None
    key_files = None
    if "search" in kdoc:
        s = kdoc["search"]
        if delta is None:
            raise ConfigError("delta", "key search needs a delta in (0,1)")
        modulus = instance.characteristic.modulus
        if "log2_n" in s:
            modulus = 1 << int(s["log2_n"])
        elif "N" in s:
            modulus = int(s["N"])
        if modulus < instance.characteristic.modulus:
            raise ConfigError(
                "keys.search",
                f"key modulus {modulus} smaller than polynomial modulus "
                f"{instance.characteristic.modulus}",
            )
        key_search = {
            "seed": int(s.get("seed", 0)),
            "attempts": int(s.get("attempts", 10)),
            "modulus": modulus,
            "trials": int(s.get("trials", 2000)),
        }
    else:
        names = kdoc["files"] if "files" in kdoc else [kdoc["file"]]
        key_files = [base_dir / str(p) for p in names]
        if len(key_files) not in (1, len(instance.characteristic.polynomials)):
            raise ConfigError(
                "keys.files",
                f"need 1 or {len(instance.characteristic.polynomials)} key files, "
                f"got {len(key_files)}",
            )

    topology = doc.get("topology", "one-way")
    if topology not in ("one-way", "smp"):
        raise ConfigError("topology", f"unknown topology {topology!r}")
    mode = doc.get("mode", "exact")
    if mode not in ("exact", "sampled", "profile"):
        raise ConfigError("mode", f"unknown mode {mode!r}")

    input_bits = None
    idoc = doc.get("input")
    if idoc is not None:
        if not isinstance(idoc, dict) or "alice" not in idoc or "bob" not in idoc:
            raise ConfigError("input", "input needs alice and bob bit strings")
        try:
            input_bits = (parse_bits(str(idoc["alice"])), parse_bits(str(idoc["bob"])))
        except ValueError as e:
            raise ConfigError("input", str(e))

    return ExperimentConfig(
        raw=doc,
        instance=instance,
        n1=n1,
        forwarded=forwarded,
        topology=topology,
        mode=mode,
        delta=delta,
        key_search=key_search,
        key_files=key_files,
        trials=int(doc.get("trials", 1)),
        seed=int(doc["seed"]) if "seed" in doc else None,
        input_bits=input_bits,
        out=doc.get("out"),
    )


def _resolve_key_sets(config: ExperimentConfig) -> list[KeySet]:
    pairs = len(config.instance.characteristic.polynomials)
    if config.key_files is not None:
        sets = [KeySet.from_json(json.loads(p.read_text())) for p in config.key_files]
        if len(sets) == 1:
            sets = sets * pairs
        return sets
    assert config.key_search is not None
    s = config.key_search
    children = np.random.SeedSequence(s["seed"]).spawn(pairs)
    return [
        search_key_set(
            s["modulus"],
            config.delta,
            seed=child,
            max_attempts=s["attempts"],
            mc_trials=s["trials"],
        )
        for child in children
    ]


def _build_spec(config: ExperimentConfig) -> ProtocolSpec:
    return build_spec(
        config.instance,
        _resolve_key_sets(config),
        topology=config.topology,
        n1=config.n1,
        forwarded=config.forwarded,
    )


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        print(text)


# ------------------------------------------------------------ subcommands


def cmd_verify(args: argparse.Namespace) -> int:
    instance = _resolve_builtin(args.function, args.n, args.m)
    if args.poly:
        polys = _load_polys(Path(args.poly))
        char = Characteristic(
            function=instance.function, polynomials=tuple(polys)
        )
    else:
        char = instance.characteristic
    report = verify_characteristic(char, threads=_resolve_threads(args.threads))
    name = instance.function.name
    if report.valid:
        print(
            f"valid: {name} characteristic over Z_{char.modulus} "
            f"({len(char)} polynomial(s), {report.checked} assignments)"
        )
        return 0
    bits = "".join(str(b) for b in report.counterexample)
    print(f"counterexample: {name} input={bits} — {report.reason}")
    return 1


def cmd_search_keys(args: argparse.Namespace) -> int:
    if args.log2_n < 1 or args.log2_n > 256:
        raise ConfigError("log2-n", f"log2-n out of 1..256: {args.log2_n}")
    key_set = search_key_set(
        1 << args.log2_n,
        args.delta,
        seed=args.seed,
        max_attempts=args.attempts,
        mc_trials=args.trials,
    )
    cert = key_set.certification
    _write_or_print(json.dumps(key_set.to_json(), indent=2) + "\n", args.out)
    target = args.out or "stdout"
    print(
        f"certified: N=2^{args.log2_n} d={key_set.d} delta={key_set.delta} "
        f"max_bias={cert.max_bias:.6f} mode={cert.mode} -> {target}"
    )
    return 0


def _load_run_config(args: argparse.Namespace) -> ExperimentConfig:
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"not valid JSON: {e}")
    config = parse_config(doc, path.parent)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "out", None) is not None:
        config.out = args.out
    return config


def cmd_run(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    config = _load_run_config(args)
    if config.mode == "profile":
        raise ConfigError("mode", "mode 'profile' belongs to the profile subcommand")
    if config.input_bits is None:
        raise ConfigError("input", "run needs an input")
    spec = _build_spec(config)
    sigma, gamma = config.input_bits
    if config.mode == "sampled":
        report = run_sampled(
            spec, sigma, gamma, seed=config.seed or 0, trials=config.trials
        )
    elif config.topology == "smp":
        report = run_smp(spec, sigma, gamma)
    else:
        report = run_exact(spec, sigma, gamma)
    envelope = {
        "tool": "qhc",
        "version": __version__,
        "config": config.raw,
        "result": report.to_json(spec.summary()),
        "wall_clock_s": round(time.perf_counter() - start, 6),
    }
    _write_or_print(json.dumps(envelope, indent=2) + "\n", config.out)
    if config.out:
        print(
            f"f={report.f_value} exact_accept={report.exact_accept!r} -> {config.out}"
        )
    return 0


def cmd_profile(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    spec = _build_spec(config)
    profile = error_profile(spec, threads=_resolve_threads(args.threads))
    lines = ["sigma,gamma,f,exact_accept"]
    lines += [f"{s},{g},{f},{a!r}" for s, g, f, a in profile.iter_rows()]
    Path(args.out).write_text("\n".join(lines) + "\n")
    total = (1 << profile.n1) * (1 << profile.n2)
    print(f"profile: {profile.function_name} {total} inputs -> {args.out}")
    if profile.attaining is None:
        print("worst false accept: none (no 0-inputs)")
    else:
        sig, gam = profile.attaining
        bits = "".join(str(b) for b in sig) + "," + "".join(str(b) for b in gam)
        print(f"worst false accept: {profile.worst_false_accept!r} at {bits}")
    if profile.certified_bound is not None:
        delta = spec.certified_delta
        print(
            f"certified bound: (1+delta^2)/2 = {profile.certified_bound!r} "
            f"(delta={delta}); linear comparison (1+delta)/2 = {0.5 * (1 + delta)!r}"
        )
    else:
        print("bounds unproven: key sets lack exact certification")
    return 0


# ------------------------------------------------------------------ main


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qhc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qhc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="brute-force check a characteristic")
    p.add_argument("--function", required=True, help="EQ | MOD | MODBIN | PALINDROME | PERM | CONJ")
    p.add_argument("--n", type=int, help="size parameter (per side for EQ)")
    p.add_argument("--m", type=int, help="modulus for MOD / MODBIN")
    p.add_argument("--poly", help="JSON polynomial (or list) to check instead of the builtin one")
    p.add_argument("--threads", type=int, help="worker threads (env QHC_THREADS)")
    p.set_defaults(runner=cmd_verify)

    p = sub.add_parser("search-keys", help="find a certified collision-resistant key set")
    p.add_argument("--log2-n", type=int, required=True, dest="log2_n")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--attempts", type=int, default=10)
    p.add_argument("--trials", type=int, default=2000, help="Monte Carlo differences when N > 2^21")
    p.add_argument("--out", help="key set JSON destination (default stdout)")
    p.set_defaults(runner=cmd_search_keys)

    p = sub.add_parser("run", help="execute one protocol input from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override the config's sampling seed")
    p.add_argument("--out", help="report JSON destination (default stdout)")
    p.add_argument("--threads", type=int, help="worker threads (env QHC_THREADS)")
    p.set_defaults(runner=cmd_run)

    p = sub.add_parser("profile", help="full-grid error profile to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="CSV destination")
    p.add_argument("--threads", type=int, help="worker threads (env QHC_THREADS)")
    p.set_defaults(runner=cmd_profile)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.runner(args)
    except GuardError as e:
        print(f"guard: {e}", file=sys.stderr)
        return 2
    except SearchError as e:
        print(f"search failed: {e}", file=sys.stderr)
        return 1
    except CharacteristicError as e:
        print(f"counterexample: {e}", file=sys.stderr)
        return 1
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
