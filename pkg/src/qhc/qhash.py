"""Amplitude-form quantum hashing over Z_N and collision-resistant key sets.

A key set K = {k_1, ..., k_d} over Z_N hashes a value v to the d-qubit-pair
superposition with amplitudes cos(2 pi k_i v / N)/sqrt(d) and
sin(2 pi k_i v / N)/sqrt(d).  Two hashes of values differing by D have real
fidelity

    bias(D) = (1/d) * sum_i cos(2 pi k_i D / N),

so delta-collision resistance is exactly: |bias(D)| < delta for every
nonzero D mod N.  Everything here reduces k*v mod N in exact integer
arithmetic before any float conversion; N may exceed 64 bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import GuardError, SearchError
from .util import rand_below

# Exhaustive difference sweeps refuse above this modulus (2M differences).
EXACT_SWEEP_GUARD = 1 << 21

# k*D stays within int64 for vectorized residue arithmetic below this N.
_VECTOR_SAFE_N = 1 << 31


@dataclass(frozen=True)
class Certification:
    """How (whether) a key set's bias bound was established."""

    mode: str = "none"  # "exact" | "monte-carlo" | "none"
    max_bias: float | None = None
    trials: int | None = None
    confidence: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "monte-carlo", "none"):
            raise ValueError(f"unknown certification mode {self.mode!r}")

    def to_json(self) -> dict:
        doc: dict = {"mode": self.mode}
        if self.max_bias is not None:
            doc["max_bias"] = self.max_bias
        if self.trials is not None:
            doc["trials"] = self.trials
        if self.confidence is not None:
            doc["confidence"] = self.confidence
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Certification":
        return cls(
            mode=doc.get("mode", "none"),
            max_bias=doc.get("max_bias"),
            trials=doc.get("trials"),
            confidence=doc.get("confidence"),
        )


@dataclass(frozen=True)
class KeySet:
    """d distinct keys in [0, N), optionally certified delta-resistant."""

    modulus: int
    keys: tuple[int, ...]
    delta: float | None = None
    certification: Certification = Certification()

    def __post_init__(self) -> None:
        n = self.modulus
        if n < 2:
            raise ValueError(f"modulus must be >= 2, got {n}")
        if not self.keys:
            raise ValueError("key set must be nonempty")
        if len(set(self.keys)) != len(self.keys):
            raise ValueError("duplicate keys (would silently skew the bias average)")
        for k in self.keys:
            if not 0 <= k < n:
                raise ValueError(f"key {k} outside [0, {n})")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError(f"delta out of (0,1): {self.delta}")

    @property
    def d(self) -> int:
        return len(self.keys)

    @property
    def certified(self) -> bool:
        return self.certification.mode == "exact" and self.delta is not None

    def to_json(self) -> dict:
        doc: dict = {
            "N": str(self.modulus),
            "keys": [str(k) for k in self.keys],
            "certification": self.certification.to_json(),
        }
        if self.delta is not None:
            doc["delta"] = self.delta
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "KeySet":
        return cls(
            modulus=int(doc["N"]),
            keys=tuple(int(k) for k in doc["keys"]),
            delta=doc.get("delta"),
            certification=Certification.from_json(doc.get("certification", {})),
        )


def _residues(keys: Sequence[int], value: int, modulus: int) -> np.ndarray:
    """(k * value) mod N per key, exact, returned as float ratios in [0, 1)."""
    if modulus <= _VECTOR_SAFE_N:
        arr = np.asarray(keys, dtype=np.int64)
        return ((arr * value) % modulus) / modulus
    return np.array([(k * value) % modulus for k in keys], dtype=object).astype(
        np.float64
    ) / float(modulus)


def bias(key_set: KeySet, difference: int) -> float:
    """Fidelity between hashes of values differing by ``difference``.

    The residue (k * difference) mod N is computed in exact integer
    arithmetic; only the final ratio is converted to double.
    """
    ratios = _residues(key_set.keys, difference % key_set.modulus, key_set.modulus)
    return float(np.cos(2.0 * np.pi * ratios).mean())


@dataclass(frozen=True)
class HashState:
    """The hash of one value: interleaved (cos, sin) amplitude pairs."""

    key_set: KeySet
    value: int
    amplitudes: np.ndarray = field(compare=False, repr=False)

    @property
    def dimension(self) -> int:
        return 2 * self.key_set.d


def build_hash(key_set: KeySet, value: int) -> HashState:
    """Hash a value already reduced into [0, N).

    Callers must reduce: accepting out-of-range values here would hide a
    double reduction and make transcripts ambiguous.
    """
    if not 0 <= value < key_set.modulus:
        raise ValueError(f"value {value} not reduced into [0, {key_set.modulus})")
    ratios = _residues(key_set.keys, value, key_set.modulus)
    angles = 2.0 * np.pi * ratios
    amp = np.empty(2 * key_set.d)
    amp[0::2] = np.cos(angles)
    amp[1::2] = np.sin(angles)
    amp /= math.sqrt(key_set.d)
    amp.flags.writeable = False
    return HashState(key_set=key_set, value=value, amplitudes=amp)


def _require_same_keys(a: HashState, b: HashState) -> None:
    if a.key_set.modulus != b.key_set.modulus or a.key_set.keys != b.key_set.keys:
        raise ValueError("hash states use different key sets")


def inner_product(a: HashState, b: HashState) -> float:
    """<a|b> via the cosine average at the exact difference (u - v) mod N."""
    _require_same_keys(a, b)
    return bias(a.key_set, (a.value - b.value) % a.key_set.modulus)


def amplitude_overlap(a: HashState, b: HashState) -> float:
    """<a|b> as a literal dot product of the stored amplitude vectors.

    Numerically independent route used to cross-check :func:`inner_product`
    and to drive the referee in the SMP topology.
    """
    _require_same_keys(a, b)
    return float(np.dot(a.amplitudes, b.amplitudes))


@dataclass(frozen=True)
class SwapOutcome:
    fidelity: float
    accept_probability: float

    def __post_init__(self) -> None:
        if not -1.0 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity {self.fidelity} outside [-1, 1]")


def swap_test(a: HashState, b: HashState) -> SwapOutcome:
    """Analytic swap-test statistics: accept with probability (1 + F^2)/2."""
    f = inner_product(a, b)
    return SwapOutcome(fidelity=f, accept_probability=0.5 * (1.0 + f * f))


def sample_swap(
    outcome: SwapOutcome, rng: np.random.Generator | int | None, trials: int
) -> int:
    """Count acceptances over ``trials`` seeded Bernoulli draws."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gen = np.random.default_rng(rng)
    return int((gen.random(trials) < outcome.accept_probability).sum())


def hash_qubits(key_set: KeySet | int) -> int:
    """Qubits to transmit one hash: index register plus the rotated qubit.

    Accepts a key set or a bare key count d, so planned costs can be
    accounted before any concrete set is drawn."""
    d = key_set if isinstance(key_set, int) else key_set.d
    if d < 1:
        raise ValueError("need at least one key")
    return (d - 1).bit_length() + 1


@dataclass(frozen=True)
class ResistanceReport:
    certified: bool
    mode: str  # "exact" | "monte-carlo"
    delta: float
    max_bias: float
    worst_difference: int
    key_set: KeySet
    trials: int | None = None
    confidence: float | None = None


def _exact_bias_sweep(key_set: KeySet) -> tuple[float, int]:
    """(max |bias|, smallest attaining difference) over all nonzero D.

    One FFT over the key indicator vector gives sum_k cos(2 pi k D / N) as
    the real spectrum; bias(N - D) = bias(D) folds the sweep to D <= N/2,
    and the smaller mirror image is always the reported difference.
    """
    n = key_set.modulus
    x = np.zeros(n)
    x[np.fromiter(key_set.keys, dtype=np.int64, count=key_set.d)] = 1.0
    spectrum = np.fft.rfft(x).real[1:] / key_set.d
    magnitudes = np.abs(spectrum)
    worst = int(np.argmax(magnitudes))
    return float(magnitudes[worst]), worst + 1


def verify_resistance(
    key_set: KeySet,
    delta: float,
    mode: str = "exact",
    trials: int = 2000,
    rng: np.random.Generator | int | None = None,
) -> ResistanceReport:
    """Certify or refute |bias(D)| < delta over nonzero differences.

    Exact mode sweeps every D in [1, N) and is refused (with a pointer at
    Monte Carlo mode) above N = 2^21.  Monte Carlo mode samples ``trials``
    uniform nonzero differences; each sampled bias is still computed
    exactly, so a refutation is genuine, while a pass certifies only with
    ``confidence`` = the chance that a single worst difference would have
    been drawn.  The returned report carries the key set re-annotated with
    the verdict.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta out of (0,1): {delta}")
    n = key_set.modulus

    if mode == "exact":
        if n > EXACT_SWEEP_GUARD:
            raise GuardError(
                f"exact sweep over {n - 1} differences exceeds the N <= 2^21 "
                f"guard; use mode='monte-carlo'"
            )
        max_bias, worst = _exact_bias_sweep(key_set)
        meta: dict = {}
    elif mode == "monte-carlo":
        gen = np.random.default_rng(rng)
        max_bias, worst = 0.0, 1
        remaining = trials
        while remaining > 0:
            chunk = min(remaining, 4096)
            remaining -= chunk
            diffs = sorted(rand_below(gen, n - 1) + 1 for _ in range(chunk))
            for dd in diffs:
                b = abs(bias(key_set, dd))
                if b > max_bias:
                    max_bias, worst = b, dd
        confidence = -math.expm1(trials * math.log1p(-1.0 / (n - 1)))
        meta = {"trials": trials, "confidence": confidence}
    else:
        raise ValueError(f"unknown mode {mode!r}")

    certified = max_bias < delta
    if certified:
        annotated = replace(
            key_set,
            delta=delta,
            certification=Certification(mode=mode, max_bias=max_bias, **meta),
        )
    else:
        annotated = replace(key_set, delta=None, certification=Certification())
    return ResistanceReport(
        certified=certified,
        mode=mode,
        delta=delta,
        max_bias=max_bias,
        worst_difference=worst,
        key_set=annotated,
        trials=meta.get("trials"),
        confidence=meta.get("confidence"),
    )


def required_keys(modulus: int, delta: float) -> int:
    """Hoeffding sizing: d = ceil((2/delta^2) * ln(2N)) random keys suffice
    for delta-resistance with positive probability (union bound over the
    N - 1 differences).  Pure formula; for d > N the searcher falls back to
    the full residue ring, whose bias vanishes identically."""
    if not 0 < delta < 1:
        raise ValueError(f"delta out of (0,1): {delta}")
    return math.ceil((2.0 / (delta * delta)) * math.log(2 * modulus))


def _draw_keys(gen: np.random.Generator, modulus: int, d: int) -> tuple[int, ...]:
    if d == modulus:
        return tuple(range(modulus))
    if modulus <= 1 << 24:
        picked = gen.choice(modulus, size=d, replace=False)
        return tuple(sorted(int(k) for k in picked))
    chosen: set[int] = set()
    while len(chosen) < d:
        chosen.add(rand_below(gen, modulus))
    return tuple(sorted(chosen))


def search_key_set(
    modulus: int,
    delta: float,
    seed: int | np.random.SeedSequence,
    max_attempts: int = 10,
    mc_trials: int = 2000,
) -> KeySet:
    """Draw-and-verify search for a delta-resistant key set over Z_N.

    Each attempt draws d = required_keys(N, delta) distinct keys from its
    own spawned seed stream and verifies them — exactly for N <= 2^21,
    by Monte Carlo above.  Returns the first certified set; raises
    :class:`SearchError` with the best bias seen if every attempt is
    refuted.  Bit-reproducible for a fixed seed.
    """
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    d = min(required_keys(modulus, delta), modulus)
    mode = "exact" if modulus <= EXACT_SWEEP_GUARD else "monte-carlo"
    best: float | None = None
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    for child in root.spawn(max_attempts):
        gen = np.random.default_rng(child)
        candidate = KeySet(modulus=modulus, keys=_draw_keys(gen, modulus, d))
        report = verify_resistance(candidate, delta, mode=mode, trials=mc_trials, rng=gen)
        if report.certified:
            return report.key_set
        if best is None or report.max_bias < best:
            best = report.max_bias
    raise SearchError(
        f"no delta={delta} key set over N={modulus} in {max_attempts} attempts "
        f"(best max bias seen: {best:.6f})",
        attempts=max_attempts,
        best_max_bias=best,
    )
