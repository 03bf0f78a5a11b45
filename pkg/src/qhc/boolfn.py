"""Boolean functions and their linear characteristic polynomials over Z_m.

A *characteristic polynomial* of f: {0,1}^n -> {0,1} is a polynomial g over
some residue ring Z_m with g(sigma) = 0 exactly when f(sigma) = 1.  A
*characteristic* is a nonempty set of such polynomials, each individually
vanishing exactly on f^{-1}(1); they are tested conjunctively by the
protocols in :mod:`qhc.protocol`.

Only linear polynomials are represented: every builtin family here is
linear, and the protocol layer evaluates polynomials pointwise, so degree
> 1 would be unexercised machinery.

All arithmetic is exact over Python integers; moduli routinely exceed 64
bits (PERM_n uses (n+1)^(2n)).  numpy fast paths are used only when the
modulus provably fits.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GuardError
from .util import assignments, bit_matrix, bits_to_index, index_to_bits

# Brute-force enumeration refuses above this many variables (16M rows).
ENUM_GUARD_BITS = 24

# numpy int64 is safe while sums of two canonical residues cannot overflow.
_INT64_SAFE_MODULUS = 1 << 62


@dataclass(frozen=True)
class LinearPolynomial:
    """constant + sum(coeffs[i] * x_{i+1}) over Z_modulus.

    Stored residues are always canonical (reduced into [0, m)); negative
    coefficients from the usual textbook presentations are reduced on
    construction so polynomial equality is plain field equality.
    """

    modulus: int
    coeffs: tuple[int, ...]
    constant: int = 0

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")
        object.__setattr__(self, "coeffs", tuple(c % self.modulus for c in self.coeffs))
        object.__setattr__(self, "constant", self.constant % self.modulus)

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    def evaluate(self, bits: Sequence[int]) -> int:
        if len(bits) != len(self.coeffs):
            raise ValueError(
                f"polynomial has {len(self.coeffs)} variables, got {len(bits)} bits"
            )
        total = self.constant
        for c, b in zip(self.coeffs, bits):
            if b:
                total += c
        return total % self.modulus

    def table(self) -> np.ndarray | list[int]:
        """Values on all 2^n assignments in index order (x_1 is the MSB).

        Returns an int64 array when the modulus fits, else a Python list
        of exact ints.  Built by doubling: appending variable x_i offsets
        the existing block by coeffs[i-1].
        """
        n = self.arity
        if n > ENUM_GUARD_BITS:
            raise GuardError(
                f"refusing to tabulate {n} variables (guard: {ENUM_GUARD_BITS})"
            )
        m = self.modulus
        if m <= _INT64_SAFE_MODULUS:
            out = np.empty(1 << n, dtype=np.int64)
            out[0] = self.constant
            size = 1
            for c in reversed(self.coeffs):
                np.mod(out[:size] + c, m, out=out[size : 2 * size])
                size *= 2
            return out
        out_list: list[int] = [self.constant]
        for c in reversed(self.coeffs):
            out_list += [(v + c) % m for v in out_list]
        return out_list

    def to_json(self) -> dict:
        return {
            "modulus": str(self.modulus),
            "constant": str(self.constant),
            "coeffs": [str(c) for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LinearPolynomial":
        return cls(
            modulus=int(doc["modulus"]),
            coeffs=tuple(int(c) for c in doc["coeffs"]),
            constant=int(doc.get("constant", "0")),
        )


@dataclass(frozen=True)
class BooleanFunction:
    """A total function {0,1}^n -> {0,1} with a printable name."""

    name: str
    arity: int
    rule: Callable[[Sequence[int]], int] = field(compare=False, repr=False)

    def __call__(self, bits: Sequence[int]) -> int:
        if len(bits) != self.arity:
            raise ValueError(f"{self.name} takes {self.arity} bits, got {len(bits)}")
        return 1 if self.rule(bits) else 0

    def truth_table(self) -> np.ndarray:
        """uint8 vector of length 2^n in index order."""
        if self.arity > ENUM_GUARD_BITS:
            raise GuardError(
                f"refusing to tabulate {self.arity} variables (guard: {ENUM_GUARD_BITS})"
            )
        return np.fromiter(
            (1 if self.rule(a) else 0 for a in assignments(self.arity)),
            dtype=np.uint8,
            count=1 << self.arity,
        )

    @classmethod
    def from_table(cls, name: str, arity: int, table: Sequence[int]) -> "BooleanFunction":
        if len(table) != 1 << arity:
            raise ValueError(f"table length {len(table)} != 2^{arity}")
        frozen = tuple(1 if v else 0 for v in table)
        return cls(name, arity, lambda bits: frozen[bits_to_index(bits)])


@dataclass(frozen=True)
class Characteristic:
    """Polynomials over one modulus, each vanishing exactly on f^{-1}(1)."""

    function: BooleanFunction
    polynomials: tuple[LinearPolynomial, ...]

    def __post_init__(self) -> None:
        if not self.polynomials:
            raise ValueError("characteristic needs at least one polynomial")
        m = self.polynomials[0].modulus
        for p in self.polynomials:
            if p.modulus != m:
                raise ValueError("characteristic polynomials must share one modulus")
            if p.arity != self.function.arity:
                raise ValueError(
                    f"polynomial arity {p.arity} != function arity {self.function.arity}"
                )

    @property
    def modulus(self) -> int:
        return self.polynomials[0].modulus

    def __len__(self) -> int:
        return len(self.polynomials)

    def to_json(self) -> list[dict]:
        return [p.to_json() for p in self.polynomials]


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    checked: int
    counterexample: tuple[int, ...] | None = None
    polynomial_index: int | None = None
    reason: str = ""


def verify_characteristic(c: Characteristic, threads: int = 1) -> VerificationReport:
    """Exhaustively check g(sigma) = 0 <=> f(sigma) = 1 for every polynomial.

    Enumerates all 2^n assignments (guarded at n <= 24) and returns either
    a valid verdict or the first violating assignment — smallest assignment
    index, ties broken by polynomial order.  Deterministic regardless of
    thread count.
    """
    n = c.function.arity
    if n > ENUM_GUARD_BITS:
        raise GuardError(
            f"verify_characteristic enumerates 2^{n} assignments; guard is "
            f"n <= {ENUM_GUARD_BITS} (no silent sampling — reduce n)"
        )
    truth = c.function.truth_table()
    want_zero = truth == 1

    def first_violation(poly: LinearPolynomial) -> int | None:
        values = poly.table()
        if isinstance(values, np.ndarray):
            is_zero = values == 0
        else:
            is_zero = np.fromiter((v == 0 for v in values), dtype=bool, count=len(values))
        bad = np.nonzero(is_zero != want_zero)[0]
        return int(bad[0]) if bad.size else None

    if threads > 1 and len(c.polynomials) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            violations = list(pool.map(first_violation, c.polynomials))
    else:
        violations = [first_violation(p) for p in c.polynomials]

    hits = [(idx, j) for j, idx in enumerate(violations) if idx is not None]
    if not hits:
        return VerificationReport(valid=True, checked=1 << n)
    idx, j = min(hits)
    sigma = index_to_bits(idx, n)
    value = c.polynomials[j].evaluate(sigma)
    f_value = int(truth[idx])
    if f_value == 1:
        reason = f"polynomial {j} evaluates to {value} != 0 on a 1-input"
    else:
        reason = f"polynomial {j} vanishes on a 0-input"
    return VerificationReport(
        valid=False,
        checked=1 << n,
        counterexample=sigma,
        polynomial_index=j,
        reason=reason,
    )


@dataclass(frozen=True)
class Decomposition:
    """A polynomial split g(sigma, gamma) = g1(sigma) + g2(gamma, forwarded).

    ``g1`` ranges over Alice's n1 variables.  ``g2`` ranges over Bob's n2
    variables followed by k forwarded Alice variables (1-based indices into
    Alice's block, listed in ``forwarded``).  k = 0 is the pure split; any
    linear polynomial splits cleanly at any cut, so forwarding is only ever
    a choice here, never a necessity.
    """

    g1: LinearPolynomial
    g2: LinearPolynomial
    forwarded: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.g1.modulus != self.g2.modulus:
            raise ValueError("decomposition halves must share one modulus")
        k = len(self.forwarded)
        if len(set(self.forwarded)) != k:
            raise ValueError("forwarded indices must be distinct")
        for i in self.forwarded:
            if not 1 <= i <= self.g1.arity:
                raise ValueError(f"forwarded index {i} outside Alice's 1..{self.g1.arity}")
        if self.g2.arity < k:
            raise ValueError("g2 must cover the forwarded variables")

    @property
    def modulus(self) -> int:
        return self.g1.modulus

    @property
    def n1(self) -> int:
        return self.g1.arity

    @property
    def n2(self) -> int:
        return self.g2.arity - len(self.forwarded)

    @property
    def k(self) -> int:
        return len(self.forwarded)

    def bob_argument(self, sigma: Sequence[int], gamma: Sequence[int]) -> tuple[int, ...]:
        """Bob's evaluation point: his own bits, then the forwarded ones."""
        return tuple(gamma) + tuple(sigma[i - 1] for i in self.forwarded)

    def eval_joint(self, sigma: Sequence[int], gamma: Sequence[int]) -> int:
        u = self.g1.evaluate(sigma)
        r = self.g2.evaluate(self.bob_argument(sigma, gamma))
        return (u + r) % self.modulus

    def recombined(self) -> LinearPolynomial:
        """The joint polynomial over x_1..x_{n1}, y_1..y_{n2}."""
        m = self.modulus
        coeffs = list(self.g1.coeffs) + list(self.g2.coeffs[: self.n2])
        for pos, i in enumerate(self.forwarded):
            coeffs[i - 1] = (coeffs[i - 1] + self.g2.coeffs[self.n2 + pos]) % m
        return LinearPolynomial(
            modulus=m,
            coeffs=tuple(coeffs),
            constant=(self.g1.constant + self.g2.constant) % m,
        )


def split_polynomial(
    poly: LinearPolynomial, n1: int, forwarded: Sequence[int] = ()
) -> Decomposition:
    """Split a joint polynomial at position n1, forwarding chosen Alice bits.

    Coefficients of forwarded variables move into g2 (appended after Bob's),
    so g1(sigma) + g2(gamma, forwarded bits) = poly(sigma gamma) identically.
    The joint constant travels with g2.
    """
    if not 0 <= n1 <= poly.arity:
        raise ValueError(f"cut {n1} outside 0..{poly.arity}")
    fwd = tuple(forwarded)
    for i in fwd:
        if not 1 <= i <= n1:
            raise ValueError(f"forwarded index {i} outside Alice's 1..{n1}")
    m = poly.modulus
    alice = [poly.coeffs[i] for i in range(n1)]
    for i in fwd:
        alice[i - 1] = 0
    g1 = LinearPolynomial(modulus=m, coeffs=tuple(alice), constant=0)
    g2 = LinearPolynomial(
        modulus=m,
        coeffs=tuple(poly.coeffs[n1:]) + tuple(poly.coeffs[i - 1] for i in fwd),
        constant=poly.constant,
    )
    return Decomposition(g1=g1, g2=g2, forwarded=fwd)


@dataclass(frozen=True)
class FunctionInstance:
    """A function bundled with a verified-by-construction characteristic
    and its natural Alice/Bob split (one Decomposition per polynomial,
    all sharing the same cut)."""

    function: BooleanFunction
    characteristic: Characteristic
    splits: tuple[Decomposition, ...]

    @property
    def n1(self) -> int:
        return self.splits[0].n1

    @property
    def n2(self) -> int:
        return self.splits[0].n2


def _bit_value(bits: Sequence[int]) -> int:
    """Numeric value of a bit block with x_1 as the least significant bit."""
    return sum(b << i for i, b in enumerate(bits))


def _make_instance(
    function: BooleanFunction,
    polys: Sequence[LinearPolynomial],
    n1: int,
) -> FunctionInstance:
    characteristic = Characteristic(function=function, polynomials=tuple(polys))
    splits = tuple(split_polynomial(p, n1) for p in polys)
    return FunctionInstance(function=function, characteristic=characteristic, splits=splits)


def builtin(name: str, n: int, m: int | None = None, n1: int | None = None) -> FunctionInstance:
    """Construct one of the five builtin function families.

    EQ(n): equality of two n-bit blocks; g = sum x_i 2^(i-1) - sum y_i 2^(i-1)
        over Z_(2^n); natural split at the half (n1 = n).
    MOD(n, m): number of ones divisible by m; g = sum x_i over Z_m.
    MODBIN(n, m): the input read as a binary number (x_1 least significant)
        divisible by m; g = sum x_i 2^(i-1) over Z_m.
    PALINDROME(n): input equal to its reverse; g over Z_(2^(n//2)) compares
        the two halves (for odd n the middle variable's coefficient reduces
        to 0 and drops out).
    PERM(n): the n x n 0/1 matrix (row-major variables) is a permutation
        matrix; g encodes all row and column sums as base-(n+1) digits over
        Z_((n+1)^(2n)) — digit sums never carry, so g = 0 exactly when every
        row and column sum is 1.

    ``n1`` overrides the natural Alice/Bob cut; the polynomials are plain
    sums, so any cut splits cleanly.
    """
    name = name.upper()
    if name == "EQ":
        if m is not None:
            raise ValueError("EQ's modulus is fixed at 2^n")
        if n < 1:
            raise ValueError("EQ needs n >= 1 bits per side")
        mod = 1 << n
        coeffs = tuple(1 << i for i in range(n)) + tuple(-(1 << i) for i in range(n))
        poly = LinearPolynomial(modulus=mod, coeffs=coeffs)
        fn = BooleanFunction(
            f"EQ_{n}", 2 * n, lambda bits: tuple(bits[:n]) == tuple(bits[n:])
        )
        return _make_instance(fn, [poly], n if n1 is None else n1)

    if name == "MOD":
        if m is None or m < 2:
            raise ValueError("MOD needs a modulus m >= 2")
        if n < 1:
            raise ValueError("MOD needs n >= 1")
        poly = LinearPolynomial(modulus=m, coeffs=(1,) * n)
        fn = BooleanFunction(f"MOD_{m}", n, lambda bits: sum(bits) % m == 0)
        return _make_instance(fn, [poly], n // 2 if n1 is None else n1)

    if name == "MODBIN":
        if m is None or m < 2:
            raise ValueError("MODBIN needs a modulus m >= 2")
        if n < 1:
            raise ValueError("MODBIN needs n >= 1")
        poly = LinearPolynomial(modulus=m, coeffs=tuple((1 << i) % m for i in range(n)))
        fn = BooleanFunction(f"MODBIN_{m}", n, lambda bits: _bit_value(bits) % m == 0)
        return _make_instance(fn, [poly], n // 2 if n1 is None else n1)

    if name == "PALINDROME":
        if m is not None:
            raise ValueError("PALINDROME's modulus is fixed at 2^(n//2)")
        if n < 2:
            raise ValueError("PALINDROME needs n >= 2")
        mod = 1 << (n // 2)
        coeffs = [0] * n
        for i in range(1, n // 2 + 1):
            coeffs[i - 1] += 1 << (i - 1)
        for i in range((n + 1) // 2, n + 1):
            coeffs[i - 1] -= 1 << (n - i)
        poly = LinearPolynomial(modulus=mod, coeffs=tuple(coeffs))
        fn = BooleanFunction(
            f"PALINDROME_{n}",
            n,
            lambda bits: all(bits[i] == bits[n - 1 - i] for i in range(n // 2)),
        )
        return _make_instance(fn, [poly], (n + 1) // 2 if n1 is None else n1)

    if name == "PERM":
        if m is not None:
            raise ValueError("PERM's modulus is fixed at (n+1)^(2n)")
        if n < 1:
            raise ValueError("PERM needs matrix dimension n >= 1")
        base = n + 1
        mod = base ** (2 * n)
        coeffs = tuple(
            base ** (i - 1) + base ** (n + j - 1)
            for i in range(1, n + 1)
            for j in range(1, n + 1)
        )
        constant = -sum(base ** (t - 1) for t in range(1, 2 * n + 1))
        poly = LinearPolynomial(modulus=mod, coeffs=coeffs, constant=constant)

        def is_perm(bits: Sequence[int], n: int = n) -> bool:
            rows = [sum(bits[i * n + j] for j in range(n)) for i in range(n)]
            cols = [sum(bits[i * n + j] for i in range(n)) for j in range(n)]
            return all(s == 1 for s in rows) and all(s == 1 for s in cols)

        fn = BooleanFunction(f"PERM_{n}", n * n, is_perm)
        return _make_instance(fn, [poly], n * n // 2 if n1 is None else n1)

    raise ValueError(f"unknown builtin {name!r} (expected EQ, MOD, MODBIN, PALINDROME, PERM)")


def conjunction(n_a: int, n_b: int, m_a: int = 3, m_b: int = 4) -> FunctionInstance:
    """MOD_{m_a} on the first block AND MODBIN_{m_b} on the second, as a
    genuine two-polynomial characteristic over Z_(m_a * m_b).

    With coprime moduli and units u mod m_a, w mod m_b, the polynomial
    m_b*u*(sum a_i) + m_a*w*(value of b) vanishes mod m_a*m_b exactly when
    both blocks satisfy their constraint (reduce mod m_a and mod m_b
    separately).  Two distinct (u, w) choices give two distinct polynomials
    that each individually vanish exactly on f^{-1}(1).
    """
    if n_a < 1 or n_b < 1:
        raise ValueError("both blocks need at least one variable")
    if m_a < 2 or m_b < 2 or math.gcd(m_a, m_b) != 1:
        raise ValueError("block moduli must be >= 2 and coprime")
    if m_a == 2 and m_b == 2:  # unreachable (gcd), kept for clarity
        raise ValueError("no second unit available")
    mod = m_a * m_b
    if m_a > 2:
        units = [(1, 1), (m_a - 1, 1)]
    else:
        units = [(1, 1), (1, m_b - 1)]
    polys = [
        LinearPolynomial(
            modulus=mod,
            coeffs=tuple(m_b * u for _ in range(n_a))
            + tuple(m_a * w * (1 << i) for i in range(n_b)),
        )
        for u, w in units
    ]
    fn = BooleanFunction(
        f"MOD_{m_a}&MODBIN_{m_b}",
        n_a + n_b,
        lambda bits: sum(bits[:n_a]) % m_a == 0 and _bit_value(bits[n_a:]) % m_b == 0,
    )
    return _make_instance(fn, polys, n_a)


def characteristic_from_table(
    function: BooleanFunction,
    modulus: int,
    attempts: int = 20000,
    rng: np.random.Generator | int | None = None,
) -> Characteristic | None:
    """Randomized search for a single linear characteristic polynomial.

    Draws uniform coefficient vectors over Z_modulus and verifies each one
    exactly against the full truth table.  Not every function has a linear
    characteristic over a given ring (OR already has none over Z_4), so
    failure is an honest answer: returns None after ``attempts`` draws.
    """
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    gen = np.random.default_rng(rng)
    n = function.arity
    truth = function.truth_table()
    want_zero = truth == 1

    if modulus * (n + 1) < _INT64_SAFE_MODULUS:
        bits = bit_matrix(n).astype(np.int64)
        remaining = attempts
        while remaining > 0:
            batch = min(remaining, 2048)
            remaining -= batch
            coeffs = gen.integers(0, modulus, size=(batch, n), dtype=np.int64)
            consts = gen.integers(0, modulus, size=batch, dtype=np.int64)
            values = (bits @ coeffs.T + consts) % modulus
            ok = np.nonzero(((values == 0) == want_zero[:, None]).all(axis=0))[0]
            if ok.size:
                j = int(ok[0])
                poly = LinearPolynomial(
                    modulus=modulus,
                    coeffs=tuple(int(c) for c in coeffs[j]),
                    constant=int(consts[j]),
                )
                return Characteristic(function=function, polynomials=(poly,))
        return None

    # Arbitrary-precision fallback: draw and check one candidate at a time.
    from .util import rand_below

    table_indices = list(assignments(n))
    for _ in range(attempts):
        coeffs = tuple(rand_below(gen, modulus) for _ in range(n))
        constant = rand_below(gen, modulus)
        poly = LinearPolynomial(modulus=modulus, coeffs=coeffs, constant=constant)
        if all(
            (poly.evaluate(a) == 0) == bool(w)
            for a, w in zip(table_indices, want_zero)
        ):
            return Characteristic(function=function, polynomials=(poly,))
    return None
