"""Exact simulator and analysis toolkit for quantum-hashing communication
protocols: linear characteristic polynomials over residue rings, amplitude-
form quantum hashes with certified collision resistance, and one-way / SMP
protocol execution with exact error accounting."""

from .boolfn import (
    BooleanFunction,
    Characteristic,
    Decomposition,
    FunctionInstance,
    LinearPolynomial,
    VerificationReport,
    builtin,
    characteristic_from_table,
    conjunction,
    split_polynomial,
    verify_characteristic,
)
from .errors import CharacteristicError, ConfigError, GuardError, SearchError
from .protocol import (
    CommCost,
    ErrorProfile,
    ProtocolSpec,
    RunReport,
    build_spec,
    comm_cost,
    error_profile,
    run_exact,
    run_sampled,
    run_smp,
)
from .qhash import (
    Certification,
    HashState,
    KeySet,
    ResistanceReport,
    SwapOutcome,
    amplitude_overlap,
    bias,
    build_hash,
    hash_qubits,
    inner_product,
    required_keys,
    sample_swap,
    search_key_set,
    swap_test,
    verify_resistance,
)

__version__ = "0.1.0"

__all__ = [
    "BooleanFunction",
    "Characteristic",
    "CharacteristicError",
    "Certification",
    "CommCost",
    "ConfigError",
    "Decomposition",
    "ErrorProfile",
    "FunctionInstance",
    "GuardError",
    "HashState",
    "KeySet",
    "LinearPolynomial",
    "ProtocolSpec",
    "ResistanceReport",
    "RunReport",
    "SearchError",
    "SwapOutcome",
    "VerificationReport",
    "amplitude_overlap",
    "bias",
    "build_hash",
    "build_spec",
    "builtin",
    "characteristic_from_table",
    "comm_cost",
    "conjunction",
    "error_profile",
    "hash_qubits",
    "inner_product",
    "required_keys",
    "run_exact",
    "run_sampled",
    "run_smp",
    "sample_swap",
    "search_key_set",
    "split_polynomial",
    "swap_test",
    "verify_characteristic",
    "verify_resistance",
]
