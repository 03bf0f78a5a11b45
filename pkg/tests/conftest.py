import sys
from pathlib import Path

import numpy as np
import pytest

from qhc import KeySet, verify_resistance

sys.path.insert(0, str(Path(__file__).parent))  # makes `import oracles` work


@pytest.fixture(scope="session")
def certified_n64() -> KeySet:
    """A nontrivial (d = 40 < N) key set over Z_64, exactly certified at
    delta = 0.3.  Seed 0 is frozen; the certification is re-proved here,
    not assumed."""
    keys = tuple(sorted(np.random.default_rng(0).choice(64, size=40, replace=False).tolist()))
    report = verify_resistance(KeySet(modulus=64, keys=keys), 0.3)
    assert report.certified, "frozen seed no longer certifies"
    return report.key_set
