import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from golden import PRINTED_A, PRINTED_B_DIAG, PRINTED_PHI  # noqa: E402
from qwitness.documents import golden_triple  # noqa: E402
from qwitness.matcore import Hermitian2, PureState  # noqa: E402
from qwitness.witness import WitnessTriple  # noqa: E402


@pytest.fixture(scope="session")
def golden():
    return golden_triple()


@pytest.fixture(scope="session")
def printed():
    """The published matrices, entry for entry (slightly infeasible after rounding)."""
    a = Hermitian2(PRINTED_A[0][0], PRINTED_A[1][1], PRINTED_A[0][1])
    b = Hermitian2.diag(*PRINTED_B_DIAG)
    return WitnessTriple.from_matrices(a, b, PureState.from_vector(PRINTED_PHI))


def dense(m):
    return np.asarray(m.to_array())
