"""Single-qubit quantumness witnesses.

A witness is a triple (A, B, state) with 0 <= A <= B <= I whose second
moments come out in the wrong order, <A^2> > <B^2>. No classical model can
do that, since 0 <= f <= g pointwise forces <f^2> <= <g^2>.
"""

__version__ = "0.1.0"

from .errors import WitnessError
from .kernels import BACKEND
from .matcore import Density2, EigenPair2, Hermitian2, MixedState, PureState
from .witness import (
    ClassicalModel,
    Observable,
    WitnessTriple,
    check_ordering,
    classical_second_moment_check,
    photon_angles,
    violation_eigs_closed_form,
    violation_report,
)
from .documents import golden_triple, load_triple

__all__ = [
    "BACKEND",
    "ClassicalModel",
    "Density2",
    "EigenPair2",
    "Hermitian2",
    "MixedState",
    "Observable",
    "PureState",
    "WitnessError",
    "WitnessTriple",
    "check_ordering",
    "classical_second_moment_check",
    "golden_triple",
    "load_triple",
    "photon_angles",
    "violation_eigs_closed_form",
    "violation_report",
]
