"""Witness triples (A, B, state): ordering checks, moment gaps, classical oracle, photon mapping."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ModelError, ParameterError, PureStateRequiredError
from .matcore import (
    PSD_TOL,
    Density2,
    Hermitian2,
    MixedState,
    PureState,
    QubitState,
    eig_herm2,
    expectation,
    min_eig,
    square,
)

__all__ = [
    "Observable",
    "WitnessTriple",
    "OrderingReport",
    "ViolationReport",
    "ClassicalModel",
    "ClassicalCheck",
    "PolarizationSetup",
    "QubitState",
    "PureState",
    "MixedState",
    "check_ordering",
    "violation_report",
    "violation_eigs_closed_form",
    "classical_second_moment_check",
    "embed_classical",
    "optimal_state",
    "phase_fix",
    "gauge_fix",
    "photon_angles",
]


@dataclass(frozen=True)
class Observable:
    m: Hermitian2
    label: str = ""


@dataclass(frozen=True)
class WitnessTriple:
    A: Observable
    B: Observable
    state: QubitState

    @classmethod
    def from_matrices(cls, a: Hermitian2, b: Hermitian2, state: QubitState) -> WitnessTriple:
        return cls(Observable(a, "A"), Observable(b, "B"), state)

    def with_state(self, state: QubitState) -> WitnessTriple:
        return WitnessTriple(self.A, self.B, state)

    @property
    def gap_operator(self) -> Hermitian2:
        """B^2 - A^2."""
        return square(self.B.m) - square(self.A.m)


@dataclass(frozen=True)
class OrderingReport:
    eig_A_min: float
    eig_BminusA_min: float
    eig_IminusB_min: float
    ordered: bool
    tol: float


@dataclass(frozen=True)
class ViolationReport:
    first_gap: float
    second_gap: float
    min_eig_B2A2: float
    witnessed: bool


def check_ordering(t: WitnessTriple, tol: float = PSD_TOL) -> OrderingReport:
    """Decide 0 <= A <= B <= I from the smallest eigenvalues of A, B - A and I - B."""
    if tol < 0:
        raise ParameterError("tol must be nonnegative")
    a, b = t.A.m, t.B.m
    mins = (min_eig(a), min_eig(b - a), min_eig(Hermitian2.identity() - b))
    return OrderingReport(*mins, ordered=all(x >= -tol for x in mins), tol=tol)


def violation_report(t: WitnessTriple, tol: float = PSD_TOL) -> ViolationReport:
    a, b = t.A.m, t.B.m
    first = expectation(b, t.state) - expectation(a, t.state)
    second = expectation(square(b), t.state) - expectation(square(a), t.state)
    lowest = min_eig(t.gap_operator)
    ordered = check_ordering(t, tol).ordered
    return ViolationReport(first, second, lowest, witnessed=ordered and second < 0)


def violation_eigs_closed_form(a1: float, a2: float, b: float, xi_abs: float) -> tuple[float, float]:
    """Both eigenvalues of B^2 - A^2 for A = [[a1, xi], [xi*, a2]], B = diag(1, b).

    Returned as (minus branch, plus branch).
    """
    if xi_abs < 0:
        raise ParameterError("xi_abs must be nonnegative")
    if not all(math.isfinite(x) for x in (a1, a2, b, xi_abs)):
        raise ParameterError("parameters must be finite")
    xi2 = xi_abs * xi_abs
    base = b * b + 1 - a1 * a1 - a2 * a2 - 2 * xi2
    t = b * b - 1 + a1 * a1 - a2 * a2
    root = math.sqrt(t * t + 4 * (a1 + a2) * (a1 + a2) * xi2)
    return 0.5 * (base - root), 0.5 * (base + root)


def optimal_state(t: WitnessTriple) -> PureState:
    """The pure state minimizing <B^2> - <A^2>: the lo eigenvector of B^2 - A^2."""
    v = eig_herm2(t.gap_operator).vec_lo
    return PureState.from_vector(phase_fix(v))


# -- classical oracle --------------------------------------------------------


@dataclass(frozen=True)
class ClassicalModel:
    """Finite-support classical model: outcome values f_i <= g_i with probabilities rho_i."""

    f: tuple[float, ...]
    g: tuple[float, ...]
    rho: tuple[float, ...]

    def __post_init__(self):
        f, g, rho = (tuple(float(x) for x in v) for v in (self.f, self.g, self.rho))
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "rho", rho)
        if not (len(f) == len(g) == len(rho)) or not f:
            raise ModelError("f, g and rho must be non-empty and of equal length")
        if any(p < 0 for p in rho) or abs(math.fsum(rho) - 1.0) > 1e-12:
            raise ModelError("rho must be a probability vector")
        for i, (fi, gi) in enumerate(zip(f, g)):
            if not 0 <= fi <= gi:
                raise ModelError(f"need 0 <= f <= g, violated at index {i}: f={fi}, g={gi}")


class ClassicalCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def classical_second_moment_check(c: ClassicalModel) -> ClassicalCheck:
    """<f^2> versus <g^2> under rho; ``holds`` can only be False for a bug."""
    lhs = math.fsum(p * x * x for p, x in zip(c.rho, c.f))
    rhs = math.fsum(p * x * x for p, x in zip(c.rho, c.g))
    return ClassicalCheck(lhs, rhs, lhs <= rhs + 1e-12)


def embed_classical(c: ClassicalModel) -> WitnessTriple:
    """Two-point model as commuting qubit observables diag(f), diag(g) in state diag(rho)."""
    if len(c.f) != 2:
        raise ModelError("only two-point models embed into a qubit")
    rho = Density2(Hermitian2(c.rho[0], c.rho[1], 0j))
    return WitnessTriple.from_matrices(
        Hermitian2.diag(*c.f), Hermitian2.diag(*c.g), MixedState(rho)
    )


# -- photon polarization -----------------------------------------------------


@dataclass(frozen=True)
class PolarizationSetup:
    """Linear-optics reading of a triple in the |H>, |V> basis.

    ``outcome_values_A`` are attributed to |H'> = cos r|H> + sin r|V> and
    |V'> = -sin r|H> + cos r|V> with r = ``basis_rotation_deg``. The state is
    cos s|H> + exp(i phase) sin s|V>.
    """

    basis_rotation_deg: float
    state_angle_deg: float
    outcome_values_B: tuple[float, float]
    outcome_values_A: tuple[float, float]
    state_phase_deg: float = 0.0
    b_rotation_deg: float = 0.0
    warnings: tuple[str, ...] = field(default=())

    def to_triple(self) -> WitnessTriple:
        r = math.radians(self.basis_rotation_deg)
        c, s = math.cos(r), math.sin(r)
        h_prime = Hermitian2.projector((complex(c), complex(s)))
        v_prime = Hermitian2.projector((complex(-s), complex(c)))
        a = self.outcome_values_A[0] * h_prime + self.outcome_values_A[1] * v_prime
        b = Hermitian2.diag(*self.outcome_values_B)
        state = PureState.from_angle(math.radians(self.state_angle_deg), math.radians(self.state_phase_deg))
        return WitnessTriple.from_matrices(a, b, state)


def phase_fix(v):
    """Multiply by a global phase so the first nonzero component is real and positive."""
    pivot = v[0] if abs(v[0]) > 1e-15 else v[1]
    ph = abs(pivot) / pivot
    return (v[0] * ph, v[1] * ph)


def _conj_by(m: Hermitian2, u) -> Hermitian2:
    """U^dagger M U for U with columns u[0], u[1]."""
    cols = [m.apply(u[0]), m.apply(u[1])]
    a11 = (u[0][0].conjugate() * cols[0][0] + u[0][1].conjugate() * cols[0][1]).real
    a22 = (u[1][0].conjugate() * cols[1][0] + u[1][1].conjugate() * cols[1][1]).real
    a12 = u[0][0].conjugate() * cols[1][0] + u[0][1].conjugate() * cols[1][1]
    return Hermitian2(a11, a22, a12)


def _gauge(t: WitnessTriple):
    if not isinstance(t.state, PureState):
        raise PureStateRequiredError("polarization angles need a pure state")
    warnings = []
    a, b, psi = t.A.m, t.B.m, t.state.vector
    b_rot = 0.0
    if b.a12 != 0 and abs(b.a12) <= 1e-12:
        b = Hermitian2.diag(b.a11, b.a22)
    if abs(b.a12) > 1e-12:
        eb = eig_herm2(b)
        h = phase_fix(eb.vec_hi)
        v = (-h[1].conjugate(), h[0].conjugate())
        u = (h, v)
        if abs(h[1].imag) > 1e-12:
            warnings.append("B eigenbasis is not a linear polarization basis; rotation angle uses magnitudes")
        b_rot = math.degrees(math.atan2(abs(h[1]), h[0].real))
        a, b = _conj_by(a, u), _conj_by(b, u)
        b = Hermitian2.diag(b.a11, b.a22)
        psi = (
            h[0].conjugate() * psi[0] + h[1].conjugate() * psi[1],
            v[0].conjugate() * psi[0] + v[1].conjugate() * psi[1],
        )
    if a.a12 != 0:
        if abs(a.a12.imag) > 1e-12 * max(1.0, abs(a.a12)):
            warnings.append(
                f"A off-diagonal phase {math.degrees(cmath.phase(a.a12)):.6g} deg removed by rephasing |V>"
            )
        rephase = abs(a.a12) / a.a12  # exp(-i arg a12)
        a = Hermitian2(a.a11, a.a22, complex(abs(a.a12)))
        psi = (psi[0], psi[1] / rephase)
    psi = phase_fix(psi)
    return a, b, PureState.from_vector(psi), b_rot, warnings


def gauge_fix(t: WitnessTriple) -> WitnessTriple:
    """Equivalent triple with B diagonal, A's off-diagonal real >= 0 and alpha real >= 0."""
    a, b, psi, _, _ = _gauge(t)
    return WitnessTriple(Observable(a, t.A.label), Observable(b, t.B.label), psi)


def photon_angles(t: WitnessTriple) -> PolarizationSetup:
    a, b, psi, b_rot, warnings = _gauge(t)
    ea = eig_herm2(a)
    vh = phase_fix(ea.vec_hi)
    rot = math.degrees(math.atan2(vh[1].real, vh[0].real))
    values_a = (ea.hi, ea.lo)
    if rot >= 90.0 - 1e-12:
        # hi eigenvector is |V'>; attribute the lo eigenvalue to |H'> instead
        rot = max(rot - 90.0, 0.0)
        values_a = (ea.lo, ea.hi)
    alpha, beta = psi.alpha.real, psi.beta
    angle = math.degrees(math.atan2(abs(beta), alpha))
    phase = math.degrees(cmath.phase(beta)) if abs(beta) > 1e-15 else 0.0
    if abs(abs(phase) - 180.0) < 1e-9:
        angle, phase = 180.0 - angle, 0.0
    elif abs(phase) > 1e-9:
        warnings.append(f"state has relative phase {phase:.6g} deg (elliptical polarization)")
    angle %= 180.0
    return PolarizationSetup(
        basis_rotation_deg=rot,
        state_angle_deg=angle,
        outcome_values_B=(b.a11, b.a22),
        outcome_values_A=values_a,
        state_phase_deg=phase,
        b_rotation_deg=b_rot,
        warnings=tuple(warnings),
    )


def expectations(t: WitnessTriple, state: QubitState | None = None) -> dict[str, float]:
    """Exact <A>, <B>, <A^2>, <B^2> in ``state`` (default: the triple's own)."""
    s = t.state if state is None else state
    return {
        "A": expectation(t.A.m, s),
        "B": expectation(t.B.m, s),
        "A2": expectation(square(t.A.m), s),
        "B2": expectation(square(t.B.m), s),
    }

