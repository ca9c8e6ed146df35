"""Closed-form arithmetic on 2x2 complex Hermitian matrices and qubit states.

Everything here is scalar Python: a qubit never needs a general eigensolver,
and the closed forms keep every result reproducible to the last bit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidMatrixError, NormalizationError, ParameterError

#: |a11 - a22|^2 + |a12|^2 below this is treated as a multiple of the identity.
DEGENERACY_EPS = 1e-24
#: Default absolute tolerance on eigenvalues for positivity checks.
PSD_TOL = 1e-9
NORM_TOL = 1e-12

Vector2 = tuple[complex, complex]


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True)
class Hermitian2:
    """2x2 Hermitian matrix [[a11, a12], [conj(a12), a22]].

    Only the upper triangle is stored, so hermiticity holds by construction.
    """

    a11: float
    a22: float
    a12: complex = 0j

    def __post_init__(self):
        for name in ("a11", "a22"):
            value = getattr(self, name)
            if isinstance(value, complex):
                if value.imag != 0.0:
                    raise InvalidMatrixError(f"diagonal entry {name} must be real, got {value!r}")
                value = value.real
            object.__setattr__(self, name, float(value))
        object.__setattr__(self, "a12", complex(self.a12))
        if not (math.isfinite(self.a11) and math.isfinite(self.a22) and _finite(self.a12)):
            raise InvalidMatrixError(f"non-finite entry in {self!r}")

    @classmethod
    def diag(cls, d1: float, d2: float) -> Hermitian2:
        return cls(d1, d2, 0j)

    @classmethod
    def identity(cls) -> Hermitian2:
        return cls(1.0, 1.0, 0j)

    @classmethod
    def zero(cls) -> Hermitian2:
        return cls(0.0, 0.0, 0j)

    @classmethod
    def from_array(cls, m, atol: float = 1e-12) -> Hermitian2:
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidMatrixError(f"expected a 2x2 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidMatrixError("non-finite entry")
        if abs(m[1, 0] - m[0, 1].conjugate()) > atol or abs(m[0, 0].imag) > atol or abs(m[1, 1].imag) > atol:
            raise InvalidMatrixError("matrix is not Hermitian")
        return cls(m[0, 0].real, m[1, 1].real, complex(m[0, 1]))

    @classmethod
    def projector(cls, v: Vector2) -> Hermitian2:
        """|v><v| for a (not necessarily normalized) vector."""
        a, b = v
        return cls(abs(a) ** 2, abs(b) ** 2, a * b.conjugate())

    def to_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12.conjugate(), self.a22]], dtype=complex)

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - abs(self.a12) ** 2

    @property
    def is_diagonal(self) -> bool:
        return self.a12 == 0

    def apply(self, v: Vector2) -> Vector2:
        a, b = v
        return (self.a11 * a + self.a12 * b, self.a12.conjugate() * a + self.a22 * b)

    def __add__(self, other: Hermitian2) -> Hermitian2:
        return Hermitian2(self.a11 + other.a11, self.a22 + other.a22, self.a12 + other.a12)

    def __sub__(self, other: Hermitian2) -> Hermitian2:
        return Hermitian2(self.a11 - other.a11, self.a22 - other.a22, self.a12 - other.a12)

    def __mul__(self, scalar: float) -> Hermitian2:
        s = float(scalar)
        return Hermitian2(s * self.a11, s * self.a22, s * self.a12)

    __rmul__ = __mul__

    def __neg__(self) -> Hermitian2:
        return Hermitian2(-self.a11, -self.a22, -self.a12)


@dataclass(frozen=True)
class EigenPair2:
    lo: float
    hi: float
    vec_lo: Vector2
    vec_hi: Vector2

    def reconstruct(self) -> Hermitian2:
        return self.lo * Hermitian2.projector(self.vec_lo) + self.hi * Hermitian2.projector(self.vec_hi)


def _unit(v: Vector2) -> Vector2:
    n = math.hypot(abs(v[0]), abs(v[1]))
    return (v[0] / n, v[1] / n)


def eig_herm2(m: Hermitian2) -> EigenPair2:
    """Analytic eigendecomposition, eigenvalues ascending.

    The hi eigenvector is built from whichever matrix row avoids the
    ``r - |delta|/2`` cancellation; the lo eigenvector is its orthogonal
    complement, so the pair is orthonormal by construction.
    """
    delta = m.a11 - m.a22
    off = abs(m.a12)
    mean = 0.5 * (m.a11 + m.a22)
    if delta * delta + off * off < DEGENERACY_EPS:
        return EigenPair2(mean, mean, (1 + 0j, 0j), (0j, 1 + 0j))
    if off == 0:
        # exact for diagonal input
        if delta > 0:
            return EigenPair2(m.a22, m.a11, (0j, 1 + 0j), (1 + 0j, 0j))
        return EigenPair2(m.a11, m.a22, (1 + 0j, 0j), (0j, 1 + 0j))
    r = math.hypot(0.5 * delta, off)
    if delta >= 0:
        v = (complex(r + 0.5 * delta), m.a12.conjugate())
    else:
        v = (m.a12, complex(r - 0.5 * delta))
    v_hi = _unit(v)
    v_lo = (-v_hi[1].conjugate(), v_hi[0].conjugate())
    return EigenPair2(mean - r, mean + r, v_lo, v_hi)


def eigvals_herm2(m: Hermitian2) -> tuple[float, float]:
    if m.a12 == 0:
        return (m.a11, m.a22) if m.a11 <= m.a22 else (m.a22, m.a11)
    delta = m.a11 - m.a22
    mean = 0.5 * (m.a11 + m.a22)
    r = math.hypot(0.5 * delta, abs(m.a12))
    return mean - r, mean + r


def min_eig(m: Hermitian2) -> float:
    return eigvals_herm2(m)[0]


def square(m: Hermitian2) -> Hermitian2:
    off2 = abs(m.a12) ** 2
    return Hermitian2(m.a11 * m.a11 + off2, m.a22 * m.a22 + off2, m.a12 * (m.a11 + m.a22))


def is_psd(m: Hermitian2, tol: float = PSD_TOL) -> bool:
    if tol < 0:
        raise ParameterError("tol must be nonnegative")
    return min_eig(m) >= -tol


def psd_by_minors(m: Hermitian2, tol: float = PSD_TOL) -> bool:
    """Sylvester-style test: nonnegative diagonal and determinant."""
    if tol < 0:
        raise ParameterError("tol must be nonnegative")
    return m.a11 >= -tol and m.a22 >= -tol and m.det >= -tol * (abs(m.trace) + 1.0)


# -- states -----------------------------------------------------------------


@dataclass(frozen=True)
class Density2:
    """Qubit density matrix: unit trace, positive semidefinite."""

    h: Hermitian2

    def __post_init__(self):
        if abs(self.h.trace - 1.0) > NORM_TOL:
            raise NormalizationError(f"density matrix trace is {self.h.trace!r}, expected 1")
        if min_eig(self.h) < -NORM_TOL:
            raise InvalidMatrixError("density matrix has a negative eigenvalue")

    @classmethod
    def maximally_mixed(cls) -> Density2:
        return cls(Hermitian2(0.5, 0.5, 0j))

    @property
    def purity(self) -> float:
        h = self.h
        return h.a11 * h.a11 + h.a22 * h.a22 + 2.0 * abs(h.a12) ** 2


@dataclass(frozen=True)
class PureState:
    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if not (_finite(self.alpha) and _finite(self.beta)):
            raise InvalidMatrixError("non-finite state amplitude")
        norm2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm2!r}, expected 1")

    @classmethod
    def from_vector(cls, v, normalize: bool = True) -> PureState:
        a, b = complex(v[0]), complex(v[1])
        if normalize:
            n = math.hypot(abs(a), abs(b))
            if n == 0:
                raise NormalizationError("zero vector is not a state")
            a, b = a / n, b / n
        return cls(a, b)

    @classmethod
    def from_angle(cls, theta: float, phase: float = 0.0) -> PureState:
        """cos(theta)|0> + e^{i phase} sin(theta)|1>, angles in radians."""
        return cls(complex(math.cos(theta)), cmath.exp(1j * phase) * math.sin(theta))

    @property
    def vector(self) -> Vector2:
        return (self.alpha, self.beta)


@dataclass(frozen=True)
class MixedState:
    rho: Density2


QubitState = Union[PureState, MixedState]


def density_of(s: QubitState) -> Density2:
    if isinstance(s, MixedState):
        return s.rho
    a, b = s.alpha, s.beta
    return Density2(Hermitian2(abs(a) ** 2, abs(b) ** 2, a * b.conjugate()))


def expectation(m: Hermitian2, s: QubitState) -> float:
    """<s|M|s> for pure states, Tr(rho M) for mixed ones (always real)."""
    if isinstance(s, PureState):
        a, b = s.alpha, s.beta
        return m.a11 * abs(a) ** 2 + m.a22 * abs(b) ** 2 + 2.0 * (a.conjugate() * m.a12 * b).real
    if isinstance(s, MixedState):
        r = s.rho.h
        return r.a11 * m.a11 + r.a22 * m.a22 + 2.0 * (r.a12 * m.a12.conjugate()).real
    raise TypeError(f"not a qubit state: {s!r}")


def depolarize(s: QubitState, p: float) -> Density2:
    """(1 - p) rho + p I/2."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"depolarizing probability must lie in [0, 1], got {p!r}")
    r = density_of(s).h
    q = 1.0 - p
    return Density2(Hermitian2(q * r.a11 + 0.5 * p, q * r.a22 + 0.5 * p, q * r.a12))


def rotate(s: QubitState, angle: float) -> QubitState:
    """Apply the real rotation [[c, -s], [s, c]] (polarization rotation by ``angle`` rad)."""
    c, sn = math.cos(angle), math.sin(angle)
    if isinstance(s, PureState):
        a, b = s.alpha, s.beta
        return PureState.from_vector((c * a - sn * b, sn * a + c * b))
    r = s.rho.h
    # R rho R^T with R real
    m = np.array([[c, -sn], [sn, c]])
    out = m @ r.to_array() @ m.T
    h = Hermitian2(out[0, 0].real, out[1, 1].real, complex(out[0, 1]))
    # renormalize rounding in the trace
    t = h.trace
    return MixedState(Density2(Hermitian2(h.a11 / t, h.a22 / t, h.a12 / t)))
