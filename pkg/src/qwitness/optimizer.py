"""Search for the maximally violating qubit triple.

On the active-constraint family A = [[a1, sqrt(a1 a2)], [sqrt(a1 a2), a2]],
B = diag(1, a2 / (1 - a1)) the problem has two unknowns. ``grid_search`` and
``refine_local`` minimize the smaller eigenvalue of B^2 - A^2 there;
``full_search`` scans all four parameters to check that the optimum really
sits on that boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CapExceededError, InfeasibleParameterError, ParameterError
from .matcore import Hermitian2, PureState, eig_herm2, square
from .witness import WitnessTriple, phase_fix, violation_eigs_closed_form

#: Keeps a1 away from the b = a2 / (1 - a1) singularity.
EPS = 1e-6
FEAS_TOL = 1e-12
MAX_SWEEPS = 10_000
#: Objective decreases smaller than this are rounding noise and do not move refine_local.
NOISE = 1e-15
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ReducedParams:
    a1: float
    a2: float

    def __post_init__(self):
        a1, a2 = float(self.a1), float(self.a2)
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)
        if not (math.isfinite(a1) and math.isfinite(a2)):
            raise InfeasibleParameterError("parameters must be finite")
        if not 0.0 <= a1 < 1.0:
            raise InfeasibleParameterError(f"a1 must lie in [0, 1), got {a1}")
        if a2 < 0.0 or a2 > 1.0 - a1 + FEAS_TOL:
            raise InfeasibleParameterError(f"a2 must lie in [0, 1 - a1] = [0, {1.0 - a1}], got {a2}")

    @property
    def b(self) -> float:
        return min(self.a2 / (1.0 - self.a1), 1.0)

    @property
    def xi(self) -> float:
        return math.sqrt(self.a1 * self.a2)

    def full(self) -> FullParams:
        return FullParams(self.a1, self.a2, self.b, self.xi)


@dataclass(frozen=True)
class FullParams:
    a1: float
    a2: float
    b: float
    xi: float

    def slacks(self) -> tuple[float, float]:
        """Margins of a1 a2 >= xi^2 and (1 - a1)(b - a2) >= xi^2."""
        xi2 = self.xi * self.xi
        return self.a1 * self.a2 - xi2, (1.0 - self.a1) * (self.b - self.a2) - xi2

    def feasible(self, tol: float = FEAS_TOL) -> bool:
        s3, s4 = self.slacks()
        return (
            -tol <= self.b <= 1.0 + tol
            and -tol <= self.a1 <= 1.0 + tol
            and self.a2 >= -tol
            and self.b - self.a2 >= -tol
            and s3 >= -tol
            and s4 >= -tol
        )

    def objective(self) -> float:
        return violation_eigs_closed_form(self.a1, self.a2, self.b, abs(self.xi))[0]

    def triple(self) -> WitnessTriple:
        a = Hermitian2(self.a1, self.a2, complex(abs(self.xi)))
        b = Hermitian2.diag(1.0, self.b)
        v = eig_herm2(square(b) - square(a)).vec_lo
        return WitnessTriple.from_matrices(a, b, PureState.from_vector(phase_fix(v)))


@dataclass(frozen=True)
class Optimum:
    params: FullParams
    objective: float
    triple: WitnessTriple
    constraint_slacks: tuple[float, float]
    evaluations: int
    method: str = ""
    settings: dict = field(default_factory=dict)
    history: tuple[float, ...] = ()

    @property
    def violation(self) -> float:
        return abs(self.objective)

    def metadata(self) -> dict:
        return {
            "method": self.method,
            **self.settings,
            "evaluations": self.evaluations,
            "objective": self.objective,
            "params": {"a1": self.params.a1, "a2": self.params.a2, "b": self.params.b, "xi": self.params.xi},
            "slacks": list(self.constraint_slacks),
        }


def _make_optimum(params: FullParams, evaluations: int, method: str, settings: dict, history=()) -> Optimum:
    return Optimum(
        params=params,
        objective=params.objective(),
        triple=params.triple(),
        constraint_slacks=params.slacks(),
        evaluations=int(evaluations),
        method=method,
        settings=settings,
        history=tuple(history),
    )


def build_reduced_triple(p: ReducedParams) -> WitnessTriple:
    """The triple on the active-constraint family, measured in its optimal state."""
    return p.full().triple()


def objective(p: ReducedParams) -> float:
    """Smaller eigenvalue of B^2 - A^2 on the reduced family (more negative = stronger)."""
    return violation_eigs_closed_form(p.a1, p.a2, p.b, p.xi)[0]


def _a1_grid(step: float) -> np.ndarray:
    i = np.arange(int((1.0 - 2 * EPS) / step) + 2, dtype=float)
    a1 = EPS + i * step
    return np.ascontiguousarray(a1[a1 <= 1.0 - EPS])


def grid_search(step: float, a2_max: float = 1.0) -> Optimum:
    """Exhaustive scan of a1 in [EPS, 1 - EPS], a2 in [0, min(1 - a1, a2_max)].

    Rows are a1 (outer), columns a2 (inner); ties keep the first point met.
    """
    if not 0.0 < step <= 0.01:
        raise ParameterError(f"grid step must lie in (0, 0.01], got {step}")
    if a2_max < 0:
        raise ParameterError("a2_max must be nonnegative")
    _, a1, a2, count = kernels.scan_reduced(_a1_grid(step), float(step), float(a2_max))
    params = ReducedParams(a1, a2).full()
    return _make_optimum(params, count, "grid", {"step": step})


def _golden(f, lo: float, hi: float, tol: float):
    """Golden-section minimum of a unimodal f on [lo, hi]; returns (x, f(x), evaluations)."""
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    n = 2
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
        n += 1
    return (c, fc, n) if fc <= fd else (d, fd, n)


def refine_local(start: ReducedParams, tol: float = 1e-8, max_sweeps: int = MAX_SWEEPS) -> Optimum:
    """Coordinate descent with golden-section line searches on a1 then a2.

    A line-search result is only accepted when it lowers the objective by
    more than ``NOISE``, so the recorded objective sequence never increases
    and a start at the optimum stays put. Stops once a sweep
    moves neither coordinate by ``tol`` or more.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    if not isinstance(start, ReducedParams):
        start = ReducedParams(*start)

    def f(a1, a2):
        return violation_eigs_closed_form(a1, a2, min(a2 / (1.0 - a1), 1.0), math.sqrt(a1 * a2))[0]

    a1, a2 = start.a1, start.a2
    best = f(a1, a2)
    evals = 1
    history = [best]
    line_tol = 0.1 * tol
    for _ in range(max_sweeps):
        prev = (a1, a2)
        x, fx, n = _golden(lambda t: f(t, a2), EPS, min(1.0 - EPS, 1.0 - a2), line_tol)
        evals += n
        if fx < best - NOISE:
            a1, best = x, fx
        x, fx, n = _golden(lambda t: f(a1, t), 0.0, 1.0 - a1, line_tol)
        evals += n
        if fx < best - NOISE:
            a2, best = x, fx
        history.append(best)
        if max(abs(a1 - prev[0]), abs(a2 - prev[1])) < tol:
            break
    else:
        raise CapExceededError(
            f"no convergence within {max_sweeps} sweeps",
            best=_make_optimum(ReducedParams(a1, a2).full(), evals, "refine", {"tol": tol}, history),
        )
    return _make_optimum(ReducedParams(a1, a2).full(), evals, "refine", {"tol": tol}, history)


def optimize(step: float = 1e-3, tol: float = 1e-8) -> Optimum:
    """grid_search followed by refine_local from the best grid point."""
    coarse = grid_search(step)
    fine = refine_local(ReducedParams(coarse.params.a1, coarse.params.a2), tol)
    settings = {"step": step, "tol": tol}
    return _make_optimum(fine.params, coarse.evaluations + fine.evaluations, "grid+refine", settings, fine.history)


def full_grid(step: float) -> np.ndarray:
    k = np.arange(int(math.floor(1.0 / step + 1e-9)) + 1, dtype=float)
    return np.ascontiguousarray(np.minimum(k * step, 1.0))


def full_search(step: float, fix_b: float | None = None) -> Optimum:
    """Scan (a1, a2, b, xi >= 0) on a regular grid over the feasible set.

    ``fix_b`` pins b to one value (sub-scan). Ties go to the first point in
    (a1, a2, b, xi) nesting order.
    """
    if not 0.0 < step <= 0.05:
        raise ParameterError(f"full-search step must lie in (0, 0.05], got {step}")
    grid = full_grid(step)
    if fix_b is None:
        b_values = grid
    else:
        if not 0.0 <= fix_b <= 1.0:
            raise ParameterError("fix_b must lie in [0, 1]")
        b_values = np.array([float(fix_b)])
    best, a1, a2, b, xi, count = kernels.scan_full(grid, b_values, FEAS_TOL)
    if count == 0:
        raise ParameterError("no feasible grid point")
    settings = {"step": step} if fix_b is None else {"step": step, "fix_b": fix_b}
    return _make_optimum(FullParams(a1, a2, b, xi), count, "full", settings)
