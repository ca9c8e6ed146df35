"""Shot-level simulation of the two-stage quantumness test.

Stage 1 measures <A> and <B> on many (possibly noisy) probe states and
checks that no state puts <A> significantly above <B>. Stage 2 picks the
probe with the lowest estimated <B^2> - <A^2> and asks whether it is
significantly negative. A and B are measured on separate shot batches:
they generally do not commute. Squared outcomes of the A measurement
estimate <A^2> exactly because A^2 shares A's eigenbasis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    EmptySampleError,
    InsufficientSampleError,
    NoThresholdError,
    ParameterError,
    PlanError,
)
from .matcore import (
    Density2,
    Hermitian2,
    MixedState,
    PureState,
    QubitState,
    density_of,
    depolarize,
    eig_herm2,
    expectation,
    rotate,
    square,
)
from .witness import Observable, WitnessTriple, violation_report

DEFAULT_SIGNIFICANCE = 5.0
DEFAULT_BATCH = 1 << 16
SWEEP_HEADER = ["p", "first_gap", "first_gap_se", "second_gap", "second_gap_se", "z", "stage1_pass", "stage2_violation"]


# -- noise -------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """``kind`` is "none", "depolarizing" (uses ``p``) or "jitter" (uses ``sigma_deg``).

    Jitter rotates the prepared polarization by one Gaussian angle per
    ``batch_shots`` shots; ``None`` means one angle per measured record.
    """

    kind: str = "none"
    p: float = 0.0
    sigma_deg: float = 0.0
    batch_shots: int | None = None

    def __post_init__(self):
        if self.kind not in ("none", "depolarizing", "jitter"):
            raise ParameterError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"depolarizing p must lie in [0, 1], got {self.p}")
        if not (self.sigma_deg >= 0.0 and math.isfinite(self.sigma_deg)):
            raise ParameterError(f"jitter sigma must be nonnegative, got {self.sigma_deg}")
        if self.batch_shots is not None and self.batch_shots < 1:
            raise ParameterError("jitter batch size must be positive")

    @classmethod
    def depolarizing(cls, p: float) -> NoiseModel:
        return cls("depolarizing", p=float(p))

    @classmethod
    def jitter(cls, sigma_deg: float, batch_shots: int | None = None) -> NoiseModel:
        return cls("jitter", sigma_deg=float(sigma_deg), batch_shots=batch_shots)

    @classmethod
    def parse(cls, spec: str) -> NoiseModel:
        """Parse "none", "depolarizing:P" or "jitter:SIGMA_DEG[:BATCH]"."""
        parts = spec.strip().split(":")
        try:
            if parts == ["none"] or parts == [""]:
                return cls()
            if parts[0] == "depolarizing" and len(parts) == 2:
                return cls.depolarizing(float(parts[1]))
            if parts[0] == "jitter" and len(parts) in (2, 3):
                batch = int(parts[2]) if len(parts) == 3 else None
                return cls.jitter(float(parts[1]), batch)
        except ValueError as exc:
            raise ParameterError(f"bad noise spec {spec!r}: {exc}") from None
        raise ParameterError(f"bad noise spec {spec!r}; expected none, depolarizing:P or jitter:SIGMA[:BATCH]")

    def spec(self) -> str:
        if self.kind == "depolarizing":
            return f"depolarizing:{self.p!r}"
        if self.kind == "jitter":
            tail = "" if self.batch_shots is None else f":{self.batch_shots}"
            return f"jitter:{self.sigma_deg!r}{tail}"
        return "none"


def prepare(s: QubitState, noise: NoiseModel) -> QubitState:
    """State after preparation noise that acts identically on every shot."""
    if noise.kind == "depolarizing" and noise.p > 0:
        return MixedState(depolarize(s, noise.p))
    return s


def jitter_average(s: QubitState, sigma_deg: float) -> QubitState:
    """Exact average of R(d) rho R(d)^T over d ~ N(0, sigma).

    The rotation turns the Bloch vector about y by 2d, so the x and z
    components shrink by E[cos 2d] = exp(-2 sigma^2) and y is untouched.
    """
    if sigma_deg == 0:
        return s
    k = math.exp(-2.0 * math.radians(sigma_deg) ** 2)
    r = density_of(s).h
    h = Hermitian2(0.5 + k * (r.a11 - 0.5), 0.5 + k * (r.a22 - 0.5), complex(k * r.a12.real, r.a12.imag))
    return MixedState(Density2(h))


# -- seeds -------------------------------------------------------------------


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 63-bit seed for the stream labelled ``keys`` under ``seed``."""
    if seed < 0:
        raise ParameterError("seeds must be nonnegative")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _rng(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0:
        raise ParameterError("seeds must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


# -- measurement -------------------------------------------------------------


@dataclass(frozen=True)
class ShotRecord:
    observable_label: str
    outcomes: np.ndarray
    n: int
    seed: int
    batch_size: int = DEFAULT_BATCH


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    mean_sq: float
    se_mean: float
    se_mean_sq: float
    n: int


def born_probabilities(obs: Observable, s: QubitState) -> list[tuple[float, float]]:
    """[(lo eigenvalue, prob), (hi eigenvalue, prob)] for a projective measurement."""
    m = obs.m if isinstance(obs, Observable) else obs
    e = eig_herm2(m)
    p_lo = expectation(Hermitian2.projector(e.vec_lo), s)
    p_hi = expectation(Hermitian2.projector(e.vec_hi), s)
    p_lo, p_hi = min(max(p_lo, 0.0), 1.0), min(max(p_hi, 0.0), 1.0)
    total = p_lo + p_hi
    return [(e.lo, p_lo / total), (e.hi, p_hi / total)]


def sample_shots(obs: Observable, s: QubitState, n: int, seed: int, batch_size: int = DEFAULT_BATCH) -> ShotRecord:
    """n Born-rule outcomes; batch j draws from the stream (seed, j)."""
    if n < 1:
        raise EmptySampleError("need at least one shot")
    if batch_size < 1:
        raise ParameterError("batch_size must be positive")
    (lo, _), (hi, p_hi) = born_probabilities(obs, s)
    out = np.empty(n)
    for j, start in enumerate(range(0, n, batch_size)):
        stop = min(start + batch_size, n)
        u = _rng(seed, j).random(stop - start)
        out[start:stop] = np.where(u < p_hi, hi, lo)
    out.flags.writeable = False
    label = obs.label if isinstance(obs, Observable) else ""
    return ShotRecord(label, out, n, seed, batch_size)


def estimate_moments(r: ShotRecord) -> MomentEstimate:
    """Sample mean and mean square of the same shots, with standard errors.

    Per-batch (count, mean, M2) summaries are merged in batch order, so the
    result does not depend on how batches were produced.
    """
    if r.n < 2:
        raise InsufficientSampleError("standard errors need at least two shots")
    x = np.ascontiguousarray(r.outcomes, dtype=float)
    n = 0
    mean = m2 = mean_sq = m2_sq = 0.0
    for start in range(0, r.n, r.batch_size):
        nb, mb, m2b, qb, q2b = kernels.batch_moments(x[start : start + r.batch_size])
        if n == 0:
            n, mean, m2, mean_sq, m2_sq = nb, mb, m2b, qb, q2b
            continue
        tot = n + nb
        d, dq = mb - mean, qb - mean_sq
        mean += d * nb / tot
        mean_sq += dq * nb / tot
        m2 += m2b + d * d * n * nb / tot
        m2_sq += q2b + dq * dq * n * nb / tot
        n = tot
    se = math.sqrt(m2 / (n - 1) / n)
    se_sq = math.sqrt(m2_sq / (n - 1) / n)
    return MomentEstimate(mean, mean_sq, se, se_sq, n)


def exact_moments(obs: Observable, s: QubitState) -> MomentEstimate:
    m = obs.m if isinstance(obs, Observable) else obs
    return MomentEstimate(expectation(m, s), expectation(square(m), s), 0.0, 0.0, 0)


# -- protocol ----------------------------------------------------------------


def default_probe_states(n_polar: int = 10, n_azimuth: int = 10) -> list[PureState]:
    """Both poles plus an n_polar x n_azimuth lattice on the Bloch sphere (102 states by default)."""
    states = [PureState(1.0, 0.0), PureState(0.0, 1.0)]
    for k in range(1, n_polar + 1):
        theta = math.pi * k / (n_polar + 1)
        for m in range(n_azimuth):
            states.append(PureState.from_angle(theta / 2, 2 * math.pi * m / n_azimuth))
    return states


@dataclass(frozen=True)
class ExperimentPlan:
    triple: WitnessTriple
    probe_states: tuple
    shots_per_observable: int
    noise: NoiseModel = NoiseModel()
    seed: int = 0
    significance: float = DEFAULT_SIGNIFICANCE
    exact: bool = False
    batch_size: int = DEFAULT_BATCH

    def __post_init__(self):
        object.__setattr__(self, "probe_states", tuple(self.probe_states))
        if not self.probe_states:
            raise PlanError("plan needs at least one probe state")
        if self.shots_per_observable < 1:
            raise PlanError("shots_per_observable must be at least 1")
        if self.seed < 0:
            raise PlanError("seed must be nonnegative")
        if not self.significance > 0:
            raise PlanError("significance threshold must be positive")


@dataclass(frozen=True)
class ProbeResult:
    index: int
    moments_A: MomentEstimate
    moments_B: MomentEstimate
    first_gap: float
    first_gap_se: float
    second_gap: float
    second_gap_se: float
    order_z: float  # significance of <A> > <B>
    violation_z: float  # significance of <B^2> - <A^2> < 0


@dataclass(frozen=True)
class Verdict:
    stage1_pass: bool
    stage2_violation: bool
    z_score: float
    best_state: QubitState
    best_index: int
    details: tuple[ProbeResult, ...] = field(default=())

    @property
    def quantum(self) -> bool:
        return self.stage1_pass and self.stage2_violation

    @property
    def best(self) -> ProbeResult:
        return self.details[self.best_index]


def _z(value: float, se: float) -> float:
    if se > 0:
        return value / se
    if value == 0:
        return 0.0
    return math.copysign(math.inf, value)


def _measure(obs: Observable, s: QubitState, plan: ExperimentPlan, probe: int, which: int) -> ShotRecord:
    n = plan.shots_per_observable
    noise = plan.noise
    seed = derive_seed(plan.seed, probe, which)
    if noise.kind != "jitter" or noise.sigma_deg == 0:
        return sample_shots(obs, s, n, seed, plan.batch_size)
    chunk = noise.batch_shots or n
    angles = _rng(plan.seed, probe, which, 1).normal(0.0, math.radians(noise.sigma_deg), size=-(-n // chunk))
    parts = []
    for c, start in enumerate(range(0, n, chunk)):
        m = min(chunk, n - start)
        parts.append(sample_shots(obs, rotate(s, float(angles[c])), m, derive_seed(seed, c), plan.batch_size).outcomes)
    out = np.concatenate(parts)
    out.flags.writeable = False
    return ShotRecord(obs.label, out, n, seed, plan.batch_size)


def _probe(plan: ExperimentPlan, index: int, state: QubitState) -> ProbeResult:
    t = plan.triple
    s = prepare(state, plan.noise)
    if plan.exact:
        if plan.noise.kind == "jitter":
            s = jitter_average(s, plan.noise.sigma_deg)
        ma, mb = exact_moments(t.A, s), exact_moments(t.B, s)
    else:
        ma = estimate_moments(_measure(t.A, s, plan, index, 0))
        mb = estimate_moments(_measure(t.B, s, plan, index, 1))
    g1 = mb.mean - ma.mean
    g2 = mb.mean_sq - ma.mean_sq
    se1 = math.hypot(ma.se_mean, mb.se_mean)
    se2 = math.hypot(ma.se_mean_sq, mb.se_mean_sq)
    return ProbeResult(index, ma, mb, g1, se1, g2, se2, _z(-g1, se1), _z(-g2, se2))


def run_protocol(plan: ExperimentPlan) -> Verdict:
    rows = tuple(_probe(plan, i, s) for i, s in enumerate(plan.probe_states))
    stage1 = all(r.order_z < plan.significance for r in rows)
    best = min(rows, key=lambda r: r.second_gap)  # first index wins ties
    z = best.violation_z
    return Verdict(
        stage1_pass=stage1,
        stage2_violation=best.second_gap < 0 and z >= plan.significance,
        z_score=z,
        best_state=plan.probe_states[best.index],
        best_index=best.index,
        details=rows,
    )


# -- noise thresholds --------------------------------------------------------


def depolarized_gap(t: WitnessTriple, p: float) -> float:
    """Exact <B^2> - <A^2> after depolarizing the triple's state with strength p."""
    return violation_report(t.with_state(MixedState(depolarize(t.state, p)))).second_gap


def noise_threshold(t: WitnessTriple, family: str = "depolarizing") -> float:
    """Smallest depolarizing p at which the second-moment gap reaches zero.

    The gap is affine in p: g(p) = (1 - p) g0 + p Tr(B^2 - A^2) / 2.
    """
    if family != "depolarizing":
        raise ParameterError(f"closed-form threshold only exists for depolarizing noise, not {family!r}")
    report = violation_report(t)
    if not report.witnessed:
        raise NoThresholdError("triple does not witness quantumness at zero noise")
    g0 = report.second_gap
    mixed = 0.5 * t.gap_operator.trace
    if mixed <= 0:
        return 1.0
    return min(max(g0 / (g0 - mixed), 0.0), 1.0)


@dataclass(frozen=True)
class SweepRow:
    p: float
    first_gap: float
    first_gap_se: float
    second_gap: float
    second_gap_se: float
    z: float
    stage1_pass: bool
    stage2_violation: bool

    def csv_fields(self) -> list[str]:
        nums = (self.p, self.first_gap, self.first_gap_se, self.second_gap, self.second_gap_se, self.z)
        return [format_number(x) for x in nums] + [
            str(self.stage1_pass).lower(),
            str(self.stage2_violation).lower(),
        ]


def format_number(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def sweep(plan: ExperimentPlan, p_from: float, p_to: float, steps: int) -> list[SweepRow]:
    """run_protocol at evenly spaced depolarizing strengths; row k uses seed derive_seed(plan.seed, k)."""
    if steps < 2:
        raise ParameterError("a sweep needs at least 2 steps")
    if not (0.0 <= p_from <= 1.0 and 0.0 <= p_to <= 1.0):
        raise ParameterError("sweep range must lie within [0, 1]")
    if p_from >= p_to:
        raise ParameterError(f"sweep range is empty or inverted: {p_from} .. {p_to}")
    rows = []
    for k, p in enumerate(np.linspace(p_from, p_to, steps)):
        p = float(p)
        v = run_protocol(replace(plan, noise=NoiseModel.depolarizing(p), seed=derive_seed(plan.seed, k)))
        b = v.best
        rows.append(SweepRow(p, b.first_gap, b.first_gap_se, b.second_gap, b.second_gap_se, v.z_score, v.stage1_pass, v.stage2_violation))
    return rows


def zero_crossing(rows: Sequence[SweepRow]) -> float | None:
    """p where a least-squares line through (p, second_gap) hits zero; None if it never rises."""
    p = np.array([r.p for r in rows])
    g = np.array([r.second_gap for r in rows])
    slope, intercept = np.polyfit(p, g, 1)
    if not slope > 0:
        return None
    return float(-intercept / slope)
