"""Randomised verification runs and the worked example in R^4.

Every trial draws its own generator from the master seed through
``numpy.random.SeedSequence(seed, spawn_key=(index,))``, so a trial's outcome
depends only on ``(seed, index)`` and not on how many trials ran before it.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from . import counts
from . import linalg as la
from .errors import ClusterAmbiguity, NonGenericSpectrum, NoConvergence
from .intersection import (
    TRANS_TOL,
    IntersectionReport,
    OrientedPlane,
    common_invariant_planes,
    plane_to_unit_quaternion,
)
from .linalg import DEFAULT_TOL
from .structures import (
    CLUSTER_TOL,
    StructurePair,
    conjugate,
    haar_orthogonal,
    negate,
    random_general_J,
    random_orthogonal_J,
    standard_J,
)

MODES = ("orth-same", "orth-opposite", "general-same", "general-opposite")
SAFE_INTERVAL = (0.5, 1.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of a verification run.

    Parameters
    ----------
    mode : str
        One of ``orth-same``, ``orth-opposite``, ``general-same`` and
        ``general-opposite``.
    n, k : int
        Complex dimension of the ambient space and of the planes.
    trials : int
        Number of sampled pairs.
    seed : int
        Master seed.
    cond_bound : float
        Condition-number bound for the conjugators of the general modes.
    """

    mode: str
    n: int
    k: int
    trials: int = 100
    seed: int = 0
    tol: float = DEFAULT_TOL
    cluster_tol: float = CLUSTER_TOL
    trans_tol: float = TRANS_TOL
    cond_bound: float = 50.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    @property
    def orthogonal(self) -> bool:
        return self.mode.startswith("orth")

    @property
    def same_orientation(self) -> bool:
        return self.mode.endswith("same")


@dataclass
class TrialOutcome:
    index: int
    status: str  # "pass", "fail" or "skipped"
    raw_count_same: int | str | None = None
    raw_count_opposite: int | str | None = None
    signed_count_same: int | None = None
    signed_count_opposite: int | None = None
    signs: list[int | None] = field(default_factory=list)
    all_transverse: bool | None = None
    reasons: list[str] = field(default_factory=list)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    outcomes: list[TrialOutcome]
    duration: float

    @property
    def pass_count(self) -> int:
        return sum(o.status == "pass" for o in self.outcomes)

    @property
    def fail_count(self) -> int:
        return sum(o.status == "fail" for o in self.outcomes)

    @property
    def skipped_count(self) -> int:
        return sum(o.status == "skipped" for o in self.outcomes)

    @property
    def ok(self) -> bool:
        return self.fail_count == 0

    @property
    def expected(self) -> tuple[int, int]:
        c = self.config
        return counts.expected_counts(c.same_orientation, c.n, c.k)

    @property
    def expected_signed(self) -> tuple[int, int]:
        c = self.config
        return counts.expected_signed_counts(c.same_orientation, c.n, c.k)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "expected_counts": list(self.expected),
            "expected_signed_counts": list(self.expected_signed),
            "pass": self.pass_count,
            "fail": self.fail_count,
            "skipped": self.skipped_count,
            "duration": self.duration,
            "trials": [asdict(o) for o in sorted(self.outcomes, key=lambda o: o.index)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentReport":
        return cls(
            config=ExperimentConfig(**doc["config"]),
            outcomes=[TrialOutcome(**t) for t in doc["trials"]],
            duration=doc["duration"],
        )

    def summary(self) -> str:
        c = self.config
        lines = [
            f"mode={c.mode} n={c.n} k={c.k} trials={c.trials} seed={c.seed}",
            f"expected counts (same, opposite): {self.expected}",
            f"expected signed counts: {self.expected_signed}",
            f"pass {self.pass_count}/{c.trials}, fail {self.fail_count}, "
            f"skipped {self.skipped_count}, {self.duration:.2f} s",
        ]
        tally: dict[tuple, int] = {}
        for o in self.outcomes:
            if o.status == "skipped":
                continue
            key = (o.raw_count_same, o.raw_count_opposite, o.signed_count_same, o.signed_count_opposite)
            tally[key] = tally.get(key, 0) + 1
        if tally:
            lines.append("raw same  raw opp  signed same  signed opp  trials")
            for key in sorted(tally, key=str):
                cells = "".join(f"{str(v):>{w}}" for v, w in zip(key, (8, 9, 13, 12)))
                lines.append(f"{cells}  {tally[key]:>6}")
        failing = [o for o in self.outcomes if o.status == "fail"][:5]
        for o in failing:
            lines.append(f"trial {o.index} failed: {'; '.join(o.reasons)}")
        return "\n".join(lines)


def trial_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(index,))


def _reflection(dim: int) -> np.ndarray:
    r = np.eye(dim)
    r[-1, -1] = -1.0
    return r


def sample_pair(config: ExperimentConfig, index: int) -> StructurePair:
    """The pair used by trial ``index`` of a run."""
    s0, s1 = trial_seed(config.seed, index).spawn(2)
    n = config.n
    if config.orthogonal:
        J0 = random_orthogonal_J(n, 1, s0)
        J1 = random_orthogonal_J(n, 1 if config.same_orientation else -1, s1)
        return StructurePair(J0, J1)
    J0 = random_general_J(n, 1, s0, config.cond_bound)
    J1 = random_general_J(n, 1, s1, config.cond_bound)
    if not config.same_orientation:
        # negation flips the orientation only in odd complex dimension
        J1 = negate(J1) if n % 2 else conjugate(J1, _reflection(2 * n))
    return StructurePair(J0, J1)


def _check_orthogonal(rep: IntersectionReport, config: ExperimentConfig) -> list[str]:
    reasons = []
    exp = counts.expected_counts(config.same_orientation, config.n, config.k)
    got = (rep.raw_count_same, rep.raw_count_opposite)
    if got != exp:
        reasons.append(f"raw counts {got} != expected {exp}")
    for p in rep.points:
        if not p.transverse:
            reasons.append(f"non-transverse point (gap {p.gap:.3g})")
            continue
        want = counts.expected_local_sign(config.same_orientation, config.k, p.relative_orientation)
        if p.local_sign != want:
            reasons.append(f"local sign {p.local_sign} at a {p.relative_orientation} point, expected {want}")
    return reasons


def _check_general(rep: IntersectionReport, config: ExperimentConfig) -> list[str]:
    reasons = []
    exp = counts.expected_signed_counts(config.same_orientation, config.n, config.k)
    got = (rep.signed_count_same, rep.signed_count_opposite)
    if got != exp:
        reasons.append(f"signed counts {got} != expected {exp}")
    for raw, e, label in ((rep.raw_count_same, exp[0], "same"), (rep.raw_count_opposite, exp[1], "opposite")):
        if raw < abs(e) or (raw - abs(e)) % 2:
            reasons.append(f"raw {label} count {raw} incompatible with signed count {e}")
    return reasons


def run_trial(config: ExperimentConfig, index: int) -> TrialOutcome:
    try:
        pair = sample_pair(config, index)
        rep = common_invariant_planes(
            pair, config.k, config.tol, config.cluster_tol, config.trans_tol,
            mode="orthogonal" if config.orthogonal else "general",
        )
    except NonGenericSpectrum as exc:
        return TrialOutcome(index, "skipped", reasons=[f"non-generic spectrum: {exc}"])
    except (ClusterAmbiguity, NoConvergence) as exc:
        return TrialOutcome(index, "fail", reasons=[f"{type(exc).__name__}: {exc}"])

    outcome = TrialOutcome(
        index, "pass",
        raw_count_same=rep.raw_count_same, raw_count_opposite=rep.raw_count_opposite,
        signed_count_same=rep.signed_count_same, signed_count_opposite=rep.signed_count_opposite,
        signs=[p.local_sign for p in rep.points],
        all_transverse=all(p.transverse for p in rep.points),
    )
    if not rep.generic:
        outcome.status = "skipped"
        outcome.reasons = ["continuum component" if rep.continuum else "non-transverse point"]
        return outcome
    check = _check_orthogonal if config.orthogonal else _check_general
    outcome.reasons = check(rep, config)
    if outcome.reasons:
        outcome.status = "fail"
    return outcome


def run_trials(config: ExperimentConfig) -> ExperimentReport:
    """Run ``config.trials`` independent trials and collect the outcomes.

    Orthogonal modes require the raw counts to equal the expected counts and
    every point to be transverse with the predicted local sign.  General
    modes require the signed counts to match and the raw counts to exceed
    them by an even number.  Trials whose spectrum or intersection is not
    generic are skipped.

    Examples
    --------
    >>> rep = run_trials(ExperimentConfig("orth-same", n=4, k=2, trials=3, seed=7))
    >>> rep.pass_count, [o.raw_count_same for o in rep.outcomes]
    (3, [2, 2, 2])
    """
    start = time.perf_counter()
    outcomes = [run_trial(config, i) for i in range(config.trials)]
    return ExperimentReport(config, outcomes, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# invariance checks


def _sample_conjugation_pair(pair_seed: int, n: int, pair_kind: str) -> StructurePair:
    s0, s1 = np.random.SeedSequence(pair_seed).spawn(2)
    if pair_kind == "orthogonal":
        return StructurePair(random_orthogonal_J(n, 1, s0), random_orthogonal_J(n, 1, s1))
    if pair_kind == "orthogonal-opposite":
        return StructurePair(random_orthogonal_J(n, 1, s0), random_orthogonal_J(n, -1, s1))
    if pair_kind == "general":
        return StructurePair(random_general_J(n, 1, s0), random_general_J(n, 1, s1))
    raise ValueError(f"unknown pair kind {pair_kind!r}")


def sample_conjugator(g_seed: int, dim: int, g_kind: str, cond_bound: float = 20.0,
                      max_tries: int = 10_000) -> np.ndarray:
    """An identity, Haar-orthogonal, or well-conditioned Gaussian matrix."""
    rng = np.random.default_rng(g_seed)
    if g_kind == "identity":
        return np.eye(dim)
    if g_kind == "orthogonal":
        return haar_orthogonal(dim, rng)
    if g_kind == "invertible":
        for _ in range(max_tries):
            g = rng.standard_normal((dim, dim))
            if np.linalg.cond(g) <= cond_bound:
                return g
        raise ValueError(f"no conjugator with cond <= {cond_bound} found")
    raise ValueError(f"unknown conjugator kind {g_kind!r}")


def _summary(rep: IntersectionReport) -> tuple:
    return (rep.raw_count_same, rep.raw_count_opposite,
            rep.signed_count_same, rep.signed_count_opposite)


def _planes_match(src: list, dst: list, g: np.ndarray, tol: float) -> bool:
    """Every ``gP`` appears in ``dst`` with the same relative orientation."""
    if len(src) != len(dst):
        return False
    for p in src:
        image = p.plane.transformed(g)
        if not any(image.same_span(q.plane, tol) and p.relative_orientation == q.relative_orientation
                   for q in dst):
            return False
    return True


def verify_conjugation_invariance(pair_seed: int, g_seed: int, n: int, k: int,
                                  pair_kind: str = "orthogonal", g_kind: str = "orthogonal",
                                  tol: float = 1e-7) -> bool:
    """Whether conjugating both structures by ``g`` leaves the intersection unchanged.

    Compares raw counts, the orientation split and signed counts, and checks
    that the planes of the conjugated pair are the images ``gP``.
    """
    pair = _sample_conjugation_pair(pair_seed, n, pair_kind)
    g = sample_conjugator(g_seed, 2 * n, g_kind)
    before = common_invariant_planes(pair, k, mode="general")
    after = common_invariant_planes(pair.conjugated(g), k, mode="general")
    if _summary(before) != _summary(after):
        return False
    return _planes_match(before.points, after.points, g, tol)


def verify_negation_invariance(pair_seed: int, n: int, k: int,
                               pair_kind: str = "orthogonal", tol: float = 1e-7) -> bool:
    """Whether ``(-J0, -J1)`` has the same planes and relative orientations as ``(J0, J1)``."""
    pair = _sample_conjugation_pair(pair_seed, n, pair_kind)
    before = common_invariant_planes(pair, k, mode="general")
    after = common_invariant_planes(pair.negated(), k, mode="general")
    if (before.raw_count_same, before.raw_count_opposite) != (after.raw_count_same, after.raw_count_opposite):
        return False
    return _planes_match(before.points, after.points, np.eye(2 * n), tol)


# ---------------------------------------------------------------------------
# the example in R^4 = H


@dataclass
class R4Report:
    a: float
    b: float
    degenerate: bool
    planes: list[OrientedPlane] = field(default_factory=list)
    transverse: list[bool] = field(default_factory=list)
    signs: list[int | None] = field(default_factory=list)
    quaternions: list[la.Quaternion] = field(default_factory=list)
    report: IntersectionReport | None = None

    @property
    def signed_total(self) -> int | None:
        if self.degenerate or any(s is None for s in self.signs):
            return None
        return sum(self.signs)

    def describe(self) -> str:
        if self.degenerate:
            return f"degenerate parameters a={self.a:g}, b={self.b:g}: not computed"
        ordered = sorted(self.signs, key=lambda s: -2 if s is None else -s)
        signs = " ".join("?" if s is None else f"{s:+d}" for s in ordered)
        return f"{len(self.planes)} points, signs {signs}, signed total {self.signed_total}"

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "degenerate": self.degenerate,
            "planes": [p.frame.tolist() for p in self.planes],
            "transverse": self.transverse,
            "signs": self.signs,
            "signed_total": self.signed_total,
            "quaternions": [q.as_vector().tolist() for q in self.quaternions],
        }


def r4_pair(a: float, b: float) -> StructurePair:
    """``(J0, g J0 g^{-1})`` with ``g = diag(1/a, a, 1/b, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    g = np.diag([1 / a, a, 1 / b, b])
    J0 = standard_J(2)
    return StructurePair(J0, conjugate(J0, g))


def example_r4(a: float, b: float, tol: float = 1e-9) -> R4Report:
    """Common complex lines of ``J0`` and its diagonal conjugate in ``R^4``.

    For ``a`` different from ``b`` and ``1/b`` the two structures share
    exactly the coordinate lines ``R^2 + 0`` and ``0 + R^2``; both are
    transverse and their local signs cancel.

    Examples
    --------
    >>> example_r4(1.2, 0.8).describe()
    '2 points, signs +1 -1, signed total 0'
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if math.isclose(a, b, rel_tol=tol) or math.isclose(a * b, 1.0, rel_tol=tol):
        return R4Report(a, b, degenerate=True)
    rep = common_invariant_planes(r4_pair(a, b), 1, mode="general")
    pts = sorted(rep.points, key=lambda p: -abs(p.plane.frame[0, 0]) - abs(p.plane.frame[1, 0]))
    return R4Report(
        a, b, degenerate=False,
        planes=[p.plane for p in pts],
        transverse=[p.transverse for p in pts],
        signs=[p.local_sign for p in pts],
        quaternions=[plane_to_unit_quaternion(p.plane) for p in pts],
        report=rep,
    )


def _boundary_objective(xy: np.ndarray) -> float:
    x, y = xy
    return y / (x * x + y * y + 1.0)


def example_r4_boundary(b: float, grid: int = 401, half_width: float = 10.0) -> float:
    """Largest latitude ``u`` reached by the lines of the ``a = b`` structure.

    Maximises ``c(x, y) = (1/b**2 - b**2) * y / (x**2 + y**2 + 1)`` with a grid
    search over ``[-half_width, half_width]**2`` followed by a local
    refinement, then returns ``u = c / sqrt(1 + c**2)``.  Outside the interval
    ``SAFE_INTERVAL`` the value is still returned but a warning is issued,
    since the image need not be a proper cap there.
    """
    if not 0 < b < 1:
        raise ValueError("need 0 < b < 1")
    if not SAFE_INTERVAL[0] <= b < SAFE_INTERVAL[1]:
        warnings.warn(f"b={b} lies outside the safe interval {SAFE_INTERVAL}", stacklevel=2)
    axis = np.linspace(-half_width, half_width, grid)
    X, Y = np.meshgrid(axis, axis)
    vals = Y / (X * X + Y * Y + 1.0)
    i = np.unravel_index(np.argmax(vals), vals.shape)
    start = np.array([X[i], Y[i]])
    res = optimize.minimize(lambda p: -_boundary_objective(p), start, method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 10_000})
    best = max(-res.fun, vals[i])
    c = (1 / b**2 - b**2) * best
    return float(c / math.sqrt(1 + c * c))
