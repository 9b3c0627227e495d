"""Planes stabilised by both structures of a pair.

Two routes are provided.  For orthogonal pairs the signature of the pair
determines every component of the intersection, and the isolated planes are
sums of isotypic summands of ``K = -J0 J1``.  For general pairs the
eigenvalues of ``K`` are grouped into classes closed under ``l -> conj(l)`` and
``l -> 1/l``; each class spans a minimal jointly invariant block and the
candidate planes are unions of blocks.

Tangent spaces live in the chart ``Hom(P, P^perp)`` with coordinates
``vec(A)`` in column-major order, which is the ordered basis
``v1* x w1, ..., v1* x w_m, v2* x w1, ...``.  Its orientation does not depend
on the bases chosen for ``P`` and ``P^perp`` because both are even dimensional.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import counts
from . import linalg as la
from .errors import (
    NonGenericSpectrum,
    NotInvariant,
    NotOrthonormal,
    NotTransverse,
)
from .linalg import DEFAULT_TOL
from .structures import (
    CLUSTER_TOL,
    ComplexStructure,
    PairSignature,
    StructurePair,
    classify_orthogonal_pair,
)

INVARIANCE_TOL = 1e-7
TRANS_TOL = 1e-7
DEDUP_FACTOR = 10.0

Count = Union[int, str]
INFINITE = "infinite"


@dataclass(frozen=True, eq=False)
class OrientedPlane:
    """Oriented ``2k``-plane in ``R^{2n}`` stored as an orthonormal frame."""

    frame: np.ndarray

    def __post_init__(self):
        F = np.array(self.frame, dtype=float)
        F.setflags(write=False)
        object.__setattr__(self, "frame", F)

    @classmethod
    def from_frame(cls, F, J: ComplexStructure | None = None, tol: float = DEFAULT_TOL) -> "OrientedPlane":
        """Orthonormalize ``F``; if ``J`` is given, orient the plane by ``J``."""
        F = la.orthonormalize(np.asarray(F, dtype=float), tol)
        if J is not None and F.shape[1]:
            if la.adapted_orientation(F.T @ J.J @ F) < 0:
                F[:, -1] = -F[:, -1]
        return cls(F)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def plane_dim(self) -> int:
        return self.frame.shape[1]

    @property
    def k(self) -> int:
        return self.plane_dim // 2

    @property
    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T

    def residual(self, J: ComplexStructure | np.ndarray) -> float:
        """``||(I - F F^T) J F||``; zero iff the plane is ``J``-invariant."""
        M = J.J if isinstance(J, ComplexStructure) else J
        F = self.frame
        return float(np.linalg.norm(M @ F - F @ (F.T @ M @ F), 2))

    def is_invariant(self, J: ComplexStructure, tol: float = INVARIANCE_TOL) -> bool:
        return self.residual(J) <= tol * max(1.0, np.linalg.norm(J.J, 2))

    def same_span(self, other: "OrientedPlane", tol: float = 1e-7) -> bool:
        return la.projector_distance(self.frame, other.frame) <= tol

    def same_orientation_as(self, other: "OrientedPlane") -> bool:
        """Orientation agreement, assuming the spans coincide."""
        return bool(np.linalg.det(self.frame.T @ other.frame) > 0)

    def transformed(self, g) -> "OrientedPlane":
        """``g P`` with the orientation pushed forward."""
        return OrientedPlane.from_frame(np.asarray(g) @ self.frame)


@dataclass(frozen=True)
class IntersectionComponent:
    """One connected component of the jointly stabilised ``2k``-planes.

    ``t`` indexes quaternionic blocks, ``l_prime``/``s_prime`` the holomorphic
    and antiholomorphic parts.  In general mode ``blocks`` lists the spectral
    blocks used.
    """

    t: tuple[int, ...]
    l_prime: int
    s_prime: int
    real_dim: int
    orientation_class: str
    blocks: tuple[int, ...] = ()

    @property
    def is_point(self) -> bool:
        return self.real_dim == 0

    def to_dict(self) -> dict:
        return {
            "t": list(self.t),
            "l_prime": self.l_prime,
            "s_prime": self.s_prime,
            "real_dim": self.real_dim,
            "orientation_class": self.orientation_class,
            "blocks": list(self.blocks),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IntersectionComponent":
        return cls(tuple(d["t"]), d["l_prime"], d["s_prime"], d["real_dim"],
                   d["orientation_class"], tuple(d.get("blocks", ())))


@dataclass(frozen=True, eq=False)
class IntersectionPoint:
    plane: OrientedPlane
    relative_orientation: str
    transverse: bool
    gap: float
    local_sign: int | None
    marginal: bool = False

    def to_dict(self) -> dict:
        return {
            "frame": self.plane.frame.tolist(),
            "relative_orientation": self.relative_orientation,
            "transverse": self.transverse,
            "gap": self.gap,
            "local_sign": self.local_sign,
            "marginal": self.marginal,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IntersectionPoint":
        return cls(OrientedPlane(np.asarray(d["frame"], dtype=float)),
                   d["relative_orientation"], d["transverse"], d["gap"], d["local_sign"],
                   d.get("marginal", False))


@dataclass(eq=False)
class IntersectionReport:
    mode: str
    n: int
    k: int
    same_orientation_pair: bool
    components: list[IntersectionComponent]
    points: list[IntersectionPoint]
    raw_count_same: Count
    raw_count_opposite: Count
    signed_count_same: int | None
    signed_count_opposite: int | None
    expected_same: int
    expected_opposite: int
    generic: bool
    continuum: bool
    signature: PairSignature | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "k": self.k,
            "same_orientation_pair": self.same_orientation_pair,
            "signature": self.signature.to_dict() if self.signature else None,
            "components": [c.to_dict() for c in self.components],
            "points": [p.to_dict() for p in self.points],
            "raw_count_same": self.raw_count_same,
            "raw_count_opposite": self.raw_count_opposite,
            "signed_count_same": self.signed_count_same,
            "signed_count_opposite": self.signed_count_opposite,
            "expected_same": self.expected_same,
            "expected_opposite": self.expected_opposite,
            "generic": self.generic,
            "continuum": self.continuum,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IntersectionReport":
        sig = PairSignature.from_dict(d["signature"]) if d.get("signature") else None
        return cls(
            mode=d["mode"], n=d["n"], k=d["k"],
            same_orientation_pair=d["same_orientation_pair"],
            components=[IntersectionComponent.from_dict(c) for c in d["components"]],
            points=[IntersectionPoint.from_dict(p) for p in d["points"]],
            raw_count_same=d["raw_count_same"], raw_count_opposite=d["raw_count_opposite"],
            signed_count_same=d["signed_count_same"],
            signed_count_opposite=d["signed_count_opposite"],
            expected_same=d["expected_same"], expected_opposite=d["expected_opposite"],
            generic=d["generic"], continuum=d["continuum"], signature=sig,
            warnings=list(d.get("warnings", [])),
        )

    def points_with(self, orientation: str) -> list[IntersectionPoint]:
        return [p for p in self.points if p.relative_orientation == orientation]


# ---------------------------------------------------------------------------
# orthogonal route


def enumerate_components_orthogonal(sig: PairSignature, k: int) -> list[IntersectionComponent]:
    """Index tuples ``(t_1..t_m, l', s')`` with ``2 sum t + l' + s' = k``."""
    ranges = [range(r + 1) for _, r in sig.blocks]
    out = []
    for t in itertools.product(*ranges):
        rest = k - 2 * sum(t)
        if rest < 0:
            continue
        for lp in range(min(sig.l, rest) + 1):
            sp = rest - lp
            if sp > sig.s:
                continue
            real_dim = sum(4 * ti * (r - ti) for ti, (_, r) in zip(t, sig.blocks))
            real_dim += 2 * lp * (sig.l - lp) + 2 * sp * (sig.s - sp)
            out.append(IntersectionComponent(
                tuple(t), lp, sp, real_dim, "same" if sp % 2 == 0 else "opposite"))
    return out


def _isotypic_frames(pair: StructurePair, sig: PairSignature, tol: float):
    """Frames of the isotypic summands of ``K`` for an orthogonal pair."""
    K = pair.K
    eye = np.eye(pair.dim)
    theta_frames = [
        la.nullspace(K @ K - 2 * math.cos(theta) * K + eye, tol, nullity=4 * r)
        for theta, r in sig.blocks
    ]
    holo = la.nullspace(K - eye, tol, nullity=2 * sig.l)
    anti = la.nullspace(K + eye, tol, nullity=2 * sig.s)
    return theta_frames, holo, anti


# ---------------------------------------------------------------------------
# general route


@dataclass(frozen=True, eq=False)
class SpectralBlock:
    plane: OrientedPlane
    dim: int
    tag: str            # "block", "holo" or "antiholo"
    eigenvalue: complex

    @property
    def complex_dim(self) -> int:
        return self.dim // 2


def _rel_dist(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _orbit(lam: complex) -> list[complex]:
    return [lam, lam.conjugate(), 1 / lam, 1 / lam.conjugate()]


def spectral_blocks(
    pair: StructurePair,
    tol: float = INVARIANCE_TOL,
    cluster_tol: float = CLUSTER_TOL,
) -> list[SpectralBlock]:
    """Minimal jointly invariant blocks of a pair with generic spectrum.

    Eigenvalues of ``K`` are grouped into classes under ``l ~ conj(l)`` and
    ``l ~ 1/l``.  A class of total multiplicity 2 or 4 spans a block built as
    ``W + J0 W`` where ``W`` is the real span of one eigenvector.  Eigenvalues
    at exactly ``+1`` (``J1 = J0``) and ``-1`` (``J1 = -J0``) form one cluster
    each, of any even dimension.

    Raises
    ------
    NonGenericSpectrum
        When classes overlap at tolerance, have unexpected multiplicity, or a
        cluster at +-1 is not a genuine eigenspace.
    """
    K = pair.K
    dim = pair.dim
    try:
        vals, vecs = np.linalg.eig(K)
    except np.linalg.LinAlgError as exc:
        raise NonGenericSpectrum(str(exc)) from exc
    vals = vals.astype(complex)
    J0, J1 = pair.J0.J, pair.J1.J
    blocks: list[SpectralBlock] = []

    unassigned = list(range(dim))
    for target, tag, sign in ((1.0, "holo", 1.0), (-1.0, "antiholo", -1.0)):
        hits = [i for i in unassigned if _rel_dist(vals[i], target) <= cluster_tol]
        near = [i for i in unassigned
                if cluster_tol < _rel_dist(vals[i], target) <= 10 * cluster_tol]
        if near:
            raise NonGenericSpectrum(f"eigenvalue within 10*cluster_tol of {target:+.0f}")
        if not hits:
            continue
        if len(hits) % 2:
            raise NonGenericSpectrum(f"odd multiplicity at {target:+.0f}")
        F = la.nullspace(K - target * np.eye(dim), nullity=len(hits))
        if np.linalg.norm((J1 - sign * J0) @ F, 2) > tol * max(1.0, np.linalg.norm(J0, 2)):
            raise NonGenericSpectrum(f"eigenvalue {target:+.0f} is not semisimple")
        blocks.append(SpectralBlock(OrientedPlane.from_frame(F, pair.J0), len(hits), tag, complex(target)))
        unassigned = [i for i in unassigned if i not in hits]

    while unassigned:
        i0 = unassigned[0]
        orbit = _orbit(vals[i0])
        dists = {j: min(_rel_dist(vals[j], o) for o in orbit) for j in unassigned}
        members = [j for j, dj in dists.items() if dj <= cluster_tol]
        if any(cluster_tol < dj <= 10 * cluster_tol for dj in dists.values()):
            raise NonGenericSpectrum(f"eigenvalue class of {vals[i0]:.6g} straddles cluster_tol")
        size = len(members)
        if size not in (2, 4):
            raise NonGenericSpectrum(f"eigenvalue class of {vals[i0]:.6g} has multiplicity {size}")
        j = max(members, key=lambda m: vals[m].imag)
        v = vecs[:, j]
        v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
        W = np.column_stack([v.real, v.imag])
        B = np.hstack([W, J0 @ W])
        U, svals, _ = np.linalg.svd(B, full_matrices=False)
        rank = int(np.sum(svals > 1e-6 * svals[0]))
        if rank != size:
            raise NonGenericSpectrum(
                f"block for {vals[i0]:.6g} has dimension {rank}, class has {size}")
        plane = OrientedPlane.from_frame(U[:, :size], pair.J0)
        blocks.append(SpectralBlock(plane, size, "block", complex(vals[j])))
        unassigned = [m for m in unassigned if m not in members]

    for b in blocks:
        for J in (pair.J0, pair.J1):
            if not b.plane.is_invariant(J, tol):
                raise NonGenericSpectrum(f"block at {b.eigenvalue:.6g} is not invariant")
    return blocks


# ---------------------------------------------------------------------------
# local geometry at a plane


def _require_invariant(J: ComplexStructure, P: OrientedPlane, tol: float) -> None:
    if not P.is_invariant(J, tol):
        raise NotInvariant(f"plane residual {P.residual(J):.3g} exceeds tolerance")


def relative_orientation(pair: StructurePair, P: OrientedPlane, tol: float = INVARIANCE_TOL) -> str:
    """``"same"`` iff ``J0`` and ``J1`` induce the same orientation on ``P``."""
    for J in (pair.J0, pair.J1):
        _require_invariant(J, P, tol)
    F = P.frame
    s0 = la.adapted_orientation(F.T @ pair.J0.J @ F)
    s1 = la.adapted_orientation(F.T @ pair.J1.J @ F)
    return "same" if s0 == s1 else "opposite"


def _oriented_complement(P: OrientedPlane) -> np.ndarray:
    G = la.complement(P.frame)
    if G.shape[1] and np.linalg.det(np.hstack([P.frame, G])) < 0:
        G[:, -1] = -G[:, -1]
    return G


def _tangent(J: ComplexStructure, F: np.ndarray, G: np.ndarray, tol: float):
    """Tangent basis (columns of vec coordinates) and its complex structure."""
    M = J.J
    if G.shape[1] == 0:
        empty = np.zeros((0, 0))
        return empty, empty, F.T @ M @ F, empty
    if np.linalg.norm(G.T @ M @ F, 2) > tol * max(1.0, np.linalg.norm(M, 2)):
        raise NotInvariant("plane is not invariant")
    a = F.T @ M @ F
    d = G.T @ M @ G
    p, q = a.shape[0], d.shape[0]
    nullity = p * q // 2
    B = la.nullspace(la.sylvester_operator(a, d), nullity=nullity)
    D = np.kron(np.eye(p), d)
    return B, B.T @ D @ B, a, d


def tangent_space(J: ComplexStructure, P: OrientedPlane, tol: float = INVARIANCE_TOL) -> list[np.ndarray]:
    """Basis of ``T_P Gr^J`` inside ``Hom(P, P^perp)``: ``{A : d A = A a}``.

    Matrices are ``(2n-2k) x 2k`` in the coordinates of ``P`` and the oriented
    complement returned by the chart; the basis is Frobenius orthonormal.
    """
    G = _oriented_complement(P)
    B, _, a, d = _tangent(J, P.frame, G, tol)
    return [la.unvec(col, d.shape[0], a.shape[0]) for col in B.T]


def _oriented_tangents(pair: StructurePair, P: OrientedPlane, tol: float):
    G = _oriented_complement(P)
    B0, D0, _, _ = _tangent(pair.J0, P.frame, G, tol)
    B1, D1, _, _ = _tangent(pair.J1, P.frame, G, tol)
    return B0, D0, B1, D1


def is_transverse(pair: StructurePair, P: OrientedPlane, tol: float = TRANS_TOL,
                  inv_tol: float = INVARIANCE_TOL) -> tuple[bool, float]:
    """Whether the two tangent spaces span ``Hom(P, P^perp)``, and the gap.

    The gap is the smallest singular value of the stacked orthonormal tangent
    bases; for ``k = n`` the chart is zero dimensional and the gap is 1.
    """
    B0, _, B1, _ = _oriented_tangents(pair, P, inv_tol)
    S = np.hstack([B0, B1])
    if S.size == 0:
        return True, 1.0
    gap = float(np.linalg.svd(S, compute_uv=False)[-1])
    return gap > tol, gap


def local_intersection_sign(pair: StructurePair, P: OrientedPlane, tol: float = TRANS_TOL,
                            inv_tol: float = INVARIANCE_TOL) -> int:
    """Sign of the intersection at a transverse plane.

    Each tangent space is oriented by its complex structure ``A -> d A``,
    where ``d`` is the structure induced on the complement, and the
    concatenated bases are compared with the chart orientation.  For a pair
    of opposite orientation this gives ``(-1)**k`` at planes where the two
    structures induce the same orientation and ``+1`` where they differ
    (see :func:`jpairs.counts.expected_local_sign`).
    """
    B0, D0, B1, D1 = _oriented_tangents(pair, P, inv_tol)
    S = np.hstack([B0, B1])
    if S.size == 0:
        return 1
    if np.linalg.svd(S, compute_uv=False)[-1] <= tol:
        raise NotTransverse("tangent spaces do not span the chart")
    basis = np.hstack([B0 @ la.adapted_basis(D0), B1 @ la.adapted_basis(D1)])
    return 1 if np.linalg.det(basis) > 0 else -1


def plane_to_unit_quaternion(P: OrientedPlane, tol: float = 1e-8) -> la.Quaternion:
    """``alpha = v2 conj(v1)`` for an oriented orthonormal frame of a 2-plane in H."""
    F = P.frame
    if F.shape != (4, 2):
        raise ValueError("need an oriented 2-plane in R^4")
    if np.linalg.norm(F.T @ F - np.eye(2)) > tol:
        raise NotOrthonormal("frame is not orthonormal")
    v1 = la.Quaternion.from_vector(F[:, 0])
    v2 = la.Quaternion.from_vector(F[:, 1])
    return v2 * v1.conj()


def evaluate_point(pair: StructurePair, P: OrientedPlane, trans_tol: float = TRANS_TOL,
                   inv_tol: float = INVARIANCE_TOL) -> IntersectionPoint:
    rel = relative_orientation(pair, P, inv_tol)
    transverse, gap = is_transverse(pair, P, trans_tol, inv_tol)
    sign = local_intersection_sign(pair, P, trans_tol, inv_tol) if transverse else None
    marginal = (not transverse) and gap >= trans_tol / 10
    return IntersectionPoint(P, rel, transverse, gap, sign, marginal)


# ---------------------------------------------------------------------------
# driver


def _tally(points: list[IntersectionPoint], components: list[IntersectionComponent], cls: str):
    continuum = any(c.orientation_class == cls and not c.is_point for c in components)
    pts = [p for p in points if p.relative_orientation == cls]
    raw: Count = INFINITE if continuum else len(pts)
    if continuum or any(not p.transverse for p in pts):
        signed = None
    else:
        signed = sum(p.local_sign for p in pts)
    return raw, signed


def _dedup(points: list[IntersectionPoint]) -> list[IntersectionPoint]:
    out: list[IntersectionPoint] = []
    for p in points:
        if not any(p.plane.same_span(q.plane, DEDUP_FACTOR * 1e-9) for q in out):
            out.append(p)
    return out


def common_invariant_planes(
    pair: StructurePair,
    k: int,
    tol: float = DEFAULT_TOL,
    cluster_tol: float = CLUSTER_TOL,
    trans_tol: float = TRANS_TOL,
    inv_tol: float = INVARIANCE_TOL,
    mode: str | None = None,
) -> IntersectionReport:
    """All ``2k``-planes stabilised by both ``J0`` and ``J1``.

    ``mode`` is ``"orthogonal"`` (signature route), ``"general"`` (spectral
    blocks) or ``None`` to pick by whether the pair is orthogonal.
    """
    n = pair.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if mode is None:
        mode = "orthogonal" if pair.is_orthogonal else "general"
    same = pair.same_orientation
    exp_same, exp_opp = counts.expected_counts(same, n, k)
    notes: list[str] = []
    sig = None

    if mode == "orthogonal":
        sig = classify_orthogonal_pair(pair, tol, cluster_tol)
        if sig.near_degenerate:
            notes.append("near-degenerate angle cluster")
        components = enumerate_components_orthogonal(sig, k)
        theta_frames, holo, anti = _isotypic_frames(pair, sig, tol)
        points = []
        for comp in components:
            if not comp.is_point:
                continue
            cols = [F for F, ti in zip(theta_frames, comp.t) if ti]
            if comp.l_prime:
                cols.append(holo)
            if comp.s_prime:
                cols.append(anti)
            P = OrientedPlane.from_frame(np.hstack(cols), pair.J0)
            pt = evaluate_point(pair, P, trans_tol, inv_tol)
            if pt.relative_orientation != comp.orientation_class:
                notes.append("numerical orientation disagrees with component class")
            points.append(pt)
    elif mode == "general":
        blocks = spectral_blocks(pair, inv_tol, cluster_tol)
        choices = [
            [0, b.complex_dim] if b.tag == "block" else list(range(b.complex_dim + 1))
            for b in blocks
        ]
        components, points = [], []
        for pick in itertools.product(*choices):
            if sum(pick) != k:
                continue
            cols = []
            real_dim = 0
            for b, c in zip(blocks, pick):
                if c == 0:
                    continue
                if c == b.complex_dim:
                    cols.append(b.plane.frame)
                else:
                    F = b.plane.frame
                    sub = la.adapted_basis(F.T @ pair.J0.J @ F)[:, :2 * c]
                    cols.append(F @ sub)
                    real_dim += 2 * c * (b.complex_dim - c)
            P = OrientedPlane.from_frame(np.hstack(cols), pair.J0)
            used = tuple(i for i, c in enumerate(pick) if c)
            lp = sum(c for b, c in zip(blocks, pick) if b.tag == "holo")
            sp = sum(c for b, c in zip(blocks, pick) if b.tag == "antiholo")
            if real_dim:
                rel = relative_orientation(pair, P, inv_tol)
                components.append(IntersectionComponent((), lp, sp, real_dim, rel, used))
                continue
            pt = evaluate_point(pair, P, trans_tol, inv_tol)
            components.append(IntersectionComponent((), lp, sp, 0, pt.relative_orientation, used))
            points.append(pt)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    points = _dedup(points)
    raw_same, signed_same = _tally(points, components, "same")
    raw_opp, signed_opp = _tally(points, components, "opposite")
    continuum = any(not c.is_point for c in components)
    generic = not continuum and all(p.transverse for p in points)
    if any(p.marginal for p in points):
        notes.append("marginal transversality gap")
    return IntersectionReport(
        mode=mode, n=n, k=k, same_orientation_pair=same,
        components=components, points=points,
        raw_count_same=raw_same, raw_count_opposite=raw_opp,
        signed_count_same=signed_same, signed_count_opposite=signed_opp,
        expected_same=exp_same, expected_opposite=exp_opp,
        generic=generic, continuum=continuum, signature=sig, warnings=notes,
    )
