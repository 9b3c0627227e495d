"""Complex structures, pairs of them, sampling, and orthogonal-pair classification."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import linalg as la
from .errors import (
    ClusterAmbiguity,
    EmptySubspace,
    InvalidSignature,
    NotOrthogonal,
    OddDimension,
    SamplingExhausted,
    SingularConjugator,
)
from .linalg import DEFAULT_TOL

CLUSTER_TOL = 1e-7
ORTHO_TOL = 1e-8

R90 = np.array([[0.0, -1.0], [1.0, 0.0]])


def is_complex_structure(M, tol: float = DEFAULT_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("complex structure must be a square matrix")
    dim = M.shape[0]
    if dim % 2:
        raise OddDimension(f"dimension {dim} is odd")
    return bool(np.linalg.norm(M @ M + np.eye(dim)) <= tol * dim)


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """A real ``2n x 2n`` matrix ``J`` with ``J @ J == -I``."""

    J: np.ndarray

    def __post_init__(self):
        J = np.array(self.J, dtype=float)
        J.setflags(write=False)
        object.__setattr__(self, "J", J)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("complex structure must be a square matrix")
        if J.shape[0] % 2:
            raise OddDimension(f"dimension {J.shape[0]} is odd")

    @property
    def dim(self) -> int:
        return self.J.shape[0]

    @property
    def n(self) -> int:
        return self.dim // 2

    @cached_property
    def orientation(self) -> int:
        return orientation_sign(self)

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        return is_complex_structure(self.J, tol)

    def is_orthogonal(self, tol: float = ORTHO_TOL) -> bool:
        return bool(np.linalg.norm(self.J.T @ self.J - np.eye(self.dim)) <= tol * self.dim)


def orientation_sign(J: ComplexStructure | np.ndarray) -> int:
    """Orientation a complex structure induces, relative to the standard one.

    The sign of ``det(v1, J v1, ..., vn, J vn)`` does not depend on the
    greedy choices made while building the basis.
    """
    M = J.J if isinstance(J, ComplexStructure) else np.asarray(J, dtype=float)
    return la.adapted_orientation(M)


def standard_J(n: int) -> ComplexStructure:
    return ComplexStructure(la.block_diag(*([R90] * n)))


def negate(J: ComplexStructure) -> ComplexStructure:
    return ComplexStructure(-J.J)


def conjugate(J: ComplexStructure, g, tol: float = 1e-12) -> ComplexStructure:
    """``g J g^{-1}``."""
    g = np.asarray(g, dtype=float)
    svals = np.linalg.svd(g, compute_uv=False)
    if svals[-1] <= tol * svals[0]:
        raise SingularConjugator(f"conjugator is singular (cond={svals[0] / max(svals[-1], 1e-300):.3g})")
    return ComplexStructure(g @ np.linalg.solve(g.T, J.J.T).T)


def reflected_J(n: int) -> ComplexStructure:
    """``J0`` conjugated by the reflection swapping the last two coordinates."""
    J = standard_J(n).J.copy()
    J[-2:, -2:] = -R90
    return ComplexStructure(J)


def haar_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SO(dim)."""
    Z = rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(Z)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, [0, 1]] = Q[:, [1, 0]]
    return Q


def random_orthogonal_J(n: int, orientation: int = 1, seed=None) -> ComplexStructure:
    """``g J0 g^T`` with ``g`` Haar on SO(2n); reflected ``J0`` for orientation -1."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    base = standard_J(n) if orientation > 0 else reflected_J(n)
    g = haar_orthogonal(2 * n, rng)
    J = g @ base.J @ g.T
    # J is exactly skew-orthogonal up to rounding; symmetrize the error away
    J = 0.5 * (J - J.T)
    return ComplexStructure(J)


def random_general_J(
    n: int,
    orientation: int = 1,
    seed=None,
    cond_bound: float = 50.0,
    max_tries: int = 10_000,
) -> ComplexStructure:
    """``g J0 g^{-1}`` for a Gaussian ``g`` with condition number at most ``cond_bound``."""
    if cond_bound <= 1:
        raise ValueError("cond_bound must exceed 1")
    rng = np.random.default_rng(seed)
    base = standard_J(n) if orientation > 0 else reflected_J(n)
    for _ in range(max_tries):
        g = rng.standard_normal((2 * n, 2 * n))
        if np.linalg.cond(g) <= cond_bound:
            if np.linalg.det(g) < 0:
                g[:, 0] = -g[:, 0]
            return conjugate(base, g)
    raise SamplingExhausted(f"no Gaussian matrix with cond <= {cond_bound} in {max_tries} tries")


@dataclass(frozen=True, eq=False)
class StructurePair:
    J0: ComplexStructure
    J1: ComplexStructure

    def __post_init__(self):
        if not isinstance(self.J0, ComplexStructure):
            object.__setattr__(self, "J0", ComplexStructure(self.J0))
        if not isinstance(self.J1, ComplexStructure):
            object.__setattr__(self, "J1", ComplexStructure(self.J1))
        if self.J0.dim != self.J1.dim:
            raise ValueError("structures live on spaces of different dimension")

    @property
    def dim(self) -> int:
        return self.J0.dim

    @property
    def n(self) -> int:
        return self.J0.n

    @cached_property
    def K(self) -> np.ndarray:
        """``-J0 J1``; orthogonal when both structures are."""
        return -self.J0.J @ self.J1.J

    @cached_property
    def is_orthogonal(self) -> bool:
        return self.J0.is_orthogonal() and self.J1.is_orthogonal()

    @property
    def same_orientation(self) -> bool:
        return self.J0.orientation == self.J1.orientation

    def conjugated(self, g) -> "StructurePair":
        return StructurePair(conjugate(self.J0, g), conjugate(self.J1, g))

    def negated(self) -> "StructurePair":
        return StructurePair(negate(self.J0), negate(self.J1))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "J0": self.J0.J.tolist(), "J1": self.J1.J.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "StructurePair":
        J0 = np.asarray(doc["J0"], dtype=float)
        J1 = np.asarray(doc["J1"], dtype=float)
        if "dim" in doc and (J0.shape != (doc["dim"], doc["dim"]) or J1.shape != J0.shape):
            raise ValueError(f"matrices do not match dim={doc['dim']}")
        pair = cls(ComplexStructure(J0), ComplexStructure(J1))
        for J in (pair.J0, pair.J1):
            if not J.is_valid(1e-6):
                raise ValueError("matrix does not square to -I")
        return pair


def load_pair(path) -> StructurePair:
    return StructurePair.from_dict(json.loads(Path(path).read_text()))


def save_pair(pair: StructurePair, path) -> None:
    Path(path).write_text(json.dumps(pair.to_dict(), indent=2) + "\n")


# ---------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class PairSignature:
    """Isomorphism type ``H_t1^r1 + ... + C^l + Cbar^s`` of an orthogonal pair."""

    blocks: tuple[tuple[float, int], ...] = ()
    l: int = 0
    s: int = 0
    near_degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "blocks", tuple((float(t), int(r)) for t, r in self.blocks)
        )

    @property
    def dim(self) -> int:
        return sum(4 * r for _, r in self.blocks) + 2 * self.l + 2 * self.s

    @property
    def n(self) -> int:
        return self.dim // 2

    @property
    def same_orientation(self) -> bool:
        return self.s % 2 == 0

    def validate(self, dim: int | None = None) -> None:
        thetas = [t for t, _ in self.blocks]
        if any(not (0.0 < t < math.pi) for t in thetas):
            raise InvalidSignature("angles must lie in (0, pi)")
        if any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise InvalidSignature("angles must be strictly increasing")
        if any(r < 1 for _, r in self.blocks) or self.l < 0 or self.s < 0:
            raise InvalidSignature("multiplicities must be positive and l, s >= 0")
        if self.dim == 0:
            raise InvalidSignature("empty signature")
        if dim is not None and self.dim != dim:
            raise InvalidSignature(f"signature has dimension {self.dim}, expected {dim}")

    def matches(self, other: "PairSignature", tol: float = 1e-7) -> bool:
        if (self.l, self.s) != (other.l, other.s) or len(self.blocks) != len(other.blocks):
            return False
        return all(
            r1 == r2 and abs(t1 - t2) <= tol
            for (t1, r1), (t2, r2) in zip(self.blocks, other.blocks)
        )

    def to_dict(self) -> dict:
        return {
            "blocks": [{"theta": t, "mult": r} for t, r in self.blocks],
            "l": self.l,
            "s": self.s,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PairSignature":
        blocks = tuple((float(b["theta"]), int(b["mult"])) for b in doc.get("blocks", []))
        return cls(blocks, int(doc.get("l", 0)), int(doc.get("s", 0)))

    @classmethod
    def parse(cls, text: str) -> "PairSignature":
        """Parse ``"theta:mult[,theta:mult...];l=L;s=S"``."""
        blocks: list[tuple[float, int]] = []
        l = s = 0
        for part in text.strip().split(";"):
            part = part.strip()
            if not part:
                continue
            if part.startswith("l="):
                l = int(part[2:])
            elif part.startswith("s="):
                s = int(part[2:])
            else:
                for item in part.split(","):
                    theta, _, mult = item.partition(":")
                    blocks.append((float(theta), int(mult) if mult else 1))
        sig = cls(tuple(blocks), l, s)
        sig.validate()
        return sig

    def format(self) -> str:
        blocks = ",".join(f"{t!r}:{r}" for t, r in self.blocks)
        return f"{blocks};l={self.l};s={self.s}"


def _angles(K: np.ndarray) -> np.ndarray:
    return np.angle(la.eigvals(K))


def classify_orthogonal_pair(
    pair: StructurePair, tol: float = DEFAULT_TOL, cluster_tol: float = CLUSTER_TOL
) -> PairSignature:
    """Signature of an orthogonal pair from the spectrum of ``K = -J0 J1``.

    Raises
    ------
    NotOrthogonal
        If either structure fails ``J^T J = I``.
    ClusterAmbiguity
        If an angle gap falls between ``cluster_tol`` and ``10 * cluster_tol``
        or a cluster has a multiplicity that no signature can produce.

    A block angle within ``10 * cluster_tol`` of 0 or pi sets
    ``near_degenerate`` on the result.
    """
    if not pair.is_orthogonal:
        raise NotOrthogonal("classification needs both structures orthogonal")
    phis = _angles(pair.K)
    absphi = np.abs(phis)

    holo = absphi <= cluster_tol
    anti = absphi >= math.pi - cluster_tol
    n_holo, n_anti = int(holo.sum()), int(anti.sum())
    if n_holo % 2 or n_anti % 2:
        raise ClusterAmbiguity("odd multiplicity at eigenvalue +-1")

    thetas = np.sort(absphi[~holo & ~anti])
    clusters: list[list[float]] = []
    for t in thetas:
        if clusters and t - clusters[-1][-1] <= cluster_tol:
            clusters[-1].append(t)
        else:
            if clusters and t - clusters[-1][-1] <= 10 * cluster_tol:
                raise ClusterAmbiguity(f"eigenvalue gap straddles cluster tolerance near {t}")
            clusters.append([t])
    blocks = []
    near = False
    for c in clusters:
        if len(c) % 4:
            raise ClusterAmbiguity(f"angle cluster at {c[0]:.6g} has multiplicity {len(c)}")
        theta = float(np.mean(c))
        if theta <= 10 * cluster_tol or theta >= math.pi - 10 * cluster_tol:
            near = True
        blocks.append((theta, len(c) // 4))
    return PairSignature(tuple(blocks), n_holo // 2, n_anti // 2, near_degenerate=near)


def canonical_block_pair(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """``(L_i, L_{i e^{j theta}})`` on the quaternions."""
    a = la.left_mult_matrix(la.QI)
    b = la.left_mult_matrix(la.quat_mul(la.QI, la.quat_exp_j(theta)))
    return a, b


def construct_canonical_pair(sig: PairSignature) -> StructurePair:
    sig.validate()
    b0, b1 = [], []
    for theta, r in sig.blocks:
        a, b = canonical_block_pair(theta)
        b0 += [a] * r
        b1 += [b] * r
    b0 += [R90] * (sig.l + sig.s)
    b1 += [R90] * sig.l + [-R90] * sig.s
    return StructurePair(ComplexStructure(la.block_diag(*b0)), ComplexStructure(la.block_diag(*b1)))


def pairs_isomorphic(pA: StructurePair, pB: StructurePair, tol: float = 1e-7) -> bool:
    if pA.dim != pB.dim:
        return False
    return classify_orthogonal_pair(pA).matches(classify_orthogonal_pair(pB), tol)


def find_antiholomorphic_subspace(pair: StructurePair, tol: float = 1e-8):
    """Orthonormal, J0-oriented frame of ``ker(K + I)`` where ``J1 = -J0``.

    Returns ``(plane, complex_dim)``.
    """
    from .intersection import OrientedPlane

    K = pair.K
    F = la.nullspace(K + np.eye(pair.dim), tol, scale=1.0 + np.linalg.norm(K, 2))
    if F.shape[1] == 0:
        raise EmptySubspace("J0 + J1 has trivial kernel")
    if F.shape[1] % 2:
        raise ClusterAmbiguity("kernel of J0 + J1 has odd dimension")
    plane = OrientedPlane.from_frame(F, pair.J0)
    return plane, F.shape[1] // 2


def commutant_dimension(pair: StructurePair, tol: float = DEFAULT_TOL) -> int:
    """Real dimension of ``{X : X J0 = J0 X, X J1 = J1 X}``."""
    I = np.eye(pair.dim)
    ops = [np.kron(I, J.J) - np.kron(J.J.T, I) for J in (pair.J0, pair.J1)]
    return la.nullspace(np.vstack(ops), tol).shape[1]
