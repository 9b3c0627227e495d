"""Small dense real linear algebra: eigenpairs, frames, nullspaces, quaternions.

All routines work on plain ``numpy`` arrays and take an explicit relative
tolerance.  Dimensions are small (at most 32), so nothing here tries to be
clever about performance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NumericalAmbiguityWarning, RankDeficient

DEFAULT_TOL = 1e-9
MAX_DIM = 32


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def eig_complex(M, tol: float = DEFAULT_TOL) -> list[tuple[complex, np.ndarray]]:
    """All eigenpairs of a real square matrix.

    Eigenvectors are unit norm.  Every pair is checked against
    ``||Mv - lv|| <= tol * ||M||``.

    Raises
    ------
    NoConvergence
        If the QR iteration fails or a returned pair misses the residual bound.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("eig_complex needs a square matrix")
    if M.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {M.shape[0]} exceeds {MAX_DIM}")
    try:
        vals, vecs = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    scale = max(np.linalg.norm(M, 2), 1.0)
    pairs = []
    for lam, v in zip(vals, vecs.T):
        v = v / np.linalg.norm(v)
        if np.linalg.norm(M @ v - lam * v) > tol * scale:
            raise NoConvergence(f"eigenpair residual too large at {lam}")
        pairs.append((complex(lam), v))
    return pairs


def eigvals(M) -> np.ndarray:
    try:
        return np.linalg.eigvals(_as_matrix(M))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def vec(A: np.ndarray) -> np.ndarray:
    """Column-major flattening, so ``vec(dA) == kron(I, d) @ vec(A)``."""
    return np.asarray(A).reshape(-1, order="F")


def unvec(x: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return np.asarray(x).reshape(rows, cols, order="F")


def nullspace(M, tol: float = DEFAULT_TOL, nullity: int | None = None,
              scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical kernel of ``M``.

    Singular values below ``tol * scale`` count as zero, where ``scale``
    defaults to the largest singular value.  Pass an explicit scale when
    ``M`` is a difference such as ``K + I`` that may vanish entirely.  When ``nullity``
    is given the smallest ``nullity`` right singular vectors are returned
    regardless of the threshold.
    """
    M = _as_matrix(M)
    ncols = M.shape[1]
    if M.shape[0] < ncols:
        M = np.vstack([M, np.zeros((ncols - M.shape[0], ncols))])
    _, svals, vt = np.linalg.svd(M)
    smax = svals[0] if svals.size and svals[0] > 0 else 1.0
    if nullity is None:
        cut = tol * (smax if scale is None else scale)
        nullity = int(np.sum(svals <= cut))
        band = (svals > cut) & (svals <= 10 * cut)
        if np.any(band):
            warnings.warn(
                f"{int(band.sum())} singular value(s) within a factor 10 of the "
                f"rank threshold {cut:.3g}",
                NumericalAmbiguityWarning,
                stacklevel=2,
            )
    if nullity == 0:
        return np.zeros((ncols, 0))
    return vt[ncols - nullity:].T.copy()


def orthonormalize(B, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal frame with the same span and orientation as the columns of B.

    The change of basis from ``B`` to the result is upper triangular with a
    positive diagonal, so the orientation of the span is kept.
    """
    B = _as_matrix(B)
    if B.shape[1] == 0:
        return B.copy()
    svals = np.linalg.svd(B, compute_uv=False)
    if svals[-1] <= tol * max(svals[0], 1.0) or B.shape[1] > B.shape[0]:
        raise RankDeficient(f"columns are dependent (sigma_min={svals[-1]:.3g})")
    Q, R = np.linalg.qr(B)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def sylvester_operator(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Matrix of ``A -> d A - A a`` acting on column-major ``vec(A)``."""
    a = _as_matrix(a)
    d = _as_matrix(d)
    p, q = a.shape[0], d.shape[0]
    return np.kron(np.eye(p), d) - np.kron(a.T, np.eye(q))


def sylvester_kernel(a, d, tol: float = DEFAULT_TOL, nullity: int | None = None) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of ``{A : d A - A a = 0}``.

    ``A`` ranges over ``d.shape[0] x a.shape[0]`` matrices.
    """
    a = _as_matrix(a)
    d = _as_matrix(d)
    op = sylvester_operator(a, d)
    basis = nullspace(op, tol, nullity)
    return [unvec(col, d.shape[0], a.shape[0]) for col in basis.T]


def complement(F: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of an orthonormal frame."""
    F = np.asarray(F, dtype=float)
    n, m = F.shape
    Q, _ = np.linalg.qr(np.hstack([F, np.eye(n)]) if m else np.eye(n), mode="complete")
    return Q[:, m:n]


def adapted_basis(J: np.ndarray) -> np.ndarray:
    """Columns ``(v1, J v1, ..., vn, J vn)`` built greedily.

    Each ``v`` is a unit vector orthogonal to everything chosen so far.
    """
    J = np.asarray(J, dtype=float)
    dim = J.shape[0]
    cols: list[np.ndarray] = []
    while len(cols) < dim:
        if cols:
            Q, _ = np.linalg.qr(np.column_stack(cols), mode="complete")
            v = Q[:, len(cols)]
        else:
            v = np.zeros(dim)
            v[0] = 1.0
        cols.extend([v, J @ v])
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def adapted_orientation(J: np.ndarray) -> int:
    """Sign of ``det(v1, J v1, ..., vn, J vn)``; +1 for the empty space."""
    J = np.asarray(J, dtype=float)
    if J.shape[0] == 0:
        return 1
    return 1 if np.linalg.det(adapted_basis(J)) > 0 else -1


def projector_distance(F1: np.ndarray, F2: np.ndarray) -> float:
    """Spectral-norm distance between orthogonal projectors onto two spans."""
    if F1.shape != F2.shape:
        return float("inf")
    return float(np.linalg.norm(F1 @ F1.T - F2 @ F2.T, 2))


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def block_diag(*blocks) -> np.ndarray:
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    i = 0
    for b in blocks:
        m = b.shape[0]
        out[i:i + m, i:i + m] = b
        i += m
    return out


# ---------------------------------------------------------------------------
# quaternions, coordinates ordered (1, i, j, k)


@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_vector(cls, v) -> "Quaternion":
        w, x, y, z = (float(c) for c in v)
        return cls(w, x, y, z)

    def as_vector(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return quat_mul(self, other)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w ** 2 + self.x ** 2 + self.y ** 2 + self.z ** 2

    def is_unit(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.norm2() - 1.0) <= tol

    def allclose(self, other: "Quaternion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.as_vector(), other.as_vector(), atol=atol, rtol=0))


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
QI = Quaternion(0.0, 1.0, 0.0, 0.0)
QJ = Quaternion(0.0, 0.0, 1.0, 0.0)
QK = Quaternion(0.0, 0.0, 0.0, 1.0)


def quat_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


def left_mult_matrix(q: Quaternion) -> np.ndarray:
    """4x4 matrix of ``x -> q x`` in (1, i, j, k) coordinates."""
    w, x, y, z = q.w, q.x, q.y, q.z
    return np.array([
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ])


def right_mult_matrix(q: Quaternion) -> np.ndarray:
    """4x4 matrix of ``x -> x q``."""
    w, x, y, z = q.w, q.x, q.y, q.z
    return np.array([
        [w, -x, -y, -z],
        [x, w, z, -y],
        [y, -z, w, x],
        [z, y, -x, w],
    ])


def quat_exp_j(theta: float) -> Quaternion:
    """``e^{j theta} = cos(theta) + j sin(theta)``."""
    return Quaternion(np.cos(theta), 0.0, np.sin(theta), 0.0)
