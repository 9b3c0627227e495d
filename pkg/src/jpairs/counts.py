"""Intersection numbers of complex Grassmannians in the oriented Grassmannian."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from math import comb

_INT64_MAX = 2**63 - 1


def sigma(k: int, n: int) -> int:
    """Closed form: 0 for odd ``k`` and even ``n``, else ``C(n//2, k//2)``."""
    if k < 0 or k > n:
        return 0
    if k % 2 == 1 and n % 2 == 0:
        return 0
    value = comb(n // 2, k // 2)
    assert value <= _INT64_MAX, "sigma overflows 64 bits"
    return value


_S_ROWS: list[tuple[int, ...]] = [(1,)]  # row n holds s(0..n, n)
_S_LOCK = threading.Lock()


def s_recursive(k: int, n: int) -> int:
    """Same numbers from ``s(k,n) = (-1)^k s(k,n-1) + s(k-1,n-1)``.

    Base values ``s(0, n) = 1`` and ``s(k, n) = 0`` outside ``0 <= k <= n``.
    Rows are filled iteratively in ``n`` and kept in a module-level table.
    """
    if k < 0 or k > n:
        return 0
    if n >= len(_S_ROWS):
        with _S_LOCK:
            while len(_S_ROWS) <= n:
                prev = _S_ROWS[-1]
                m = len(prev)
                row = [1] + [
                    (-1) ** j * (prev[j] if j < m else 0) + prev[j - 1]
                    for j in range(1, m + 1)
                ]
                _S_ROWS.append(tuple(row))
    return _S_ROWS[n][k]


def expected_counts(same_orientation: bool, n: int, k: int) -> tuple[int, int]:
    """Signed counts ``(same, opposite)`` of planes for a pair of structures."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if same_orientation:
        return sigma(k, n), 0
    return sigma(k, n - 1), sigma(k - 1, n - 1)


def expected_signed_counts(same_orientation: bool, n: int, k: int) -> tuple[int, int]:
    """Signed intersection numbers ``(same, opposite)`` under complex orientations.

    Each embedded Grassmannian is oriented by its own complex structure.  For
    a pair of opposite orientation the plain intersection then carries the
    sign ``(-1)**k``: at a plane where both structures agree the second
    tangent space consists of maps that are antilinear for ``J0`` on the
    complement, and its complex structure is the negative of the one that
    fixes the chart orientation.  The magnitudes agree with
    :func:`expected_counts`.
    """
    first, second = expected_counts(same_orientation, n, k)
    if same_orientation:
        return first, second
    return (-1) ** k * first, second


def expected_local_sign(same_orientation: bool, k: int, relative_orientation: str) -> int:
    """Local sign at a transverse plane of an orthogonal pair."""
    if same_orientation or relative_orientation == "opposite":
        return 1
    return (-1) ** k


@dataclass(frozen=True)
class CountTable:
    kmax: int
    nmax: int
    values: tuple[tuple[int | None, ...], ...]

    def rows(self) -> list[list[int | None]]:
        return [list(r) for r in self.values]

    def render_text(self) -> str:
        width = max(len(str(v)) for r in self.values for v in r if v is not None)
        width = max(width, len(str(self.nmax)), len(str(self.kmax)))
        head = "k\\n".rjust(width + 1) + " |" + "".join(f" {n:>{width}}" for n in range(self.nmax + 1))
        lines = [head, "-" * len(head)]
        for k, row in enumerate(self.values):
            cells = "".join(f" {'' if v is None else v:>{width}}" for v in row)
            lines.append(f"{k:>{width + 1}} |{cells}".rstrip())
        return "\n".join(lines) + "\n"

    def render_json(self) -> str:
        return json.dumps({"kmax": self.kmax, "nmax": self.nmax, "rows": self.rows()})


def sigma_table(kmax: int = 10, nmax: int = 15) -> CountTable:
    if kmax > nmax or kmax < 0:
        raise ValueError("need 0 <= kmax <= nmax")
    values = tuple(
        tuple(sigma(k, n) if k <= n else None for n in range(nmax + 1))
        for k in range(kmax + 1)
    )
    return CountTable(kmax, nmax, values)
