"""Degree-2 Veronese lifting, its inverse and the group structure of lifted vectors.

A lifted vector of a length-``n`` signal has ``M = n(n+1)/2`` entries, one per
unordered pair ``(i, j)``, ordered ``(1,1), (1,2), ..., (1,n), (2,2), ..., (n,n)``.
Public pair indices are 1-based; arrays returned for indexing are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# zero / positivity tolerance on magnitudes
TAU_NU = 1e-9
# relative tolerance of the modulus consistency test in the inverse maps
CONSISTENCY_RTOL = 1e-6


def lifted_dim(n: int) -> int:
    return n * (n + 1) // 2


def base_dim(m: int) -> int:
    """Recover ``n`` from a lifted length ``M = n(n+1)/2``."""
    n = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    if lifted_dim(n) != m:
        raise ValueError(f"{m} is not a triangular number n(n+1)/2")
    return n


def pair_to_flat(i: int, j: int, n: int) -> int:
    """1-based position of the monomial involving ``x_i`` and ``x_j``.

    Symmetric in ``(i, j)``.

    >>> pair_to_flat(2, 2, 4)
    5
    >>> pair_to_flat(3, 1, 4)
    3
    """
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"pair ({i}, {j}) out of range for n={n}")
    a, b = min(i, j), max(i, j)
    return (a - 1) * n - (a - 1) * (a - 2) // 2 + (b - a) + 1


def pair_to_flat_alt(i: int, j: int, n: int) -> int:
    """Second closed form of the same index, kept to cross-check :func:`pair_to_flat`."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"pair ({i}, {j}) out of range for n={n}")
    a = min(i, j)
    return sum(n - k for k in range(1, a)) + a + abs(j - i)


@lru_cache(maxsize=64)
def _tables(n: int):
    rows, cols = np.triu_indices(n)
    flat = np.empty((n, n), dtype=np.intp)
    flat[rows, cols] = np.arange(rows.size)
    flat[cols, rows] = np.arange(rows.size)
    diag = flat[np.arange(n), np.arange(n)]
    for arr in (rows, cols, flat, diag):
        arr.setflags(write=False)
    return rows, cols, flat, diag


def pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based ``(i, j)`` with ``i <= j`` for every lifted position."""
    rows, cols, _, _ = _tables(n)
    return rows, cols


def flat_table(n: int) -> np.ndarray:
    """Symmetric ``n x n`` table of 0-based lifted positions."""
    return _tables(n)[2]


def diag_positions(n: int) -> np.ndarray:
    """0-based lifted positions of the squared-modulus entries ``(j, j)``."""
    return _tables(n)[3]


@dataclass(frozen=True)
class PairIndex:
    i: int
    j: int
    flat: int

    @classmethod
    def of(cls, i: int, j: int, n: int) -> "PairIndex":
        return cls(i, j, pair_to_flat(i, j, n))


@dataclass(frozen=True)
class LiftedVector:
    """Entries of a lifted vector with its base dimension."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.shape != (lifted_dim(self.n),):
            raise ValueError(f"expected {lifted_dim(self.n)} entries, got shape {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.entries)

    def __getitem__(self, pair: tuple[int, int]):
        i, j = pair
        return self.entries[pair_to_flat(i, j, self.n) - 1]

    def diagonal(self) -> np.ndarray:
        return self.entries[diag_positions(self.n)]

    def as_matrix(self) -> np.ndarray:
        """Hermitian (or symmetric) matrix ``X`` with ``X[i, j] = x_i conj(x_j)``."""
        return lifted_to_matrix(self.entries)


@dataclass(frozen=True)
class GroupStructure:
    """Lifted positions involving each base variable.

    ``index[j]`` holds the 0-based positions of ``(k, j)`` for ``k = 1..n``.
    """

    n: int
    index: np.ndarray

    @classmethod
    def build(cls, n: int) -> "GroupStructure":
        index = flat_table(n).T.copy()
        index.setflags(write=False)
        return cls(n, index)

    def members(self, j: int) -> list[int]:
        """1-based lifted positions of group ``j`` (1-based)."""
        return [int(p) + 1 for p in self.index[j - 1]]

    @property
    def groups(self) -> list[np.ndarray]:
        return list(self.index)


def _as_entries(v) -> np.ndarray:
    return v.entries if isinstance(v, LiftedVector) else np.asarray(v)


def lifted_to_matrix(entries) -> np.ndarray:
    v = _as_entries(entries)
    n = base_dim(v.size)
    rows, cols = pair_arrays(n)
    X = np.zeros((n, n), dtype=v.dtype)
    X[rows, cols] = v
    X[cols, rows] = np.conj(v)
    return X


def veronese_real(x) -> LiftedVector:
    x = np.asarray(x, dtype=float)
    rows, cols = pair_arrays(x.size)
    return LiftedVector(x.size, x[rows] * x[cols])


def veronese_complex(x) -> LiftedVector:
    x = np.asarray(x, dtype=complex)
    rows, cols = pair_arrays(x.size)
    return LiftedVector(x.size, x[rows] * np.conj(x[cols]))


def veronese(x) -> LiftedVector:
    """Real or complex lift depending on the dtype of ``x``."""
    x = np.asarray(x)
    return veronese_complex(x) if np.iscomplexobj(x) else veronese_real(x)


def _consistent(column: np.ndarray, diag: np.ndarray, pivot: int) -> bool:
    vii = diag[pivot].real
    lhs = np.abs(column) ** 2 / vii
    return bool(np.all(np.abs(lhs - diag.real) <= CONSISTENCY_RTOL * max(1.0, vii)))


def inverse_veronese_real(v) -> np.ndarray:
    """Signal whose lift is ``v``, or zeros when ``v`` is not such a lift.

    The pivot is the first index with a positive squared entry; the returned
    signal is the pivot column scaled by ``1/sqrt(v_ii)``, so its first
    nonzero entry is positive.
    """
    v = np.real_if_close(_as_entries(v))
    if np.iscomplexobj(v):
        raise ValueError("inverse_veronese_real expects a real lifted vector")
    X = lifted_to_matrix(v.astype(float))
    diag = np.diag(X)
    n = diag.size
    positive = np.flatnonzero(diag > TAU_NU)
    if positive.size == 0:
        return np.zeros(n)
    i = positive[0]
    column = X[:, i]
    if not _consistent(column, diag, i):
        return np.zeros(n)
    return column / np.sqrt(diag[i])


def inverse_veronese_complex(v) -> np.ndarray:
    """Complex counterpart of :func:`inverse_veronese_real`.

    The pivot entry must have a real positive squared modulus; the output's
    pivot coordinate is real positive, fixing the global phase.
    """
    X = lifted_to_matrix(np.asarray(_as_entries(v), dtype=complex))
    diag = np.diag(X)
    n = diag.size
    ok = (diag.real > TAU_NU) & (np.abs(diag.imag) <= TAU_NU * (1 + np.abs(diag)))
    positive = np.flatnonzero(ok)
    if positive.size == 0:
        return np.zeros(n, dtype=complex)
    i = positive[0]
    column = X[:, i]
    if not _consistent(column, diag, i):
        return np.zeros(n, dtype=complex)
    # X[j, i] = x_j conj(x_i): multiplying x by conj(x_i)/|x_i| makes x_i real positive
    return column / np.sqrt(diag[i].real)


def group_norms(v, groups: GroupStructure | None = None) -> np.ndarray:
    v = _as_entries(v)
    groups = groups or GroupStructure.build(base_dim(v.size))
    return np.linalg.norm(v[groups.index], axis=1)


def group_norm_count(v, groups: GroupStructure | None = None, tol: float = 1e-10) -> int:
    """Number of groups with a nonzero sub-vector."""
    return int(np.count_nonzero(group_norms(v, groups) > tol))


def sparsity(x, tol: float = 0.0) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(x)) > tol))
