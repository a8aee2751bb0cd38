"""Shift and reflection canonicalisation of real signals and the matching programs.

Fourier magnitudes cannot tell a real signal from its circular shifts and
reflections (or, with zero padding, its linear shifts and reflections). The
canonical forms below pick one representative per orbit, and the programs
add linear constraints on the squared-modulus entries that only that
representative's lift satisfies.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lifting import (
    LiftedVector,
    TAU_NU,
    diag_positions,
    flat_table,
    inverse_veronese_real,
    lifted_dim,
    veronese_real,
)
from .measure import WeightSet
from .solver import ConeProblem, assemble_program

ZERO_RTOL = 1e-9


def shift(x, s: int) -> np.ndarray:
    """Circular shift moving entry ``i`` to ``i + s``."""
    return np.roll(np.asarray(x), s)


def reflection(x) -> np.ndarray:
    return np.asarray(x)[::-1].copy()


@dataclass(frozen=True)
class CanonicalForm:
    """Canonical representative ``x2`` and how it was reached.

    ``x2 = shift(x, applied_shift)``, followed (when ``applied_reflection``)
    by ``shift(reflection(.), 1)``. ``unique_argmax`` and ``strict_halves``
    are False when the invariance guarantees do not apply.
    """

    x2: np.ndarray
    applied_shift: int
    applied_reflection: bool
    phi: LiftedVector
    unique_argmax: bool = True
    strict_halves: bool = True

    @property
    def invariance_safe(self) -> bool:
        return self.unique_argmax and self.strict_halves


def _argmax(x: np.ndarray) -> tuple[int, bool]:
    mag = np.abs(x)
    hits = np.flatnonzero(mag == mag.max())
    return int(hits[0]), hits.size == 1


def _halves(n: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based positions ``2..n/2`` and ``n/2+2..n`` (1-based)."""
    h = n // 2
    return np.arange(1, h), np.arange(h + 1, n)


def canonical_shift(x) -> CanonicalForm:
    x = np.asarray(x, dtype=float)
    k, unique = _argmax(x)
    x2 = shift(x, -k)
    return CanonicalForm(x2, -k if k else 0, False, veronese_real(x2), unique, True)


def phi_shift(x) -> LiftedVector:
    """Lift of the circular shift that moves the largest-magnitude entry first.

    Ties pick the smallest index; :func:`canonical_shift` reports them.
    """
    return canonical_shift(x).phi


def varphi(x) -> CanonicalForm:
    """Shift- and reflection-canonical form of a real signal of even length."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n % 2:
        raise ValueError(f"reflection canonicalisation needs an even length, got n={n}")
    base = canonical_shift(x)
    x1 = base.x2
    first, second = _halves(n)
    e1, e2 = float(np.sum(x1[first] ** 2)), float(np.sum(x1[second] ** 2))
    if e1 >= e2:
        x2, refl = x1, False
    else:
        x2, refl = shift(reflection(x1), 1), True
    return CanonicalForm(x2, base.applied_shift, refl, veronese_real(x2), base.unique_argmax, e1 != e2)


def phi_reflect(x) -> CanonicalForm:
    return varphi(x)


def orbit(x, reflections: bool = True) -> list[np.ndarray]:
    """All circular shifts of ``x`` (and of its reflection)."""
    x = np.asarray(x)
    out = [shift(x, s) for s in range(x.size)]
    if reflections:
        out += [shift(reflection(x), s) for s in range(x.size)]
    return out


def _span_halves(span: int) -> tuple[np.ndarray, np.ndarray]:
    """Interior positions swapped by the reflection ``i -> span + 1 - i`` (0-based)."""
    first = np.arange(1, max(span, 1))
    first = first[first < span - 1 - first]
    return first, span - 1 - first


def canonical_zero_padded(x) -> CanonicalForm:
    """Canonical form under linear shifts and reflections of a zero-padded signal.

    The first nonzero entry is moved to position 1; the signal is reversed
    within its span when its interior energy leans towards the end.
    """
    x = np.asarray(x, dtype=float)
    nz = np.flatnonzero(x)
    if nz.size == 0:
        return CanonicalForm(x.copy(), 0, False, veronese_real(x), True, False)
    f = int(nz[0])
    x1 = shift(x, -f)
    span = int(nz[-1] - nz[0]) + 1
    first, second = _span_halves(span)
    e1, e2 = float(np.sum(x1[first] ** 2)), float(np.sum(x1[second] ** 2))
    refl = e1 < e2
    x2 = x1.copy()
    if refl:
        x2[:span] = x1[:span][::-1]
    return CanonicalForm(x2, -f if f else 0, refl, veronese_real(x2), True, e1 != e2)


@dataclass(frozen=True)
class AutocorrSequence:
    """Autocorrelation lags ``r_k = sum_i x_i x_{i+k}``, ``k = 0..n-1``."""

    r: np.ndarray

    @property
    def n(self) -> int:
        return self.r.size

    def lag(self, k: int) -> float:
        k = abs(k)
        return float(self.r[k]) if k < self.n else 0.0


def autocorrelation_from_spectrum(y, n: int) -> AutocorrSequence:
    """Lags of a length-``n`` real signal from its zero-padded power spectrum."""
    y = np.asarray(y, dtype=float)
    if y.size < 2 * n - 1:
        raise ValueError(f"need at least 2n-1 = {2 * n - 1} spectrum samples, got {y.size}")
    return AutocorrSequence(np.real(np.fft.ifft(y))[:n].copy())


def restrict_support(r: AutocorrSequence) -> tuple[list[int], int]:
    """Base indices forced to zero by a vanishing autocorrelation tail.

    Returns the 1-based zeroed indices and ``j_m``, the smallest ``j`` with
    ``r_k = 0`` for ``k = j-1..n-1`` (``n+1`` when no tail vanishes).
    """
    r_arr = np.asarray(r.r, dtype=float)
    n = r_arr.size
    zero = np.abs(r_arr) <= ZERO_RTOL * max(abs(r_arr[0]), 0.0)
    if r_arr[0] == 0:
        zero[:] = True
    j_m = n + 1
    for j in range(n, 0, -1):
        if zero[j - 1]:
            j_m = j
        else:
            break
    return list(range(j_m, n + 1)), j_m


def _problem_groups(base: ConeProblem, js) -> tuple:
    return tuple(base.groups[j - 1] for j in js)


def assemble_shift_invariant_program(A, y, weights: WeightSet | None = None, eps: float = 0.0,
                                     reflect: bool = False) -> ConeProblem:
    """Program with the first group dropped and ``phi_11 >= phi_jj >= 0``.

    ``reflect=True`` adds the half-energy balance of :func:`varphi`.
    """
    base = assemble_program("complex_real", A, y, weights, eps=eps)
    n = base.n
    M = lifted_dim(n)
    diag = diag_positions(n)
    rows = np.zeros((n - 1, M))
    rows[np.arange(n - 1), diag[1:]] = 1.0
    rows[:, diag[0]] = -1.0
    if reflect:
        if n % 2:
            raise ValueError(f"reflection constraints need an even n, got n={n}")
        first, second = _halves(n)
        bal = np.zeros(M)
        bal[diag[second]] = 1.0
        bal[diag[first]] -= 1.0
        rows = np.vstack([rows, bal])
    return replace(base, groups=_problem_groups(base, range(2, n + 1)), ineq=rows)


def autocorrelation_rows(n: int) -> np.ndarray:
    """Rows mapping a lifted vector to ``sum_i phi_{i(i+k)}``, ``k = 0..n-1``."""
    E = np.zeros((n, lifted_dim(n)))
    table = flat_table(n)
    for k in range(n):
        i = np.arange(n - k)
        E[k, table[i, i + k]] = 1.0
    return E


def assemble_reflection_program(A, y, weights: WeightSet | None = None,
                                r: AutocorrSequence | None = None, j_m: int | None = None,
                                eps: float = 0.0) -> ConeProblem:
    """Reflection-aware program, optionally using autocorrelation knowledge.

    Without ``r`` this is the shift-invariant program plus the half-energy
    balance. With ``r`` (zero-padded Fourier data) the objective keeps
    groups ``2..j_m-2``, squared moduli ``1..j_m-1`` are nonnegative, the
    autocorrelation lags are matched, groups ``j_m..n`` vanish, and the
    energy balance is taken within the signal span ``1..j_m-1``.
    """
    if r is None:
        return assemble_shift_invariant_program(A, y, weights, eps, reflect=True)
    base = assemble_program("complex_real", A, y, weights, eps=eps)
    n = base.n
    if n % 2:
        raise ValueError(f"reflection constraints need an even n, got n={n}")
    if r.n != n:
        raise ValueError(f"autocorrelation has {r.n} lags, expected {n}")
    if j_m is None:
        _, j_m = restrict_support(r)
    if not 1 <= j_m <= n + 1:
        raise ValueError(f"j_m must lie in [1, {n + 1}], got {j_m}")
    M = lifted_dim(n)
    diag = diag_positions(n)
    table = flat_table(n)
    zero_groups = range(j_m, n + 1)
    zero = np.unique(np.concatenate([table[:, j - 1] for j in zero_groups])) if j_m <= n \
        else np.zeros(0, dtype=np.intp)
    nonneg = diag[: max(j_m - 1, 0)]

    span = j_m - 1
    first, second = _span_halves(span)
    ineq = np.zeros((0, M))
    if first.size:
        bal = np.zeros(M)
        bal[diag[second]] = 1.0
        bal[diag[first]] -= 1.0
        ineq = bal[None, :]
    return replace(
        base,
        groups=_problem_groups(base, range(2, j_m - 1)),
        nonneg=nonneg,
        zero=zero.astype(np.intp),
        ineq=ineq,
        eq_extra=autocorrelation_rows(n),
        eq_rhs=np.asarray(r.r, dtype=float),
    )


@dataclass(frozen=True)
class ShiftSet:
    candidates: list[np.ndarray]
    degenerate: bool = False


def unlift_shift_set(phi_hat, reflections: bool = False) -> ShiftSet:
    """Every circular shift (and optionally reflected shift) of the unlifted estimate."""
    phi_hat = phi_hat.entries if isinstance(phi_hat, LiftedVector) else np.asarray(phi_hat)
    x = inverse_veronese_real(np.real(phi_hat))
    if not np.any(np.abs(x) > TAU_NU):
        return ShiftSet([], True)
    return ShiftSet(orbit(x, reflections))


def support_equivalent(s_hat, s0, n: int, shifts: bool = True, reflections: bool = False) -> bool:
    """Whether two supports agree up to circular shifts (and reflections)."""
    a = np.zeros(n, dtype=bool)
    b = np.zeros(n, dtype=bool)
    a[list(s_hat)] = True
    b[list(s0)] = True
    if not shifts:
        return bool(np.array_equal(a, b))
    return any(np.array_equal(a, c) for c in orbit(b, reflections))
