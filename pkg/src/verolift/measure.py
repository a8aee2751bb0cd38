"""Measurement ensembles and their linearisation on lifted vectors.

Every variant measures ``y_i = |q_i^H x|^2 (+ e_i)``. The linearised operator
``A`` satisfies ``Re(A @ veronese(x)) == |q_i^H x|^2`` for *every* ``x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .lifting import lifted_dim, pair_arrays

VARIANTS = ("real", "complex", "complex_real", "fourier")
ZERO_COLUMN_TOL = 1e-12


def _check_q(q) -> np.ndarray:
    q = np.asarray(q)
    if q.ndim != 2:
        raise ValueError(f"q must be an (N, n) array of measurement vectors, got shape {q.shape}")
    return q


def build_A_real(q) -> np.ndarray:
    """Rows ``q_j^2`` at ``(j, j)`` and ``2 q_j q_k`` at ``(j, k)``, ``j < k``."""
    q = _check_q(q).astype(float)
    rows, cols = pair_arrays(q.shape[1])
    coef = np.where(rows == cols, 1.0, 2.0)
    return coef * q[:, rows] * q[:, cols]


def build_A_complex(q) -> np.ndarray:
    """Stack of ``a_i^H`` with ``a_i = 2 nu(q_i)`` off the diagonal and ``nu(q_i)`` on it."""
    q = _check_q(q).astype(complex)
    rows, cols = pair_arrays(q.shape[1])
    coef = np.where(rows == cols, 1.0, 2.0)
    a = coef * q[:, rows] * np.conj(q[:, cols])
    return np.conj(a)


def build_A_tilde(A) -> np.ndarray:
    """Real ``N x 2M`` matrix ``[Re(A), -Im(A)]`` acting on ``[Re(v); Im(v)]``."""
    A = np.asarray(A)
    return np.hstack([A.real, -A.imag]).astype(float)


def build_A(q, variant: str) -> np.ndarray:
    if variant == "real":
        return build_A_real(q)
    if variant in VARIANTS:
        return build_A_complex(q)
    raise ValueError(f"unknown variant {variant!r}")


def fourier_rows(n: int, N: int) -> np.ndarray:
    """``q`` such that ``q_i^H x = sum_j x_j exp(-2 pi i (i-1)(j-1) / N)`` (unnormalised)."""
    k = np.arange(N)[:, None]
    j = np.arange(n)[None, :]
    return np.exp(2j * np.pi * k * j / N)


def make_fourier_design(n: int, N: int) -> np.ndarray:
    """DFT measurement vectors for ``N = n`` or the zero-padded ``N = 2n`` model."""
    if N not in (n, 2 * n):
        raise ValueError(f"Fourier designs support N = n or N = 2n, got N={N} for n={n}")
    return fourier_rows(n, N)


def gaussian_design(n: int, N: int, complex_valued: bool, rng: np.random.Generator) -> np.ndarray:
    if complex_valued:
        return rng.standard_normal((N, n)) + 1j * rng.standard_normal((N, n))
    return rng.standard_normal((N, n))


def random_sparse_signal(n: int, k: int, complex_valued: bool, rng: np.random.Generator) -> np.ndarray:
    """Uniform random support of size ``k`` with standard Gaussian nonzeros."""
    x = np.zeros(n, dtype=complex if complex_valued else float)
    support = rng.choice(n, size=k, replace=False)
    vals = rng.standard_normal(k)
    if complex_valued:
        vals = vals + 1j * rng.standard_normal(k)
    x[support] = vals
    return x


def measure(q, x) -> np.ndarray:
    """Clean quadratic measurements ``|q_i^H x|^2``."""
    q = _check_q(q)
    return np.abs(np.conj(q) @ np.asarray(x)) ** 2


def add_noise(y, eps: float, rng_seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Add noise with ``||e||_2 <= eps``.

    Direction is isotropic Gaussian, the norm uniform in ``[0, eps]``.
    """
    if eps < 0:
        raise ValueError("noise bound must be nonnegative")
    y = np.asarray(y, dtype=float)
    if eps == 0:
        return y.copy(), np.zeros_like(y)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    e = rng.standard_normal(y.shape)
    e *= rng.uniform(0.0, eps) / np.linalg.norm(e)
    while np.linalg.norm(e) > eps:
        e *= 1 - 1e-15
    return y + e, e


@dataclass(frozen=True)
class WeightSet:
    """Precompensating column-norm weights.

    ``w`` is set for real operators, ``wR``/``wI`` for complex ones. Columns
    with (near) zero norm carry weight 1 and are listed in the ``zero_*`` masks.
    """

    w: np.ndarray | None = None
    wR: np.ndarray | None = None
    wI: np.ndarray | None = None
    zero_w: np.ndarray | None = None
    zero_R: np.ndarray | None = None
    zero_I: np.ndarray | None = None


def _col_norms(B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(B, axis=0)
    zero = norms < ZERO_COLUMN_TOL
    return np.where(zero, 1.0, norms), zero


def compute_weights(A, variant: str = "real") -> WeightSet:
    A = np.asarray(A)
    if variant == "real" and not np.iscomplexobj(A):
        w, zw = _col_norms(A)
        return WeightSet(w=w, zero_w=zw)
    wR, zR = _col_norms(A.real)
    wI, zI = _col_norms(np.imag(A))
    return WeightSet(wR=wR, wI=wI, zero_R=zR, zero_I=zI)


def _encode_array(a: np.ndarray):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return a.tolist()


def _decode_array(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return np.asarray(obj, dtype=float)


@dataclass(frozen=True)
class MeasurementSet:
    """Measurement vectors ``q`` (one per row), observations ``y`` and noise bound."""

    variant: str
    q: np.ndarray
    y: np.ndarray
    noise_bound: float = 0.0
    seed: int | None = None
    x0: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        q = _check_q(self.q)
        y = np.asarray(self.y, dtype=float)
        if y.shape != (q.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({q.shape[0]},)")
        if self.noise_bound < 0:
            raise ValueError("noise bound must be nonnegative")
        if self.variant == "real" and np.iscomplexobj(q):
            raise ValueError("real variant needs real measurement vectors")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.q.shape[1]

    @property
    def N(self) -> int:
        return self.q.shape[0]

    @property
    def M(self) -> int:
        return lifted_dim(self.n)

    @property
    def signal_is_complex(self) -> bool:
        return self.variant == "complex"

    @cached_property
    def A(self) -> np.ndarray:
        return build_A(self.q, self.variant)

    @cached_property
    def weights(self) -> WeightSet:
        return compute_weights(self.A, self.variant)

    @classmethod
    def generate(cls, variant: str, q, x0, eps: float = 0.0, seed: int | None = None) -> "MeasurementSet":
        """Measure ``x0`` with ``q`` and add bounded noise drawn from ``seed``."""
        clean = measure(q, x0)
        y, _ = add_noise(clean, eps, seed)
        return cls(variant, np.asarray(q), y, eps, seed, np.asarray(x0))

    def to_json(self) -> dict:
        doc = {
            "variant": self.variant,
            "n": self.n,
            "N": self.N,
            "q": _encode_array(self.q),
            "y": self.y.tolist(),
            "eps": self.noise_bound,
            "seed": self.seed,
        }
        if self.x0 is not None:
            doc["x0"] = _encode_array(self.x0)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "MeasurementSet":
        q = _decode_array(doc["q"]).reshape(doc["N"], doc["n"])
        x0 = _decode_array(doc["x0"]) if doc.get("x0") is not None else None
        return cls(doc["variant"], q, np.asarray(doc["y"], dtype=float), float(doc.get("eps", 0.0)),
                   doc.get("seed"), x0)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path) -> "MeasurementSet":
        return cls.from_json(json.loads(Path(path).read_text()))
