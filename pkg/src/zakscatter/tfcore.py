"""Time-frequency algebra on the cyclic group Z_L.

Conventions used throughout the package:

* vectors are 0-based; ``c[j - a]`` is read cyclically, ``(j - a) mod L``;
* ``tf_shift(c, a, b)[j] = exp(2j*pi*j*b/L) * c[(j - a) % L]``;
* frame column ``(a, b)`` sits at position ``a*L + b`` (delay-major);
* ``<u, v> = sum(u * conj(v))``;
* ``vec`` is row-major (``numpy.ravel``), so ``vec(x y^*) = np.kron(x, conj(y))``.
  The columns of the Kronecker matrix are ``vec(g g^*)`` for frame vectors ``g``.
"""

from typing import NamedTuple, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import RankDeficient

#: relative tolerance on ``sigma_min / sigma_max`` below which K is rank deficient
RANK_TOL = 1e-8

#: sigma(K_full) = L**SPECTRAL_SCALE_EXPONENT * |V_c c| ** SPECTRAL_POWER,
#: fixed once against a brute-force SVD at L = 2, 3.
SPECTRAL_SCALE_EXPONENT = 0.5
SPECTRAL_POWER = 1


def as_seed(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    if c.ndim != 1 or c.size < 1:
        raise ValueError("seed vector must be a non-empty 1-d array")
    return c


def random_unimodular(L: int, rng: np.random.Generator) -> np.ndarray:
    """Seed with i.i.d. entries uniform on the unit circle."""
    return np.exp(2j * np.pi * rng.random(L))


def random_unit_norm(L: int, rng: np.random.Generator) -> np.ndarray:
    c = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    return c / np.linalg.norm(c)


def tf_shift(c, a: int, b: int) -> np.ndarray:
    """Cyclic time shift by ``a`` followed by modulation by ``b``."""
    c = as_seed(c)
    L = c.size
    j = np.arange(L)
    return np.exp(2j * np.pi * j * (b % L) / L) * np.roll(c, a % L)


def vec(matrix: np.ndarray) -> np.ndarray:
    """Row-major vectorization, ``vec(V)[i*n + j] = V[i, j]``."""
    return np.asarray(matrix).ravel()


def selfkron(g: np.ndarray) -> np.ndarray:
    """``vec(g g^*)``, the Kronecker product of ``g`` with its conjugate."""
    return np.kron(g, g.conj())


def ambiguity(c) -> np.ndarray:
    """Discrete ambiguity table ``V[a, b] = <c, tf_shift(c, a, b)>``.

    Computed as one FFT per delay: ``V[a, :] = fft(c * conj(roll(c, a)))``.
    """
    c = as_seed(c)
    L = c.size
    lagged = np.stack([c * np.roll(c, a).conj() for a in range(L)])
    return np.fft.fft(lagged, axis=1)


def build_frame(c) -> np.ndarray:
    """The ``L x L**2`` Gabor frame matrix; column ``a*L + b`` is ``tf_shift(c, a, b)``."""
    c = as_seed(c)
    L = c.size
    cols = [tf_shift(c, a, b) for a in range(L) for b in range(L)]
    return np.stack(cols, axis=1)


def frame_columns(c, boxes: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Columns of the frame indexed by ``boxes`` reduced modulo L (``G_Gamma``)."""
    c = as_seed(c)
    return np.stack([tf_shift(c, a, b) for a, b in boxes], axis=1)


def full_boxes(L: int):
    return [(a, b) for a in range(L) for b in range(L)]


class KroneckerMatrix:
    """The ``L**2 x |Gamma|`` matrix with columns ``vec(g_j g_j^*)``.

    A reduced QR factorization is computed at construction and reused by
    :meth:`solve` for every right-hand side.
    """

    def __init__(self, c, boxes: Sequence[Tuple[int, int]], rank_tol: float = RANK_TOL):
        self.seed = as_seed(c)
        self.boxes = tuple((int(a), int(b)) for a, b in boxes)
        G = frame_columns(self.seed, self.boxes)
        self.matrix = np.stack([selfkron(G[:, j]) for j in range(G.shape[1])], axis=1)
        self.singular_values = np.linalg.svd(self.matrix, compute_uv=False)
        smax = self.singular_values[0]
        smin = self.singular_values[-1]
        if smax == 0 or smin / smax < rank_tol or self.matrix.shape[1] > self.matrix.shape[0]:
            raise RankDeficient(
                f"Kronecker matrix is rank deficient: sigma_min/sigma_max = "
                f"{smin / smax if smax else 0.0:.3e} (tolerance {rank_tol:g})"
            )
        self._q, self._r = np.linalg.qr(self.matrix, mode="reduced")
        self._q.setflags(write=False)
        self._r.setflags(write=False)
        self.matrix.setflags(write=False)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def cond(self) -> float:
        return float(self.singular_values[0] / self.singular_values[-1])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Least-squares solution of ``K v = rhs``; ``rhs`` has shape ``(L**2, ...)``."""
        rhs = np.asarray(rhs, dtype=complex)
        flat = rhs.reshape(rhs.shape[0], -1)
        out = scipy.linalg.solve_triangular(self._r, self._q.conj().T @ flat)
        return out.reshape((self.matrix.shape[1],) + rhs.shape[1:])

    def pinv(self) -> np.ndarray:
        """Explicit left inverse ``R^{-1} Q^*``, shape ``(|Gamma|, L**2)``."""
        return scipy.linalg.solve_triangular(self._r, self._q.conj().T)


def build_K(c, cover, rank_tol: float = RANK_TOL) -> KroneckerMatrix:
    """Kronecker matrix for a validated cover (anything with ``.boxes``) or a box list."""
    boxes = getattr(cover, "boxes", cover)
    return KroneckerMatrix(c, boxes, rank_tol=rank_tol)


class SpectralReport(NamedTuple):
    singular_values: np.ndarray
    cond: float


def spectral_check(c) -> SpectralReport:
    """Singular values (descending) and condition number of ``K_full``."""
    c = as_seed(c)
    K = build_K(c, full_boxes(c.size))
    return SpectralReport(K.singular_values, K.cond)


def predicted_singular_values(c) -> np.ndarray:
    """Singular values of ``K_full`` from the ambiguity table, sorted descending."""
    c = as_seed(c)
    L = c.size
    vals = L**SPECTRAL_SCALE_EXPONENT * np.abs(ambiguity(c)) ** SPECTRAL_POWER
    return np.sort(vals.ravel())[::-1]


def welch_bound(L: int) -> float:
    return 1.0 / np.sqrt(L + 1)


def offpeak_max(c) -> float:
    """``max |V_c c(a, b)|`` over ``(a, b) != (0, 0)`` (not normalized)."""
    V = np.abs(ambiguity(c))
    V[0, 0] = -np.inf
    return float(V.max()) if V.size > 1 else 0.0
