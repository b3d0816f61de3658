"""Zak-domain estimation of the scattering function.

Pipeline for each sounding: echo ``y`` -> :func:`zak` -> :func:`patch_vectors`
``F[i, mu, :]`` (one length-``L`` vector per patch grid point) -> accumulate
``vec(F F^*)`` -> least-squares solve against the Kronecker matrix -> reassemble
the patch values into the bounding-box grid.

Under the circular model the patch vectors satisfy ``F = G @ eta_vec`` exactly,
with ``eta_vec`` from :func:`spreading_patches`. The constants that make this
hold (Zak sign, ``1/P`` normalization, patch phases) are fixed here and
checked by :func:`verify_factorization`.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import GridSpec, ScatteringGrid, SupportCover, apply_channel, synth_train
from .errors import CoverTooLarge, EmptyAccumulator, GridMismatch, SingularWeights
from .tfcore import KroneckerMatrix, as_seed, build_frame, frame_columns


def zak(y: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Sampled Zak transform of circular echoes.

    ``Z[i, mu] = sum_n y[(i - n*L*Ktilde) % N] * exp(2j*pi*n*mu/P)`` for
    ``i < L*Ktilde``, ``mu < P``; leading batch axes of ``y`` are kept.
    """
    y = np.asarray(y, dtype=complex)
    if y.shape[-1] != grid.N:
        raise GridMismatch(f"echo length {y.shape[-1]} != N={grid.N}")
    Y = y.reshape(y.shape[:-1] + (grid.P, grid.n_delay))
    # fft over n gives sum_n y[i + n*T_max] e^{-2 pi i n mu/P}, the same sum reindexed
    Z = np.fft.fft(Y, axis=-2)
    return np.swapaxes(Z, -1, -2)


def _patch_phase(grid: GridSpec) -> np.ndarray:
    """``exp(-2j*pi*mu*(i + p*Ktilde)/N)`` with axes ``(i, mu, p)``."""
    i = np.arange(grid.Ktilde)[:, None, None]
    mu = np.arange(grid.P)[None, :, None]
    p = np.arange(grid.L)[None, None, :]
    return np.exp(-2j * np.pi * mu * (i + p * grid.Ktilde) / grid.N)


def patch_vectors(Z: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Patch field ``F[..., i, mu, p] = exp(-2j*pi*mu*(i+p*Kt)/N) * Z[..., i + p*Kt, mu] / P``.

    Output shape ``(..., Ktilde, P, L)``.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.shape[-2:] != (grid.n_delay, grid.P):
        raise GridMismatch(f"Zak array shape {Z.shape[-2:]} != {(grid.n_delay, grid.P)}")
    Zr = Z.reshape(Z.shape[:-2] + (grid.L, grid.Ktilde, grid.P))
    Zr = np.moveaxis(Zr, -3, -1)  # (..., Kt, P, L)
    return Zr * _patch_phase(grid) / grid.P


def spreading_patches(eta: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Phase-adjusted patches of a spreading array, shape ``(..., Ktilde, P, L**2)``.

    Entry ``a*L + b`` at ``(i, mu)`` is ``exp(2j*pi*b*i/(L*Kt)) * eta[i + a*Kt, mu + b*P]``.
    """
    eta = np.asarray(eta, dtype=complex)
    L, Kt, P = grid.L, grid.Ktilde, grid.P
    E = eta.reshape(eta.shape[:-2] + (L, Kt, L, P))  # (..., a, i, b, mu)
    E = np.moveaxis(E, (-4, -3, -2, -1), (-2, -4, -1, -3))  # (..., i, mu, a, b)
    i = np.arange(Kt)[:, None, None, None]
    b = np.arange(L)[None, None, None, :]
    E = E * np.exp(2j * np.pi * b * i / (L * Kt))
    return E.reshape(E.shape[:-2] + (L * L,))


def verify_factorization(eta: np.ndarray, c, grid: GridSpec) -> float:
    """``max |F - G eta_vec|`` over all patch grid points for one channel state."""
    c = as_seed(c)
    y = apply_channel(eta, synth_train(c, grid), grid)
    F = patch_vectors(zak(y, grid), grid)
    predicted = spreading_patches(eta, grid) @ build_frame(c).T
    return float(np.max(np.abs(F - predicted))) if F.size else 0.0


def outer_vec(F: np.ndarray) -> np.ndarray:
    """``vec(F F^*)`` along the last axis (row-major), shape ``(..., L**2)``."""
    prod = F[..., :, None] * F[..., None, :].conj()
    return prod.reshape(F.shape[:-1] + (F.shape[-1] ** 2,))


@dataclass
class AutocorrAccumulator:
    """Running sums of ``vec(F F^*)`` per patch grid point.

    Only the equal-argument slice of the autocorrelation is kept; its
    off-diagonal part has zero mean and is never used by the inversion.
    """

    grid: GridSpec
    sums: np.ndarray = None
    count: int = 0

    def __post_init__(self):
        if self.sums is None:
            g = self.grid
            self.sums = np.zeros((g.Ktilde, g.P, g.L**2), dtype=complex)

    def add(self, field: np.ndarray) -> "AutocorrAccumulator":
        """Add one field ``(Kt, P, L)`` or a batch ``(J, Kt, P, L)`` in place."""
        field = np.asarray(field, dtype=complex)
        g = self.grid
        if field.shape[-3:] != (g.Ktilde, g.P, g.L) or field.ndim not in (3, 4):
            raise GridMismatch(f"field shape {field.shape} does not fit grid {g}")
        if field.ndim == 3:
            field = field[None]
        self.sums += outer_vec(field).sum(axis=0)
        self.count += field.shape[0]
        return self

    def merge(self, other: "AutocorrAccumulator") -> "AutocorrAccumulator":
        if other.grid != self.grid:
            raise GridMismatch("cannot merge accumulators on different grids")
        return AutocorrAccumulator(self.grid, self.sums + other.sums, self.count + other.count)

    def mean(self) -> np.ndarray:
        if self.count == 0:
            raise EmptyAccumulator("no soundings accumulated")
        return self.sums / self.count


def accumulate(field: np.ndarray, acc: AutocorrAccumulator) -> AutocorrAccumulator:
    return acc.add(field)


def reassemble(patch_values: np.ndarray, grid: GridSpec, cover: SupportCover) -> np.ndarray:
    """Translate patch values ``(Kt, P, |Gamma|)`` back into the bounding-box grid."""
    out = np.zeros(grid.shape, dtype=patch_values.dtype)
    for j, (a, b) in enumerate(cover.boxes):
        out[grid.box_slices(a, b)] = patch_values[..., j]
    return out


def negativity(values: np.ndarray) -> float:
    total = np.abs(values).sum()
    return float(np.clip(-values, 0, None).sum() / total) if total > 0 else 0.0


@dataclass
class EstimatedScattering:
    patch_values: np.ndarray          # (Kt, P, |Gamma|), real part of the solve
    reassembled: ScatteringGrid
    negativity: float
    count: int
    cond_K: float = float("nan")
    imag_residual: float = 0.0        # max |imag| discarded from the solve

    def summary(self, truth: Optional[ScatteringGrid] = None) -> dict:
        out = {
            "J": self.count,
            "negativity": self.negativity,
            "cond_K": self.cond_K,
        }
        if truth is not None:
            out["rel_mse"] = relative_error(self.reassembled.values, truth.values)
        return out

    def to_csv(self) -> str:
        return self.reassembled.to_csv()


def relative_error(estimate: np.ndarray, truth: np.ndarray) -> float:
    """``||estimate - truth||_2 / ||truth||_2`` (nan for an all-zero truth)."""
    denom = np.linalg.norm(truth)
    if denom == 0:
        return float("nan")
    return float(np.linalg.norm(estimate - truth) / denom)


def _cover_for(K: KroneckerMatrix, grid: GridSpec) -> SupportCover:
    return SupportCover(K.boxes, grid.L)


def invert(acc: AutocorrAccumulator, K: KroneckerMatrix,
           cover: Optional[SupportCover] = None) -> EstimatedScattering:
    """Least-squares solve ``K v = sums / J`` at every patch grid point."""
    grid = acc.grid
    if K.shape[0] != grid.L**2:
        raise GridMismatch(f"K has {K.shape[0]} rows, grid needs {grid.L**2}")
    cover = cover or _cover_for(K, grid)
    rhs = acc.mean()  # raises EmptyAccumulator
    sol = K.solve(np.moveaxis(rhs, -1, 0))  # (|Gamma|, Kt, P)
    sol = np.moveaxis(sol, 0, -1)
    values = sol.real
    grid_values = reassemble(values, grid, cover)
    return EstimatedScattering(
        patch_values=values,
        reassembled=ScatteringGrid(grid_values, grid, cover),
        negativity=negativity(values),
        count=acc.count,
        cond_K=K.cond,
        imag_residual=float(np.max(np.abs(sol.imag))) if sol.size else 0.0,
    )


def per_sounding_estimates(field: np.ndarray, K: KroneckerMatrix) -> np.ndarray:
    """Single-sounding estimates ``Re K^+ vec(F F^*)``, shape ``(J, Kt, P, |Gamma|)``.

    The full estimator at ``J`` soundings is their mean (the solve is linear).
    """
    rhs = outer_vec(np.asarray(field, dtype=complex))
    return (rhs @ K.pinv().T).real


def cross_statistics(y: np.ndarray, field: np.ndarray, cover: SupportCover, c,
                     grid: GridSpec) -> np.ndarray:
    """Per-sounding cross-correlation estimates, shape ``(J, Kt, P, |Gamma|)`` complex.

    For each patch point ``(i, mu)`` the echo sample aligned with the patch
    delay is ``y[i]``; then ``E{F conj(y[i])} = e^{-2 pi i mu i/N} G_Gamma
    diag(conj c[-a_j]) C_vec``, which is solved for ``C_vec``.
    """
    c = as_seed(c)
    if len(cover) > grid.L:
        raise CoverTooLarge(f"cross estimator needs |Gamma| <= L={grid.L}, got {len(cover)}")
    weights = np.array([c[(-a) % grid.L] for a, _ in cover.boxes])
    if np.min(np.abs(weights)) < 1e-12 * max(np.max(np.abs(c)), 1e-300):
        raise SingularWeights("a seed entry used on the diagonal of A_c vanishes")
    y = np.atleast_2d(np.asarray(y, dtype=complex))
    field = np.asarray(field, dtype=complex)
    if field.ndim == 3:
        field = field[None]
    Kt, P, N = grid.Ktilde, grid.P, grid.N
    aligned = y[:, :Kt].conj()  # (J, Kt)
    i = np.arange(Kt)[:, None]
    mu = np.arange(P)[None, :]
    derotate = np.exp(2j * np.pi * mu * i / N)  # (Kt, P)
    S = field * (aligned[:, :, None, None] * derotate[None, :, :, None])  # (J, Kt, P, L)
    G = frame_columns(c, cover.boxes)  # (L, |Gamma|)
    Gpinv = np.linalg.pinv(G)
    v = S @ Gpinv.T
    return v / weights.conj()


def cross_estimate(y: np.ndarray, field: np.ndarray, cover: SupportCover, c,
                   grid: GridSpec) -> EstimatedScattering:
    """Cross-correlation estimator for covers with at most ``L`` boxes."""
    stats = cross_statistics(y, field, cover, c, grid)
    mean = stats.mean(axis=0)
    values = mean.real
    return EstimatedScattering(
        patch_values=values,
        reassembled=ScatteringGrid(reassemble(values, grid, cover), grid, cover),
        negativity=negativity(values),
        count=stats.shape[0],
        cond_K=float(np.linalg.cond(frame_columns(c, cover.boxes))),
        imag_residual=float(np.max(np.abs(mean.imag))) if mean.size else 0.0,
    )
