"""Circular, fully discrete WSSUS channel model.

Time is periodic with period ``N = P * L * Ktilde`` samples. A channel state is
a complex spreading array ``eta[k, m]`` on ``L*Ktilde`` delay taps times
``L*P`` Doppler bins (bin width ``1/N`` cycles/sample); the echo is synthesized
directly from the spreading representation,

    y[l] = sum_{k,m} eta[k, m] * exp(2j*pi*m*l/N) * x[(l - k) % N].
"""

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import AliasingViolation, GridMismatch
from .tfcore import as_seed


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid: ``L`` boxes per side, ``Ktilde`` samples per pulse spacing, ``P`` periods."""

    L: int
    Ktilde: int
    P: int

    def __post_init__(self):
        for name in ("L", "Ktilde", "P"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"GridSpec.{name} must be a positive integer, got {v!r}")

    @property
    def N(self) -> int:
        return self.P * self.L * self.Ktilde

    @property
    def n_delay(self) -> int:
        """Delay taps in the bounding box; also the train period ``T_max`` in samples."""
        return self.L * self.Ktilde

    @property
    def n_doppler(self) -> int:
        return self.L * self.P

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_delay, self.n_doppler)

    @property
    def b_max(self) -> float:
        """Doppler extent of the bounding box in cycles/sample."""
        return 1.0 / self.Ktilde

    def box_slices(self, a: int, b: int) -> Tuple[slice, slice]:
        a %= self.L
        b %= self.L
        return (slice(a * self.Ktilde, (a + 1) * self.Ktilde), slice(b * self.P, (b + 1) * self.P))


@dataclass(frozen=True)
class SupportCover:
    """Boxes ``(a_j, b_j)`` covering the scattering support, distinct modulo ``(L, L)``."""

    boxes: Tuple[Tuple[int, int], ...]
    L: int

    def __len__(self):
        return len(self.boxes)

    @property
    def reduced(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((a % self.L, b % self.L) for a, b in self.boxes)

    def mask(self, grid: GridSpec) -> np.ndarray:
        if grid.L != self.L:
            raise GridMismatch(f"cover has L={self.L} but grid has L={grid.L}")
        m = np.zeros(grid.shape, dtype=bool)
        for a, b in self.boxes:
            m[grid.box_slices(a, b)] = True
        return m

    def is_full(self) -> bool:
        return len(self.boxes) == self.L**2


def build_cover(boxes: Iterable[Sequence[int]], L: int) -> SupportCover:
    """Validate the anti-aliasing condition and return the cover.

    Raises :class:`AliasingViolation` naming the first pair of boxes whose
    difference is a multiple of ``(L, L)``.
    """
    if L < 1:
        raise ValueError("L must be positive")
    boxes = tuple((int(a), int(b)) for a, b in boxes)
    if not boxes:
        raise ValueError("a cover needs at least one box")
    seen = {}
    for box in boxes:
        key = (box[0] % L, box[1] % L)
        if key in seen:
            raise AliasingViolation(
                f"boxes {seen[key]} and {box} are congruent modulo ({L}, {L})"
            )
        seen[key] = box
    return SupportCover(boxes, L)


def full_cover(L: int) -> SupportCover:
    return build_cover([(a, b) for a in range(L) for b in range(L)], L)


def read_cover_file(path, L: int) -> SupportCover:
    boxes = []
    for line in Path(path).read_text().splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            a, b = line.split()
            boxes.append((int(a), int(b)))
    return build_cover(boxes, L)


def write_cover_file(path, cover: SupportCover) -> None:
    Path(path).write_text("".join(f"{a} {b}\n" for a, b in cover.boxes))


@dataclass
class ScatteringGrid:
    """Nonnegative variance per (delay tap, Doppler bin), zero outside the cover."""

    values: np.ndarray
    grid: GridSpec
    cover: SupportCover
    dropped_fraction: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridMismatch(f"values have shape {self.values.shape}, grid wants {self.grid.shape}")

    @property
    def support(self) -> np.ndarray:
        return self.cover.mask(self.grid)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def to_csv(self) -> str:
        return grid_to_csv(self.values, self.support)

    @classmethod
    def from_csv(cls, text: str, grid: GridSpec, cover: SupportCover) -> "ScatteringGrid":
        return cls(grid_from_csv(text, grid), grid, cover)


def grid_to_csv(values: np.ndarray, support: np.ndarray) -> str:
    """CSV ``k,m,value`` with one row per cell of ``support``, row-major order."""
    buf = io.StringIO()
    buf.write("k,m,value\n")
    for k, m in zip(*np.nonzero(support)):
        buf.write(f"{k},{m},{float(values[k, m])!r}\n")
    return buf.getvalue()


def grid_from_csv(text: str, grid: GridSpec) -> np.ndarray:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if [h.strip() for h in header] != ["k", "m", "value"]:
        raise ValueError(f"unexpected CSV header {header!r}")
    values = np.zeros(grid.shape)
    for row in reader:
        if row:
            values[int(row[0]), int(row[1])] = float(row[2])
    return values


def discretize(model, grid: GridSpec, cover: SupportCover,
               t_scale: Optional[float] = None, f_scale: Optional[float] = None) -> ScatteringGrid:
    """Sample ``model`` on the grid and zero every cell outside the cover.

    ``t_scale`` (seconds per tap) and ``f_scale`` (Hz per bin) default to
    mapping the grid onto the model's ``[0, t_max] x [0, b_max]`` box.
    ``dropped_fraction`` is the share of sampled mass that fell outside the cover.
    """
    full = np.asarray(model.sample(grid, t_scale, f_scale), dtype=float)
    if np.any(full < 0) or not np.all(np.isfinite(full)):
        raise ValueError("scattering model produced negative or non-finite values")
    mask = cover.mask(grid)
    total = full.sum()
    kept = np.where(mask, full, 0.0)
    dropped = float((total - kept.sum()) / total) if total > 0 else 0.0
    return ScatteringGrid(kept, grid, cover, dropped)


def draw_spreading(C: ScatteringGrid, rng: np.random.Generator, size: Optional[int] = None,
                   kind: str = "gaussian") -> np.ndarray:
    """One (or ``size``) circular complex Gaussian spreading arrays with variances ``C``.

    ``kind="constant_modulus"`` replaces the Gaussian by ``sqrt(C) * exp(i*phi)``
    with uniform phase: same second moments, no magnitude fluctuation.
    """
    support = C.values > 0
    sigma = np.sqrt(C.values[support])
    shape = (sigma.size,) if size is None else (size, sigma.size)
    active = draw_active(sigma, rng, shape, kind)
    out = np.zeros(C.grid.shape if size is None else (size,) + C.grid.shape, dtype=complex)
    out[..., support] = active
    return out


def draw_active(sigma: np.ndarray, rng: np.random.Generator, shape, kind: str = "gaussian") -> np.ndarray:
    if kind == "gaussian":
        g = rng.standard_normal(tuple(shape) + (2,))
        return sigma * (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
    if kind == "constant_modulus":
        return sigma * np.exp(2j * np.pi * rng.random(shape))
    raise ValueError(f"unknown draw kind {kind!r}")


def synth_train(c, grid: GridSpec) -> np.ndarray:
    """Weighted delta train: ``x[l] = c[(l // Ktilde) % L]`` when ``Ktilde | l``, else 0."""
    c = as_seed(c)
    if c.size != grid.L:
        raise GridMismatch(f"seed has length {c.size}, grid has L={grid.L}")
    x = np.zeros(grid.N, dtype=complex)
    x[:: grid.Ktilde] = np.tile(c, grid.P)
    return x


class ChannelOperator:
    """Echo synthesis restricted to a fixed set of active cells.

    Precomputes one row ``exp(2j*pi*m*l/N) * x[(l - k) % N]`` per active cell,
    so an echo costs ``n_active * N`` multiply-accumulates.
    """

    def __init__(self, x: np.ndarray, grid: GridSpec, support: np.ndarray):
        x = np.asarray(x, dtype=complex)
        if x.shape != (grid.N,):
            raise GridMismatch(f"train has length {x.size}, grid wants N={grid.N}")
        support = np.asarray(support, dtype=bool)
        if support.shape != grid.shape:
            raise GridMismatch("support mask does not match the grid")
        self.grid = grid
        self.support = support
        self.k, self.m = np.nonzero(support)
        N = grid.N
        ell = np.arange(N)
        shifted = x[(ell[None, :] - self.k[:, None]) % N]
        self.basis = np.exp(2j * np.pi * np.outer(self.m, ell) / N) * shifted

    @property
    def n_active(self) -> int:
        return self.k.size

    @property
    def mac_count(self) -> int:
        return self.basis.size

    def apply_active(self, eta_active: np.ndarray) -> np.ndarray:
        """Echoes for spreading values listed per active cell, shape ``(..., n_active)``."""
        return np.asarray(eta_active) @ self.basis

    def apply(self, eta: np.ndarray) -> np.ndarray:
        eta = np.asarray(eta)
        return self.apply_active(eta[..., self.support])


def apply_channel(eta: np.ndarray, x: np.ndarray, grid: Optional[GridSpec] = None) -> np.ndarray:
    """Echo of the train ``x`` through the channel state(s) ``eta``.

    ``eta`` has shape ``grid.shape`` or ``(batch,) + grid.shape``. When ``grid``
    is omitted it is inferred from ``eta`` and ``len(x)`` only if unambiguous,
    so pass it explicitly in library code.
    """
    eta = np.asarray(eta, dtype=complex)
    if grid is None:
        grid = _infer_grid(eta.shape[-2:], len(x))
    if eta.shape[-2:] != grid.shape:
        raise GridMismatch(f"spreading array shape {eta.shape} does not match grid {grid.shape}")
    support = np.any(eta != 0, axis=tuple(range(eta.ndim - 2)))
    return ChannelOperator(x, grid, support).apply(eta)


def _infer_grid(shape, N: int) -> GridSpec:
    n_delay, n_doppler = shape
    # n_delay = L*Kt, n_doppler = L*P, N = L*Kt*P  =>  L = n_delay*n_doppler/N
    L, rem = divmod(n_delay * n_doppler, N)
    if rem or L < 1 or n_delay % L or n_doppler % L:
        raise GridMismatch(f"cannot infer grid from eta shape {shape} and N={N}")
    return GridSpec(L, n_delay // L, n_doppler // L)
