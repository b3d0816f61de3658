"""Monte Carlo experiments: J soundings, error metrics and decay-rate fits.

Random streams: trial ``t`` of stream ``s`` uses
``numpy.random.default_rng([master_seed, s, t])``. A single run uses stream 0;
point ``i`` of an MSE curve uses stream ``i + 1``. Trials are processed in
fixed-size chunks that are reduced in chunk order, so results do not depend
on the number of worker threads.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .channel import (ChannelOperator, GridSpec, ScatteringGrid, SupportCover, discretize,
                      draw_active, synth_train)
from .errors import DegenerateFit, ValidationError
from .fiducials import load_fiducial, packaged_fiducial
from .tfcore import KroneckerMatrix, as_seed, build_K, random_unimodular
from .zakest import (AutocorrAccumulator, EstimatedScattering, cross_statistics, invert,
                     patch_vectors, per_sounding_estimates, relative_error, zak)

CHUNK = 256
WEIGHT_STREAM = 2**31 - 1
WEIGHT_MODES = ("random_unimodular", "random_complex", "fiducial_file", "explicit")
DRAW_KINDS = ("gaussian", "constant_modulus")


def trial_rng(master_seed: int, stream: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, stream, trial])


@dataclass(frozen=True)
class WeightSpec:
    """How the seed vector is obtained.

    ``fiducial_file`` with ``file=None`` uses the fiducial shipped with the package.
    Unimodular weights always make the full-cover Kronecker matrix singular
    (``V(0, b) = 0`` for ``b != 0``); use them only with partial covers.
    ``seed=None`` for random weights means "derive from the master seed".
    """

    mode: str = "random_unimodular"
    file: Optional[str] = None
    values: Optional[Tuple[complex, ...]] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.mode not in WEIGHT_MODES:
            raise ValidationError(f"unknown weight mode {self.mode!r}")
        if self.mode == "explicit" and not self.values:
            raise ValidationError("explicit weights need values")


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridSpec
    cover: SupportCover
    model: object
    weights: WeightSpec = WeightSpec()
    J: int = 16
    master_seed: int = 0
    J_sweep: Optional[Tuple[int, ...]] = None
    draw: str = "gaussian"
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.J < 1:
            raise ValidationError(f"J must be >= 1, got {self.J}")
        if self.cover.L != self.grid.L:
            raise ValidationError(f"cover has L={self.cover.L}, grid has L={self.grid.L}")
        if self.draw not in DRAW_KINDS:
            raise ValidationError(f"unknown draw kind {self.draw!r}")
        if self.J_sweep is not None:
            if not self.J_sweep or any(j < 1 for j in self.J_sweep):
                raise ValidationError("J_sweep must be a nonempty list of positive integers")
            if list(self.J_sweep) != sorted(self.J_sweep):
                raise ValidationError("J_sweep must be increasing")
        if self.weights.mode == "explicit" and len(self.weights.values) != self.grid.L:
            raise ValidationError(
                f"explicit weights have length {len(self.weights.values)}, expected L={self.grid.L}")


def resolve_weights(cfg: ExperimentConfig) -> np.ndarray:
    w, L = cfg.weights, cfg.grid.L
    if w.mode in ("random_unimodular", "random_complex"):
        seed = cfg.master_seed if w.seed is None else w.seed
        rng = np.random.default_rng([seed, WEIGHT_STREAM])
        if w.mode == "random_unimodular":
            return random_unimodular(L, rng)
        return (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2.0)
    if w.mode == "fiducial_file":
        c = packaged_fiducial(L) if w.file is None else load_fiducial(w.file)
        if c.size != L:
            raise ValidationError(f"fiducial file has L={c.size}, grid has L={L}")
        return c
    return as_seed(w.values)


class CurvePoint(NamedTuple):
    J: int
    rel_mse: float
    variance: float


@dataclass
class RunReport:
    J: int
    rel_mse: float
    abs_error: float
    zero_truth: bool
    variance: float
    cond_K: float
    negativity: float
    dropped_fraction: float
    wall_time: float
    seeds: dict
    curve: List[CurvePoint] = field(default_factory=list)
    estimate: Optional[EstimatedScattering] = field(default=None, repr=False)
    truth: Optional[ScatteringGrid] = field(default=None, repr=False)

    def to_text(self) -> str:
        lines = [
            f"J = {self.J}",
            f"rel_mse = {self.rel_mse!r}",
            f"abs_error = {self.abs_error!r}",
            f"zero_truth = {str(self.zero_truth).lower()}",
            f"variance = {self.variance!r}",
            f"cond_K = {self.cond_K!r}",
            f"negativity = {self.negativity!r}",
            f"dropped_fraction = {self.dropped_fraction!r}",
            f"wall_time_s = {self.wall_time:.3f}",
        ]
        lines += [f"seed.{k} = {v}" for k, v in self.seeds.items()]
        for p in self.curve:
            lines.append(f"curve J={p.J} rel_mse={p.rel_mse!r} variance={p.variance!r}")
        return "\n".join(lines) + "\n"


def curve_to_csv(points: Sequence[CurvePoint]) -> str:
    rows = ["J,rel_mse,variance"] + [f"{p.J},{p.rel_mse!r},{p.variance!r}" for p in points]
    return "\n".join(rows) + "\n"


@dataclass
class _Sums:
    acc: AutocorrAccumulator
    first: np.ndarray
    second: np.ndarray

    def merge(self, other):
        return _Sums(self.acc.merge(other.acc), self.first + other.first, self.second + other.second)


def simulate(truth: ScatteringGrid, c, K: KroneckerMatrix, J: int, master_seed: int,
             stream: int = 0, draw: str = "gaussian", workers: int = 1,
             chunk: int = CHUNK) -> _Sums:
    """Sound ``J`` independent channel states and accumulate Zak statistics."""
    grid = truth.grid
    support = truth.values > 0
    sigma = np.sqrt(truth.values[support])
    op = ChannelOperator(synth_train(c, grid), grid, support)

    def run_chunk(start):
        stop = min(start + chunk, J)
        draws = np.empty((stop - start, sigma.size), dtype=complex)
        for row, t in enumerate(range(start, stop)):
            draws[row] = draw_active(sigma, trial_rng(master_seed, stream, t), (sigma.size,), draw)
        F = patch_vectors(zak(op.apply_active(draws), grid), grid)
        per = per_sounding_estimates(F, K)
        return _Sums(AutocorrAccumulator(grid).add(F), per.sum(axis=0), (per**2).sum(axis=0))

    starts = range(0, J, chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, starts))
    else:
        parts = [run_chunk(s) for s in starts]
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return total


def _estimate(cfg: ExperimentConfig, J: int, stream: int, workers: int):
    c = resolve_weights(cfg)
    truth = discretize(cfg.model, cfg.grid, cfg.cover)
    K = build_K(c, cfg.cover)
    sums = simulate(truth, c, K, J, cfg.master_seed, stream, cfg.draw, workers)
    est = invert(sums.acc, K, cfg.cover)
    if J > 1:
        mean = sums.first / J
        sample_var = (sums.second - J * mean**2) / (J - 1)
        variance = float(np.mean(np.clip(sample_var, 0, None)) / J)
    else:
        variance = float("nan")
    return c, truth, K, est, variance


def run_experiment(cfg: ExperimentConfig, J: Optional[int] = None, stream: int = 0,
                   workers: int = 1) -> RunReport:
    """Run ``cfg.J`` (or ``J``) soundings and compare the estimate to the truth grid."""
    t0 = time.perf_counter()
    J = cfg.J if J is None else J
    c, truth, K, est, variance = _estimate(cfg, J, stream, workers)
    diff = est.reassembled.values - truth.values
    zero_truth = not np.any(truth.values)
    return RunReport(
        J=J,
        rel_mse=relative_error(est.reassembled.values, truth.values),
        abs_error=float(np.linalg.norm(diff)),
        zero_truth=zero_truth,
        variance=variance,
        cond_K=K.cond,
        negativity=est.negativity,
        dropped_fraction=truth.dropped_fraction,
        wall_time=time.perf_counter() - t0,
        seeds={"master": cfg.master_seed, "stream": stream},
        estimate=est,
        truth=truth,
    )


def mse_curve(cfg: ExperimentConfig, J_list: Sequence[int], workers: int = 1) -> List[CurvePoint]:
    """Independent experiments per entry of ``J_list`` (stream ``i + 1`` for entry ``i``)."""
    J_list = [int(j) for j in J_list]
    if not J_list:
        raise ValueError("J_list must be nonempty")
    if J_list != sorted(J_list):
        raise ValueError("J_list must be nondecreasing")
    points = []
    for i, J in enumerate(J_list):
        rep = run_experiment(cfg, J=J, stream=i + 1, workers=workers)
        points.append(CurvePoint(J, rep.rel_mse, rep.variance))
    return points


def slope_fit(points: Sequence[Sequence[float]]) -> float:
    """OLS slope of ``log(err**2)`` against ``log(J)``; the 1/J law gives -1."""
    J = np.array([p[0] for p in points], dtype=float)
    err = np.array([p[1] for p in points], dtype=float)
    if np.unique(J).size < 3:
        raise DegenerateFit(f"need at least 3 distinct J values, got {np.unique(J).size}")
    x = np.log(J)
    yv = np.log(err**2)
    xc = x - x.mean()
    return float(np.dot(xc, yv - yv.mean()) / np.dot(xc, xc))


class EstimatorComparison(NamedTuple):
    auto: np.ndarray          # patch values from the autocorrelation inversion
    cross: np.ndarray         # patch values from the cross-correlation estimator
    diff_norm: float          # ||mean(auto_t - cross_t)||_2 over patch points
    standard_error: float     # sqrt(sum of squared per-point standard errors of the mean difference)


def compare_estimators(cfg: ExperimentConfig, J: Optional[int] = None, stream: int = 0) -> EstimatorComparison:
    """Both estimators on the same ``J`` soundings; covers need at most ``L`` boxes."""
    J = cfg.J if J is None else J
    if J < 2:
        raise ValidationError("need J >= 2 to estimate a standard error")
    grid = cfg.grid
    c = resolve_weights(cfg)
    truth = discretize(cfg.model, grid, cfg.cover)
    K = build_K(c, cfg.cover)
    support = truth.values > 0
    sigma = np.sqrt(truth.values[support])
    op = ChannelOperator(synth_train(c, grid), grid, support)
    draws = np.stack([draw_active(sigma, trial_rng(cfg.master_seed, stream, t), (sigma.size,), cfg.draw)
                      for t in range(J)])
    y = op.apply_active(draws)
    F = patch_vectors(zak(y, grid), grid)
    auto = per_sounding_estimates(F, K)
    cross = cross_statistics(y, F, cfg.cover, c, grid).real
    d = auto - cross
    se2 = d.var(axis=0, ddof=1) / J
    return EstimatorComparison(auto.mean(axis=0), cross.mean(axis=0),
                               float(np.linalg.norm(d.mean(axis=0))), float(np.sqrt(se2.sum())))
