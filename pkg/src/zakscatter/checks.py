"""Invariant suite run by ``zakscatter verify``.

Each check returns a :class:`CheckResult`; none of them depend on stored
reference numbers, only on brute-force recomputation.
"""

import itertools
from typing import List, NamedTuple, Sequence

import numpy as np

from .channel import GridSpec
from .errors import RankDeficient
from .fiducials import packaged_fiducial
from .tfcore import (ambiguity, full_boxes, predicted_singular_values, random_unimodular,
                     random_unit_norm, spectral_check, build_K)
from .zakest import verify_factorization

FACTORIZATION_GRIDS = tuple(itertools.product((2, 3, 4), (1, 2, 4), (4, 8)))


class CheckResult(NamedTuple):
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name}: {self.value:.3e} (threshold {self.threshold:.3e}) {self.detail}".rstrip()


def random_spreading(grid: GridSpec, rng: np.random.Generator) -> np.ndarray:
    shape = grid.shape
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def check_factorization(draws: int = 10, seed: int = 0, grids: Sequence = FACTORIZATION_GRIDS,
                        tol: float = 1e-9) -> CheckResult:
    """Worst ``max|F - G eta| / max|F|`` over every grid and draw."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for L, Kt, P in grids:
        grid = GridSpec(L, Kt, P)
        for _ in range(draws):
            c = random_unimodular(L, rng)
            eta = random_spreading(grid, rng)
            err = verify_factorization(eta, c, grid)
            scale = np.max(np.abs(eta)) * np.max(np.abs(c))
            worst = max(worst, err / scale)
    return CheckResult("factorization", worst < tol, worst, tol, f"{len(grids)} grids x {draws} draws")


def check_spectral_identity(Ls: Sequence[int] = range(2, 7), seeds: int = 20, seed: int = 0,
                            tol: float = 1e-8) -> CheckResult:
    """Sorted singular values of ``K_full`` against the ambiguity-table prediction."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for L in Ls:
        for _ in range(seeds):
            c = random_unit_norm(L, rng)
            try:
                sv = spectral_check(c).singular_values
            except RankDeficient:
                return CheckResult("spectral identity", False, np.inf, tol, f"rank deficient at L={L}")
            pred = predicted_singular_values(c)
            worst = max(worst, float(np.max(np.abs(sv - pred)) / sv[0]))
    return CheckResult("spectral identity", worst < tol, worst, tol)


def check_condition_floor(Ls: Sequence[int] = range(2, 7), seeds: int = 20, seed: int = 0,
                          slack: float = 1e-9) -> CheckResult:
    """``cond(K_full) >= sqrt(L+1)`` for generic seeds; reports the smallest ratio."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    for L in Ls:
        for _ in range(seeds):
            try:
                cond = build_K(random_unit_norm(L, rng), full_boxes(L)).cond
            except RankDeficient:
                continue  # infinite condition number satisfies the floor
            worst = min(worst, cond / np.sqrt(L + 1))
    return CheckResult("condition floor", worst >= 1 - slack, worst, 1 - slack, "min cond/sqrt(L+1)")


def check_welch_floor(Ls: Sequence[int] = range(2, 8), tol: float = 1e-6) -> CheckResult:
    """Packaged fiducials attain ``cond(K_full) = sqrt(L+1)``."""
    worst = 0.0
    for L in Ls:
        cond = build_K(packaged_fiducial(L), full_boxes(L)).cond
        worst = max(worst, abs(cond / np.sqrt(L + 1) - 1))
    return CheckResult("Welch floor", worst < tol, worst, tol, f"fiducials L={min(Ls)}..{max(Ls)}")


def check_ambiguity_energy(Ls: Sequence[int] = range(2, 9), seeds: int = 50, seed: int = 0,
                           tol: float = 1e-10) -> CheckResult:
    """``sum |V|^2 = L * ||c||_2^4`` (the tight-frame energy identity)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for L in Ls:
        for _ in range(seeds):
            c = rng.standard_normal(L) + 1j * rng.standard_normal(L)
            energy = float(np.sum(np.abs(ambiguity(c)) ** 2))
            target = L * np.linalg.norm(c) ** 4
            worst = max(worst, abs(energy - target) / target)
    return CheckResult("ambiguity energy", worst < tol, worst, tol)


def calibrate_spectral_exponents(Ls: Sequence[int] = (2, 3), seeds: int = 10, seed: int = 0):
    """Least-squares fit of ``log sigma = q log L + p log|V|`` from brute-force SVDs."""
    rng = np.random.default_rng(seed)
    rows, rhs = [], []
    for L in Ls:
        for _ in range(seeds):
            c = random_unit_norm(L, rng)
            sv = spectral_check(c).singular_values
            V = np.sort(np.abs(ambiguity(c)).ravel())[::-1]
            for s, v in zip(sv, V):
                rows.append([np.log(L), np.log(v)])
                rhs.append(np.log(s))
    (q, p), *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return float(q), float(p)


def run_all() -> List[CheckResult]:
    return [
        check_factorization(),
        check_spectral_identity(),
        check_condition_floor(),
        check_welch_floor(),
        check_ambiguity_energy(),
    ]
