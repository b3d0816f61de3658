"""Fiducial (SIC) seed vectors: validation, search and file I/O.

A seed ``c`` is fiducial when every off-peak ambiguity value has modulus
``||c||^2 / sqrt(L + 1)``; such seeds minimize ``cond(K_full)``.
"""

from importlib import resources
from pathlib import Path
from typing import Tuple

import numpy as np
import scipy.optimize

from .errors import FiducialError
from .tfcore import ambiguity, as_seed

DEFAULT_TOL = 1e-8
LOAD_TOL = 1e-6


def fiducial_deviation(c) -> Tuple[float, Tuple[int, int], float]:
    """Worst relative deviation from equiangularity.

    Returns ``(deviation, (a, b), |V(a, b)|)`` for the off-peak point where
    ``| |V| - ||c||^2/sqrt(L+1) |`` is largest, deviation scaled by ``||c||^2``.
    """
    c = as_seed(c)
    L = c.size
    energy = float(np.vdot(c, c).real)
    if energy <= 0:
        raise ValueError("seed vector must be nonzero")
    V = np.abs(ambiguity(c))
    target = energy / np.sqrt(L + 1)
    dev = np.abs(V - target) / energy
    dev[0, 0] = -np.inf
    if L == 1:
        return 0.0, (0, 0), float(V[0, 0])
    a, b = np.unravel_index(np.argmax(dev), dev.shape)
    return float(dev[a, b]), (int(a), int(b)), float(V[a, b])


def validate_fiducial(c, tol: float = DEFAULT_TOL) -> bool:
    return fiducial_deviation(c)[0] <= tol


def _objective(x: np.ndarray, L: int) -> float:
    c = x[:L] + 1j * x[L:]
    energy = np.vdot(c, c).real
    V2 = np.abs(ambiguity(c)) ** 2 / energy**2
    V2[0, 0] = 1.0 / (L + 1)
    return float(np.sum((V2 - 1.0 / (L + 1)) ** 2))


def search_fiducial(
    L: int,
    rng_seed: int = 0,
    max_iters: int = 2000,
    restarts: int = 20,
) -> Tuple[np.ndarray, float]:
    """Random-restart BFGS search for a unit-norm fiducial in dimension ``L``.

    Minimizes the squared deviation of normalized off-peak ``|V|^2`` from
    ``1/(L+1)``, then polishes the best start with a least-squares solve.
    Returns the best unit vector found and its off-peak maximum
    ``max |V|``. Nothing is guaranteed; check the result with
    :func:`validate_fiducial`. ``max_iters=0`` returns the first random start.
    """
    if L < 2:
        raise ValueError("fiducial search needs L >= 2")
    rng = np.random.default_rng(rng_seed)
    best_x, best_f = None, np.inf
    for _ in range(max(restarts, 1)):
        x0 = rng.standard_normal(2 * L)
        x0 /= np.linalg.norm(x0)
        if max_iters == 0:
            best_x = x0
            break
        res = scipy.optimize.minimize(
            _objective, x0, args=(L,), method="BFGS",
            options={"maxiter": max_iters, "gtol": 1e-14},
        )
        if res.fun < best_f:
            best_x, best_f = res.x, res.fun
        if best_f < 1e-14:
            break
    c = best_x[:L] + 1j * best_x[L:]
    c = c / np.linalg.norm(c)
    if max_iters > 0:
        c = polish_fiducial(c)
        # fix the global phase so files are reproducible
        c = c * np.exp(-1j * np.angle(c[np.argmax(np.abs(c))]))
    V = np.abs(ambiguity(c))
    V[0, 0] = 0.0
    return c, float(V.max())


def polish_fiducial(c, iters: int = 50) -> np.ndarray:
    """A few Newton-like least-squares steps to drive a near-fiducial to machine precision."""
    c = as_seed(c)
    L = c.size

    def residual(x):
        z = x[:L] + 1j * x[L:]
        energy = np.vdot(z, z).real
        V2 = np.abs(ambiguity(z)) ** 2 / energy**2
        r = (V2 - 1.0 / (L + 1)).ravel()[1:]
        return np.concatenate([r, [np.linalg.norm(z) - 1.0]])

    x0 = np.concatenate([c.real, c.imag]) / np.linalg.norm(c)
    res = scipy.optimize.least_squares(residual, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=iters * 2 * L)
    z = res.x[:L] + 1j * res.x[L:]
    return z / np.linalg.norm(z)


def write_fiducial(path, c) -> None:
    c = as_seed(c)
    lines = [str(c.size)] + [f"{float(v.real)!r} {float(v.imag)!r}" for v in c]
    Path(path).write_text("\n".join(lines) + "\n")


def read_seed_file(path) -> np.ndarray:
    """Parse the ``L`` / ``re im`` text format without validating."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FiducialError(f"cannot read seed file {path}: {exc}") from exc
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    try:
        L = int(rows[0][0])
        if len(rows[0]) != 1 or L < 1:
            raise ValueError
        entries = [complex(float(r[0]), float(r[1])) for r in rows[1:]]
        if any(len(r) != 2 for r in rows[1:]):
            raise ValueError
    except (IndexError, ValueError) as exc:
        raise FiducialError(f"{path}: expected 'L' then L lines 're im'") from exc
    if len(entries) != L:
        raise FiducialError(f"{path}: header says L={L} but {len(entries)} entries follow")
    return np.array(entries, dtype=complex)


def load_fiducial(path, tol: float = LOAD_TOL) -> np.ndarray:
    """Read a fiducial file and reject it unless it validates at ``tol``."""
    c = read_seed_file(path)
    if c.size >= 2:
        dev, (a, b), value = fiducial_deviation(c)
        if dev > tol:
            energy = float(np.vdot(c, c).real)
            raise FiducialError(
                f"{path}: not a fiducial at tol={tol:g}; worst off-peak |V({a},{b})| = "
                f"{value:.10g}, expected {energy / np.sqrt(c.size + 1):.10g} "
                f"(relative deviation {dev:.3e})"
            )
    return c


def packaged_fiducial(L: int) -> np.ndarray:
    """Validated fiducial shipped with the package (available for L = 2..7)."""
    ref = resources.files("zakscatter") / "data" / f"fiducial_L{L}.txt"
    if not ref.is_file():
        raise FiducialError(f"no packaged fiducial for L={L}")
    with resources.as_file(ref) as p:
        return load_fiducial(p)
