"""Continuous test scattering functions and their sampling onto a grid.

Every model is a frozen dataclass exposing ``__call__(tau, nu)`` in physical
units (seconds, Hz) and ``sample(grid, t_scale, f_scale)`` returning the full
bounding-box array. All models vanish outside ``[0, t_max) x [0, b_max)``.
"""

from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .channel import GridSpec


def _window(tau, nu, t_max, b_max):
    return (tau >= 0) & (tau < t_max) & (nu >= 0) & (nu < b_max)


@dataclass(frozen=True)
class _Model:
    t_max: float = 1.0
    b_max: float = 3.0

    #: Doppler sample position within a bin (0 = left edge, 0.5 = center)
    doppler_offset = 0.0

    def params(self) -> dict:
        return asdict(self)

    def sample(self, grid: GridSpec, t_scale: Optional[float] = None,
               f_scale: Optional[float] = None) -> np.ndarray:
        t_scale = self.t_max / grid.n_delay if t_scale is None else t_scale
        f_scale = self.b_max / grid.n_doppler if f_scale is None else f_scale
        tau = np.arange(grid.n_delay)[:, None] * t_scale
        nu = (np.arange(grid.n_doppler)[None, :] + self.doppler_offset) * f_scale
        return np.broadcast_to(self(tau, nu), grid.shape).astype(float)


@dataclass(frozen=True)
class GaussianBoxModel(_Model):
    """Indicator of a rectangle plus a normalized bivariate Gaussian density."""

    box_tau: tuple = (0.12, 0.4)
    box_nu: tuple = (0.1, 0.35)
    mu_tau: float = 0.66
    mu_nu: float = 2.4
    sigma_tau: float = 0.07
    sigma_nu: float = 0.13

    model_id = "C1"

    def __call__(self, tau, nu):
        tau = np.asarray(tau, dtype=float)
        nu = np.asarray(nu, dtype=float)
        box = ((tau >= self.box_tau[0]) & (tau <= self.box_tau[1])
               & (nu >= self.box_nu[0]) & (nu <= self.box_nu[1]))
        z = ((tau - self.mu_tau) / self.sigma_tau) ** 2 + ((nu - self.mu_nu) / self.sigma_nu) ** 2
        gauss = np.exp(-0.5 * z) / (2 * np.pi * self.sigma_tau * self.sigma_nu)
        return np.where(_window(tau, nu, self.t_max, self.b_max), box + gauss, 0.0)


@dataclass(frozen=True)
class JakesExponentialModel(_Model):
    """Exponential delay profile times the one-sided Jakes Doppler profile.

    Sampled at Doppler bin centers so the edge singularity at ``b_max`` is
    never evaluated.
    """

    rho: float = 14.0
    tau0: float = 0.3

    model_id = "C2"
    doppler_offset = 0.5

    def __call__(self, tau, nu):
        tau = np.asarray(tau, dtype=float)
        nu = np.asarray(nu, dtype=float)
        inside = _window(tau, nu, self.t_max, self.b_max)
        r2 = self.rho**2
        with np.errstate(invalid="ignore", divide="ignore"):
            delay = r2 / self.tau0 * np.exp(-tau / self.tau0)
            doppler = r2 / (np.pi * np.sqrt(self.b_max**2 - nu**2))
            value = doppler * delay / r2
        return np.where(inside, value, 0.0)


@dataclass(frozen=True)
class TrigPolynomialModel(_Model):
    """Squared modulus of a random trigonometric polynomial.

    Coefficients are i.i.d. circular complex Gaussian, drawn once from
    ``numpy.random.default_rng(seed)``.
    """

    U: int = 30
    V: int = 5
    seed: int = 0

    model_id = "C3"

    @cached_property
    def coefficients(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        shape = (2 * (self.V // 2) + 1, self.U + 1)
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    def __call__(self, tau, nu):
        tau = np.asarray(tau, dtype=float)
        nu = np.asarray(nu, dtype=float)
        m = np.arange(-(self.V // 2), self.V // 2 + 1)
        n = np.arange(self.U + 1)
        # sum_m e^{2 pi i m tau/T} * (sum_n c_mn e^{-2 pi i n nu/B})
        t_phase = np.exp(2j * np.pi * np.multiply.outer(tau / self.t_max, m))
        f_phase = np.exp(-2j * np.pi * np.multiply.outer(nu / self.b_max, n))
        inner = f_phase @ self.coefficients.T  # (..., len(m))
        value = np.abs(np.sum(t_phase * inner, axis=-1)) ** 2
        return np.where(_window(tau, nu, self.t_max, self.b_max), value, 0.0)


@dataclass(frozen=True)
class ConstantModel(_Model):
    value: float = 1.0

    model_id = "constant"

    def __call__(self, tau, nu):
        tau = np.asarray(tau, dtype=float)
        nu = np.asarray(nu, dtype=float)
        return np.where(_window(tau, nu, self.t_max, self.b_max), float(self.value), 0.0)


@dataclass(frozen=True)
class PointModel(_Model):
    """A single scatterer with variance ``value`` at grid cell ``(k, m)``."""

    k: int = 0
    m: int = 0
    value: float = 1.0

    model_id = "point"

    def __call__(self, tau, nu):
        raise TypeError("PointModel is defined on grid cells only; use sample()")

    def sample(self, grid, t_scale=None, f_scale=None):
        out = np.zeros(grid.shape)
        out[self.k % grid.n_delay, self.m % grid.n_doppler] = self.value
        return out


MODELS = {
    "C1": GaussianBoxModel,
    "C2": JakesExponentialModel,
    "C3": TrigPolynomialModel,
    "constant": ConstantModel,
    "point": PointModel,
}


def make_model(model_id: str, **params):
    """Construct a model by id (``C1``, ``C2``, ``C3``, ``constant``, ``point``, ``zero``)."""
    if model_id == "zero":
        return ConstantModel(value=0.0, **params)
    try:
        cls = MODELS[model_id]
    except KeyError:
        raise ValueError(f"unknown model id {model_id!r}; expected one of {sorted(MODELS) + ['zero']}") from None
    return cls(**params)


def eval_model(model, tau, nu):
    """Evaluate a continuous model at physical ``(tau, nu)``."""
    return model(tau, nu)
