import dataclasses

import numpy as np
import pytest

from zakscatter.channel import GridSpec
from zakscatter.models import (ConstantModel, GaussianBoxModel, JakesExponentialModel, PointModel,
                               TrigPolynomialModel, eval_model, make_model)


def test_c1_defaults_and_box_value():
    m = make_model("C1")
    assert isinstance(m, GaussianBoxModel)
    assert (m.box_tau, m.box_nu) == ((0.12, 0.4), (0.1, 0.35))
    assert (m.mu_tau, m.mu_nu, m.sigma_tau, m.sigma_nu) == (0.66, 2.4, 0.07, 0.13)
    assert eval_model(m, 0.26, 0.225) >= 1
    assert eval_model(m, 0.9, 0.6) == pytest.approx(0, abs=1e-20)


def test_c1_gaussian_peak_height():
    m = make_model("C1")
    assert eval_model(m, 0.66, 2.4) == pytest.approx(1 / (2 * np.pi * 0.07 * 0.13))


def test_c2_vanishes_outside_and_factorizes():
    m = make_model("C2")
    assert isinstance(m, JakesExponentialModel) and (m.rho, m.tau0) == (14.0, 0.3)
    assert eval_model(m, 1.5, 1.0) == 0
    assert eval_model(m, 0.2, -0.1) == 0
    v = eval_model(m, 0.0, 0.0)
    assert v == pytest.approx(1 / 0.3 * 14**2 / (np.pi * 3.0))
    ratio = eval_model(m, 0.3, 1.0) / eval_model(m, 0.0, 1.0)
    assert ratio == pytest.approx(np.exp(-1))


def test_c2_sampled_at_bin_centres_is_finite():
    g = GridSpec(3, 2, 8)
    s = make_model("C2").sample(g)
    assert np.all(np.isfinite(s)) and s.min() > 0


def test_c3_nonnegative_and_reproducible():
    a, b = make_model("C3"), make_model("C3")
    assert isinstance(a, TrigPolynomialModel) and (a.U, a.V) == (30, 5)
    assert np.array_equal(a.coefficients, b.coefficients)
    assert a.coefficients.shape == (5, 31)
    tau, nu = np.meshgrid(np.linspace(0, 0.99, 17), np.linspace(0, 2.99, 19))
    vals = a(tau, nu)
    assert vals.min() >= 0 and vals.max() > 0
    assert not np.array_equal(make_model("C3", seed=1).coefficients, a.coefficients)


def test_c3_matches_direct_sum():
    m = make_model("C3", U=3, V=3, seed=4)
    tau, nu = 0.37, 1.3
    total = 0
    for i, mm in enumerate(range(-1, 2)):
        for n in range(4):
            total += m.coefficients[i, n] * np.exp(2j * np.pi * (mm * tau / 1.0 - n * nu / 3.0))
    assert m(tau, nu) == pytest.approx(abs(total) ** 2)


def test_constant_zero_point():
    g = GridSpec(2, 1, 2)
    assert np.array_equal(ConstantModel(value=2.0).sample(g), np.full(g.shape, 2.0))
    assert not make_model("zero").sample(g).any()
    p = PointModel(k=1, m=3, value=5.0).sample(g)
    assert p[1, 3] == 5 and p.sum() == 5
    with pytest.raises(TypeError):
        PointModel()(0, 0)


def test_unknown_model():
    with pytest.raises(ValueError):
        make_model("C9")


def test_models_are_frozen_and_params_roundtrip():
    m = make_model("C1", mu_tau=0.5)
    with pytest.raises(dataclasses.FrozenInstanceError):
        m.mu_tau = 1.0
    assert make_model("C1", **m.params()) == m
