import numpy as np
import pytest

from respectra.contour import ContourSpec
from respectra.errors import AnalyticityError, ConfigError
from respectra.model import (eval_V, eval_V2, eval_Vbar, make_model, model_from_dict,
                             separable_test_kernel)
from respectra.states import random_analytic, real_axis_inner
import scipy.integrate as si


def test_registry_construction(default_model):
    # closed-form value: 0.1 * sqrt(1) * exp(-1/2)
    assert abs(eval_V(default_model, 1.0) - 0.06065306597126334) < 1e-16


def test_zero_coupling_is_free():
    m = make_model("sqrt_exp", [1.0], 1.0, 0.0)
    z = np.linspace(0.1, 5.0, 7)
    assert np.all(eval_V(m, z) == 0)
    assert m.has_kernel() is False


def test_analyticity_guard():
    # a pole at depth 1.0 under a contour of depth 1.5 is rejected
    with pytest.raises(AnalyticityError):
        make_model("lorentz_sqrt", [1.0], 1.0, 0.1,
                   ContourSpec(depth=1.5, cutoff=20.0, n_nodes=64))
    # same family above a shallower contour is fine
    make_model("lorentz_sqrt", [1.0], 1.0, 0.1,
               ContourSpec(depth=0.5, cutoff=20.0, n_nodes=64))


def test_unknown_family():
    with pytest.raises(ConfigError):
        make_model("gauss", [1.0], 1.0, 0.1)


def test_spec_invariants():
    with pytest.raises(ConfigError):
        make_model("sqrt_exp", [1.0], -1.0, 0.1)
    with pytest.raises(ConfigError):
        make_model("sqrt_exp", [1.0], 1.0, -0.1)
    with pytest.raises(ConfigError):
        make_model("sqrt_exp", [1.0], 30.0, 0.1,
                   ContourSpec(depth=0.5, cutoff=20.0, n_nodes=64))


def test_schwarz_reflection(default_model, rng):
    z = (rng.uniform(0.1, 18.0, 100) + 1j * rng.uniform(-0.5, 0.5, 100))
    lhs = np.conj(np.asarray(eval_V(default_model, np.conj(z))))
    rhs = np.asarray(eval_Vbar(default_model, z))
    assert np.max(np.abs(lhs - rhs)) == 0.0


def test_real_axis_agreement(default_model):
    w = np.linspace(0.05, 15.0, 9)
    v = np.asarray(eval_V(default_model, w))
    vb = np.asarray(eval_Vbar(default_model, w))
    assert np.max(np.abs(v - vb)) < 1e-16


def test_coupling_linearity(default_model, rng):
    m2 = make_model("sqrt_exp", [1.0], 1.0, 0.2, default_model.contour)
    z = rng.uniform(0.1, 10.0, 20) + 1j * rng.uniform(-0.4, 0.4, 20)
    assert np.max(np.abs(np.asarray(eval_V(m2, z))
                         - 2.0 * np.asarray(eval_V(default_model, z)))) == 0.0


def test_region_guard(default_model):
    with pytest.raises(AnalyticityError):
        eval_V(default_model, 5.0 - 3.0j)
    with pytest.raises(AnalyticityError):
        eval_V(default_model, 40.0 + 0j)


def test_separable_kernel_hermitian():
    k = separable_test_kernel()
    w = np.linspace(0.1, 8.0, 6)
    mat = np.asarray(k.eval2(w[:, None], w[None, :]))
    assert np.max(np.abs(mat - mat.conj().T)) < 1e-15


def test_kernel_quadratic_coupling():
    m1 = make_model("sqrt_exp", [1.0], 1.0, 0.1, kernel="separable_sqrt_exp")
    m2 = make_model("sqrt_exp", [1.0], 1.0, 0.2, kernel="separable_sqrt_exp")
    assert abs(eval_V2(m2, 1.0, 2.0) - 4.0 * eval_V2(m1, 1.0, 2.0)) < 1e-18


def test_model_from_dict_roundtrip():
    m = model_from_dict({"family": "sqrt_exp", "params": [1.0], "omega": 1.5,
                         "epsilon": 0.05,
                         "contour": {"depth": 0.4, "cutoff": 25.0, "n_nodes": 128}})
    assert m.omega_level == 1.5 and m.contour.n_nodes == 128


def test_model_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        model_from_dict({"family": "sqrt_exp", "omega": 1.0, "epsilon": 0.1,
                         "extra": 1})
    with pytest.raises(ConfigError):
        model_from_dict({"family": "sqrt_exp", "omega": 1.0, "epsilon": 0.1,
                         "contour": {"deep": 2}})
    with pytest.raises(ConfigError):
        model_from_dict({"family": "sqrt_exp", "epsilon": 0.1})


def test_reference_inner_product_against_quad(axis_grid, rng):
    psi = random_analytic(rng)
    phi = random_analytic(rng)
    got = real_axis_inner(psi, phi, axis_grid)
    re, _ = si.quad(lambda w: (psi.at(w) * phi.at(w)).real, 0, 20.0, limit=400)
    im, _ = si.quad(lambda w: (psi.at(w) * phi.at(w)).imag, 0, 20.0, limit=400)
    assert abs(got - (psi.d * phi.d + re + 1j * im)) < 1e-10
