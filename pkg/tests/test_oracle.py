import numpy as np
import pytest

from respectra.errors import ConfigError, EvaluationError
from respectra.model import FormFactor2, make_model
from respectra.oracle import commutator_apply, discretize, propagate


def test_free_limit_spectrum():
    m = make_model("sqrt_exp", [1.0], 1.0, 0.0)
    d = discretize(m, 200)
    evals = np.sort(d.eigenvalues)
    expect = np.sort(np.concatenate([[1.0], d.grid]))
    assert np.max(np.abs(evals - expect)) < 1e-12


def test_minimum_size():
    m = make_model("sqrt_exp", [1.0], 1.0, 0.1)
    with pytest.raises(ConfigError):
        discretize(m, 50)


def test_hermiticity_guard():
    bad = FormFactor2("asym", lambda z, zp: np.asarray(z) * 0 + np.asarray(zp) * 1.0)
    m = make_model("sqrt_exp", [1.0], 1.0, 0.1, kernel=bad)
    with pytest.raises(EvaluationError):
        discretize(m, 200)


def test_propagate_identity_and_unitarity(default_model):
    d = discretize(default_model, 300)
    v = np.zeros(d.dimension, dtype=complex)
    v[0] = 1.0
    assert np.max(np.abs(propagate(d, v, 0.0) - v)) < 1e-12
    out = propagate(d, v, 37.0)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-12
    # population over the full basis stays one
    total = np.sum(np.abs(out) ** 2)
    assert abs(total - 1.0) < 1e-10


def test_propagate_shape_guard(default_model):
    d = discretize(default_model, 150)
    with pytest.raises(ConfigError):
        propagate(d, np.zeros(5), 1.0)


def test_commutator_identity(default_model):
    d = discretize(default_model, 200)
    eye = np.eye(d.dimension, dtype=complex)
    assert np.max(np.abs(commutator_apply(d, eye))) == 0.0


def test_provenance_fields(default_model):
    d = discretize(default_model, 128, omega_max=18.0)
    assert d.n == 128 and d.omega_max == 18.0 and d.dimension == 129


def test_level_repulsion_grows_with_coupling():
    gaps = {}
    for eps in (0.05, 0.1):
        m = make_model("sqrt_exp", [1.0], 1.0, eps)
        d = discretize(m, 1000)
        gaps[eps] = np.sort(np.abs(d.eigenvalues - 1.0))[0]
    assert gaps[0.1] > 1.5 * gaps[0.05]


def test_nearest_gap_scales_like_sqrt_bin():
    # the avoided-crossing gap at the level tracks V(Omega) sqrt(bin width);
    # average over sub-bin offsets of the level to wash out grid alignment
    ns = (500, 1000, 2000)
    mean_gaps = []
    for n in ns:
        dw = 20.0 / n
        vals = []
        for off in np.linspace(0.0, 1.0, 6, endpoint=False):
            m = make_model("sqrt_exp", [1.0], 1.0 + off * dw, 0.1)
            d = discretize(m, n)
            vals.append(np.sort(np.abs(d.eigenvalues - m.omega_level))[0])
        mean_gaps.append(np.mean(vals))
    slope = np.polyfit(np.log([20.0 / n for n in ns]), np.log(mean_gaps), 1)[0]
    assert 0.35 < slope < 0.75


def test_self_convergence(default_model):
    # doubling the grid moves late-time survival by less than 1e-4
    from respectra.dynamics import default_time_grid, oracle_survival_curve
    ts = default_time_grid(default_model, 40)
    a = oracle_survival_curve(default_model, ts, n_levels=1000)
    b = oracle_survival_curve(default_model, ts, n_levels=2000)
    assert np.max(np.abs(a.survival - b.survival)) < 1e-4
