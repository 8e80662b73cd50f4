import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jcloss import model
from jcloss.model import GROUND, Minus, ModelParams, Plus

deltas = st.floats(-8, 8, allow_nan=False)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(lam=0.0)
    with pytest.raises(ValueError):
        ModelParams(gamma=-1.0)
    with pytest.raises(ValueError):
        ModelParams(delta=float("inf"))
    assert ModelParams().resonant and not ModelParams(delta=0.3).resonant


def test_basis_positions():
    assert [model.index_at(i) for i in range(5)] == [GROUND, Minus(1), Plus(1), Minus(2), Plus(2)]
    for i in range(21):
        assert model.index_at(i).position == i
    with pytest.raises(ValueError):
        Plus(0)


@pytest.mark.parametrize("params,n,expected", [
    (ModelParams(1.0, 0.0), 4, 2.0),
    (ModelParams(4.0, 3.0), 1, 5.0),
    (ModelParams(1.0, 0.1), 3, math.sqrt(3.01)),
])
def test_epsilon(params, n, expected):
    assert model.epsilon(params, n) == pytest.approx(expected, rel=1e-15)


def test_mixing_examples():
    c, s = model.mixing(ModelParams(1.0, 0.0), 3)
    assert c == pytest.approx(1 / math.sqrt(2)) and s == pytest.approx(1 / math.sqrt(2))
    c, s = model.mixing(ModelParams(4.0, 3.0), 1)
    assert c == pytest.approx(math.sqrt(0.8), rel=1e-15) and s == pytest.approx(math.sqrt(0.2), rel=1e-15)
    c, s = model.mixing(ModelParams(1.0, 1e9), 2)
    assert c == pytest.approx(1.0) and 0 < s < 1e-8


@given(deltas, st.integers(1, 30))
def test_mixing_unit_norm(delta, n):
    c, s = model.mixing(ModelParams(1.0, delta), n)
    assert c * c + s * s == pytest.approx(1.0, rel=1e-14)


@given(deltas, st.integers(1, 8))
def test_dressed_states_diagonalise_c(delta, cutoff):
    p = ModelParams(1.0, delta)
    u = model.bare_to_dressed(p, cutoff)
    assert np.allclose(u.T @ u, np.eye(len(u)), atol=1e-13)
    c = u.T @ model.c_operator_bare(p, cutoff) @ u
    assert np.allclose(c, np.diag(model.c_vector(p, cutoff)), atol=1e-12 * (1 + abs(delta)))


def test_a_matrix_element_examples():
    p0 = ModelParams(1.0, 0.0)
    assert model.a_matrix_element(p0, Plus(1), GROUND) == pytest.approx(1 / math.sqrt(2))
    assert model.a_matrix_element(p0, Plus(2), Minus(1)) == pytest.approx((math.sqrt(2) - 1) / 2)
    for delta in (-2.0, 0.3, 7.0):
        p = ModelParams(1.0, delta)
        assert model.a_matrix_element(p, Minus(1), GROUND) == pytest.approx(model.mixing(p, 1)[1])
    with pytest.raises(ValueError):
        model.a_matrix_element(p0, Plus(3), Plus(1))


@given(deltas, st.integers(1, 7))
def test_dressed_annihilation_matches_rotated_bare(delta, cutoff):
    p = ModelParams(1.0, delta)
    u = model.bare_to_dressed(p, cutoff)
    rotated = u.T @ model.annihilation_bare(cutoff) @ u
    assert np.allclose(rotated, model.annihilation_dressed(p, cutoff), atol=1e-13)


@given(deltas, st.integers(1, 9))
def test_total_outflow_equals_atilde(delta, n):
    # Completeness: sum over one-lower targets of |<t|a|s>|^2 equals <s|a^dag a|s>.
    p = ModelParams(1.0, delta)
    a = model.annihilation_dressed(p, n)
    out = (a**2).sum(axis=0)
    assert np.allclose(out, model.atilde_vector(p, n), atol=1e-12)


def test_atilde_examples():
    assert model.atilde_eigenvalue(ModelParams(1.0, 2.0), GROUND) == 0.0
    assert model.atilde_eigenvalue(ModelParams(1.0, 0.0), Plus(1)) == pytest.approx(0.5)
    assert model.atilde_eigenvalue(ModelParams(4.0, 3.0), Minus(1)) == pytest.approx(0.5 - 0.3)


@given(st.floats(0.01, 8), st.integers(1, 20))
def test_atilde_closed_form(delta, n):
    p = ModelParams(1.0, delta)
    eps = float(model.epsilon(p, n))
    assert model.atilde_eigenvalue(p, Plus(n)) == pytest.approx(n - 0.5 + delta / (2 * eps), rel=1e-12)
    assert model.atilde_eigenvalue(p, Minus(n)) == pytest.approx(n - 0.5 - delta / (2 * eps), rel=1e-12, abs=1e-12)


def test_observables_examples():
    p = ModelParams()
    ground = model.SectorState(p, 2, [1, 0, 0, 0, 0], np.zeros(2))
    obs = model.observables(ground)
    assert (obs.P_g, obs.P_0g, obs.n_photon, obs.trace) == (1, 1, 0, 1)

    # Diagonal part of |g,1><g,1| at resonance: half on each of Plus(1), Minus(1).
    half = model.SectorState(p, 1, [0, 0.5, 0.5], np.zeros(1))
    obs = model.observables(half)
    assert obs.P_g == pytest.approx(0.5) and obs.n_photon == pytest.approx(0.5)

    obs = model.observables(model.excited_vacuum_state(p))
    assert obs.P_g == pytest.approx(0.0, abs=1e-15) and obs.n_photon == pytest.approx(0.0, abs=1e-15)


@given(deltas, st.integers(0, 5))
def test_observables_of_bare_fock_state(delta, n):
    p = ModelParams(1.0, delta)
    obs = model.observables(model.fock_state(p, n, cutoff=n + 1))
    assert obs.P_g == pytest.approx(1.0, abs=1e-12)
    assert obs.n_photon == pytest.approx(n, abs=1e-12)
    assert obs.trace == pytest.approx(1.0, abs=1e-12)


def test_observables_agree_with_dense_expectations(rng):
    p = ModelParams(1.0, 0.7)
    cutoff = 4
    psi = rng.normal(size=model.dimension(cutoff)) + 1j * rng.normal(size=model.dimension(cutoff))
    psi /= np.linalg.norm(psi)
    state = model.SectorState.from_bare_amplitudes(p, psi)
    obs = model.observables(state)
    g_mask = np.zeros(len(psi), bool)
    g_mask[0::2] = True
    assert obs.P_g == pytest.approx(np.sum(np.abs(psi[g_mask]) ** 2), abs=1e-12)
    assert obs.n_photon == pytest.approx(np.sum(model.photon_number_bare(cutoff) * np.abs(psi) ** 2), abs=1e-12)
    assert obs.P_0g == pytest.approx(abs(psi[0]) ** 2, abs=1e-14)


def test_sector_state_dense_roundtrip(rng):
    p = ModelParams(1.0, -0.4)
    diag = rng.random(7)
    coh = rng.normal(size=3) + 1j * rng.normal(size=3)
    state = model.SectorState(p, 3, diag, coh)
    back = model.SectorState.from_dense(p, state.to_dense())
    assert np.array_equal(back.diag, diag) and np.array_equal(back.offdiag_same_n, coh)
    with pytest.raises(ValueError):
        model.SectorState(p, 3, diag[:5], coh)


def test_coherent_amplitudes_normalised():
    for alpha in (0.0, 1.0, 3.0, 5.0, 12.0):
        psi = model.coherent_amplitudes(alpha, model.coherent_cutoff(alpha))
        assert np.sum(psi**2) == pytest.approx(1.0, abs=1e-12)


def test_time_series_validation():
    with pytest.raises(ValueError):
        model.TimeSeries([0, 1, 1], {})
    with pytest.raises(ValueError):
        model.TimeSeries([0, 1], {"P_g": [1.0]})
