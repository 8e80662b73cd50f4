import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jcloss import model, oracle, resonant, specfun
from jcloss.errors import CutoffError
from jcloss.model import ModelParams
from jcloss.resonant import PiBasisVector

P = ModelParams(1.0, 0.0, 0.2)


def unit(cutoff, n=0, branch="+"):
    v = PiBasisVector.zeros(cutoff)
    if n == 0:
        v.ground = np.float64(1.0)
    elif branch == "+":
        v.plus[n - 1] = 1.0
    else:
        v.minus[n - 1] = 1.0
    return v


def test_k2_examples():
    out = resonant.k2_apply(unit(3, 2, "+"))
    assert out.plus[0] == pytest.approx(1.5) and out.ground == 0 and not out.minus.any()
    out = resonant.k2_apply(unit(3, 1, "-"))
    assert out.ground == 0 and not out.plus.any() and not out.minus.any()
    out = resonant.k2_power(unit(3, 2, "+"), 2)
    assert out.ground == pytest.approx(1.5)


def test_k2_matches_jump_superoperator():
    # K2[rho] = P_diag[a rho a^dag] evaluated on dressed populations.
    cutoff = 6
    a = model.annihilation_dressed(P, cutoff)
    for n in range(1, cutoff + 1):
        for branch in "+-":
            v = unit(cutoff, n, branch)
            pops = v.to_populations()
            jumped = np.diag(a @ np.diag(pops) @ a.T)
            got = resonant.k2_apply(v).to_populations()
            assert np.allclose(got, jumped, atol=1e-14)


@pytest.mark.parametrize("n", range(1, 9))
def test_k2_power_matches_iteration(n):
    for branch in "+-":
        v = unit(8, n, branch)
        it = v
        for l in range(0, n + 2):
            closed = resonant.k2_power(v, l)
            assert np.allclose(closed.to_populations(), it.to_populations(), rtol=1e-13, atol=1e-300)
            it = resonant.k2_apply(it)


def test_k2_power_example_pochhammer():
    out = resonant.k2_power(unit(5, 5, "+"), 4)
    assert out.plus[0] == pytest.approx(1.5 * 2.5 * 3.5 * 4.5, rel=1e-14)
    assert resonant.k2_power(unit(5, 5, "-"), 5).trace() == 0.0
    full = resonant.k2_power(unit(5, 5, "+"), 5)
    # (3/2)_(n-1) = 2 (2n-1)!!/2^n
    assert full.ground == pytest.approx(2 * specfun.odd_double_factorial(5) / 2**5, rel=1e-14)


def test_c_coeff_examples():
    assert resonant.c_coeff(3, 0.0, True) == 0.0 and resonant.c_coeff(3, 0.0, False) == 0.0
    gt = 0.37
    assert resonant.c_coeff(0, gt, False) == pytest.approx(-math.expm1(-gt), rel=1e-15)
    assert resonant.c_coeff(0, gt, True) == pytest.approx(-2 * math.expm1(-gt / 2), rel=1e-14)


def _c_coeff_mp(n, gt, on_ground):
    shift = mpmath.mpf(0.5) if on_ground else 0
    gt = mpmath.mpf(gt)
    return float(mpmath.fsum((-1) ** k / (mpmath.factorial(k) * mpmath.factorial(n - k))
                             * -mpmath.expm1(-(1 + k - shift) * gt) / (1 + k - shift) for k in range(n + 1)))


@given(st.integers(0, 15), st.floats(1e-3, 60), st.booleans())
def test_c_coeff_matches_alternating_sum_in_high_precision(n, gt, on_ground):
    assert resonant.c_coeff(n, gt, on_ground) == pytest.approx(_c_coeff_mp(n, gt, on_ground), rel=1e-12)


def test_c_coeff_float_alternating_sum_where_it_is_stable():
    for n in (0, 1, 3, 6):
        for gt in (2.0, 10.0):
            for on_ground in (False, True):
                assert resonant.c_coeff_alternating(n, gt, on_ground) == pytest.approx(
                    resonant.c_coeff(n, gt, on_ground), rel=1e-10)


def test_evolve_diag_identity_at_t0():
    v0 = PiBasisVector.from_populations(model.fock_state(P, 4).diag)
    out = resonant.evolve_diag(v0, 0.0, P)
    assert np.allclose(out.to_populations(), v0.to_populations(), atol=1e-15)


def test_plus1_two_level_decay():
    t = np.linspace(0, 30, 31)
    pops = resonant.evolve_diag(PiBasisVector.from_populations([0, 0, 1]), t, P).to_populations()
    leave = np.exp(-0.5 * P.gamma * t)
    assert np.allclose(pops[:, 2], leave, atol=1e-15)
    assert np.allclose(pops[:, 0], 1 - leave, atol=1e-15)
    assert np.allclose(pops.sum(axis=1), 1.0, atol=1e-14)


def test_fock3_populations_vs_oracle():
    t = np.linspace(0, 20, 81)
    psi = model.fock_amplitudes(3, 3)
    res = oracle.integrate(oracle.build_microscopic(P, 3), oracle.DenseState.from_bare_amplitudes(P, psi), t)
    analytic = resonant.evolve_sector(model.fock_state(P, 3), t)
    assert np.max(np.abs(analytic.diag - res.sector.diag)) < 1e-8
    assert np.max(np.abs(analytic.offdiag_same_n - res.sector.offdiag_same_n)) < 1e-8


@given(st.lists(st.floats(0, 1), min_size=9, max_size=9), st.floats(0, 300))
def test_evolve_diag_positive_and_trace_preserving(weights, t):
    pops = np.asarray(weights)
    if pops.sum() == 0:
        return
    pops = pops / pops.sum()
    out = resonant.evolve_diag(PiBasisVector.from_populations(pops), t, P).to_populations()
    assert np.all(out >= -1e-15)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_evolve_offdiag_examples():
    coh0 = np.array([1.0, 0.3 + 0.2j, -0.5j])
    assert np.array_equal(resonant.evolve_offdiag(coh0, 0.0, P), coh0)
    out = resonant.evolve_offdiag(coh0, 1.0, P)
    assert abs(out[2]) == pytest.approx(math.exp(-0.5) * abs(coh0[2]), rel=1e-14)
    tiny = ModelParams(1.0, 0.0, 1e-300)
    t = 0.731
    assert resonant.evolve_offdiag(np.array([1.0]), t, tiny)[0] == pytest.approx(np.exp(-2j * t), abs=1e-15)


def test_fock_pg_examples():
    assert resonant.fock_pg(1, 0.0, P) == pytest.approx(1.0, abs=1e-15)
    tiny = ModelParams(1.0, 0.0, 1e-300)
    assert resonant.fock_pg(1, math.pi / 2, tiny) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_fock_closed_forms_match_sector_solution(n):
    t = np.linspace(0, 40, 401)
    obs = model.observables(resonant.evolve_sector(model.fock_state(P, n), t))
    assert np.max(np.abs(resonant.fock_pg(n, t, P) - obs.P_g)) < 1e-13
    assert np.max(np.abs(resonant.fock_nphoton(n, t, P) - obs.n_photon)) < 1e-12


def test_fock_nphoton_limits():
    for n in (1, 4, 10):
        assert resonant.fock_nphoton(n, 0.0, P) == n
        assert resonant.fock_nphoton(n, 1e-9, P) == pytest.approx(n, rel=1e-6)
        assert resonant.fock_nphoton(n, 400.0, P) < 1e-15
    tiny = ModelParams(1.0, 0.0, 1e-12)
    t = np.linspace(0.1, 5, 17)
    assert np.allclose(resonant.fock_nphoton(1, t, tiny), 0.5 + 0.5 * np.cos(2 * t), atol=1e-10)


def test_coherent_vacuum_and_initial():
    sol = resonant.coherent_solution(0.0, np.linspace(0, 10, 5), P)
    assert np.allclose(sol.diag[:, 0], 1.0)
    obs = model.observables(resonant.coherent_solution(3.0, 0.0, P))
    assert obs.P_g == pytest.approx(1.0, abs=1e-12)


def test_coherent_mixture_matches_1f1_form():
    alpha, cutoff = 2.5, model.coherent_cutoff(2.5)
    t = np.array([0.0, 0.5, 3.0, 17.0])
    sol = resonant.coherent_solution(alpha, t, P, cutoff)
    plus = resonant.PiBasisVector.from_populations(sol.diag).plus
    assert np.allclose(plus, resonant.coherent_plus_1f1(alpha, t, P, cutoff), atol=1e-13)
    assert np.allclose(sol.trace(), 1.0, atol=1e-12)


def test_coherent_cutoff_guard_and_detuning_guard():
    with pytest.raises(CutoffError):
        resonant.coherent_state(P, 12.5)
    with pytest.raises(ValueError):
        resonant.evolve_diag(PiBasisVector.zeros(2), 1.0, ModelParams(1.0, 0.5))
