"""Exact evolution at zero detuning.

The H_JC-diagonal sector is handled in the basis

    Pi_0 = |E_0><E_0|,   Pi_n(+/-) = |E_n+><E_n+| +/- |E_n-><E_n-|,

on which the jump superoperator K2[rho] = P_diag[a rho a^dag] acts as a
lowering ladder. The evolution is

    rho_diag(t) = exp(-gamma A t) [1 + sum_n c_n(t) K2^(n+1)] rho_diag(0),

with A = N - (1 - P_0)/2. Same-excitation coherences only dephase and damp.

Functions accept a scalar time or a 1-D array of times; array input adds a
leading time axis to every returned coefficient array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import CutoffError
from .model import (
    ModelParams,
    SectorState,
    coherent_amplitudes,
    coherent_cutoff,
    dimension,
)

MAX_ALPHA = 12.0


def _require_resonant(params: ModelParams):
    if params.delta != 0.0:
        raise ValueError("resonant solution needs delta == 0; use the offresonant module")


@dataclass
class PiBasisVector:
    """Coefficients on Pi_0 and Pi_n(+/-), n = 1..cutoff (index n-1)."""

    ground: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        self.ground = np.asarray(self.ground, dtype=float)
        self.plus = np.asarray(self.plus, dtype=float)
        self.minus = np.asarray(self.minus, dtype=float)

    @property
    def cutoff(self) -> int:
        return self.plus.shape[-1]

    @classmethod
    def zeros(cls, cutoff: int) -> "PiBasisVector":
        return cls(0.0, np.zeros(cutoff), np.zeros(cutoff))

    @classmethod
    def from_populations(cls, pops: np.ndarray) -> "PiBasisVector":
        pops = np.asarray(pops, dtype=float)
        p_plus = pops[..., 2::2]
        p_minus = pops[..., 1::2]
        return cls(pops[..., 0], (p_plus + p_minus) / 2, (p_plus - p_minus) / 2)

    def to_populations(self) -> np.ndarray:
        n = self.cutoff
        shape = self.plus.shape[:-1] + (dimension(n),)
        pops = np.empty(shape)
        pops[..., 0] = self.ground
        pops[..., 2::2] = self.plus + self.minus
        pops[..., 1::2] = self.plus - self.minus
        return pops

    def trace(self):
        # Tr Pi_0 = 1, Tr Pi_n+ = 2, Tr Pi_n- = 0.
        return self.ground + 2 * self.plus.sum(axis=-1)


def k2_apply(v: PiBasisVector) -> PiBasisVector:
    """One application of K2; every excitation index drops by one."""
    n = np.arange(1, v.cutoff)  # target excitation numbers 1..N-1
    plus = np.zeros_like(v.plus)
    minus = np.zeros_like(v.minus)
    plus[..., :-1] = (n + 0.5) * v.plus[..., 1:]
    minus[..., :-1] = np.sqrt((n + 1) * n) * v.minus[..., 1:]
    return PiBasisVector(v.plus[..., 0], plus, minus)


def k2_power_coefficients(n: int, l: int) -> tuple[float, float]:
    """(plus, minus) factors of K2^l on Pi_n+ and Pi_n-.

    For l < n these multiply Pi_(n-l)+ and Pi_(n-l)-. For l == n the plus
    factor multiplies Pi_0 and the minus factor is zero.
    """
    if l == 0:
        return 1.0, 1.0
    if l > n:
        return 0.0, 0.0
    if l == n:
        return specfun.pochhammer(1.5, n - 1), 0.0
    m = n - l
    plus = specfun.pochhammer(m + 0.5, l)
    log_minus = 0.5 * (math.lgamma(n + 1) + math.lgamma(n) - math.lgamma(m + 1) - math.lgamma(m))
    return plus, math.exp(log_minus)


def k2_power(v: PiBasisVector, l: int) -> PiBasisVector:
    """K2^l from the closed-form ladder coefficients."""
    if l < 0:
        raise ValueError("power must be >= 0")
    if l == 0:
        return PiBasisVector(v.ground.copy(), v.plus.copy(), v.minus.copy())
    ground = np.zeros_like(v.ground)
    plus = np.zeros_like(v.plus)
    minus = np.zeros_like(v.minus)
    for n in range(l, v.cutoff + 1):
        fp, fm = k2_power_coefficients(n, l)
        if n == l:
            ground = ground + fp * v.plus[..., n - 1]
        else:
            plus[..., n - l - 1] += fp * v.plus[..., n - 1]
            minus[..., n - l - 1] += fm * v.minus[..., n - 1]
    return PiBasisVector(ground, plus, minus)


def _z(gamma_t):
    return -np.expm1(-np.asarray(gamma_t, dtype=float))


def c_coeff(n: int, gamma_t, on_ground: bool):
    """Series coefficient c_n(t) with P_0 set to 1 (Pi_0 target) or 0.

    Integrating c_n = int_0^t gamma exp(-(1 - P_0/2) gamma t') (1 - e^(-gamma t'))^n / n! dt'
    in x = 1 - e^(-gamma t') gives z^(n+1)/(n+1)! off the ground state and
    B(n+1, 1/2; z)/n! onto it, with z = 1 - e^(-gamma t). Both are free of
    the cancellation in the alternating sum; see c_coeff_alternating.
    """
    gt = np.asarray(gamma_t, dtype=float)
    if np.any(gt < 0):
        raise ValueError("gamma_t must be >= 0")
    z = _z(gt)
    if on_ground:
        out = specfun.incomplete_beta(n + 1, 0.5, z, np.exp(-gt)) * math.exp(-math.lgamma(n + 1))
    else:
        with np.errstate(divide="ignore"):
            out = np.exp((n + 1) * np.log(z) - math.lgamma(n + 2))
    return float(out) if np.ndim(out) == 0 else out


def c_coeff_alternating(n: int, gamma_t: float, on_ground: bool) -> float:
    """c_n(t) by its defining alternating sum (exactly rounded via fsum)."""
    shift = 0.5 if on_ground else 0.0
    terms = []
    for k in range(n + 1):
        rate = 1 + k - shift
        terms.append((-1) ** k / (math.factorial(k) * math.factorial(n - k))
                     * (-math.expm1(-rate * gamma_t)) / rate)
    return math.fsum(terms)


def evolve_diag(v0: PiBasisVector, t, params: ModelParams) -> PiBasisVector:
    """Evolve an H_JC-diagonal state given on the Pi basis."""
    _require_resonant(params)
    if v0.plus.ndim != 1:
        raise ValueError("initial vector must not carry a time axis")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    gt = params.gamma * t[..., None]  # (..., 1)
    N = v0.cutoff
    z = _z(gt)
    with np.errstate(divide="ignore"):
        logz = np.log(z)
    ground = np.zeros(t.shape) + v0.ground
    plus = np.zeros(t.shape + (N,))
    minus = np.zeros(t.shape + (N,))
    for n in range(1, N + 1):
        cp, cm = v0.plus[n - 1], v0.minus[n - 1]
        m = np.arange(1, n + 1)  # target excitation
        l = n - m
        damp = -gt * (m - 0.5)
        lfact = np.array([math.lgamma(k + 1) for k in l])
        # 0 * log(0) must read as 0 for the l = 0 term.
        with np.errstate(invalid="ignore"):
            zl = np.where(l == 0, 0.0, l * logz)
        if cp != 0.0:
            lp = np.array([math.lgamma(n + 0.5) - math.lgamma(k + 0.5) for k in m])
            plus[..., :n] += cp * np.exp(lp + zl - lfact + damp)
            lg = specfun.log_pochhammer(1.5, n - 1) - math.lgamma(n)
            ground = ground + cp * math.exp(lg) * specfun.incomplete_beta(n, 0.5, z[..., 0], np.exp(-gt[..., 0]))
        if cm != 0.0:
            lm = np.array([0.5 * (math.lgamma(n + 1) + math.lgamma(n) - math.lgamma(k + 1) - math.lgamma(k))
                           for k in m])
            minus[..., :n] += cm * np.exp(lm + zl - lfact + damp)
    return PiBasisVector(ground, plus, minus)


def evolve_offdiag(coh0, t, params: ModelParams) -> np.ndarray:
    """Same-excitation coherences rho[Plus(n), Minus(n)] at time t."""
    _require_resonant(params)
    coh0 = np.asarray(coh0, dtype=complex)
    t = np.asarray(t, dtype=float)[..., None]
    n = np.arange(1, coh0.shape[-1] + 1)
    return coh0 * np.exp(-params.gamma * (n - 0.5) * t - 2j * np.sqrt(n) * params.lam * t)


def evolve_sector(state: SectorState, t) -> SectorState:
    """Evolve the observable-relevant part of a density matrix at resonance."""
    params = state.params
    v0 = PiBasisVector.from_populations(state.diag)
    vt = evolve_diag(v0, t, params)
    coh = evolve_offdiag(state.offdiag_same_n, t, params)
    return SectorState(params, state.cutoff, vt.to_populations(), coh)


def fock_pg(n: int, t, params: ModelParams):
    """P_g(t) for the initial state |g,n><g,n|."""
    _require_resonant(params)
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.asarray(t, dtype=float)
    gt = params.gamma * t
    pref = math.exp(specfun.log_odd_double_factorial(n) - math.lgamma(n) - (n + 1) * math.log(2.0))
    out = (0.5 + pref * specfun.incomplete_beta(n, 0.5, _z(gt), np.exp(-gt))
           + 0.5 * np.exp(-gt * (n - 0.5)) * np.cos(2 * math.sqrt(n) * params.lam * t))
    return float(out) if out.ndim == 0 else out


def _fock_nphoton_scalar(n: int, t: float, params: ModelParams) -> float:
    gt = params.gamma * t
    osc = 0.5 * math.exp(-gt * (n - 0.5)) * math.cos(2 * math.sqrt(n) * params.lam * t)
    if gt == 0.0:
        return float(n)  # limit: (2n-1)/2 from the diagonal part plus 1/2
    z = -math.expm1(-gt)
    log_pref = specfun.log_odd_double_factorial(n) - n * math.log(2.0) - math.lgamma(n) - gt / 2
    if (n - 1) * math.log(z) > -600:
        arg = -1.0 / math.expm1(gt)
        poly = specfun.hyp2f1_terminating(1.0, n - 1, 0.5, arg)
        return math.exp(log_pref + (n - 1) * math.log(z)) * poly + osc
    # Very early times: expand z^(n-1) 2F1 termwise so no power of z over/underflows.
    total = 0.0
    for k in range(n):
        log_term = (math.lgamma(n) - math.lgamma(n - k) - specfun.log_pochhammer(0.5, k)
                    - k * gt + (n - 1 - k) * math.log(z))
        total += math.exp(log_pref + log_term)
    return total + osc


def fock_nphoton(n: int, t, params: ModelParams):
    """Mean photon number for the initial state |g,n><g,n|."""
    _require_resonant(params)
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.asarray(t, dtype=float)
    out = np.vectorize(lambda x: _fock_nphoton_scalar(n, x, params), otypes=[float])(t)
    return float(out) if out.ndim == 0 else out


def coherent_state(params: ModelParams, alpha: float, cutoff: int | None = None) -> SectorState:
    """Sector content of |g, alpha><g, alpha| for real alpha >= 0."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha > MAX_ALPHA:
        raise CutoffError(f"alpha > {MAX_ALPHA} needs a cutoff beyond the supported range")
    cutoff = coherent_cutoff(alpha) if cutoff is None else cutoff
    return SectorState.from_bare_amplitudes(params, coherent_amplitudes(alpha, cutoff))


def coherent_solution(alpha: float, t, params: ModelParams, cutoff: int | None = None) -> SectorState:
    """Evolved coherent initial state |g, alpha>.

    The diagonal sector is the Poisson mixture of Fock-state solutions, which
    is what evolve_diag computes when fed the mixed initial Pi coefficients.
    """
    _require_resonant(params)
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    return evolve_sector(coherent_state(params, alpha, cutoff), t)


def coherent_plus_1f1(alpha: float, t, params: ModelParams, cutoff: int) -> np.ndarray:
    """Pi_k+ coefficients of the coherent solution through 1F1(k+1/2; k+1; alpha^2 z)."""
    _require_resonant(params)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z = _z(params.gamma * t)
    out = np.zeros((len(t), cutoff))
    for k in range(1, cutoff + 1):
        logw = -alpha**2 + 2 * k * math.log(alpha) - math.lgamma(k + 1) if alpha > 0 else -np.inf
        for j, (tj, zj) in enumerate(zip(t, z)):
            f = specfun.hyp1f1(k + 0.5, k + 1, alpha**2 * zj)
            out[j, k - 1] = 0.5 * math.exp(logw - (k - 0.5) * params.gamma * tj) * f
    return out
