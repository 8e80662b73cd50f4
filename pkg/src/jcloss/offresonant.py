"""Evolution at finite detuning.

Populations follow a terminating series over decay paths. A jump from a
dressed state of excitation n on branch i (1 = Plus, 2 = Minus) to a state
of excitation n-1 with C-eigenvalue C' carries the time factor
exp(-gamma t kappa_i(C')), and a k-jump path contributes

    I_k(gamma t; kappa of first jump, ..., kappa of last jump) x (product of |<dst|a|src>|^2)

to the interaction-picture population of its end point. The nested time
integrals I_k come from the recurrence

    I_1(tau; a) = (1 - e^(-a tau)) / a
    I_k(tau; a_1, ..., a_k) = [I_(k-1)(tau; a_2, ...) - I_(k-1)(tau; a_1 + a_2, a_3, ...)] / a_1.

The Schroedinger-picture populations are exp(-gamma Atilde t) times the
path sum, with Atilde = N - 1/2 + delta/(2C).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .errors import CutoffError, DomainError
from .model import (
    GROUND,
    Minus,
    ModelParams,
    Plus,
    SectorState,
    annihilation_dressed,
    atilde_vector,
    c_eigenvalue,
    c_vector,
    dimension,
    epsilon,
    index_at,
)

K_MAX = 12
DEGENERATE_RATE_TAU = 1e-6


def kappa(i: int, c_value: float, params: ModelParams) -> float:
    """Rate multiplier kappa_i(C) for a jump landing on C-eigenvalue c_value."""
    if i not in (1, 2):
        raise ValueError("branch index must be 1 or 2")
    if c_value == 0:
        raise DomainError("kappa is singular at C = 0")
    d = params.delta
    root = math.sqrt(c_value**2 + params.lam**2)
    sign = -1.0 if i == 1 else 1.0
    return 1.0 - 0.5 * d * (1.0 / c_value + sign / root)


def q_apply(i: int, pops, params: ModelParams) -> np.ndarray:
    """Jump map Q_i on a population vector (last axis in dense-basis order).

    Q_1 takes population out of Plus states, Q_2 out of Minus states; each
    lands one excitation lower with weight |<dst|a|src>|^2.
    """
    if i not in (1, 2):
        raise ValueError("branch index must be 1 or 2")
    pops = np.asarray(pops, dtype=float)
    cutoff = (pops.shape[-1] - 1) // 2
    a2 = annihilation_dressed(params, cutoff) ** 2
    src = np.zeros(pops.shape[-1])
    src[(2 if i == 1 else 1)::2] = 1.0
    return (pops * src) @ a2.T


# ---------------------------------------------------------------------------
# Nested exponential integrals
# ---------------------------------------------------------------------------

def _confluent_In(tau: np.ndarray, rates: tuple) -> np.ndarray:
    # I_k is (-1)^k times the divided difference of exp(-tau x) on the nodes
    # (a_1+...+a_k, a_2+...+a_k, ..., a_k, 0). The exponential of the
    # bidiagonal matrix with those nodes carries it in its corner entry and
    # stays exact when nodes coincide.
    k = len(rates)
    nodes = np.append(np.cumsum(rates[::-1])[::-1], 0.0)
    z = np.diag(nodes) + np.diag(np.ones(k), 1)
    flat = tau.reshape(-1)
    out = np.array([expm(-x * z)[0, k] for x in flat]) * (-1) ** k
    return out.reshape(tau.shape)


def _In(tau: np.ndarray, rates: tuple, memo: dict, tau_max: float) -> np.ndarray:
    hit = memo.get(rates)
    if hit is not None:
        return hit
    a1 = rates[0]
    if abs(a1) * tau_max < DEGENERATE_RATE_TAU:
        val = _confluent_In(tau, rates)
    elif len(rates) == 1:
        val = -np.expm1(-a1 * tau) / a1
    else:
        head = _In(tau, rates[1:], memo, tau_max)
        merged = _In(tau, (a1 + rates[1],) + rates[2:], memo, tau_max)
        val = (head - merged) / a1
    memo[rates] = val
    return val


def integral_In(tau, rates, memo: dict | None = None):
    """I_k(tau; a_1..a_k) = int_{0<t_1<...<t_k<tau} exp(-sum_j a_j t_j) dt.

    ``memo`` may be shared between calls with the same ``tau``; sub-results
    are keyed by their rate tuple.
    """
    rates = tuple(float(r) for r in rates)
    if not rates:
        raise ValueError("need at least one rate")
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr < 0):
        raise ValueError("tau must be >= 0")
    memo = {} if memo is None else memo
    tau_max = float(tau_arr.max()) if tau_arr.size else 0.0
    out = _In(tau_arr, rates, memo, tau_max)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Path sum
# ---------------------------------------------------------------------------

def _jump_tables(params: ModelParams, cutoff: int):
    """Targets of every dressed state with (dst position, |a|^2, kappa)."""
    a = annihilation_dressed(params, cutoff)
    table = {}
    for pos in range(1, dimension(cutoff)):
        src = index_at(pos)
        i = 1 if src.branch == 1 else 2
        dsts = [GROUND] if src.n == 1 else [Minus(src.n - 1), Plus(src.n - 1)]
        table[pos] = [(d.position, a[d.position, pos] ** 2, kappa(i, c_eigenvalue(params, d), params))
                      for d in dsts]
    return table


def max_excitation(pops, tol: float = 0.0) -> int:
    pops = np.asarray(pops)
    nz = np.nonzero(np.abs(pops) > tol)[0]
    if len(nz) == 0:
        return 0
    return index_at(int(nz[-1])).n


def evolve_diag_offres(pops0, t, params: ModelParams, k_max: int = K_MAX) -> np.ndarray:
    """Dressed populations at time t from initial populations ``pops0``.

    Exact: the path sum stops once every path has reached the ground state.
    """
    if params.delta == 0.0:
        raise ValueError("delta == 0: use resonant.evolve_diag")
    pops0 = np.asarray(pops0, dtype=float)
    if pops0.ndim != 1:
        raise ValueError("initial populations must be one-dimensional")
    top = max_excitation(pops0)
    if top > k_max:
        raise CutoffError(f"initial state reaches excitation {top} > k_max={k_max}; "
                          "use the oracle integrator for this state")
    cutoff = (len(pops0) - 1) // 2
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    tau = params.gamma * t
    table = _jump_tables(params, cutoff)
    memo: dict = {}
    tilde = np.zeros(t.shape + (len(pops0),))
    tilde += pops0

    def walk(pos, weight, rates):
        for dst, w, k in table.get(pos, ()):
            w2 = weight * w
            if w2 == 0.0:
                continue
            r2 = rates + (k,)
            tilde[..., dst] += w2 * integral_In(tau, r2, memo)
            if dst != 0:
                walk(dst, w2, r2)

    for pos in np.nonzero(pops0)[0]:
        if pos != 0:
            walk(int(pos), float(pops0[pos]), ())
    damp = np.exp(-np.multiply.outer(tau, atilde_vector(params, cutoff)))
    return damp * tilde


def evolve_offdiag_offres(coh0, t, params: ModelParams) -> np.ndarray:
    """Same-excitation coherences rho[Plus(n), Minus(n)] at time t."""
    coh0 = np.asarray(coh0, dtype=complex)
    cutoff = coh0.shape[-1]
    at = atilde_vector(params, cutoff)
    n = np.arange(1, cutoff + 1)
    rate = 0.5 * (at[2 * n] + at[2 * n - 1])
    eps = epsilon(params, n)
    t = np.asarray(t, dtype=float)[..., None]
    return coh0 * np.exp(-params.gamma * rate * t - 2j * eps * t)


def evolve_sector_offres(state: SectorState, t, k_max: int = K_MAX) -> SectorState:
    pops = evolve_diag_offres(state.diag, t, state.params, k_max)
    coh = evolve_offdiag_offres(state.offdiag_same_n, t, state.params)
    return SectorState(state.params, state.cutoff, pops, coh)


def single_excitation_closed_form(branch: int, t, params: ModelParams) -> tuple:
    """(population of E_1(branch), population of E_0) from |E_1(branch)><E_1(branch)|.

    The decaying state empties at rate gamma * kappa_i(delta), i = 1 for
    Plus and 2 for Minus.
    """
    i = 1 if branch == 1 else 2
    k = kappa(i, params.delta, params)
    stay = np.exp(-params.gamma * k * np.asarray(t, dtype=float))
    return stay, 1.0 - stay


# ---------------------------------------------------------------------------
# Large-|delta| limit
# ---------------------------------------------------------------------------

def _limit_labels(params: ModelParams, cutoff: int):
    """Photon number and atomic label (1 = g, 0 = e) of each dressed state as |delta| -> inf."""
    d = dimension(cutoff)
    photons = np.zeros(d, dtype=int)
    ground_atom = np.ones(d, dtype=bool)
    g_branch = 1 if params.delta >= 0 else -1
    for pos in range(1, d):
        s = index_at(pos)
        if s.branch == g_branch:
            photons[pos] = s.n
        else:
            photons[pos] = s.n - 1
            ground_atom[pos] = False
    return photons, ground_atom


def evolve_largedelta(rho0, t: float, params: ModelParams | None = None):
    """Closed-form large-|delta| evolution of a dressed-basis density matrix.

    In this limit |E_n+> -> |g,n> and |E_n-> -> -|e,n-1> (for delta > 0) and
    the dynamics reduces to photon loss: populations follow
    exp(-gamma a^dag a t) exp((1 - e^(-gamma t)) K3) with K3 rho = a rho a^dag,
    coherences damp at half the summed photon numbers and rotate with C.

    Accepts a DenseState (returned as a DenseState) or a bare matrix plus
    ``params``.
    """
    if hasattr(rho0, "rho"):
        from .oracle import DenseState
        return DenseState(rho0.params, evolve_largedelta(rho0.rho, t, rho0.params))
    if params is None:
        raise ValueError("params required for a plain matrix")
    if t < 0:
        raise ValueError("t must be >= 0")
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[-1]
    cutoff = (d - 1) // 2
    photons, g_atom = _limit_labels(params, cutoff)
    c = c_vector(params, cutoff)
    gt = params.gamma * t
    keep = math.exp(-gt)
    lost = -math.expm1(-gt)

    rho = rho0 * np.exp(-0.5 * gt * np.add.outer(photons, photons)
                        - 1j * t * np.subtract.outer(c, c))
    pops0 = np.real(np.diag(rho0))
    pops = np.zeros(d)
    by_label = {(int(photons[p]), bool(g_atom[p])): p for p in range(d)}
    for src in range(d):
        if pops0[src] == 0.0:
            continue
        n = int(photons[src])
        for m in range(n + 1):
            dst = by_label[(m, bool(g_atom[src]))]
            pops[dst] += pops0[src] * math.comb(n, m) * keep**m * lost ** (n - m)
    np.fill_diagonal(rho, pops)
    return rho
