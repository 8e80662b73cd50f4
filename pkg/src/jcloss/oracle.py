"""Brute-force master-equation integrators.

Two generators act on the full truncated density matrix (dressed basis,
row-major vectorisation):

* the microscopic secular equation, assembled directly from the dressed
  eigenvalues of Atilde and the dressed matrix elements of a;
* the phenomenological Lindblad equation with jump operator sqrt(gamma) a,
  built from bare-basis operators and rotated into the dressed basis.

Both are integrated with fixed-step RK4 so repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import StepSizeError
from .model import (
    ModelParams,
    SectorState,
    TimeSeries,
    annihilation_bare,
    annihilation_dressed,
    atilde_vector,
    bare_to_dressed,
    c_operator_bare,
    c_vector,
    dimension,
    observables,
)


@dataclass
class DenseState:
    """Full density matrix over the truncated dressed basis."""

    params: ModelParams
    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        d = self.rho.shape[0]
        if self.rho.shape != (d, d) or d % 2 == 0:
            raise ValueError("rho must be square with odd dimension 2*cutoff+1")

    @property
    def cutoff(self) -> int:
        return (self.rho.shape[0] - 1) // 2

    @classmethod
    def from_bare_amplitudes(cls, params: ModelParams, psi_bare) -> "DenseState":
        psi_bare = np.asarray(psi_bare, dtype=complex)
        u = bare_to_dressed(params, (len(psi_bare) - 1) // 2)
        psi = u.T @ psi_bare
        return cls(params, np.outer(psi, psi.conj()))

    def sector(self) -> SectorState:
        return SectorState.from_dense(self.params, self.rho)


@dataclass
class Liouvillian:
    """Sparse generator L with d(vec rho)/dt = L vec rho."""

    matrix: sp.csr_matrix
    kind: str
    params: ModelParams
    cutoff: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = dimension(self.cutoff)
        return (self.matrix @ np.asarray(rho, dtype=complex).reshape(-1)).reshape(d, d)


def _commutator_and_anticommutator(h: sp.spmatrix, k: sp.spmatrix) -> sp.csr_matrix:
    """Super-operator of rho -> -i[h, rho] - (k rho + rho k)/2."""
    eye = sp.identity(h.shape[0], format="csr")
    ham = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    anti = -0.5 * (sp.kron(k, eye) + sp.kron(eye, k.T))
    return (ham + anti).tocsr()


def build_microscopic(params: ModelParams, cutoff: int) -> Liouvillian:
    """Secular generator with flat zero-temperature coupling.

    -i[C, rho] - gamma/2 {Atilde, rho} + gamma sum_+- P_diag[a P_+- rho P_+- a^dag]
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    d = dimension(cutoff)
    at = atilde_vector(params, cutoff)
    c = c_vector(params, cutoff)
    diag = (-1j * np.subtract.outer(c, c) - 0.5 * params.gamma * np.add.outer(at, at)).reshape(-1)
    a = annihilation_dressed(params, cutoff)
    dst, src = np.nonzero(a)
    rows = np.concatenate([np.arange(d * d), dst * d + dst])
    cols = np.concatenate([np.arange(d * d), src * d + src])
    vals = np.concatenate([diag, params.gamma * a[dst, src] ** 2])
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(d * d, d * d)).tocsr()
    return Liouvillian(mat, "microscopic", params, cutoff)


def build_phenomenological(params: ModelParams, cutoff: int) -> Liouvillian:
    """-i[H_JC, rho] + gamma (a rho a^dag - {a^dag a, rho}/2).

    omega N commutes with H_JC and with the photon-loss dissipator, so only
    C = H_JC - omega N is kept.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    u = bare_to_dressed(params, cutoff)
    h = u.T @ c_operator_bare(params, cutoff) @ u
    a = u.T @ annihilation_bare(cutoff) @ u
    # Rotation leaves ~1e-17 residue where exact zeros belong.
    h[np.abs(h) < 1e-14 * max(1.0, np.abs(h).max())] = 0.0
    a[np.abs(a) < 1e-14 * max(1.0, np.abs(a).max())] = 0.0
    a_s = sp.csr_matrix(a)
    num = (a_s.T @ a_s).tocsr()
    mat = _commutator_and_anticommutator(sp.csr_matrix(h), params.gamma * num)
    mat = mat + params.gamma * sp.kron(a_s, a_s.conj()).tocsr()
    return Liouvillian(mat.tocsr(), "phenomenological", params, cutoff)


def step_bound(L: Liouvillian) -> float:
    """Largest RK4 step accepted for this generator.

    min(0.01/lam_scale, 0.1/gamma, 0.02/w_max) with lam_scale = max(lam, |delta|, gamma)
    and w_max the largest diagonal rate of L (about 2 eps_N plus damping).
    """
    p = L.params
    scale = max(p.lam, abs(p.delta), p.gamma)
    w_max = float(np.abs(L.matrix.diagonal()).max())
    bound = min(0.01 / scale, 0.1 / p.gamma)
    if w_max > 0:
        bound = min(bound, 0.02 / w_max)
    return bound


@dataclass
class IntegrationResult:
    series: TimeSeries
    sector: SectorState
    final: DenseState
    diagnostics: dict = field(default_factory=dict)


def _rk4_step(mat, y, h):
    k1 = mat @ y
    k2 = mat @ (y + 0.5 * h * k1)
    k3 = mat @ (y + 0.5 * h * k2)
    k4 = mat @ (y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(L: Liouvillian, rho0: DenseState, t_grid, h: float | None = None,
              diagnostics: bool = False) -> IntegrationResult:
    """Fixed-step RK4 from t = 0 through every point of ``t_grid``.

    Each grid interval is split into equal sub-steps no longer than ``h``
    (default: step_bound(L)). An explicit ``h`` above the bound raises
    StepSizeError. With ``diagnostics`` the Hermiticity defect and the
    lowest eigenvalue are tracked at every grid point.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing and start at t >= 0")
    if rho0.cutoff != L.cutoff:
        raise ValueError("state and generator cutoffs differ")
    bound = step_bound(L)
    if h is None:
        h = bound
    elif h > bound * (1 + 1e-12):
        raise StepSizeError(f"step {h} exceeds the stability bound {bound}")

    d = dimension(L.cutoff)
    mat = L.matrix
    y = rho0.rho.reshape(-1).copy()
    trace0 = np.trace(rho0.rho).real
    diag_idx = np.arange(d) * (d + 1)
    plus = np.arange(2, d, 2)
    minus = np.arange(1, d, 2)
    pops = np.empty((len(t_grid), d))
    coh = np.empty((len(t_grid), L.cutoff), dtype=complex)
    herm = min_eig = drift = 0.0
    if diagnostics:
        min_eig = np.inf

    t_now = 0.0
    for j, t_next in enumerate(t_grid):
        span = t_next - t_now
        if span > 0:
            steps = max(1, math.ceil(span / h - 1e-9))
            dt = span / steps
            for _ in range(steps):
                y = _rk4_step(mat, y, dt)
        t_now = t_next
        pops[j] = y[diag_idx].real
        rho = y.reshape(d, d)
        coh[j] = rho[plus, minus]
        drift = max(drift, abs(y[diag_idx].sum().real - trace0))
        if diagnostics:
            herm = max(herm, float(np.abs(rho - rho.conj().T).max()))
            min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]))

    sector = SectorState(L.params, L.cutoff, pops, coh)
    series = TimeSeries.from_observables(t_grid * L.params.lam, observables(sector))
    diag = {"trace_drift": drift, "steps_per_unit_time": 1.0 / h}
    if diagnostics:
        diag.update(hermiticity=herm, min_eigenvalue=min_eig)
    final = DenseState(L.params, y.reshape(d, d).copy())
    return IntegrationResult(series, sector, final, diag)
