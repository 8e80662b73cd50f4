"""Jaynes-Cummings eigensystem and dressed-basis bookkeeping.

Dense objects use the dressed basis ordered by excitation number,

    Ground, Minus(1), Plus(1), Minus(2), Plus(2), ...

so that an N-excitation cutoff gives dimension 2N+1. The bare basis used
for the phenomenological equation is ordered in parallel,

    |g,0>, |e,0>, |g,1>, |e,1>, |g,2>, ...

i.e. Minus(n) sits at the slot of |e,n-1> and Plus(n) at the slot of |g,n>.
The free-field term omega*N never enters an observable and is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffError


@dataclass(frozen=True)
class ModelParams:
    """Physical constants in common energy units (hbar = 1)."""

    lam: float = 1.0
    delta: float = 0.0
    gamma: float = 0.2

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("coupling lam must be > 0")
        if not self.gamma > 0:
            raise ValueError("decay rate gamma must be > 0")
        if not math.isfinite(self.delta):
            raise ValueError("detuning must be finite")

    @property
    def resonant(self) -> bool:
        return self.delta == 0.0


@dataclass(frozen=True, order=True)
class DressedIndex:
    """Label of an energy eigenstate: Ground, Plus(n) or Minus(n)."""

    n: int
    branch: int  # 0 for Ground, +1 for Plus, -1 for Minus

    def __post_init__(self):
        if self.branch == 0 and self.n != 0:
            raise ValueError("Ground has excitation 0")
        if self.branch in (1, -1) and self.n < 1:
            raise ValueError("Plus/Minus need n >= 1")
        if self.branch not in (0, 1, -1):
            raise ValueError("branch must be 0, +1 or -1")

    @property
    def excitation(self) -> int:
        return self.n

    @property
    def position(self) -> int:
        """Row of this state in the dense dressed basis."""
        if self.branch == 0:
            return 0
        return 2 * self.n if self.branch == 1 else 2 * self.n - 1

    def __repr__(self):
        if self.branch == 0:
            return "Ground"
        return f"{'Plus' if self.branch == 1 else 'Minus'}({self.n})"


GROUND = DressedIndex(0, 0)


def Plus(n: int) -> DressedIndex:
    return DressedIndex(n, 1)


def Minus(n: int) -> DressedIndex:
    return DressedIndex(n, -1)


def index_at(position: int) -> DressedIndex:
    if position == 0:
        return GROUND
    n = (position + 1) // 2
    return Plus(n) if position % 2 == 0 else Minus(n)


def dimension(cutoff: int) -> int:
    return 2 * cutoff + 1


def coherent_cutoff(alpha: float) -> int:
    """Excitation cutoff leaving a Poisson tail below ~1e-12."""
    return math.ceil(alpha**2 + 8 * alpha + 10)


# ---------------------------------------------------------------------------
# Eigensystem
# ---------------------------------------------------------------------------

def epsilon(params: ModelParams, n):
    """Half splitting of the n-excitation doublet, sqrt(delta^2 + n lam^2)."""
    return np.sqrt(params.delta**2 + np.asarray(n) * params.lam**2)


def mixing(params: ModelParams, n: int) -> tuple[float, float]:
    """(cos theta_n, sin theta_n) of |E_n+> = cos|g,n> + sin|e,n-1>."""
    if n < 1:
        raise ValueError("mixing angle defined for n >= 1")
    eps = float(epsilon(params, n))
    d = params.delta
    # eps -/+ delta loses digits when |delta| >> lam; eps^2 - delta^2 = n lam^2.
    if d >= 0:
        cos2 = (eps + d) / (2 * eps)
        sin2 = n * params.lam**2 / (2 * eps * (eps + d))
    else:
        sin2 = (eps - d) / (2 * eps)
        cos2 = n * params.lam**2 / (2 * eps * (eps - d))
    return math.sqrt(cos2), math.sqrt(sin2)


def c_eigenvalue(params: ModelParams, s: DressedIndex) -> float:
    """Eigenvalue of C = H_JC - omega N on a dressed state."""
    if s.branch == 0:
        return params.delta
    return s.branch * float(epsilon(params, s.n))


def atilde_eigenvalue(params: ModelParams, s: DressedIndex) -> float:
    """Eigenvalue of sum_+- P a^dag a P, i.e. <s|a^dag a|s>.

    Equals N - 1/2 + delta/(2C) for delta != 0 and N - (1 - P0)/2 at
    resonance; evaluated here as cos^2 n + sin^2 (n-1) (and its mirror) so
    both cases come out of one expression.
    """
    if s.branch == 0:
        return 0.0
    c, si = mixing(params, s.n)
    if s.branch == 1:
        return c * c * s.n + si * si * (s.n - 1)
    return si * si * s.n + c * c * (s.n - 1)


def a_matrix_element(params: ModelParams, src: DressedIndex, dst: DressedIndex) -> float:
    """<dst| a |src> between dressed states one excitation apart."""
    if src.excitation != dst.excitation + 1:
        raise ValueError(f"{dst!r} is not one excitation below {src!r}")
    n = src.n
    c_n, s_n = mixing(params, n)
    # Bare components (g-part, e-part) of src: a|g,n> = sqrt(n)|g,n-1>,
    # a|e,n-1> = sqrt(n-1)|e,n-2>.
    if src.branch == 1:
        g_amp, e_amp = c_n, s_n
    else:
        g_amp, e_amp = s_n, -c_n
    g_amp *= math.sqrt(n)
    e_amp *= math.sqrt(n - 1)
    if dst.branch == 0:
        return g_amp
    c_m, s_m = mixing(params, n - 1)
    if dst.branch == 1:
        return c_m * g_amp + s_m * e_amp
    return s_m * g_amp - c_m * e_amp


# ---------------------------------------------------------------------------
# Dense matrices on the truncated space
# ---------------------------------------------------------------------------

def atilde_vector(params: ModelParams, cutoff: int) -> np.ndarray:
    return np.array([atilde_eigenvalue(params, index_at(i)) for i in range(dimension(cutoff))])


def c_vector(params: ModelParams, cutoff: int) -> np.ndarray:
    return np.array([c_eigenvalue(params, index_at(i)) for i in range(dimension(cutoff))])


def annihilation_dressed(params: ModelParams, cutoff: int) -> np.ndarray:
    """Matrix of a in the dressed basis, assembled from a_matrix_element."""
    d = dimension(cutoff)
    a = np.zeros((d, d))
    for n in range(1, cutoff + 1):
        for src in (Minus(n), Plus(n)):
            targets = [GROUND] if n == 1 else [Minus(n - 1), Plus(n - 1)]
            for dst in targets:
                a[dst.position, src.position] = a_matrix_element(params, src, dst)
    return a


def annihilation_bare(cutoff: int) -> np.ndarray:
    """Matrix of a (field) in the bare basis |g,0>, |e,0>, |g,1>, |e,1>, ..."""
    d = dimension(cutoff)
    a = np.zeros((d, d))
    for n in range(1, cutoff + 1):
        a[2 * (n - 1), 2 * n] = math.sqrt(n)  # |g,n> -> |g,n-1>
        if n >= 2:
            a[2 * n - 3, 2 * n - 1] = math.sqrt(n - 1)  # |e,n-1> -> |e,n-2>
    return a


def c_operator_bare(params: ModelParams, cutoff: int) -> np.ndarray:
    """C = -delta sigma_z + lam (sigma_+ a + sigma_- a^dag) in the bare basis."""
    d = dimension(cutoff)
    c = np.zeros((d, d))
    c[0, 0] = params.delta
    for n in range(1, cutoff + 1):
        g, e = 2 * n, 2 * n - 1
        c[g, g] = params.delta
        c[e, e] = -params.delta
        c[g, e] = c[e, g] = params.lam * math.sqrt(n)
    return c


def bare_to_dressed(params: ModelParams, cutoff: int) -> np.ndarray:
    """Real orthogonal U with U[bare, dressed] = <bare|dressed>."""
    d = dimension(cutoff)
    u = np.zeros((d, d))
    u[0, 0] = 1.0
    for n in range(1, cutoff + 1):
        c, s = mixing(params, n)
        g, e = 2 * n, 2 * n - 1
        u[g, Plus(n).position] = c
        u[e, Plus(n).position] = s
        u[g, Minus(n).position] = s
        u[e, Minus(n).position] = -c
    return u


def photon_number_bare(cutoff: int) -> np.ndarray:
    d = dimension(cutoff)
    counts = np.zeros(d)
    for n in range(1, cutoff + 1):
        counts[2 * n] = n
        counts[2 * n - 1] = n - 1
    return counts


# ---------------------------------------------------------------------------
# States and observables
# ---------------------------------------------------------------------------

@dataclass
class SectorState:
    """Density matrix restricted to what the observables can see.

    ``diag`` holds dressed populations in dense-basis order; ``offdiag_same_n``
    holds rho[Plus(n), Minus(n)] at index n-1. Both may carry leading axes
    (e.g. time). Coherences between different excitation numbers go in the
    optional ``offdiag_other`` map keyed by (row, col) DressedIndex pairs;
    they never contribute to P_g, P_0g or n_photon.
    """

    params: ModelParams
    cutoff: int
    diag: np.ndarray
    offdiag_same_n: np.ndarray
    offdiag_other: dict = field(default_factory=dict)

    def __post_init__(self):
        self.diag = np.asarray(self.diag, dtype=float)
        self.offdiag_same_n = np.asarray(self.offdiag_same_n, dtype=complex)
        if self.diag.shape[-1] != dimension(self.cutoff):
            raise ValueError("diag length must be 2*cutoff+1")
        if self.offdiag_same_n.shape[-1] != self.cutoff:
            raise ValueError("offdiag_same_n length must equal cutoff")

    def population(self, s: DressedIndex):
        return self.diag[..., s.position]

    def coherence(self, n: int):
        return self.offdiag_same_n[..., n - 1]

    def trace(self):
        return self.diag.sum(axis=-1)

    def to_dense(self) -> np.ndarray:
        """Dense matrix (single time slice) without the different-n coherences."""
        if self.diag.ndim != 1:
            raise ValueError("to_dense needs a single time slice")
        rho = np.diag(self.diag).astype(complex)
        for n in range(1, self.cutoff + 1):
            p, m = Plus(n).position, Minus(n).position
            rho[p, m] = self.offdiag_same_n[n - 1]
            rho[m, p] = np.conj(self.offdiag_same_n[n - 1])
        for (r, c), v in self.offdiag_other.items():
            rho[r.position, c.position] = v
        return rho

    @classmethod
    def from_dense(cls, params: ModelParams, rho: np.ndarray) -> "SectorState":
        rho = np.asarray(rho)
        cutoff = (rho.shape[-1] - 1) // 2
        diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1)).copy()
        plus = [Plus(n).position for n in range(1, cutoff + 1)]
        minus = [Minus(n).position for n in range(1, cutoff + 1)]
        coh = rho[..., plus, minus]
        return cls(params, cutoff, diag, coh)

    @classmethod
    def from_bare_amplitudes(cls, params: ModelParams, psi_bare) -> "SectorState":
        """Sector content of the pure state with the given bare amplitudes."""
        psi_bare = np.asarray(psi_bare, dtype=complex)
        cutoff = (len(psi_bare) - 1) // 2
        psi = bare_to_dressed(params, cutoff).T @ psi_bare
        return cls.from_dense(params, np.outer(psi, psi.conj()))


def fock_amplitudes(cutoff: int, n: int, excited: bool = False) -> np.ndarray:
    """Bare amplitudes of |g,n> (or |e,n> when excited)."""
    psi = np.zeros(dimension(cutoff))
    pos = 2 * n if not excited else 2 * n + 1
    if pos >= len(psi):
        raise CutoffError(f"state needs cutoff >= {(pos + 1) // 2}")
    psi[pos] = 1.0
    return psi


def coherent_amplitudes(alpha: float, cutoff: int) -> np.ndarray:
    """Bare amplitudes of |g> x |alpha> for real alpha >= 0."""
    psi = np.zeros(dimension(cutoff))
    for n in range(cutoff + 1):
        if alpha == 0:
            amp = 1.0 if n == 0 else 0.0
        else:
            amp = math.exp(-alpha**2 / 2 + n * math.log(alpha) - 0.5 * math.lgamma(n + 1))
        psi[2 * n] = amp
    return psi


def fock_state(params: ModelParams, n: int, cutoff: int | None = None) -> SectorState:
    """Sector decomposition of |g,n><g,n|."""
    cutoff = n if cutoff is None else cutoff
    return SectorState.from_bare_amplitudes(params, fock_amplitudes(cutoff, n))


def excited_vacuum_state(params: ModelParams, cutoff: int = 1) -> SectorState:
    """Sector decomposition of |e,0><e,0|."""
    return SectorState.from_bare_amplitudes(params, fock_amplitudes(cutoff, 0, excited=True))


@dataclass
class Observables:
    P_g: np.ndarray
    P_0g: np.ndarray
    n_photon: np.ndarray
    trace: np.ndarray


def observables(state: SectorState) -> Observables:
    """Atomic ground probability, |g,0> population, mean photon number, trace."""
    params, cutoff = state.params, state.cutoff
    p0 = state.population(GROUND)
    pg = np.array(p0, dtype=float)
    nph = np.zeros_like(pg)
    for n in range(1, cutoff + 1):
        c, s = mixing(params, n)
        pp = state.population(Plus(n))
        pm = state.population(Minus(n))
        cross = 2 * c * s * np.real(state.coherence(n))
        g_pop = c * c * pp + s * s * pm + cross
        e_pop = s * s * pp + c * c * pm - cross
        pg = pg + g_pop
        nph = nph + n * g_pop + (n - 1) * e_pop
    return Observables(P_g=pg, P_0g=np.array(p0, dtype=float), n_photon=nph, trace=state.trace())


@dataclass
class TimeSeries:
    """Observables sampled on a grid of dimensionless times lam*t."""

    times: np.ndarray
    columns: dict

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        for name, col in self.columns.items():
            if len(col) != len(self.times):
                raise ValueError(f"column {name} has the wrong length")

    @classmethod
    def from_observables(cls, times, obs: Observables) -> "TimeSeries":
        return cls(times, {
            "P_g": np.asarray(obs.P_g),
            "n_photon": np.asarray(obs.n_photon),
            "P_0g": np.asarray(obs.P_0g),
            "trace": np.asarray(obs.trace),
        })
