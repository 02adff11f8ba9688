"""Physical model: Hamiltonian, dissipation channels, and initial states.

All rates and couplings are expressed in units of the mechanical frequency
(omega_M = 1); times are in 1/omega_M.

The Hamiltonian, in a frame rotating at the cavity frequency and under the
rotating-wave approximation, is

    H = -delta_ac (s1's1 + s2's2) + g_a (a's1 + a s1' + a's2 + a s2')
        + J (s1's2 + s2's1) + b'b - g_M a'a (b' + b)

with s_i the atomic lowering operators.  delta_ac = omega_eg - omega_c.

Dissipation is non-local: besides the two atomic channels (rate gamma_a),
their cooperative cross channels (gamma_a_coop) and the cavity channel
(kappa), strong optomechanical coupling displaces the mechanical jump
operators to b - beta a'a / b' - beta a'a (beta = g_M) and adds a photon
number dephasing channel whose strength depends on the thermal occupancy.
Each channel stores the numerator rate r of its r/2 prefactor, and the
generator applies the form r/2 (2 O rho O'^+ - O'^+ O rho - rho O'^+ O)
verbatim, so no factor-of-two drift can creep in.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import ConfigurationError
from .hilbert import EXCITED, GROUND, BasisIndex, HilbertSpace, ladder_operators

OMEGA_M = 1.0

#: minimum thermal weight the truncated phonon space must capture
THERMAL_COVERAGE = 0.999


@dataclass(frozen=True)
class ModelParams:
    """All physical rates and couplings in units of omega_M."""

    g_a: float = 2.4
    g_M: float = 1.2
    delta_ac: float = 0.0
    J: float = 0.0
    kappa: float = 0.2
    gamma_a: float = 0.05
    gamma_a_coop: float = 0.0
    gamma_M: float = 0.0
    Mbar: float = 0.0

    def __post_init__(self):
        for name in ("g_a", "g_M", "kappa", "gamma_a", "gamma_M", "Mbar"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ConfigurationError(f"{name} must be finite and >= 0, got {v}")
        for name in ("delta_ac", "J", "gamma_a_coop"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if abs(self.gamma_a_coop) > self.gamma_a + 1e-15:
            raise ConfigurationError(
                "cooperative decay |gamma_a_coop| must not exceed gamma_a "
                f"(got {self.gamma_a_coop} vs {self.gamma_a}): the atomic "
                "dissipator block would not be positive semidefinite"
            )

    @property
    def beta(self) -> float:
        """Optomechanical displacement parameter g_M / omega_M."""
        return self.g_M / OMEGA_M


@dataclass(frozen=True)
class DipoleGeometry:
    """Free-space quantities fixing the dipole-dipole strength (one unit system)."""

    gamma_0: float
    c_0: float
    omega_eg: float
    r: float

    def __post_init__(self):
        for name in ("gamma_0", "c_0", "omega_eg", "r"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ConfigurationError(f"{name} must be finite and > 0, got {v}")


def ddi_strength(geom: DipoleGeometry) -> float:
    """Dipole-dipole coupling J = (3/4) gamma_0 c_0^3 / (omega_eg^3 r^3)."""
    return 0.75 * geom.gamma_0 * geom.c_0**3 / (geom.omega_eg**3 * geom.r**3)


def thermal_weight(Mbar: float, m0: int) -> float:
    """Boltzmann occupancy of phonon level m0 for mean number Mbar."""
    if Mbar < 0:
        raise ConfigurationError(f"Mbar must be >= 0, got {Mbar}")
    if m0 < 0:
        raise ConfigurationError(f"m0 must be >= 0, got {m0}")
    if Mbar == 0.0:
        return 1.0 if m0 == 0 else 0.0
    return Mbar**m0 / (1.0 + Mbar) ** (m0 + 1)


@dataclass(frozen=True)
class LocalChannel:
    """Jump operator O contributing (rate/2)(2 O rho O' - O'O rho - rho O'O)."""

    op: sparse.csr_matrix
    rate: float
    label: str


@dataclass(frozen=True)
class CrossChannel:
    """Ordered pair (O1, O2) contributing (rate/2)(2 O1 rho O2' - O1'O2 rho - rho O1'O2)."""

    op1: sparse.csr_matrix
    op2: sparse.csr_matrix
    rate: float
    label: str


@dataclass(frozen=True)
class DissipatorSpec:
    channels: tuple = field(default_factory=tuple)

    def nonzero(self):
        return [c for c in self.channels if c.rate != 0.0]


def build_hamiltonian(params: ModelParams, space: HilbertSpace) -> sparse.csr_matrix:
    """Assemble H on the given space; Hermitian by construction.

    Each coupling is built in the direction whose intermediate state stays
    inside a capped sector (lower first, then raise) and completed by its
    exact conjugate transpose, so the capped Hamiltonian equals the
    projection of the uncapped one.
    """
    ops = ladder_operators(space)
    a, b, s1, s2 = ops["a"], ops["b"], ops["sigma1"], ops["sigma2"]
    ad, bd = a.getH(), b.getH()

    atom_coupling = ad @ (s1 + s2)  # a' sigma_i: lowers the atom, then refills the cavity
    exchange = s1.getH() @ s2

    H = (
        -params.delta_ac * (s1.getH() @ s1 + s2.getH() @ s2)
        + params.g_a * (atom_coupling + atom_coupling.getH())
        + params.J * (exchange + exchange.getH())
        + OMEGA_M * (bd @ b)
        - params.g_M * (ad @ a) @ (bd + b)
    )
    H = H.tocsr()
    H.sort_indices()
    return H


def dephasing_rate(params: ModelParams) -> float:
    """Numerator rate of the photon-number dephasing channel.

    The channel contributes (rate/2) L[a'a] with
    rate/2 = (2 beta)^2 gamma_M / ln(1 + 1/Mbar); the Mbar -> 0 limit is 0
    by continuity (the log diverges).
    """
    if params.Mbar == 0.0 or params.gamma_M == 0.0:
        return 0.0
    return 2.0 * (2.0 * params.beta) ** 2 * params.gamma_M / math.log1p(1.0 / params.Mbar)


def build_dissipators(params: ModelParams, space: HilbertSpace) -> DissipatorSpec:
    """The seven dissipator groups of the master equation.

    Zero-rate channels are kept in the list (with rate 0) so the channel
    structure is independent of the parameter point.
    """
    ops = ladder_operators(space)
    a, b, s1, s2 = ops["a"], ops["b"], ops["sigma1"], ops["sigma2"]
    n_c = (a.getH() @ a).tocsr()
    beta = params.beta

    displaced_down = (b - beta * n_c).tocsr()
    displaced_up = (b.getH() - beta * n_c).tocsr()

    channels = (
        LocalChannel(s1, params.gamma_a, "atom1 decay"),
        LocalChannel(s2, params.gamma_a, "atom2 decay"),
        CrossChannel(s1, s2, params.gamma_a_coop, "cooperative decay 12"),
        CrossChannel(s2, s1, params.gamma_a_coop, "cooperative decay 21"),
        LocalChannel(a, params.kappa, "cavity decay"),
        LocalChannel(n_c, dephasing_rate(params), "photon-number dephasing"),
        LocalChannel(displaced_down, params.gamma_M * (params.Mbar + 1.0), "mechanical damping"),
        LocalChannel(displaced_up, params.gamma_M * params.Mbar, "mechanical heating"),
    )
    return DissipatorSpec(channels)


def _thermal_populations(Mbar: float, N_m: int) -> np.ndarray:
    w = np.array([thermal_weight(Mbar, m) for m in range(N_m + 1)])
    total = w.sum()
    if total < THERMAL_COVERAGE:
        raise ConfigurationError(
            f"phonon cutoff N_m={N_m} captures only {total:.4f} of the thermal "
            f"weight at Mbar={Mbar}; increase N_m"
        )
    return w / total


def initial_state(
    params: ModelParams, space: HilbertSpace, excited_atom: int | str = 1
) -> np.ndarray:
    """Density matrix at t=0: one atomic excitation, empty cavity, thermal phonons.

    excited_atom selects which atom carries the excitation (1 or 2), or an
    equal-weight superposition: 'symmetric' for (|eg> + |ge>)/sqrt(2),
    'antisymmetric' for (|eg> - |ge>)/sqrt(2).
    """
    pops = _thermal_populations(params.Mbar, space.N_m)

    if excited_atom == 1:
        amps = {(EXCITED, GROUND): 1.0}
    elif excited_atom == 2:
        amps = {(GROUND, EXCITED): 1.0}
    elif excited_atom == "symmetric":
        amps = {(EXCITED, GROUND): 1 / np.sqrt(2), (GROUND, EXCITED): 1 / np.sqrt(2)}
    elif excited_atom == "antisymmetric":
        amps = {(EXCITED, GROUND): 1 / np.sqrt(2), (GROUND, EXCITED): -1 / np.sqrt(2)}
    else:
        raise ConfigurationError(
            f"excited_atom must be 1, 2, 'symmetric' or 'antisymmetric', got {excited_atom!r}"
        )

    rho = np.zeros((space.dim, space.dim), dtype=complex)
    for m in range(space.N_m + 1):
        for (a1, a2), amp in amps.items():
            i = space.index(BasisIndex(a1, a2, 0, m))
            for (a1p, a2p), ampp in amps.items():
                j = space.index(BasisIndex(a1p, a2p, 0, m))
                rho[i, j] += pops[m] * amp * np.conj(ampp)
    return rho
