"""Truncated composite Hilbert space: atom ⊗ atom ⊗ photon ⊗ phonon.

Basis ordering is fixed once and for all: phonon index fastest, then
photon, then atom 2, then atom 1.  This keeps the optomechanical coupling
block diagonal in the atomic sector and makes operator construction
reproducible bit for bit.

An optional excitation cap restricts the space to states with at most one
optical excitation (atom1 + atom2 + photon <= 1), which is exact for the
single-photon problem: the Hamiltonian conserves the optical excitation
number and every dissipation channel only lowers or preserves it.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ConfigurationError

GROUND, EXCITED = 0, 1


@dataclass(frozen=True)
class BasisIndex:
    """One product basis state |atom1, atom2, n photons, m phonons>."""

    atom1: int
    atom2: int
    photon: int
    phonon: int

    @property
    def optical_excitations(self) -> int:
        return self.atom1 + self.atom2 + self.photon

    def label(self) -> str:
        a = "ge"
        return f"|{a[self.atom1]}{a[self.atom2]},{self.photon},{self.phonon}>"


class HilbertSpace:
    """Truncated product space with bijective flat-index maps.

    Attributes
    ----------
    N_c, N_m : photon / phonon cutoffs (inclusive)
    excitation_cap : None for the full product space, or 1 for the
        single-optical-excitation sector
    dim : number of retained basis states
    """

    def __init__(self, N_c: int, N_m: int, excitation_cap: int | None = None):
        if N_c < 1:
            raise ConfigurationError(f"photon cutoff N_c must be >= 1, got {N_c}")
        if N_m < 0:
            raise ConfigurationError(f"phonon cutoff N_m must be >= 0, got {N_m}")
        if excitation_cap is not None and excitation_cap != 1:
            raise ConfigurationError(
                f"excitation_cap must be None or 1, got {excitation_cap}"
            )
        self.N_c = N_c
        self.N_m = N_m
        self.excitation_cap = excitation_cap

        states = []
        for a1 in (GROUND, EXCITED):
            for a2 in (GROUND, EXCITED):
                for n in range(N_c + 1):
                    if excitation_cap is not None and a1 + a2 + n > excitation_cap:
                        continue
                    for m in range(N_m + 1):
                        states.append(BasisIndex(a1, a2, n, m))
        self.basis: tuple[BasisIndex, ...] = tuple(states)
        self._index = {s: i for i, s in enumerate(self.basis)}
        self.dim = len(self.basis)

    def index(self, state: BasisIndex) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise ConfigurationError(f"state {state.label()} outside the space") from None

    def state(self, i: int) -> BasisIndex:
        return self.basis[i]

    def contains(self, state: BasisIndex) -> bool:
        return state in self._index

    def ket(self, a1: int, a2: int, n: int, m: int) -> np.ndarray:
        """Unit column vector for a product basis state."""
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(BasisIndex(a1, a2, n, m))] = 1.0
        return v

    def __repr__(self):
        cap = f", cap={self.excitation_cap}" if self.excitation_cap is not None else ""
        return f"HilbertSpace(N_c={self.N_c}, N_m={self.N_m}{cap}, dim={self.dim})"


def build_space(N_c: int, N_m: int, excitation_cap: int | None = None) -> HilbertSpace:
    """Build the truncated space; see HilbertSpace for the index convention."""
    return HilbertSpace(N_c, N_m, excitation_cap)


def _lowering(space: HilbertSpace, rule) -> sparse.csr_matrix:
    """Assemble a sparse operator from a per-basis-state lowering rule.

    ``rule(state)`` returns (target_state, amplitude) or None.  Targets
    outside a capped space are dropped, which projects the operator onto
    the retained sector.
    """
    rows, cols, vals = [], [], []
    for j, s in enumerate(space.basis):
        hit = rule(s)
        if hit is None:
            continue
        target, amp = hit
        if not space.contains(target):
            continue
        rows.append(space.index(target))
        cols.append(j)
        vals.append(amp)
    op = sparse.coo_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)),
        shape=(space.dim, space.dim),
    )
    return op.tocsr()


def ladder_operators(space: HilbertSpace) -> dict[str, sparse.csr_matrix]:
    """Photon/phonon annihilation and atomic lowering operators.

    Returns {'a', 'b', 'sigma1', 'sigma2'} with the standard matrix
    elements: a|n> = sqrt(n)|n-1>, b|m> = sqrt(m)|m-1>, sigma_i maps the
    excited state of atom i to its ground state.
    """

    def lower_photon(s):
        if s.photon == 0:
            return None
        return BasisIndex(s.atom1, s.atom2, s.photon - 1, s.phonon), np.sqrt(s.photon)

    def lower_phonon(s):
        if s.phonon == 0:
            return None
        return BasisIndex(s.atom1, s.atom2, s.photon, s.phonon - 1), np.sqrt(s.phonon)

    def lower_atom1(s):
        if s.atom1 != EXCITED:
            return None
        return BasisIndex(GROUND, s.atom2, s.photon, s.phonon), 1.0

    def lower_atom2(s):
        if s.atom2 != EXCITED:
            return None
        return BasisIndex(s.atom1, GROUND, s.photon, s.phonon), 1.0

    return {
        "a": _lowering(space, lower_photon),
        "b": _lowering(space, lower_phonon),
        "sigma1": _lowering(space, lower_atom1),
        "sigma2": _lowering(space, lower_atom2),
    }


def optical_excitation_operator(space: HilbertSpace) -> sparse.csr_matrix:
    """Diagonal operator counting optical excitations sigma1'sigma1 + sigma2'sigma2 + a'a."""
    diag = np.array([s.optical_excitations for s in space.basis], dtype=complex)
    return sparse.diags(diag).tocsr()


def expectation(op, rho: np.ndarray) -> complex:
    """Tr(op @ rho) for a sparse or dense operator and a dense density matrix."""
    if op.shape[1] != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise ConfigurationError(
            f"dimension mismatch: operator {op.shape}, state {rho.shape}"
        )
    if sparse.issparse(op):
        return complex((op @ rho).trace())
    return complex(np.trace(op @ rho))
