"""Fock-basis bookkeeping and multi-photon evolution through mode unitaries.

States live in the fixed-photon-number sector of an m-mode bosonic Hilbert
space.  An m x m unitary acting on the creation operators lifts to the
n-photon sector through matrix permanents; heralded projection onto a photon
count in one mode produces conditional states on the remaining modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache

import numpy as np

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
PSD_EIG_FLOOR = -1e-10
NORM_TOL = 1e-12


class Mode(IntEnum):
    """Hybrid path-polarization mode labels for the 4-mode register.

    A = (H, path 1), B = (V, path 1), C = (H, path 2); the fourth mode
    (V, path 2) is the heralding mode.  The index/tag bijection is fixed
    for the whole program run.
    """

    A = 0
    B = 1
    C = 2
    HERALD = 3

TARGET_MODES = (Mode.A, Mode.B, Mode.C)


@dataclass(frozen=True)
class FockBasis:
    """Ordered basis of all occupation tuples with a fixed photon total.

    States are sorted lexicographically descending, e.g. for two photons in
    three modes: 200 > 110 > 101 > 020 > 011 > 002.
    """

    n_photons: int
    n_modes: int
    states: tuple[tuple[int, ...], ...]
    _index: dict = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        self._index.update({s: i for i, s in enumerate(self.states)})

    def __len__(self):
        return len(self.states)

    def index(self, occupations) -> int:
        """Position of an occupation tuple in canonical order."""
        return self._index[tuple(occupations)]

    def norms(self) -> np.ndarray:
        """prod(n_i!) per basis state, the bosonic normalization factors."""
        return np.array(
            [math.prod(math.factorial(k) for k in s) for s in self.states],
            dtype=float,
        )


@lru_cache(maxsize=None)
def fock_basis(n_photons: int, n_modes: int) -> FockBasis:
    """Enumerate all occupation tuples of `n_photons` over `n_modes`.

    Deterministic canonical (descending) order; the basis has
    C(n_photons + n_modes - 1, n_modes - 1) states.
    """
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    if n_photons < 0:
        raise ValueError(f"n_photons must be >= 0, got {n_photons}")
    states = []

    def fill(prefix, remaining, modes_left):
        if modes_left == 1:
            states.append(prefix + (remaining,))
            return
        for k in range(remaining, -1, -1):
            fill(prefix + (k,), remaining - k, modes_left - 1)

    fill((), n_photons, n_modes)
    states.sort(reverse=True)
    return FockBasis(n_photons, n_modes, tuple(states))


def permanent(matrix: np.ndarray) -> complex:
    """Matrix permanent of a square complex matrix.

    Direct expansion for n <= 3, Ryser's formula with Gray-code subset
    iteration for n >= 4 (O(n 2^n)).  The empty matrix has permanent 1.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"permanent requires a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n == 1:
        return complex(m[0, 0])
    if n == 2:
        return complex(m[0, 0] * m[1, 1] + m[0, 1] * m[1, 0])
    if n == 3:
        a, b, c = m[0]
        d, e, f = m[1]
        g, h, i = m[2]
        return complex(a * (e * i + f * h) + b * (d * i + f * g) + c * (d * h + e * g))
    # Ryser: per(A) = (-1)^n sum_{S != {}} (-1)^|S| prod_i sum_{j in S} A_ij
    total = 0.0 + 0.0j
    rowsum = np.zeros(n, dtype=complex)
    gray = 0
    sign = 1 if n % 2 == 0 else -1
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        bit = new_gray ^ gray
        j = bit.bit_length() - 1
        if new_gray & bit:
            rowsum += m[:, j]
        else:
            rowsum -= m[:, j]
        gray = new_gray
        parity = -1 if (gray.bit_count() & 1) else 1
        total += parity * np.prod(rowsum)
    return complex(sign * total)


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over a fixed-photon-number Fock basis.

    Unnormalized states carry their squared norm as a probability weight
    instead of being silently rescaled.
    """

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (len(self.basis),):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, basis size {len(self.basis)}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def weight(self) -> float:
        """Squared norm; the probability weight of an unnormalized state."""
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def is_normalized(self) -> bool:
        return abs(self.weight - 1.0) <= NORM_TOL

    def normalized(self) -> "PureState":
        w = self.weight
        if w <= 0:
            raise ValueError("cannot normalize a zero state")
        return PureState(self.basis, self.amplitudes / math.sqrt(w))

    def amplitude(self, occupations) -> complex:
        return complex(self.amplitudes[self.basis.index(occupations)])

    def density(self) -> "DensityMatrix":
        """Projector |psi><psi| (state must be normalized)."""
        psi = self.normalized().amplitudes
        return DensityMatrix(self.basis, np.outer(psi, psi.conj()))

    def to_dict(self) -> dict:
        return {
            "n_photons": self.basis.n_photons,
            "n_modes": self.basis.n_modes,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PureState":
        basis = fock_basis(d["n_photons"], d["n_modes"])
        amps = np.array([complex(re, im) for re, im in d["amplitudes"]])
        return cls(basis, amps)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian positive-semidefinite matrix over a Fock basis."""

    basis: FockBasis
    matrix: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = len(self.basis)
        if m.shape != (n, n):
            raise ValueError(f"matrix has shape {m.shape}, basis size {n}")
        herm_err = np.max(np.abs(m - m.conj().T))
        if herm_err > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian (error {herm_err:.2e})")
        min_eig = float(np.linalg.eigvalsh(m).min())
        if min_eig < PSD_EIG_FLOOR:
            raise ValueError(f"matrix is not PSD (min eigenvalue {min_eig:.2e})")
        if self.normalized and abs(np.trace(m).real - 1.0) > 1e-12:
            raise ValueError(f"trace is {np.trace(m).real}, expected 1")
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def element(self, bra_occ, ket_occ) -> complex:
        i = self.basis.index(bra_occ)
        j = self.basis.index(ket_occ)
        return complex(self.matrix[i, j])

    def to_dict(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {
            "n_photons": self.basis.n_photons,
            "n_modes": self.basis.n_modes,
            "matrix": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DensityMatrix":
        basis = fock_basis(d["n_photons"], d["n_modes"])
        n = len(basis)
        flat = np.array([complex(re, im) for re, im in d["matrix"]])
        return cls(basis, flat.reshape(n, n))


@dataclass(frozen=True)
class ModeUnitary:
    """m x m complex unitary acting on the mode creation operators."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"unitary must be square, got shape {m.shape}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if err > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (error {err:.2e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "matrix": [
                [[float(z.real), float(z.imag)] for z in row] for row in self.matrix
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModeUnitary":
        rows = [[complex(re, im) for re, im in row] for row in d["matrix"]]
        return cls(np.array(rows))


@dataclass(frozen=True)
class HeraldOutcome:
    """Conditional state on the remaining modes plus the outcome probability."""

    conditional_state: "PureState | DensityMatrix | None"
    probability: float


def _occupation_rows(basis: FockBasis) -> list[np.ndarray]:
    return [
        np.array([i for i, k in enumerate(s) for _ in range(k)], dtype=np.intp)
        for s in basis.states
    ]


@lru_cache(maxsize=None)
def _lift_plan(n_photons: int, n_modes: int):
    basis = fock_basis(n_photons, n_modes)
    rows = _occupation_rows(basis)
    return basis, rows, basis.norms()


def lift_unitary(unitary: ModeUnitary, basis: FockBasis) -> np.ndarray:
    """Matrix of the induced unitary on the n-photon sector of `basis`.

    Entry [t, s] = per(U[rows_t, cols_s]) / sqrt(prod s_i! prod t_j!) with
    row/column indices repeated by the output/input occupations.
    """
    if unitary.dim != basis.n_modes:
        raise ValueError(
            f"unitary dim {unitary.dim} != number of modes {basis.n_modes}"
        )
    _, rows, norms = _lift_plan(basis.n_photons, basis.n_modes)
    u = unitary.matrix
    n = len(basis)
    lifted = np.empty((n, n), dtype=complex)
    for s in range(n):
        cols = rows[s]
        for t in range(n):
            lifted[t, s] = permanent(u[np.ix_(rows[t], cols)])
    scale = np.sqrt(np.outer(norms, norms))
    return lifted / scale


def evolve(state: PureState, unitary: ModeUnitary) -> PureState:
    """Propagate a pure Fock state through a mode unitary.

    Linear, norm preserving, and a homomorphism: evolving under U then V
    equals evolving under VU.
    """
    basis = state.basis
    if unitary.dim != basis.n_modes:
        raise ValueError(
            f"unitary dim {unitary.dim} != number of modes {basis.n_modes}"
        )
    _, rows, norms = _lift_plan(basis.n_photons, basis.n_modes)
    u = unitary.matrix
    out = np.zeros(len(basis), dtype=complex)
    for s, amp in enumerate(state.amplitudes):
        if abs(amp) < 1e-300:
            continue
        cols = rows[s]
        col = np.array(
            [permanent(u[np.ix_(rows[t], cols)]) for t in range(len(basis))]
        )
        out += amp * col / np.sqrt(norms * norms[s])
    return PureState(basis, out)


def evolve_density(rho: DensityMatrix, unitary: ModeUnitary) -> DensityMatrix:
    """Conjugate a density matrix by the lifted unitary (trace preserving)."""
    lifted = lift_unitary(unitary, rho.basis)
    out = lifted @ rho.matrix @ lifted.conj().T
    return DensityMatrix(rho.basis, out, normalized=rho.normalized)


def _reduced_basis_map(basis: FockBasis, mode: int, count: int):
    """Indices with the given mode occupation, and their reduced-basis targets."""
    reduced = fock_basis(basis.n_photons - count, basis.n_modes - 1)
    keep, target = [], []
    for i, occ in enumerate(basis.states):
        if occ[mode] == count:
            keep.append(i)
            target.append(reduced.index(occ[:mode] + occ[mode + 1:]))
    return reduced, np.array(keep, dtype=np.intp), np.array(target, dtype=np.intp)


def herald(
    state: PureState | DensityMatrix, mode: Mode | int, count: int
) -> HeraldOutcome:
    """Project one mode onto a photon count and trace it out.

    Returns the conditional state over the remaining modes (normalized when
    the outcome has nonzero probability) and the outcome probability, i.e.
    the squared norm (pure) or trace (mixed) of the projected state.
    `count = 0` realizes a vacuum projection of the chosen mode.
    """
    basis = state.basis
    mode = int(mode)
    if not 0 <= count <= basis.n_photons:
        raise ValueError(
            f"count {count} outside [0, {basis.n_photons}] for this basis"
        )
    reduced, keep, target = _reduced_basis_map(basis, mode, count)
    if isinstance(state, PureState):
        amps = np.zeros(len(reduced), dtype=complex)
        amps[target] = state.amplitudes[keep]
        prob = float(np.sum(np.abs(amps) ** 2))
        if prob <= 0.0:
            return HeraldOutcome(None, 0.0)
        return HeraldOutcome(PureState(reduced, amps / math.sqrt(prob)), prob)
    sub = np.zeros((len(reduced), len(reduced)), dtype=complex)
    sub[np.ix_(target, target)] = state.matrix[np.ix_(keep, keep)]
    prob = float(np.trace(sub).real)
    if prob <= 0.0:
        return HeraldOutcome(None, 0.0)
    return HeraldOutcome(DensityMatrix(reduced, sub / prob), prob)


def noon_state(alpha1: float, alpha2: float) -> PureState:
    """Three-mode two-photon NOON state.

    (|200> + e^{i alpha1} |020> + e^{i alpha2} |002>) / sqrt(3) on the
    2-photon 3-mode basis.
    """
    basis = fock_basis(2, 3)
    amps = np.zeros(len(basis), dtype=complex)
    amps[basis.index((2, 0, 0))] = 1.0
    amps[basis.index((0, 2, 0))] = np.exp(1j * alpha1)
    amps[basis.index((0, 0, 2))] = np.exp(1j * alpha2)
    return PureState(basis, amps / math.sqrt(3.0))


def fidelity(state: PureState | DensityMatrix, target: PureState) -> float:
    """Overlap with a pure target: |<t|psi>|^2 or <t|rho|t>, in [0, 1]."""
    if state.basis != target.basis:
        raise ValueError("state and target live on different bases")
    t = target.amplitudes
    if isinstance(state, PureState):
        val = abs(np.vdot(t, state.amplitudes)) ** 2
    else:
        val = np.real(t.conj() @ state.matrix @ t)
    return float(min(max(val, 0.0), 1.0))
