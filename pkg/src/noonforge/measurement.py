"""Coherence-extraction measurement on the heralded three-mode state.

One target mode is projected onto vacuum, the remaining pair is rotated by a
wave-plate analyzer HWP(theta) QWP(pi/4), and the PBS coincidence probability
traces out a sinusoidal fringe in 8 theta whose offset, visibility and phase
encode the pair populations and the two-photon coherence.  Synthetic counts,
pseudo-photon-number normalization and simple noise channels support
end-to-end statistical studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elements import hwp, qwp
from .fock import (
    DensityMatrix,
    Mode,
    ModeUnitary,
    TARGET_MODES,
    fock_basis,
    herald,
    lift_unitary,
)

_B22 = fock_basis(2, 2)
_I20 = _B22.index((2, 0))
_I11 = _B22.index((1, 1))
_I02 = _B22.index((0, 2))
_B23 = fock_basis(2, 3)

_PAIR_OF_PROJECTED = {
    Mode.A: (Mode.B, Mode.C),
    Mode.B: (Mode.A, Mode.C),
    Mode.C: (Mode.A, Mode.B),
}


@dataclass(frozen=True)
class TwoModeState:
    """Vacuum-projected two-mode state: normalized rho on the 2-photon
    basis {20, 11, 02} plus the pre-normalization weight."""

    pair: tuple[Mode, Mode]
    rho: DensityMatrix | None
    weight: float


@dataclass(frozen=True)
class FringeParams:
    """Fitted fringe C(theta) = offset/2 + (visibility/2) cos(8 theta + phase)."""

    offset: float
    visibility: float
    phase: float
    sigma_offset: float = 0.0
    sigma_visibility: float = 0.0
    sigma_phase: float = 0.0

    @property
    def contrast(self) -> float:
        """Michelson contrast visibility/offset = (max - min)/(max + min)."""
        if self.offset == 0.0:
            return 0.0
        return self.visibility / self.offset

    def to_dict(self) -> dict:
        return {
            "offset": self.offset,
            "visibility": self.visibility,
            "phase": self.phase,
            "sigma_offset": self.sigma_offset,
            "sigma_visibility": self.sigma_visibility,
            "sigma_phase": self.sigma_phase,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FringeParams":
        return cls(
            offset=d["offset"],
            visibility=d["visibility"],
            phase=d["phase"],
            sigma_offset=d.get("sigma_offset", 0.0),
            sigma_visibility=d.get("sigma_visibility", 0.0),
            sigma_phase=d.get("sigma_phase", 0.0),
        )


@dataclass(frozen=True)
class FringeData:
    """Sampled coincidence fringe for one mode pair.

    Probability mode stores per-theta outcome probabilities (columns
    11, 20, 02); count mode stores non-negative integer counts with the
    same column order.
    """

    pair: tuple[Mode, Mode]
    thetas: np.ndarray
    probs: np.ndarray | None = None
    counts: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=float)
        if thetas.ndim != 1 or len(thetas) == 0:
            raise ValueError("thetas must be a nonempty 1-D array")
        if np.any(np.diff(thetas) <= 0):
            raise ValueError("thetas must be strictly increasing")
        object.__setattr__(self, "thetas", thetas)
        if self.probs is None and self.counts is None:
            raise ValueError("need probabilities or counts")
        if self.probs is not None:
            p = np.asarray(self.probs, dtype=float)
            if p.shape != (len(thetas), 3):
                raise ValueError(f"probs must have shape ({len(thetas)}, 3)")
            object.__setattr__(self, "probs", p)
        if self.counts is not None:
            c = np.asarray(self.counts)
            if c.shape != (len(thetas), 3):
                raise ValueError(f"counts must have shape ({len(thetas)}, 3)")
            if np.any(c < 0) or not np.issubdtype(c.dtype, np.integer):
                raise ValueError("counts must be non-negative integers")
            object.__setattr__(self, "counts", c)

    @property
    def is_count_mode(self) -> bool:
        return self.counts is not None

    def p11(self) -> np.ndarray:
        """Normalized coincidence probability per point (NaN where the
        count denominator vanishes)."""
        if self.counts is not None:
            totals = self.counts.sum(axis=1).astype(float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(totals > 0, self.counts[:, 0] / totals, np.nan)
        return self.probs[:, 0]


def vacuum_project(rho: DensityMatrix, k: Mode | int) -> TwoModeState:
    """Project target mode k onto vacuum, keeping the other two modes.

    The returned state is normalized by the retained two-photon weight
    rho_{20,20} + rho_{02,02} + rho_{11,11}; that weight comes along
    explicitly.
    """
    k = Mode(k)
    if k not in TARGET_MODES:
        raise ValueError(f"vacuum projection applies to target modes, got {k!r}")
    if rho.basis != _B23:
        raise ValueError("expected a state on the 2-photon 3-mode basis")
    outcome = herald(rho, k, 0)
    return TwoModeState(_PAIR_OF_PROJECTED[k], outcome.conditional_state, outcome.probability)


def meas_unitary(theta: float) -> ModeUnitary:
    """Analyzer wave-plate sequence HWP(theta) QWP(pi/4), QWP applied first."""
    return ModeUnitary(hwp(theta).matrix @ qwp(math.pi / 4).matrix)


def _outcome_probs(state: TwoModeState, theta: float) -> np.ndarray:
    """Diagonal of the analyzed two-mode state: probabilities of the
    outcomes (11, 20, 02)."""
    lifted = lift_unitary(meas_unitary(theta), _B22)
    diag = np.einsum("ij,jk,ik->i", lifted, state.rho.matrix, lifted.conj()).real
    return np.array([diag[_I11], diag[_I20], diag[_I02]])


def coincidence_prob(state: TwoModeState, theta: float) -> float:
    """Probability of one photon in each PBS output after the analyzer.

    Equals offset/2 + (visibility/2) cos(8 theta + phase) with the
    parameters of `fringe_params_from_rho`.
    """
    return float(_outcome_probs(state, theta)[0])


def fringe_params_from_rho(state: TwoModeState) -> FringeParams:
    """Exact fringe parameters of a two-mode state.

    offset = rho'_{20,20} + rho'_{02,02}, visibility = 2 |rho'_{20,02}|,
    and the phase convention rho'_{20,02} = |rho'_{20,02}| e^{-i phase}.
    A zero-visibility fringe reports phase 0 with infinite uncertainty.
    """
    m = state.rho.matrix
    offset = float(m[_I20, _I20].real + m[_I02, _I02].real)
    z = m[_I20, _I02]
    visibility = 2.0 * abs(z)
    if visibility < 1e-15:
        return FringeParams(offset, 0.0, 0.0, sigma_phase=math.inf)
    phase = float(-np.angle(z))
    if phase <= -math.pi:
        phase += 2 * math.pi
    return FringeParams(offset, visibility, phase)


def fringe_scan(
    rho: DensityMatrix, pair: tuple[Mode, Mode], thetas: np.ndarray
) -> FringeData:
    """Vacuum-project the mode outside `pair` and record the analyzer
    outcome probabilities at each angle (probability mode)."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size == 0:
        raise ValueError("thetas must be nonempty")
    pair = (Mode(pair[0]), Mode(pair[1]))
    (k,) = [m for m in TARGET_MODES if m not in pair]
    state = vacuum_project(rho, k)
    if state.weight == 0.0:
        raise ValueError(f"vacuum projection of mode {k.name} has zero weight")
    probs = np.stack([_outcome_probs(state, t) for t in thetas])
    return FringeData(
        pair=state.pair,
        thetas=thetas,
        probs=probs,
        meta={"projected_mode": k.name, "weight": state.weight},
    )


def default_thetas(points_per_period: int = 16) -> np.ndarray:
    """Uniform analyzer angles over one fringe period pi/4."""
    return np.arange(points_per_period) * (math.pi / 4) / points_per_period


def sample_counts(fringe: FringeData, n_events_per_point: int, seed: int) -> FringeData:
    """Draw multinomial counts over the outcomes (11, 20, 02) per point.

    Deterministic for a given seed; each point uses the substream
    (seed, point index).
    """
    if fringe.probs is None:
        raise ValueError("sample_counts needs probability-mode data")
    counts = np.zeros((len(fringe.thetas), 3), dtype=np.int64)
    for i, p in enumerate(fringe.probs):
        rng = np.random.default_rng([seed, i])
        q = np.clip(p, 0.0, None)
        total = q.sum()
        if total > 1.0:
            q = q / total
        q_rest = max(0.0, 1.0 - q.sum())
        draw = rng.multinomial(n_events_per_point, np.append(q, q_rest))
        counts[i] = draw[:3]
    meta = dict(fringe.meta)
    meta.update({"seed": seed, "events_per_point": n_events_per_point})
    return FringeData(pair=fringe.pair, thetas=fringe.thetas, counts=counts, meta=meta)


def pnr_normalized_probability(c11: int, c20: int, c02: int) -> float:
    """Coincidence fraction c11 / (c11 + c20 + c02); NaN flags an invalid
    all-zero point."""
    if min(c11, c20, c02) < 0:
        raise ValueError("counts must be non-negative")
    total = c11 + c20 + c02
    if total == 0:
        return math.nan
    return c11 / total


def pnr_split_model(two_photon_mode_prob: float, splitting_ratio: float = 0.5) -> float:
    """Probability that a two-photon occupation registers as a coincidence
    of the two split detectors: p * 2 r (1 - r)."""
    if not 0.0 < splitting_ratio < 1.0:
        raise ValueError(f"splitting ratio must lie in (0, 1), got {splitting_ratio}")
    return two_photon_mode_prob * 2.0 * splitting_ratio * (1.0 - splitting_ratio)


@dataclass(frozen=True)
class NoiseModel:
    """Diagonal/dephasing calibration noise for the 2-photon 3-mode state.

    white mixes in the maximally mixed state; dephase scales the coherences
    among {200, 020, 002}; bad_event mixes in uniform weight on the
    {110, 101, 011} projectors.  Channels apply in that order.
    """

    white: float = 0.0
    dephase: float = 0.0
    bad_event: float = 0.0

    def __post_init__(self):
        for name in ("white", "dephase", "bad_event"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def to_dict(self) -> dict:
        return {"white": self.white, "dephase": self.dephase, "bad_event": self.bad_event}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        return cls(**d)


_NOON_OCCS = [(2, 0, 0), (0, 2, 0), (0, 0, 2)]
_BAD_OCCS = [(1, 1, 0), (1, 0, 1), (0, 1, 1)]


def apply_noise(rho: DensityMatrix, model: NoiseModel) -> DensityMatrix:
    """Apply the noise channels to a state; trace preserving."""
    if rho.basis != _B23:
        raise ValueError("expected a state on the 2-photon 3-mode basis")
    m = rho.matrix.copy()
    dim = m.shape[0]
    if model.white > 0:
        m = (1 - model.white) * m + model.white * np.eye(dim) / dim
    if model.dephase > 0:
        idx = [_B23.index(o) for o in _NOON_OCCS]
        for a in idx:
            for b in idx:
                if a != b:
                    m[a, b] *= 1 - model.dephase
    if model.bad_event > 0:
        bad = np.zeros((dim, dim), dtype=complex)
        for o in _BAD_OCCS:
            i = _B23.index(o)
            bad[i, i] = 1.0 / 3.0
        m = (1 - model.bad_event) * m + model.bad_event * bad
    return DensityMatrix(rho.basis, m, normalized=rho.normalized)
