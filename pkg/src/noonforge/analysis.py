"""Fringe fitting, fidelity estimation, coherence-only fidelity bounds and
genuine-multipartite-entanglement certification.

The fidelity with respect to the two-parameter NOON family is maximized over
the free phases; with populations available the coherence fits pin a point
estimate, and without them the positivity of the density matrix confines the
population ratios to a feasible region over which rigorous lower and upper
fidelity bounds are extracted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fock import PureState, fock_basis
from .measurement import FringeData, FringeParams

_B23 = fock_basis(2, 3)

PAIRS = ("AB", "AC", "BC")


class EmptyFeasibleRegionError(RuntimeError):
    """The coherence data admit no population ratios: inconsistent input."""


@dataclass(frozen=True)
class PopulationSet:
    """Two-photon Fock populations of the heralded state, with optional
    per-value uncertainties."""

    p200: float
    p020: float
    p002: float
    p110: float = 0.0
    p101: float = 0.0
    p011: float = 0.0
    sigmas: tuple[float, ...] = (0.0,) * 6

    def __post_init__(self):
        vals = (self.p200, self.p020, self.p002, self.p110, self.p101, self.p011)
        for v in vals:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"population {v} outside [0, 1]")
        slack = 3 * math.sqrt(sum(s * s for s in self.sigmas)) + 1e-9
        if sum(vals) > 1.0 + slack:
            raise ValueError(f"populations sum to {sum(vals)} > 1")

    def noon_sum(self) -> float:
        return self.p200 + self.p020 + self.p002

    def ratios(self) -> tuple[float, float]:
        """(r_B, r_C) = (P_020 / P_200, P_002 / P_200)."""
        if self.p200 <= 0:
            raise ValueError("P_200 must be positive to form population ratios")
        return self.p020 / self.p200, self.p002 / self.p200

    def to_dict(self) -> dict:
        return {
            "P_200": self.p200,
            "P_020": self.p020,
            "P_002": self.p002,
            "P_110": self.p110,
            "P_101": self.p101,
            "P_011": self.p011,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PopulationSet":
        return cls(
            p200=d["P_200"],
            p020=d["P_020"],
            p002=d["P_002"],
            p110=d.get("P_110", 0.0),
            p101=d.get("P_101", 0.0),
            p011=d.get("P_011", 0.0),
        )


@dataclass(frozen=True)
class CoherenceSet:
    """Fitted fringe parameters for the three mode pairs."""

    ab: FringeParams
    ac: FringeParams
    bc: FringeParams

    def by_pair(self, pair: str) -> FringeParams:
        return {"AB": self.ab, "AC": self.ac, "BC": self.bc}[pair]

    def to_dict(self) -> dict:
        return {"AB": self.ab.to_dict(), "AC": self.ac.to_dict(), "BC": self.bc.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "CoherenceSet":
        return cls(
            ab=FringeParams.from_dict(d["AB"]),
            ac=FringeParams.from_dict(d["AC"]),
            bc=FringeParams.from_dict(d["BC"]),
        )


@dataclass(frozen=True)
class FidelityEstimate:
    """Phase-optimized NOON fidelity and the optimizing phases."""

    fidelity: float
    alpha1: float
    alpha2: float
    sigma_fidelity: float = 0.0
    sigma_alpha1: float = 0.0
    sigma_alpha2: float = 0.0
    method: str = "full"

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "sigma_fidelity": self.sigma_fidelity,
            "sigma_alpha1": self.sigma_alpha1,
            "sigma_alpha2": self.sigma_alpha2,
            "method": self.method,
        }


@dataclass(frozen=True)
class BoundsReport:
    """Coherence-only fidelity interval plus the optimizing intermediates."""

    f_lower: float
    f_upper: float
    r_b_interval: tuple[float, float]
    r_c_interval: tuple[float, float]
    at_lower: dict = field(default_factory=dict)
    at_upper: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.f_lower > self.f_upper + 1e-12:
            raise ValueError("f_lower exceeds f_upper")

    def to_dict(self) -> dict:
        return {
            "f_lower": self.f_lower,
            "f_upper": self.f_upper,
            "r_b_interval": list(self.r_b_interval),
            "r_c_interval": list(self.r_c_interval),
            "at_lower": self.at_lower,
            "at_upper": self.at_upper,
        }


@dataclass(frozen=True)
class GmeReport:
    """Biseparability threshold from the largest squared Schmidt coefficient
    over the three mode bipartitions."""

    threshold: float
    sigma_sq_max: tuple[float, float, float]
    z_score: float | None = None

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "sigma_sq_max": list(self.sigma_sq_max),
            "z_score": self.z_score,
        }


# ---------------------------------------------------------------------------
# fringe fitting


def _lstsq_fringe(thetas: np.ndarray, p: np.ndarray) -> tuple[float, float, float]:
    design = np.column_stack(
        [np.ones_like(thetas), np.cos(8 * thetas), np.sin(8 * thetas)]
    )
    coef, _, rank, _ = np.linalg.lstsq(design, p, rcond=None)
    if rank < 3:
        raise ValueError("degenerate design matrix: angles do not resolve the fringe")
    a0, a1, a2 = coef
    offset = 2 * a0
    visibility = 2 * math.hypot(a1, a2)
    phase = math.atan2(-a2, a1) if visibility > 1e-14 else 0.0
    return offset, visibility, phase


def fit_fringe(data: FringeData, n_boot: int = 1000, seed: int = 0) -> FringeParams:
    """Least-squares fringe fit on the basis {1, cos 8 theta, sin 8 theta}.

    Count-mode data are first normalized per point by the (11, 20, 02)
    outcome totals; uncertainties then come from a seeded Poisson bootstrap
    of the counts (skipped when n_boot is 0, e.g. inside an outer bootstrap).
    Probability-mode data are fitted exactly with zero uncertainties.
    """
    thetas = data.thetas
    p = data.p11()
    valid = ~np.isnan(p)
    if valid.sum() < 4:
        raise ValueError(f"need at least 4 valid points, got {int(valid.sum())}")
    offset, visibility, phase = _lstsq_fringe(thetas[valid], p[valid])
    if not data.is_count_mode or n_boot <= 0:
        sigma_phase = math.inf if visibility <= 1e-14 else 0.0
        return FringeParams(offset, visibility, phase, sigma_phase=sigma_phase)

    offs, viss, dphis = [], [], []
    counts = data.counts
    for b in range(n_boot):
        rng = np.random.default_rng([seed, b])
        resampled = rng.poisson(counts)
        totals = resampled.sum(axis=1).astype(float)
        ok = totals > 0
        if ok.sum() < 4:
            continue
        pb = resampled[ok, 0] / totals[ok]
        try:
            ob, vb, phb = _lstsq_fringe(thetas[ok], pb)
        except ValueError:
            continue
        offs.append(ob)
        viss.append(vb)
        d = (phb - phase + math.pi) % (2 * math.pi) - math.pi
        dphis.append(d)
    sigma_phase = float(np.std(dphis)) if visibility > 1e-14 else math.inf
    return FringeParams(
        offset,
        visibility,
        phase,
        sigma_offset=float(np.std(offs)),
        sigma_visibility=float(np.std(viss)),
        sigma_phase=sigma_phase,
    )


# ---------------------------------------------------------------------------
# phase-optimized fidelity


def _fidelity_surface(pop_sum: float, z_ab: complex, z_ac: complex, z_bc: complex):
    def f(a1, a2):
        return (
            pop_sum
            + 2 * (np.exp(1j * a1) * z_ab).real
            + 2 * (np.exp(1j * a2) * z_ac).real
            + 2 * (np.exp(1j * (a2 - a1)) * z_bc).real
        ) / 3.0

    return f


def _golden_max(fun, lo, hi, tol=1e-10):
    invgr = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invgr * (b - a)
    d = a + invgr * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invgr * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invgr * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def _grid_refine_max(surface, n_grid: int = 64, tol: float = 1e-10):
    """Maximize surface(a1, a2) on [0, 2 pi)^2: coarse grid then
    coordinate-wise golden-section refinement."""
    grid = np.arange(n_grid) * (2 * math.pi / n_grid)
    vals = surface(grid[:, None], grid[None, :])
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    a1, a2 = float(grid[i]), float(grid[j])
    span = 2 * math.pi / n_grid
    for _ in range(60):
        a1_new, _ = _golden_max(lambda x: surface(x, a2), a1 - span, a1 + span, tol)
        a2_new, _ = _golden_max(lambda y: surface(a1_new, y), a2 - span, a2 + span, tol)
        moved = max(abs(a1_new - a1), abs(a2_new - a2))
        a1, a2 = a1_new, a2_new
        span = max(2 * moved, 1e-8)
        if moved < tol:
            break
    return a1 % (2 * math.pi), a2 % (2 * math.pi), float(surface(a1, a2))


def max_fidelity_over_phases(
    populations: PopulationSet,
    coherences: tuple[complex, complex, complex],
    coherence_sigmas: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> FidelityEstimate:
    """Maximize the NOON fidelity over the target phases (alpha1, alpha2).

    `coherences` are the density-matrix elements (rho_{200,020},
    rho_{200,002}, rho_{020,002}).  Magnitudes violating the positivity
    bound |rho_ij|^2 <= rho_ii rho_jj beyond 3 sigma are rejected.
    """
    z_ab, z_ac, z_bc = (complex(z) for z in coherences)
    limits = (
        math.sqrt(max(populations.p200 * populations.p020, 0.0)),
        math.sqrt(max(populations.p200 * populations.p002, 0.0)),
        math.sqrt(max(populations.p020 * populations.p002, 0.0)),
    )
    clipped = []
    for name, z, lim, sig in zip(
        ("rho_200_020", "rho_200_002", "rho_020_002"),
        (z_ab, z_ac, z_bc),
        limits,
        coherence_sigmas,
    ):
        if abs(z) > lim + 3 * sig + 1e-9:
            raise ValueError(
                f"unphysical coherence {name}: |{abs(z):.6f}| exceeds "
                f"sqrt(P_i P_j) = {lim:.6f} beyond tolerance"
            )
        # magnitudes inside tolerance snap to the positivity limit, which
        # also keeps the maximized fidelity at or below 1
        if abs(z) > lim:
            z = z * (lim / abs(z))
        clipped.append(z)
    z_ab, z_ac, z_bc = clipped
    surface = _fidelity_surface(populations.noon_sum(), z_ab, z_ac, z_bc)
    a1, a2, fval = _grid_refine_max(surface)
    return FidelityEstimate(float(fval), a1, a2, method="full")


def fidelity_from_measurements(
    populations: PopulationSet, coherences: CoherenceSet
) -> FidelityEstimate:
    """Point fidelity estimate from populations plus fitted fringes.

    Coherence magnitudes are recovered through the contrast form
    |rho_ij| = (V_ij / A_ij) (P_i + P_j) / 2 and the fringe phase fixes the
    argument via rho_ij = |rho_ij| e^{-i phi_ij}.
    """
    pair_pops = {
        "AB": populations.p200 + populations.p020,
        "AC": populations.p200 + populations.p002,
        "BC": populations.p020 + populations.p002,
    }
    zs, sigs = {}, {}
    for pair in PAIRS:
        fp = coherences.by_pair(pair)
        if fp.offset <= 0 or fp.visibility <= 0:
            zs[pair], sigs[pair] = 0.0 + 0.0j, 0.0
            continue
        mag = fp.contrast * pair_pops[pair] / 2.0
        zs[pair] = mag * np.exp(-1j * fp.phase)
        rel = math.hypot(
            fp.sigma_visibility / fp.visibility, fp.sigma_offset / fp.offset
        )
        sigs[pair] = mag * rel
    return max_fidelity_over_phases(
        populations,
        (zs["AB"], zs["AC"], zs["BC"]),
        coherence_sigmas=(sigs["AB"], sigs["AC"], sigs["BC"]),
    )


# ---------------------------------------------------------------------------
# coherence-only bounds


def feasible_interval(v: float) -> tuple[float, float]:
    """Population-ratio interval allowed by a fringe contrast v = V/A.

    Roots of v^2 r^2 + (2 v^2 - 4) r + v^2 = 0: contrast 1 pins r = 1,
    contrast 0 leaves (0, inf).
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"contrast must lie in [0, 1], got {v}")
    if v == 0.0:
        return 0.0, math.inf
    if v == 1.0:
        return 1.0, 1.0
    s = math.sqrt(1.0 - v * v)
    return (2 - v * v - 2 * s) / (v * v), (2 - v * v + 2 * s) / (v * v)


def _contrast(fp: FringeParams, pair: str) -> float:
    """Contrast V/A with the 3-sigma clipping rule at the physical edge."""
    if fp.offset <= 0:
        raise ValueError(f"fringe offset for {pair} must be positive")
    v = fp.visibility / fp.offset
    if v <= 1.0:
        return v
    sigma = 0.0
    if fp.visibility > 0 and fp.sigma_visibility >= 0 and fp.sigma_offset >= 0:
        rel = math.hypot(
            fp.sigma_visibility / fp.visibility, fp.sigma_offset / fp.offset
        )
        sigma = v * rel
    if v <= 1.0 + 3 * sigma + 1e-12:
        warnings.warn(
            f"contrast {v:.6f} for pair {pair} exceeds 1 within tolerance; "
            "clipping to 1"
        )
        return 1.0
    raise ValueError(f"contrast {v:.6f} for pair {pair} is unphysical (> 1 beyond 3 sigma)")


def _delta_max(
    s_a: float, s_c: float, k_bc: float, dphi: float, phi_bc: float, n_delta: int
) -> tuple[float, float]:
    """Maximize R(delta) + K cos(delta - phi_BC) over delta in [0, 2 pi).

    R(delta) = sqrt(S_A^2 + S_C^2 + 2 S_A S_C cos(delta + dphi)); grid scan
    then golden-section refinement.  Returns (delta*, max value).
    """

    def g(d):
        r = math.sqrt(
            max(0.0, s_a * s_a + s_c * s_c + 2 * s_a * s_c * math.cos(d + dphi))
        )
        return r + k_bc * math.cos(d - phi_bc)

    deltas = np.arange(n_delta) * (2 * math.pi / n_delta)
    r = np.sqrt(
        np.maximum(
            0.0, s_a * s_a + s_c * s_c + 2 * s_a * s_c * np.cos(deltas + dphi)
        )
    )
    vals = r + k_bc * np.cos(deltas - phi_bc)
    j = int(np.argmax(vals))
    span = 2 * math.pi / n_delta
    d_star, g_star = _golden_max(g, deltas[j] - span, deltas[j] + span, tol=1e-12)
    return d_star % (2 * math.pi), g_star


def _bounds_trace(
    r_b: float,
    r_c: float,
    contrasts: dict,
    offsets: dict,
    phases: dict,
    n_delta: int,
    p_a: float | None = None,
) -> dict:
    """Full evaluation of the delta-maximized fidelity at one (r_B, r_C).

    The leading population defaults to the offset-implied value; a measured
    P_200 can be supplied instead.
    """
    if p_a is None:
        p_a = 1.0 / (
            1.0
            + (1 + r_b) * (1.0 / offsets["AB"] - 1.0)
            + (1 + r_c) * (1.0 / offsets["AC"] - 1.0)
            + (r_b + r_c) / offsets["BC"]
        )
    s_a = contrasts["AB"] * (1 + r_b)
    s_c = contrasts["AC"] * (1 + r_c)
    k_bc = contrasts["BC"] * (r_b + r_c)
    dphi = phases["AB"] - phases["AC"]
    delta, gmax = _delta_max(s_a, s_c, k_bc, dphi, phases["BC"], n_delta)
    f = (p_a / 3.0) * (1 + r_b + r_c + gmax)
    big_delta = delta + dphi
    big_r = math.sqrt(
        max(0.0, s_a * s_a + s_c * s_c + 2 * s_a * s_c * math.cos(big_delta))
    )
    phi_comb = math.atan2(
        s_c * math.sin(big_delta), s_a + s_c * math.cos(big_delta)
    )
    alpha1 = (phases["AB"] - phi_comb) % (2 * math.pi)
    alpha2 = (alpha1 + delta) % (2 * math.pi)
    return {
        "fidelity": float(f),
        "r_b": float(r_b),
        "r_c": float(r_c),
        "p_a": float(p_a),
        "s_a": float(s_a),
        "s_c": float(s_c),
        "big_r": float(big_r),
        "delta": float(delta),
        "combination_phase": float(phi_comb),
        "alpha1": float(alpha1),
        "alpha2": float(alpha2),
    }


def _grid_fmax(
    rb: np.ndarray,
    rc: np.ndarray,
    contrasts: dict,
    offsets: dict,
    phases: dict,
    n_delta: int,
) -> np.ndarray:
    """Delta-maximized fidelity over an (r_B, r_C) product grid; infeasible
    points (violating the BC coupling constraint) are NaN."""
    r_bg, r_cg = np.meshgrid(rb, rc, indexing="ij")
    feasible = contrasts["BC"] ** 2 * (r_bg + r_cg) ** 2 <= 4 * r_bg * r_cg + 1e-12
    p_a = 1.0 / (
        1.0
        + (1 + r_bg) * (1.0 / offsets["AB"] - 1.0)
        + (1 + r_cg) * (1.0 / offsets["AC"] - 1.0)
        + (r_bg + r_cg) / offsets["BC"]
    )
    s_a = contrasts["AB"] * (1 + r_bg)
    s_c = contrasts["AC"] * (1 + r_cg)
    k_bc = contrasts["BC"] * (r_bg + r_cg)
    base = 1 + r_bg + r_cg
    dphi = phases["AB"] - phases["AC"]
    best = np.full(r_bg.shape, -np.inf)
    for d in np.arange(n_delta) * (2 * math.pi / n_delta):
        r = np.sqrt(
            np.maximum(0.0, s_a**2 + s_c**2 + 2 * s_a * s_c * math.cos(d + dphi))
        )
        np.maximum(best, r + k_bc * math.cos(d - phases["BC"]), out=best)
    fmax = (p_a / 3.0) * (base + best)
    fmax[~feasible] = np.nan
    return fmax


def _log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    lo = max(lo, 1e-12)
    if hi <= lo:
        return np.array([lo])
    return np.logspace(math.log10(lo), math.log10(hi), n)


def fidelity_bounds(
    coherences: CoherenceSet,
    populations: PopulationSet | None = None,
    n_r: int = 500,
    n_delta: int = 2048,
    r_cap: float = 1e9,
    refine_passes: int = 2,
) -> BoundsReport:
    """Fidelity interval using only the three fitted coincidence fringes.

    Grids the population ratios (r_B, r_C) log-spaced over the feasible
    region, maximizes the fidelity over the target phases at each point (the
    alpha1 maximization is closed-form, delta is scanned and refined), and
    reports the extrema with local grid refinement around each one.  When
    populations are supplied the ratios are pinned and the interval collapses
    to the point estimate.
    """
    contrasts = {p: _contrast(coherences.by_pair(p), p) for p in PAIRS}
    offsets = {p: coherences.by_pair(p).offset for p in PAIRS}
    phases = {p: coherences.by_pair(p).phase for p in PAIRS}

    if populations is not None:
        r_b, r_c = populations.ratios()
        trace = _bounds_trace(
            r_b,
            r_c,
            contrasts,
            offsets,
            phases,
            max(n_delta, 4096),
            p_a=populations.p200,
        )
        f = trace.pop("fidelity")
        return BoundsReport(
            f_lower=f,
            f_upper=f,
            r_b_interval=(r_b, r_b),
            r_c_interval=(r_c, r_c),
            at_lower=trace,
            at_upper=dict(trace),
        )

    lo_b, hi_b = feasible_interval(contrasts["AB"])
    lo_c, hi_c = feasible_interval(contrasts["AC"])
    lo_b, hi_b = max(lo_b, 1.0 / r_cap), min(hi_b, r_cap)
    lo_c, hi_c = max(lo_c, 1.0 / r_cap), min(hi_c, r_cap)
    # r = 1 satisfies every contrast constraint; pinning it on the grid keeps
    # degenerate regions (contrast 1 pairs) from being missed by log spacing
    rb = np.unique(np.append(_log_grid(lo_b, hi_b, n_r), 1.0))
    rc = np.unique(np.append(_log_grid(lo_c, hi_c, n_r), 1.0))
    fmax = _grid_fmax(rb, rc, contrasts, offsets, phases, n_delta)
    if np.all(np.isnan(fmax)):
        raise EmptyFeasibleRegionError(
            "no population ratios are consistent with the three fringes"
        )

    def refine(extreme: str) -> dict:
        pick = np.nanargmin if extreme == "min" else np.nanargmax
        i_loc, j_loc = np.unravel_index(int(pick(fmax)), fmax.shape)
        grids = (rb, rc)
        for _ in range(refine_passes):
            lo_b_l = grids[0][max(i_loc - 1, 0)]
            hi_b_l = grids[0][min(i_loc + 1, len(grids[0]) - 1)]
            lo_c_l = grids[1][max(j_loc - 1, 0)]
            hi_c_l = grids[1][min(j_loc + 1, len(grids[1]) - 1)]
            rb_loc = np.clip(_log_grid(lo_b_l, hi_b_l, 33), lo_b, hi_b)
            rc_loc = np.clip(_log_grid(lo_c_l, hi_c_l, 33), lo_c, hi_c)
            local = _grid_fmax(rb_loc, rc_loc, contrasts, offsets, phases, n_delta)
            if np.all(np.isnan(local)):
                break
            i_loc, j_loc = np.unravel_index(int(pick(local)), local.shape)
            grids = (rb_loc, rc_loc)
        return _bounds_trace(
            float(grids[0][i_loc]),
            float(grids[1][j_loc]),
            contrasts,
            offsets,
            phases,
            max(n_delta, 4096),
        )

    low = refine("min")
    high = refine("max")
    f_lower = low.pop("fidelity")
    f_upper = high.pop("fidelity")
    return BoundsReport(
        f_lower=min(f_lower, f_upper),
        f_upper=max(f_lower, f_upper),
        r_b_interval=(float(lo_b), float(hi_b)),
        r_c_interval=(float(lo_c), float(hi_c)),
        at_lower=low,
        at_upper=high,
    )


# ---------------------------------------------------------------------------
# genuine multipartite entanglement


def gme_threshold(target: PureState) -> GmeReport:
    """Largest squared Schmidt coefficient over the three bipartitions.

    For each cut k | rest the state's coefficient matrix (rows indexed by
    the occupation of mode k, columns by the joint occupation of the other
    two modes) is decomposed by SVD; the overall maximum squared singular
    value is the biseparable fidelity threshold.
    """
    if target.basis != _B23:
        raise ValueError("expected a pure state on the 2-photon 3-mode basis")
    if not target.is_normalized:
        raise ValueError("target state must be normalized")
    pair_states = [(i, j) for i in range(3) for j in range(3 - i)]
    col_index = {occ: n for n, occ in enumerate(pair_states)}
    maxima = []
    for k in range(3):
        c = np.zeros((3, len(pair_states)), dtype=complex)
        for occ, amp in zip(target.basis.states, target.amplitudes):
            rest = occ[:k] + occ[k + 1 :]
            c[occ[k], col_index[rest]] = amp
        sv = np.linalg.svd(c, compute_uv=False)
        maxima.append(float(np.max(sv) ** 2))
    return GmeReport(threshold=max(maxima), sigma_sq_max=tuple(maxima))


def certify_gme(fidelity: float, sigma: float, threshold: float) -> float:
    """Standard score of a fidelity against the biseparability threshold."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return (fidelity - threshold) / sigma


# ---------------------------------------------------------------------------
# counting statistics


def success_ratio(
    fourfolds_with_unitary: int, fourfolds_with_identity: int
) -> tuple[float, float]:
    """Herald success probability as a ratio of four-fold counts, with
    Poisson error propagation."""
    k, n = fourfolds_with_unitary, fourfolds_with_identity
    if n <= 0:
        raise ValueError("identity-transformation count must be positive")
    if k < 0:
        raise ValueError("counts must be non-negative")
    ratio = k / n
    sigma = math.sqrt(k + k * k / n) / n
    return ratio, sigma


def propagate_uncertainty(
    analysis: Callable[[dict[str, FringeData]], float],
    data: dict[str, FringeData],
    resamples: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """Parametric bootstrap of a whole analysis pipeline.

    Count-mode inputs are Poisson-resampled per entry and the analysis is
    rerun; probability-mode inputs pass through unchanged, so noiseless
    inputs produce sigma 0.  Deterministic for a fixed seed.  Returns
    (mean, standard deviation) over the resamples.
    """
    if resamples < 100:
        raise ValueError(f"need at least 100 resamples, got {resamples}")
    values = []
    for b in range(resamples):
        rng = np.random.default_rng([seed, b])
        resampled = {}
        for key, fd in data.items():
            if fd.is_count_mode:
                resampled[key] = FringeData(
                    pair=fd.pair,
                    thetas=fd.thetas,
                    counts=rng.poisson(fd.counts),
                    meta=fd.meta,
                )
            else:
                resampled[key] = fd
        values.append(analysis(resampled))
    arr = np.asarray(values, dtype=float)
    if np.ptp(arr) == 0.0:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std())
