"""Fringe fits, phase-optimized fidelity, bounds, GME, uncertainty."""

import math

import numpy as np
import pytest

from noonforge import (
    CoherenceSet,
    FringeData,
    FringeParams,
    Mode,
    NoiseModel,
    PopulationSet,
    apply_noise,
    certify_gme,
    feasible_interval,
    fidelity_bounds,
    fidelity_from_measurements,
    fit_fringe,
    fock_basis,
    fringe_params_from_rho,
    fringe_scan,
    gme_threshold,
    max_fidelity_over_phases,
    noon_state,
    propagate_uncertainty,
    sample_counts,
    success_ratio,
    vacuum_project,
)
from noonforge.fock import DensityMatrix, PureState
from noonforge.measurement import default_thetas

B23 = fock_basis(2, 3)


def exact_pipeline_inputs(rho: DensityMatrix):
    """Exact (populations, fringes, coherence elements) of a known state."""
    pops = PopulationSet(
        p200=rho.element((2, 0, 0), (2, 0, 0)).real,
        p020=rho.element((0, 2, 0), (0, 2, 0)).real,
        p002=rho.element((0, 0, 2), (0, 0, 2)).real,
        p110=rho.element((1, 1, 0), (1, 1, 0)).real,
        p101=rho.element((1, 0, 1), (1, 0, 1)).real,
        p011=rho.element((0, 1, 1), (0, 1, 1)).real,
    )
    coherences = CoherenceSet(
        ab=fringe_params_from_rho(vacuum_project(rho, Mode.C)),
        ac=fringe_params_from_rho(vacuum_project(rho, Mode.B)),
        bc=fringe_params_from_rho(vacuum_project(rho, Mode.A)),
    )
    elements = (
        rho.element((2, 0, 0), (0, 2, 0)),
        rho.element((2, 0, 0), (0, 0, 2)),
        rho.element((0, 2, 0), (0, 0, 2)),
    )
    return pops, coherences, elements


def random_noisy_noon(rng) -> DensityMatrix:
    a1, a2 = rng.uniform(0, 2 * np.pi, 2)
    model = NoiseModel(
        white=rng.uniform(0, 0.3),
        dephase=rng.uniform(0, 0.5),
        bad_event=rng.uniform(0, 0.3),
    )
    return apply_noise(noon_state(a1, a2).density(), model)


# ---------------------------------------------------------------------------
# fit_fringe


def test_fit_fringe_exact_recovery():
    thetas = default_thetas(16)
    probs = np.zeros((16, 3))
    probs[:, 0] = 0.5 + 0.4 * np.cos(8 * thetas + 1.0)
    probs[:, 1] = 1 - probs[:, 0]
    data = FringeData(pair=(Mode.A, Mode.B), thetas=thetas, probs=probs)
    params = fit_fringe(data)
    assert params.offset == pytest.approx(1.0, abs=1e-12)
    assert params.visibility == pytest.approx(0.8, abs=1e-12)
    assert params.phase == pytest.approx(1.0, abs=1e-12)
    assert params.sigma_offset == params.sigma_visibility == 0.0


def test_fit_fringe_constant_data():
    thetas = default_thetas(8)
    probs = np.zeros((8, 3))
    probs[:, 0] = 0.25
    probs[:, 1] = 0.75
    data = FringeData(pair=(Mode.B, Mode.C), thetas=thetas, probs=probs)
    params = fit_fringe(data)
    assert params.offset == pytest.approx(0.5, abs=1e-12)
    assert params.visibility == pytest.approx(0.0, abs=1e-12)
    assert params.phase == 0.0


def test_fit_fringe_sampled_counts_within_3_sigma():
    data = fringe_scan(noon_state(0, 0).density(), (Mode.A, Mode.B), default_thetas(16))
    counts = sample_counts(data, 1000, seed=8)
    params = fit_fringe(counts, n_boot=400, seed=8)
    assert params.sigma_visibility > 0
    assert abs(params.visibility - 1.0) <= 3 * params.sigma_visibility + 1e-12


def test_fit_fringe_insufficient_points():
    thetas = np.array([0.0, 0.1, 0.2])
    probs = np.ones((3, 3)) / 3
    data = FringeData(pair=(Mode.A, Mode.B), thetas=thetas, probs=probs)
    with pytest.raises(ValueError):
        fit_fringe(data)


def test_fit_fringe_degenerate_design():
    # four points all at coincident fringe phases cannot resolve the fit
    thetas = np.array([0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    probs = np.zeros((4, 3))
    probs[:, 0] = 0.5
    data = FringeData(pair=(Mode.A, Mode.B), thetas=thetas, probs=probs)
    with pytest.raises(ValueError):
        fit_fringe(data)


# ---------------------------------------------------------------------------
# max_fidelity_over_phases


def test_max_fidelity_ideal_inputs():
    pops = PopulationSet(1 / 3, 1 / 3, 1 / 3)
    a1, a2 = 1.1, 2.9
    coh = (
        np.exp(-1j * a1) / 3,
        np.exp(-1j * a2) / 3,
        np.exp(-1j * (a2 - a1)) / 3,
    )
    est = max_fidelity_over_phases(pops, coh)
    assert est.fidelity == pytest.approx(1.0, abs=1e-9)
    assert est.alpha1 == pytest.approx(a1, abs=1e-5)
    assert est.alpha2 == pytest.approx(a2, abs=1e-5)


def test_max_fidelity_zero_coherences():
    pops = PopulationSet(1 / 3, 1 / 3, 1 / 3)
    est = max_fidelity_over_phases(pops, (0, 0, 0))
    assert est.fidelity == pytest.approx(1 / 3, abs=1e-12)


def test_max_fidelity_rejects_unphysical_coherence():
    pops = PopulationSet(0.1, 0.1, 0.1)
    with pytest.raises(ValueError):
        max_fidelity_over_phases(pops, (0.3, 0, 0))


def test_max_fidelity_matches_direct_oracle(rng):
    # oracle: dense grid evaluation of the fidelity surface
    for _ in range(10):
        rho = random_noisy_noon(rng)
        pops, _, elements = exact_pipeline_inputs(rho)
        est = max_fidelity_over_phases(pops, elements)
        grid = np.linspace(0, 2 * np.pi, 361)
        a1, a2 = np.meshgrid(grid, grid, indexing="ij")
        z_ab, z_ac, z_bc = elements
        surface = (
            pops.noon_sum()
            + 2 * (np.exp(1j * a1) * z_ab).real
            + 2 * (np.exp(1j * a2) * z_ac).real
            + 2 * (np.exp(1j * (a2 - a1)) * z_bc).real
        ) / 3
        assert est.fidelity >= surface.max() - 1e-6
        assert est.fidelity <= surface.max() + 1e-4


# ---------------------------------------------------------------------------
# fidelity_from_measurements


@pytest.mark.parametrize(
    "model",
    [
        NoiseModel(),
        NoiseModel(dephase=0.5),
        NoiseModel(bad_event=0.15),
        NoiseModel(white=0.2, dephase=0.3, bad_event=0.1),
    ],
)
def test_fidelity_from_measurements_round_trip(model):
    rho = apply_noise(noon_state(0.9, -2.0).density(), model)
    pops, coherences, elements = exact_pipeline_inputs(rho)
    via_fringes = fidelity_from_measurements(pops, coherences)
    direct = max_fidelity_over_phases(pops, elements)
    assert via_fringes.fidelity == pytest.approx(direct.fidelity, abs=1e-9)


def test_fidelity_from_measurements_ideal_is_unity():
    rho = noon_state(0.3, 1.7).density()
    pops, coherences, _ = exact_pipeline_inputs(rho)
    est = fidelity_from_measurements(pops, coherences)
    assert est.fidelity == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# feasible_interval


def test_feasible_interval_edges():
    assert feasible_interval(1.0) == (1.0, 1.0)
    assert feasible_interval(0.0) == (0.0, math.inf)
    with pytest.raises(ValueError):
        feasible_interval(1.2)


def test_feasible_interval_roots_satisfy_quadratic():
    v = 0.8
    for r in feasible_interval(v):
        assert v * v * r * r + (2 * v * v - 4) * r + v * v == pytest.approx(0, abs=1e-12)


# ---------------------------------------------------------------------------
# fidelity_bounds


def test_bounds_ideal_fringes_collapse_to_unity():
    ideal = FringeParams(1.0, 1.0, 0.0)
    report = fidelity_bounds(CoherenceSet(ab=ideal, ac=ideal, bc=ideal))
    assert report.f_lower == pytest.approx(1.0, abs=1e-6)
    assert report.f_upper == pytest.approx(1.0, abs=1e-6)
    assert report.at_upper["p_a"] == pytest.approx(1 / 3, abs=1e-9)


def test_bounds_zero_visibility():
    flat = FringeParams(1.0, 0.0, 0.0)
    report = fidelity_bounds(
        CoherenceSet(ab=flat, ac=flat, bc=flat), n_r=150, n_delta=512
    )
    assert report.f_lower == pytest.approx(1 / 3, abs=1e-6)
    assert report.f_upper == pytest.approx(1 / 3, abs=1e-6)


def test_bounds_sandwich_on_noisy_states(rng):
    worst_low, worst_high = 0.0, 0.0
    for _ in range(30):
        rho = random_noisy_noon(rng)
        pops, coherences, elements = exact_pipeline_inputs(rho)
        f_point = max_fidelity_over_phases(pops, elements).fidelity
        report = fidelity_bounds(coherences, n_r=80, n_delta=256)
        worst_low = max(worst_low, report.f_lower - f_point)
        worst_high = max(worst_high, f_point - report.f_upper)
    assert worst_low <= 1e-6
    assert worst_high <= 1e-6


def test_bounds_collapse_with_populations(rng):
    for _ in range(10):
        rho = random_noisy_noon(rng)
        pops, coherences, _ = exact_pipeline_inputs(rho)
        point = fidelity_from_measurements(pops, coherences).fidelity
        pinned = fidelity_bounds(coherences, populations=pops)
        assert pinned.f_lower == pytest.approx(point, abs=1e-9)
        assert pinned.f_upper == pytest.approx(point, abs=1e-9)


def test_bounds_phase_shift_covariance(rng):
    rho = random_noisy_noon(rng)
    _, coherences, _ = exact_pipeline_inputs(rho)
    base = fidelity_bounds(coherences, n_r=80, n_delta=512)
    a, b = 0.7, -1.2
    shifted = CoherenceSet(
        ab=FringeParams(coherences.ab.offset, coherences.ab.visibility,
                        coherences.ab.phase + a),
        ac=FringeParams(coherences.ac.offset, coherences.ac.visibility,
                        coherences.ac.phase + b),
        bc=FringeParams(coherences.bc.offset, coherences.bc.visibility,
                        coherences.bc.phase + b - a),
    )
    moved = fidelity_bounds(shifted, n_r=80, n_delta=512)
    assert moved.f_lower == pytest.approx(base.f_lower, abs=1e-6)
    assert moved.f_upper == pytest.approx(base.f_upper, abs=1e-6)
    d_alpha1 = (moved.at_upper["alpha1"] - base.at_upper["alpha1"] - a) % (2 * math.pi)
    assert min(d_alpha1, 2 * math.pi - d_alpha1) < 1e-3


def test_bounds_reported_fringe_parameters():
    # contrasts 0.819/0.920/0.812 around centers 0.467/0.478/0.480 with the
    # consistent-phase convention phi_AB - phi_AC + phi_BC = 0
    coherences = CoherenceSet(
        ab=FringeParams(2 * 0.467, 2 * 0.467 * 0.819, 0.0),
        ac=FringeParams(2 * 0.480, 2 * 0.480 * 0.812, 0.0),
        bc=FringeParams(2 * 0.478, 2 * 0.478 * 0.920, 0.0),
    )
    report = fidelity_bounds(coherences)
    assert report.f_lower == pytest.approx(0.818, abs=0.02)
    assert report.f_upper == pytest.approx(0.836, abs=0.02)


def test_bounds_trace_reconstructs_extrema(rng):
    rho = random_noisy_noon(rng)
    _, coherences, _ = exact_pipeline_inputs(rho)
    report = fidelity_bounds(coherences, n_r=80, n_delta=512)
    v_bc = coherences.bc.visibility / coherences.bc.offset
    for value, trace in [(report.f_lower, report.at_lower),
                         (report.f_upper, report.at_upper)]:
        rebuilt = (trace["p_a"] / 3.0) * (
            1
            + trace["r_b"]
            + trace["r_c"]
            + trace["big_r"]
            + v_bc * (trace["r_b"] + trace["r_c"])
            * math.cos(trace["delta"] - coherences.bc.phase)
        )
        assert rebuilt == pytest.approx(value, abs=1e-9)


def test_bounds_contrast_clipping(rng):
    # a fitted contrast barely above 1 clips with a warning instead of failing
    over = FringeParams(1.0, 1.002, 0.0, sigma_visibility=0.005)
    ok = FringeParams(1.0, 0.9, 0.0)
    with pytest.warns(UserWarning):
        report = fidelity_bounds(CoherenceSet(ab=over, ac=ok, bc=ok),
                                 n_r=60, n_delta=256)
    assert report.f_upper <= 1.0 + 1e-9
    far = FringeParams(1.0, 1.2, 0.0, sigma_visibility=0.005)
    with pytest.raises(ValueError):
        fidelity_bounds(CoherenceSet(ab=far, ac=ok, bc=ok), n_r=60, n_delta=256)


# ---------------------------------------------------------------------------
# GME


def test_gme_threshold_noon_random_phases(rng):
    for _ in range(100):
        a1, a2 = rng.uniform(0, 2 * np.pi, 2)
        report = gme_threshold(noon_state(a1, a2))
        assert abs(report.threshold - 2 / 3) <= 1e-12
        assert all(abs(s - 2 / 3) <= 1e-12 for s in report.sigma_sq_max)


def test_gme_threshold_product_state():
    amps = np.zeros(6, dtype=complex)
    amps[B23.index((2, 0, 0))] = 1.0
    report = gme_threshold(PureState(B23, amps))
    assert report.threshold == pytest.approx(1.0, abs=1e-12)


def test_gme_threshold_biseparable_superposition():
    # (|200> + |020>)/sqrt(2) is a product state across the C | AB cut
    amps = np.zeros(6, dtype=complex)
    amps[B23.index((2, 0, 0))] = 1 / np.sqrt(2)
    amps[B23.index((0, 2, 0))] = 1 / np.sqrt(2)
    report = gme_threshold(PureState(B23, amps))
    assert report.threshold == pytest.approx(1.0, abs=1e-12)
    assert report.sigma_sq_max[2] == pytest.approx(1.0, abs=1e-12)


def test_certify_gme():
    z = certify_gme(0.823, 0.018, 2 / 3)
    assert z == pytest.approx((0.823 - 2 / 3) / 0.018, abs=1e-12)
    assert z > 8
    assert certify_gme(2 / 3, 0.05, 2 / 3) == 0.0
    assert certify_gme(0.6, 0.02, 2 / 3) < 0
    with pytest.raises(ValueError):
        certify_gme(0.8, 0.0, 2 / 3)


# ---------------------------------------------------------------------------
# counting statistics


def test_success_ratio_basic():
    ratio, sigma = success_ratio(250, 1000)
    assert ratio == pytest.approx(0.25)
    assert sigma > 0
    with pytest.raises(ValueError):
        success_ratio(10, 0)


def test_success_ratio_simulated_counts(rng):
    n = 10**5
    heralds = int(rng.binomial(n, 0.25))
    ratio, sigma = success_ratio(heralds, n)
    assert abs(ratio - 0.25) < 3 * sigma


def test_propagate_uncertainty_probability_inputs_have_zero_sigma():
    data = {
        "AB": fringe_scan(noon_state(0, 0).density(), (Mode.A, Mode.B),
                          default_thetas(8))
    }
    value, sigma = propagate_uncertainty(
        lambda d: float(d["AB"].p11().mean()), data, resamples=100, seed=0
    )
    assert sigma == 0.0


def test_propagate_uncertainty_deterministic():
    data = {
        "AB": sample_counts(
            fringe_scan(noon_state(0, 0).density(), (Mode.A, Mode.B),
                        default_thetas(8)),
            500,
            seed=2,
        )
    }
    fn = lambda d: float(np.nanmean(d["AB"].p11()))
    a = propagate_uncertainty(fn, data, resamples=150, seed=4)
    b = propagate_uncertainty(fn, data, resamples=150, seed=4)
    assert a == b
    with pytest.raises(ValueError):
        propagate_uncertainty(fn, data, resamples=50, seed=4)


def test_propagate_uncertainty_scaling_with_events():
    base = fringe_scan(noon_state(0, 0).density(), (Mode.A, Mode.B), default_thetas(8))
    fn = lambda d: float(np.nanmean(d["AB"].p11()))
    sigmas = []
    for n in (10**3, 10**4, 10**5):
        data = {"AB": sample_counts(base, n, seed=6)}
        _, sigma = propagate_uncertainty(fn, data, resamples=200, seed=6)
        sigmas.append(sigma)
    for s_small, s_big in zip(sigmas, sigmas[1:]):
        shrink = s_small / s_big
        assert math.sqrt(10) / 1.5 <= shrink <= math.sqrt(10) * 1.5
