"""noonforge: heralded multi-mode photonic NOON-state generation toolkit.

Evolves multi-photon Fock states through 4-mode linear-optical circuits,
synthesizes unitaries that herald a three-mode two-photon NOON state,
simulates and fits the coherence-extraction interference fringes, and
computes fidelity estimates, coherence-only fidelity bounds and
genuine-multipartite-entanglement thresholds.
"""

from .analysis import (
    BoundsReport,
    CoherenceSet,
    EmptyFeasibleRegionError,
    FidelityEstimate,
    GmeReport,
    PopulationSet,
    certify_gme,
    feasible_interval,
    fidelity_bounds,
    fidelity_from_measurements,
    fit_fringe,
    gme_threshold,
    max_fidelity_over_phases,
    propagate_uncertainty,
    success_ratio,
)
from .elements import (
    REFERENCE_ANGLES,
    Circuit,
    CircuitElement,
    compose,
    embed,
    hwp,
    mirror,
    pbs,
    qwp,
    sagnac_circuit,
    unitary_distance,
)
from .fock import (
    DensityMatrix,
    FockBasis,
    HeraldOutcome,
    Mode,
    ModeUnitary,
    PureState,
    evolve,
    evolve_density,
    fidelity,
    fock_basis,
    herald,
    lift_unitary,
    noon_state,
    permanent,
)
from .measurement import (
    FringeData,
    FringeParams,
    NoiseModel,
    TwoModeState,
    apply_noise,
    coincidence_prob,
    default_thetas,
    fringe_params_from_rho,
    fringe_scan,
    meas_unitary,
    pnr_normalized_probability,
    pnr_split_model,
    sample_counts,
    vacuum_project,
)
from .synth import (
    SynthConfig,
    SynthResult,
    fit_circuit_angles,
    fit_mirror_phase,
    heralded_objective,
    heralding_unitary,
    parameterize,
    synthesize,
)

__version__ = "0.1.0"
