"""Wave-plate/PBS/mirror matrices and circuit composition."""

import math

import numpy as np
import pytest

from noonforge import (
    Circuit,
    CircuitElement,
    Mode,
    ModeUnitary,
    REFERENCE_ANGLES,
    compose,
    embed,
    evolve,
    fock_basis,
    herald,
    hwp,
    mirror,
    pbs,
    PureState,
    qwp,
    sagnac_circuit,
    unitary_distance,
)
from noonforge.synth import fit_mirror_phase


def test_hwp_at_zero():
    assert np.allclose(hwp(0).matrix, -1j * np.diag([1, -1]), atol=1e-15)


def test_hwp_at_pi_over_8():
    expected = (-1j / np.sqrt(2)) * np.array([[1, 1], [1, -1]])
    assert np.allclose(hwp(np.pi / 8).matrix, expected, atol=1e-15)


def test_hwp_squares_to_minus_identity(rng):
    for theta in rng.uniform(0, 2 * np.pi, 20):
        m = hwp(theta).matrix
        assert np.allclose(m @ m, -np.eye(2), atol=1e-12)


def test_qwp_at_pi_over_4():
    expected = (1 / np.sqrt(2)) * np.array([[1, -1j], [-1j, 1]])
    assert np.allclose(qwp(np.pi / 4).matrix, expected, atol=1e-15)


def test_qwp_at_zero():
    expected = (1 / np.sqrt(2)) * np.diag([1 - 1j, 1 + 1j])
    assert np.allclose(qwp(0).matrix, expected, atol=1e-15)


def test_qwp_fourth_power_is_minus_identity(rng):
    for theta in rng.uniform(0, 2 * np.pi, 20):
        m = qwp(theta).matrix
        assert np.allclose(np.linalg.matrix_power(m, 4), -np.eye(2), atol=1e-12)


def test_pbs_routing():
    m = pbs().matrix
    # vertical in path 1 exits path 2 with an i phase; horizontal transmits
    v1 = np.zeros(4)
    v1[1] = 1
    assert np.allclose(m @ v1, [0, 0, 0, 1j], atol=1e-15)
    h1 = np.zeros(4)
    h1[0] = 1
    assert np.allclose(m @ h1, [1, 0, 0, 0], atol=1e-15)


def test_pbs_squared():
    m = pbs().matrix
    assert np.allclose(m @ m, np.diag([1, -1, 1, -1]), atol=1e-15)


def test_mirror_basics():
    assert np.allclose(mirror(0).matrix, np.eye(4), atol=1e-15)
    assert np.allclose(mirror(np.pi).matrix, np.diag([1, -1, 1, -1]), atol=1e-12)


def test_mirror_phases_add(rng):
    a, b = rng.uniform(0, 2 * np.pi, 2)
    assert np.allclose(
        mirror(a).matrix @ mirror(b).matrix, mirror(a + b).matrix, atol=1e-12
    )


def test_embed_identity_and_path2():
    assert np.allclose(embed(1, ModeUnitary(np.eye(2))).matrix, np.eye(4))
    assert np.allclose(embed(2, hwp(0)).matrix, np.diag([1, 1, -1j, 1j]), atol=1e-15)


def test_embed_blocks_commute(rng):
    for _ in range(10):
        v = qwp(rng.uniform(0, np.pi))
        w = hwp(rng.uniform(0, np.pi))
        a = embed(1, v).matrix
        b = embed(2, w).matrix
        assert np.allclose(a @ b, b @ a, atol=1e-14)


def test_embed_rejects_bad_path():
    with pytest.raises(ValueError):
        embed(3, hwp(0.0))


def test_element_matrices_are_unitary(rng):
    elements = [
        CircuitElement("hwp", path=1, angle=rng.uniform(0, np.pi)),
        CircuitElement("qwp", path=2, angle=rng.uniform(0, np.pi)),
        CircuitElement("pbs"),
        CircuitElement("mirror", phase=rng.uniform(0, 2 * np.pi)),
    ]
    for e in elements:
        m = e.matrix().matrix
        assert np.max(np.abs(m.conj().T @ m - np.eye(4))) < 1e-12


def test_element_validation():
    with pytest.raises(ValueError):
        CircuitElement("hwp", angle=0.1)  # missing path
    with pytest.raises(ValueError):
        CircuitElement("hwp", path=1)  # missing angle
    with pytest.raises(ValueError):
        CircuitElement("lens")


def test_compose_empty_is_identity():
    assert np.allclose(compose(Circuit(())).matrix, np.eye(4))


def test_compose_two_pbs():
    c = Circuit((CircuitElement("pbs"), CircuitElement("pbs")))
    assert np.allclose(compose(c).matrix, np.diag([1, -1, 1, -1]), atol=1e-15)


def test_compose_distributes(rng):
    c1 = sagnac_circuit(0.2, 1.4, 0.5, 2.2, 0.3)
    c2 = Circuit((CircuitElement("pbs"), CircuitElement("mirror", phase=1.1)))
    joined = Circuit(c1.elements + c2.elements)
    assert np.allclose(
        compose(joined).matrix,
        compose(c2).matrix @ compose(c1).matrix,
        atol=1e-12,
    )


def test_unitary_distance_properties(rng):
    # the sqrt form turns machine-epsilon trace error into ~1e-8
    u = qwp(0.3)
    assert unitary_distance(u, u) == pytest.approx(0.0, abs=1e-7)
    for chi in rng.uniform(0, 2 * np.pi, 5):
        v = ModeUnitary(np.exp(1j * chi) * u.matrix)
        assert unitary_distance(u, v) == pytest.approx(0.0, abs=1e-7)
    d = unitary_distance(ModeUnitary(np.eye(2)), ModeUnitary(np.diag([1, -1])))
    assert d == pytest.approx(1.0, abs=1e-12)


def test_unitary_distance_dim_mismatch():
    with pytest.raises(ValueError):
        unitary_distance(qwp(0.1), pbs())


def test_circuit_json_round_trip():
    c = sagnac_circuit(0.3927, 2.66, 0.0, 2.356, 1.0)
    d = c.to_dict()
    assert d["elements"][0] == {"kind": "hwp", "path": 1, "angle_rad": 0.3927}
    assert d["elements"][1] == {"kind": "pbs"}
    assert d["elements"][3] == {"kind": "mirror", "phase_rad": 1.0}
    back = Circuit.from_dict(d)
    assert back == c


def test_reference_circuit_heralds_noon_state():
    # there is a mirror phase making the fixed-angle circuit a perfect
    # heralded NOON source at success probability 1/4
    phi, fid, prob = fit_mirror_phase(
        REFERENCE_ANGLES["hwp1"],
        REFERENCE_ANGLES["hwp2"],
        REFERENCE_ANGLES["hwp3"],
        REFERENCE_ANGLES["qwp1"],
    )
    assert fid >= 1 - 1e-9
    assert prob == pytest.approx(0.25, abs=1e-9)


def test_rounded_angle_circuit_heralds_noon_state():
    # three-digit rounding of the second HWP angle still lands within 1e-6
    phi, fid, prob = fit_mirror_phase(hwp2=0.848 * math.pi)
    u = compose(sagnac_circuit(
        REFERENCE_ANGLES["hwp1"], 0.848 * math.pi, REFERENCE_ANGLES["hwp3"],
        REFERENCE_ANGLES["qwp1"], phi,
    ))
    b34 = fock_basis(3, 4)
    amps = np.zeros(len(b34), dtype=complex)
    amps[b34.index((1, 1, 1, 0))] = 1.0
    outcome = herald(evolve(PureState(b34, amps), u), Mode.HERALD, 1)
    assert outcome.probability == pytest.approx(0.25, abs=1e-6)
    assert fid >= 1 - 1e-6
