"""Wave-plate, PBS and mirror matrices in the hybrid path-polarization basis.

The 4-mode basis order is (H,1), (V,1), (H,2), (V,2).  Wave plates act on the
polarization pair of a single spatial path and embed block-diagonally; the
PBS transmits H and routes V across paths with an i phase; mirrors add a
polarization-dependent phase on both paths.  Circuits compose right-to-left
in application order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import ModeUnitary

KINDS = ("hwp", "qwp", "pbs", "mirror")


@dataclass(frozen=True)
class CircuitElement:
    """One optical element: wave plates carry a path and an angle, the
    mirror a phase; the PBS has no parameters."""

    kind: str
    path: int | None = None
    angle: float | None = None
    phase: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.kind in ("hwp", "qwp"):
            if self.path not in (1, 2):
                raise ValueError(f"{self.kind} requires path 1 or 2, got {self.path}")
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle")
        elif self.kind == "mirror":
            if self.phase is None:
                raise ValueError("mirror requires a phase")

    def matrix(self) -> ModeUnitary:
        if self.kind == "hwp":
            return embed(self.path, hwp(self.angle))
        if self.kind == "qwp":
            return embed(self.path, qwp(self.angle))
        if self.kind == "pbs":
            return pbs()
        return mirror(self.phase)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind in ("hwp", "qwp"):
            d["path"] = self.path
            d["angle_rad"] = float(self.angle)
        elif self.kind == "mirror":
            d["phase_rad"] = float(self.phase)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitElement":
        return cls(
            kind=d["kind"],
            path=d.get("path"),
            angle=d.get("angle_rad"),
            phase=d.get("phase_rad"),
        )


@dataclass(frozen=True)
class Circuit:
    """Ordered sequence of elements; the first element is applied first."""

    elements: tuple[CircuitElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def to_dict(self) -> dict:
        return {"elements": [e.to_dict() for e in self.elements]}

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        return cls(tuple(CircuitElement.from_dict(e) for e in d["elements"]))


def hwp(theta: float) -> ModeUnitary:
    """Half-wave plate at angle theta: -i [[cos 2t, sin 2t], [sin 2t, -cos 2t]]."""
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return ModeUnitary(-1j * np.array([[c, s], [s, -c]], dtype=complex))


def qwp(theta: float) -> ModeUnitary:
    """Quarter-wave plate at angle theta:
    (1/sqrt 2) [[1 - i cos 2t, -i sin 2t], [-i sin 2t, 1 + i cos 2t]]."""
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    m = np.array([[1 - 1j * c, -1j * s], [-1j * s, 1 + 1j * c]], dtype=complex)
    return ModeUnitary(m / math.sqrt(2))


def pbs() -> ModeUnitary:
    """Polarizing beam splitter: H transmitted, V routed across paths with
    an i phase."""
    return ModeUnitary(
        np.array(
            [
                [1, 0, 0, 0],
                [0, 0, 0, 1j],
                [0, 0, 1, 0],
                [0, 1j, 0, 0],
            ],
            dtype=complex,
        )
    )


def mirror(phi: float) -> ModeUnitary:
    """Mirror phase between H and V, on both paths: diag(1, e^{i phi}, 1, e^{i phi})."""
    p = np.exp(1j * phi)
    return ModeUnitary(np.diag([1.0, p, 1.0, p]).astype(complex))


def embed(path: int, v: ModeUnitary) -> ModeUnitary:
    """Embed a 2x2 polarization transformation on one spatial path of the
    4-mode space, identity on the other path."""
    if path not in (1, 2):
        raise ValueError(f"path must be 1 or 2, got {path}")
    if v.dim != 2:
        raise ValueError(f"embed expects a 2x2 unitary, got dim {v.dim}")
    m = np.eye(4, dtype=complex)
    block = slice(0, 2) if path == 1 else slice(2, 4)
    m[block, block] = v.matrix
    return ModeUnitary(m)


def compose(circuit: Circuit) -> ModeUnitary:
    """Total unitary of a circuit: right-to-left matrix product in
    application order.  The empty circuit composes to the identity."""
    u = np.eye(4, dtype=complex)
    for element in circuit.elements:
        u = element.matrix().matrix @ u
    return ModeUnitary(u)


def unitary_distance(u: ModeUnitary, v: ModeUnitary) -> float:
    """Global-phase-invariant distance sqrt(1 - |tr(U^dag V)| / n), in [0, 1]."""
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    overlap = abs(np.trace(u.matrix.conj().T @ v.matrix)) / u.dim
    return math.sqrt(max(0.0, 1.0 - overlap))


def sagnac_circuit(
    hwp1: float, hwp2: float, hwp3: float, qwp1: float, mirror_phase: float
) -> Circuit:
    """Displaced-Sagnac heralding circuit with the fixed element topology.

    Application order: HWP1 on path 1, PBS, HWP2 on path 2, two mirrors,
    HWP3 on path 1, mirror, PBS, QWP1 on path 2.  All three mirrors carry
    the same polarization-dependent phase.
    """
    return Circuit(
        (
            CircuitElement("hwp", path=1, angle=hwp1),
            CircuitElement("pbs"),
            CircuitElement("hwp", path=2, angle=hwp2),
            CircuitElement("mirror", phase=mirror_phase),
            CircuitElement("mirror", phase=mirror_phase),
            CircuitElement("hwp", path=1, angle=hwp3),
            CircuitElement("mirror", phase=mirror_phase),
            CircuitElement("pbs"),
            CircuitElement("qwp", path=2, angle=qwp1),
        )
    )


# Wave-plate angles of the reference realization; HWP2 sits at
# pi - arctan(sqrt 2)/2 (printed elsewhere to three digits as 0.848 pi).
REFERENCE_ANGLES = {
    "hwp1": math.pi / 8,
    "hwp2": math.pi - math.atan(math.sqrt(2)) / 2,
    "hwp3": 0.0,
    "qwp1": 3 * math.pi / 4,
}
