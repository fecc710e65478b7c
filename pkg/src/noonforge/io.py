"""File formats: JSON for structured results, CSV for per-point series.

All angles are stored in radians.  Every structured output embeds the
configuration that produced it so a run can be reproduced byte-for-byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .elements import Circuit
from .fock import DensityMatrix, Mode, ModeUnitary, PureState
from .measurement import FringeData

PAIR_NAMES = {"AB": (Mode.A, Mode.B), "AC": (Mode.A, Mode.C), "BC": (Mode.B, Mode.C)}


def pair_name(pair: tuple[Mode, Mode]) -> str:
    return "".join(Mode(m).name for m in pair)


def write_json(path: str | Path, payload: dict) -> None:
    """Deterministic JSON: sorted keys, fixed layout, trailing newline."""
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)
    Path(path).write_text(text + "\n")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def save_state(path: str | Path, state: PureState | DensityMatrix) -> None:
    write_json(path, state.to_dict())


def load_state(path: str | Path) -> PureState | DensityMatrix:
    d = read_json(path)
    if "amplitudes" in d:
        return PureState.from_dict(d)
    return DensityMatrix.from_dict(d)


def save_unitary(path: str | Path, unitary: ModeUnitary) -> None:
    write_json(path, unitary.to_dict())


def load_unitary(path: str | Path) -> ModeUnitary:
    return ModeUnitary.from_dict(read_json(path))


def save_circuit(path: str | Path, circuit: Circuit) -> None:
    write_json(path, circuit.to_dict())


def load_circuit(path: str | Path) -> Circuit:
    return Circuit.from_dict(read_json(path))


def write_fringe_csv(path: str | Path, data: FringeData) -> None:
    """Fringe series CSV: `theta_rad,c11,c20,c02` in count mode or
    `theta_rad,p11` in probability mode, plus a JSON metadata sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if data.is_count_mode:
            writer.writerow(["theta_rad", "c11", "c20", "c02"])
            for theta, row in zip(data.thetas, data.counts):
                writer.writerow([repr(float(theta)), int(row[0]), int(row[1]), int(row[2])])
        else:
            writer.writerow(["theta_rad", "p11"])
            for theta, row in zip(data.thetas, data.probs):
                writer.writerow([repr(float(theta)), repr(float(row[0]))])
    sidecar = {"pair": pair_name(data.pair)}
    sidecar.update(data.meta)
    write_json(sidecar_path(path), sidecar)


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_suffix(path.suffix + ".meta.json")


def read_fringe_csv(path: str | Path) -> FringeData:
    path = Path(path)
    meta: dict = {}
    side = sidecar_path(path)
    if side.exists():
        meta = read_json(side)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    thetas = np.array([float(r[0]) for r in rows])
    name = meta.get("pair", "AB")
    pair = PAIR_NAMES.get(name, (Mode.A, Mode.B))
    if header[1:] == ["c11", "c20", "c02"]:
        counts = np.array([[int(r[1]), int(r[2]), int(r[3])] for r in rows], dtype=np.int64)
        return FringeData(pair=pair, thetas=thetas, counts=counts, meta=meta)
    if header[1:] == ["p11"]:
        probs = np.zeros((len(rows), 3))
        probs[:, 0] = [float(r[1]) for r in rows]
        # only the coincidence column is stored; put the rest in one bucket
        probs[:, 1] = 1.0 - probs[:, 0]
        return FringeData(pair=pair, thetas=thetas, probs=probs, meta=meta)
    raise ValueError(f"unrecognized fringe CSV header: {header}")


def write_curve_csv(
    path: str | Path,
    thetas: np.ndarray,
    measured: np.ndarray,
    fitted: np.ndarray,
) -> None:
    """Plot-ready series of measured and fitted fringe values."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_rad", "measured", "fitted"])
        for t, m, f in zip(thetas, measured, fitted):
            writer.writerow([repr(float(t)), repr(float(m)), repr(float(f))])
