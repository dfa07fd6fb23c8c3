"""Sun direction from intensity-only photo detectors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import InsufficientIllumination

# one detector per face of the body: +x, -x, +y, -y, +z, -z
DEFAULT_NORMALS = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
)

ILLUMINATION_THRESHOLD = 1e-9  # fraction of the brightest output


@dataclass(frozen=True)
class SunObservation:
    time: float
    detector_outputs: tuple[float, ...]
    derived_direction: Optional[tuple[float, ...]] = None


def detector_outputs(sun: Sequence[float], normals: np.ndarray = DEFAULT_NORMALS, intensity: float = 1.0) -> np.ndarray:
    """Cosine-law response of each detector to a sun direction."""
    s = np.asarray(sun, dtype=float)
    s = s / np.linalg.norm(s)
    return intensity * np.maximum(0.0, normals @ s)


def sun_direction(outputs: Sequence[float], normals: np.ndarray = DEFAULT_NORMALS) -> np.ndarray:
    """Unit sun vector in the body frame.

    Lit detectors give equations ``n_i . u = output_i`` for ``u = I s``.
    A dark detector facing away from a dark antiparallel partner pins the
    component along that axis to zero, so with face-mounted sensors a
    single lit face is enough; otherwise the lit normals must span the
    space.
    """
    out = np.asarray(outputs, dtype=float)
    normals = np.asarray(normals, dtype=float)
    if out.shape[0] != normals.shape[0]:
        raise ValueError("one output per detector normal is required")
    if np.any(out < 0):
        raise ValueError("detector outputs must be nonnegative")
    peak = out.max(initial=0.0)
    if peak <= 0.0:
        raise InsufficientIllumination("no detector is illuminated")
    lit = out > ILLUMINATION_THRESHOLD * peak
    rows = [normals[i] for i in np.flatnonzero(lit)]
    rhs = [out[i] for i in np.flatnonzero(lit)]
    weights = [out[i] / peak for i in np.flatnonzero(lit)]
    dark = np.flatnonzero(~lit)
    for a in dark:
        for b in dark:
            if a < b and np.dot(normals[a], normals[b]) < -1.0 + 1e-12:
                rows.append(normals[a])
                rhs.append(0.0)
                weights.append(1.0)
    a_mat = np.array(rows)
    dim = normals.shape[1]
    if np.linalg.matrix_rank(a_mat, tol=1e-9) < dim:
        raise InsufficientIllumination(
            f"{int(lit.sum())} lit detector(s) do not determine the sun direction"
        )
    sw = np.sqrt(np.array(weights))
    u, *_ = np.linalg.lstsq(a_mat * sw[:, None], np.array(rhs) * sw, rcond=None)
    return u / np.linalg.norm(u)


def observe(time: float, outputs: Sequence[float], normals: np.ndarray = DEFAULT_NORMALS) -> SunObservation:
    try:
        direction = tuple(float(v) for v in sun_direction(outputs, normals))
    except InsufficientIllumination:
        direction = None
    return SunObservation(time, tuple(float(v) for v in outputs), direction)
