"""Recovering hop velocity from tracked optical markers.

Each video frame yields marker detections in the apparatus frame; a planar
Procrustes fit against the body-frame marker layout gives the rover pose,
and straight-line fits to the post-separation positions give the hop
velocity components.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import DegenerateConfiguration, InsufficientSamples, NonmonotonicTime
from .model import HopResult


@dataclass(frozen=True)
class MarkerSet:
    markers: dict[Hashable, tuple[float, float]]

    def __post_init__(self):
        if len(self.markers) < 2:
            raise ValueError("a planar pose needs at least 2 markers")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Hashable, tuple[float, float]]]) -> MarkerSet:
        markers: dict = {}
        for marker_id, pos in pairs:
            if marker_id in markers:
                raise ValueError(f"duplicate marker id {marker_id!r}")
            markers[marker_id] = (float(pos[0]), float(pos[1]))
        return cls(markers)


@dataclass(frozen=True)
class Detection:
    marker_id: Hashable
    position: tuple[float, float]
    noise_sigma: float = 1.0


@dataclass(frozen=True)
class PoseObservation:
    time: float
    detections: tuple[Detection, ...]


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float]
    attitude: float  # rad
    residual_rms: float


def estimate_pose(markers: MarkerSet, obs: PoseObservation) -> Pose:
    """Rigid transform taking body-frame markers onto their detections.

    Detections are processed in a canonical id order so the result does not
    depend on how the observation lists them. Weights are inverse variances
    when the noise levels differ, uniform otherwise.
    """
    dets = sorted(obs.detections, key=lambda d: (str(type(d.marker_id)), str(d.marker_id)))
    for d in dets:
        if d.marker_id not in markers.markers:
            raise KeyError(f"detection of unknown marker {d.marker_id!r}")
    if len(dets) < 2:
        raise DegenerateConfiguration("need at least 2 detections")
    p = np.array([markers.markers[d.marker_id] for d in dets], dtype=float)
    q = np.array([d.position for d in dets], dtype=float)
    sigmas = np.array([d.noise_sigma for d in dets], dtype=float)
    if np.all(sigmas == sigmas[0]):
        w = np.ones(len(dets))
    else:
        w = 1.0 / sigmas**2
    w = w / w.sum()

    p_bar = w @ p
    q_bar = w @ q
    pc = p - p_bar
    qc = q - q_bar
    spread = w @ np.sum(pc * pc, axis=1)
    scale = max(1.0, float(np.max(np.abs(p))))
    if spread <= (1e-12 * scale) ** 2:
        raise DegenerateConfiguration("all detected markers coincide in the body frame")

    # the 2x2 cross-covariance reduces to a dot and a cross term
    cos_term = w @ (pc[:, 0] * qc[:, 0] + pc[:, 1] * qc[:, 1])
    sin_term = w @ (pc[:, 0] * qc[:, 1] - pc[:, 1] * qc[:, 0])
    theta = math.atan2(sin_term, cos_term)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    t = q_bar - rot @ p_bar
    resid = q - (p @ rot.T + t)
    rms = math.sqrt(float(np.mean(np.sum(resid * resid, axis=1))))
    return Pose((float(t[0]), float(t[1])), theta, rms)


def _line_fit(t: np.ndarray, xy: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares slopes of x(t), y(t) and the combined residual RMS."""
    tc = t - t.mean()
    denom = tc @ tc
    xy_bar = xy.mean(axis=0)
    slopes = (tc @ (xy - xy_bar)) / denom
    resid = xy - xy_bar - np.outer(tc, slopes)
    rms = math.sqrt(float(np.mean(np.sum(resid * resid, axis=1))))
    return slopes, rms


NOISE_TAIL = 10
MIN_FIT_SAMPLES = 3


def find_separation_index(t: np.ndarray, xy: np.ndarray) -> int:
    """Earliest index whose trailing straight-line fit is as clean as the tail.

    The noise floor is the residual RMS of a line through the last
    ``NOISE_TAIL`` samples; the segment is accepted when its RMS is below
    twice that floor.
    """
    n = len(t)
    tail = min(NOISE_TAIL, n)
    _, floor = _line_fit(t[-tail:], xy[-tail:])
    scale = 1.0 + float(np.max(np.abs(xy)))
    threshold = max(2.0 * floor, 1e-9 * scale)
    for i in range(0, n - MIN_FIT_SAMPLES + 1):
        _, rms = _line_fit(t[i:], xy[i:])
        if rms < threshold:
            return i
    return n - MIN_FIT_SAMPLES


def fit_hop_velocity(
    track: Sequence[tuple[float, tuple[float, float]]],
    separation_hint: Optional[float] = None,
) -> HopResult:
    """Hop speed and direction from a position track.

    Samples at or after ``separation_hint`` are fitted; without a hint the
    start of the straight segment is detected from the data.
    """
    if len(track) == 0:
        raise InsufficientSamples("empty track")
    t = np.array([row[0] for row in track], dtype=float)
    xy = np.array([row[1] for row in track], dtype=float).reshape(-1, 2)
    if np.any(np.diff(t) <= 0):
        bad = int(np.argmax(np.diff(t) <= 0)) + 1
        raise NonmonotonicTime(f"time does not increase at sample {bad}")
    if separation_hint is not None:
        keep = t >= separation_hint
        t, xy = t[keep], xy[keep]
    if len(t) < MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            f"need at least {MIN_FIT_SAMPLES} samples after separation, got {len(t)}"
        )
    if separation_hint is None:
        start = find_separation_index(t, xy)
        t, xy = t[start:], xy[start:]
    slopes, _ = _line_fit(t, xy)
    return HopResult.from_components(float(slopes[0]), float(slopes[1]), float(t[0]))


def read_track_csv(stream: TextIO) -> list[tuple[float, tuple[float, float]]]:
    """Parse ``t,x,y`` rows; extra columns such as a full trajectory export are ignored."""
    reader = csv.DictReader(stream)
    missing = {"t", "x", "y"} - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"track header lacks column(s) {sorted(missing)}")
    rows = []
    for row in reader:
        try:
            rows.append((float(row["t"]), (float(row["x"]), float(row["y"]))))
        except (TypeError, ValueError):
            raise ValueError(f"malformed track row {reader.line_num}") from None
    return rows


def read_markers_csv(stream: TextIO) -> MarkerSet:
    reader = csv.DictReader(stream)
    missing = {"id", "bx", "by"} - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"marker header lacks column(s) {sorted(missing)}")
    pairs = []
    for row in reader:
        try:
            pairs.append((row["id"], (float(row["bx"]), float(row["by"]))))
        except (TypeError, ValueError):
            raise ValueError(f"malformed marker row {reader.line_num}") from None
    return MarkerSet.from_pairs(pairs)


def read_detections_csv(stream: TextIO) -> list[PoseObservation]:
    """Per-frame detections as ``t,id,x,y`` with an optional ``sigma`` column."""
    reader = csv.DictReader(stream)
    missing = {"t", "id", "x", "y"} - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"detection header lacks column(s) {sorted(missing)}")
    frames: dict[float, list[Detection]] = {}
    for row in reader:
        try:
            t = float(row["t"])
            sigma = float(row["sigma"]) if row.get("sigma") not in (None, "") else 1.0
            det = Detection(row["id"], (float(row["x"]), float(row["y"])), sigma)
        except (TypeError, ValueError):
            raise ValueError(f"malformed detection row {reader.line_num}") from None
        frames.setdefault(t, []).append(det)
    return [PoseObservation(t, tuple(d)) for t, d in frames.items()]


def track_from_detections(markers: MarkerSet, observations: Iterable[PoseObservation]):
    return [(obs.time, estimate_pose(markers, obs).position) for obs in observations]
