"""Position and attitude on a spinning spherical asteroid from twilight timing,
sun sightings and the gravity direction.

The asteroid-fixed frame has z along the spin axis and its prime meridian
facing the sun at clock time zero. Longitude is positive eastward, i.e. in
the sense of rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ParallelObservations, PolarDegenerate
from .sun import SunObservation, sun_direction

MIN_SIGHTING_SEPARATION = 1e-3  # rad


@dataclass(frozen=True)
class Asteroid:
    rotation_period: float  # s
    spin_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    sun_direction_inertial: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.rotation_period > 0:
            raise ValueError("rotation_period must be positive")
        k = _unit(self.spin_axis)
        s = _unit(self.sun_direction_inertial)
        if abs(abs(float(k @ s)) - 1.0) < 1e-12:
            raise ValueError("sun along the spin axis leaves the prime meridian undefined")

    @property
    def spin_rate(self) -> float:
        return 2.0 * math.pi / self.rotation_period

    @property
    def declination(self) -> float:
        """Solar declination in radians."""
        k = _unit(self.spin_axis)
        s = _unit(self.sun_direction_inertial)
        return math.asin(max(-1.0, min(1.0, float(k @ s))))

    def sun_fixed(self, t: float) -> np.ndarray:
        """Sun direction in the asteroid-fixed frame at clock time ``t``."""
        d = self.declination
        a = self.spin_rate * t
        return np.array([math.cos(d) * math.cos(a), -math.cos(d) * math.sin(a), math.sin(d)])


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def local_frame(latitude: float, longitude: float) -> np.ndarray:
    """Rows are east, north, up in asteroid-fixed coordinates (angles in radians)."""
    cp, sp = math.cos(latitude), math.sin(latitude)
    cl, sl = math.cos(longitude), math.sin(longitude)
    return np.array(
        [
            [-sl, cl, 0.0],
            [-sp * cl, -sp * sl, cp],
            [cp * cl, cp * sl, sp],
        ]
    )


def wahba(reference: Sequence[np.ndarray], observed: Sequence[np.ndarray], weights=None) -> np.ndarray:
    """Rotation ``A`` minimising sum of w * |ref - A obs|^2 (SVD solution)."""
    if weights is None:
        weights = [1.0] * len(reference)
    b = sum(w * np.outer(r, o) for w, r, o in zip(weights, reference, observed))
    u, _, vt = np.linalg.svd(b)
    d = np.sign(np.linalg.det(u) * np.linalg.det(vt)) or 1.0
    return u @ np.diag([1.0, 1.0, d]) @ vt


@dataclass(frozen=True)
class Localization:
    latitude: float  # deg
    longitude: float  # deg
    attitude: np.ndarray  # body -> local east/north/up


def _direction(obs: SunObservation) -> np.ndarray:
    if obs.derived_direction is not None:
        return _unit(obs.derived_direction)
    return sun_direction(obs.detector_outputs)


def twilight_geometry(sunrise: float, sunset: float, period: float) -> tuple[float, float]:
    """Daylight fraction and local-noon clock time.

    ``sunrise`` may precede ``sunset`` (one daytime) or follow it (the night
    between an evening and the next morning).
    """
    if sunrise < sunset:
        day = sunset - sunrise
        noon = 0.5 * (sunrise + sunset)
    else:
        night = sunrise - sunset
        day = period - night
        noon = 0.5 * (sunrise + sunset) - 0.5 * period
    return day / period, noon


def localize(
    sun_obs_evening: Sequence[SunObservation],
    sun_obs_morning: Sequence[SunObservation],
    gravity_dir_body: Sequence[float],
    sunrise: float,
    sunset: float,
    asteroid: Asteroid,
) -> Localization:
    fraction, noon = twilight_geometry(sunrise, sunset, asteroid.rotation_period)
    if not 0.0 < fraction < 1.0:
        raise PolarDegenerate(f"daylight fraction {fraction:g} leaves local noon undefined")
    longitude = -asteroid.spin_rate * noon
    longitude = math.atan2(math.sin(longitude), math.cos(longitude))

    sightings = list(sun_obs_evening) + list(sun_obs_morning)
    body_suns = [_direction(o) for o in sightings]
    fixed_suns = [asteroid.sun_fixed(o.time) for o in sightings]
    widest = max(
        math.acos(max(-1.0, min(1.0, float(a @ b)))) for i, a in enumerate(body_suns) for b in body_suns[i + 1 :]
    )
    if widest < MIN_SIGHTING_SEPARATION:
        raise ParallelObservations("sun sightings are too close together to fix the attitude")

    up_body = -_unit(gravity_dir_body)
    tan_dec = math.tan(asteroid.declination)
    if abs(tan_dec) > 1e-9:
        latitude = math.atan(-math.cos(math.pi * fraction) / tan_dec)
    else:
        # every site sees equal day and night; take the vertical from the sun fix
        body_to_fixed = wahba(fixed_suns, body_suns)
        latitude = math.asin(max(-1.0, min(1.0, float((body_to_fixed @ up_body)[2]))))

    enu = local_frame(latitude, longitude)
    body_to_fixed = wahba(fixed_suns + [enu[2]], body_suns + [up_body])
    return Localization(math.degrees(latitude), math.degrees(longitude), enu @ body_to_fixed)
