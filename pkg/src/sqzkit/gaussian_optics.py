"""Paraxial Gaussian-beam propagation and hemispherical-cavity mode geometry.

All lengths are in meters.  A beam is a TEM00 mode described by its 1/e^2
intensity waist radius w0, its vacuum wavelength and the refractive index of
the medium it propagates in.  Cavities are plano-concave: the waist sits on
the flat mirror (a fiber end face or a crystal surface) and a concave mirror
of curvature radius Rc closes the resonator at distance d, with 0 < d < Rc
required for a confined mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

# Default index of the nonlinear crystal at 1064 nm (z-cut KTP); configurable
# on any beam that propagates inside the crystal.
KTP_INDEX_1064NM = 1.83


class StabilityError(ValueError):
    """Cavity geometry does not support a confined eigenmode."""


class NoSolutionError(ValueError):
    """Requested mode geometry cannot be realised with the given mirror."""


@dataclass(frozen=True)
class GaussianBeam:
    """TEM00 beam.

    Attributes:
        waist_radius: 1/e^2 intensity radius w0 at the waist [m]
        wavelength: vacuum wavelength [m]
        refractive_index: index of the propagation medium, >= 1
        waist_position: axial location of the waist [m]
    """

    waist_radius: float
    wavelength: float
    refractive_index: float = 1.0
    waist_position: float = 0.0

    def __post_init__(self):
        if self.waist_radius <= 0:
            raise ValueError(f"waist_radius must be > 0, got {self.waist_radius}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        if self.refractive_index < 1:
            raise ValueError(
                f"refractive_index must be >= 1, got {self.refractive_index}"
            )


@dataclass(frozen=True)
class CavityGeometry:
    """Plano-concave resonator.

    Attributes:
        mirror_curvature: radius of curvature Rc of the concave mirror,
            positive [m]
        cavity_length: flat-to-curved mirror distance d [m]
        coupler_transmission: power transmission of the output coupler,
            in (0, 1]
        round_trip_loss: residual power loss per round trip, in [0, 1)
        round_trip_length: optical round-trip length [m]; defaults to
            2 * cavity_length when not given
    """

    mirror_curvature: float
    cavity_length: float
    coupler_transmission: float = 1.0
    round_trip_loss: float = 0.0
    round_trip_length: float | None = None

    def __post_init__(self):
        if self.mirror_curvature <= 0:
            raise ValueError("mirror_curvature must be > 0")
        if self.cavity_length <= 0:
            raise ValueError("cavity_length must be > 0")
        if not 0 < self.coupler_transmission <= 1:
            raise ValueError("coupler_transmission must be in (0, 1]")
        if not 0 <= self.round_trip_loss < 1:
            raise ValueError("round_trip_loss must be in [0, 1)")
        if self.coupler_transmission + self.round_trip_loss > 1:
            raise ValueError("coupler_transmission + round_trip_loss must be <= 1")
        if self.round_trip_length is not None and self.round_trip_length <= 0:
            raise ValueError("round_trip_length must be > 0")

    @property
    def round_trip(self) -> float:
        """Round-trip length used for bandwidth estimates [m]."""
        if self.round_trip_length is not None:
            return self.round_trip_length
        return 2.0 * self.cavity_length


def rayleigh_range(beam: GaussianBeam) -> float:
    """Rayleigh range z_R = pi w0^2 n / lambda [m]."""
    return math.pi * beam.waist_radius**2 * beam.refractive_index / beam.wavelength


def confocal_crystal_length(beam: GaussianBeam) -> float:
    """Useful nonlinear interaction length, the confocal parameter b = 2 z_R [m].

    The beam should carry the crystal's refractive index (KTP_INDEX_1064NM by
    default in scenario parsing).  This is the axial window over which the
    mode stays within sqrt(2) of its waist size.
    """
    return 2.0 * rayleigh_range(beam)


def hemispherical_waist(cavity: CavityGeometry, wavelength: float) -> float:
    """Waist radius of the cavity eigenmode at the flat mirror [m].

    Matching the wavefront curvature at the concave mirror gives
    z_R^2 = d (Rc - d), hence w0^2 = (lambda / pi) sqrt(d (Rc - d)).
    Raises StabilityError when d >= Rc (no confined mode).
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    d = cavity.cavity_length
    rc = cavity.mirror_curvature
    if d >= rc:
        raise StabilityError(
            f"cavity_length {d} m >= mirror_curvature {rc} m: "
            "plano-concave cavity is unstable"
        )
    return math.sqrt((wavelength / math.pi) * math.sqrt(d * (rc - d)))


class CavityLengths(NamedTuple):
    """Both cavity lengths producing a requested waist.

    `hemispherical` is the near-hemispherical root (the primary one for this
    geometry, closest to the mirror curvature radius); `planar` is the
    near-planar root of the same quadratic.
    """

    hemispherical: float
    planar: float


def cavity_length_for_waist(
    target_waist: float, mirror_curvature: float, wavelength: float
) -> CavityLengths:
    """Invert hemispherical_waist: cavity lengths giving the target waist.

    Solves z_R^2 = d (Rc - d) with z_R = pi w0^2 / lambda.  Raises
    NoSolutionError when the waist is too large for the mirror, i.e. when
    z_R > Rc / 2.
    """
    if target_waist <= 0 or mirror_curvature <= 0 or wavelength <= 0:
        raise ValueError("target_waist, mirror_curvature and wavelength must be > 0")
    z_r = math.pi * target_waist**2 / wavelength
    disc = mirror_curvature**2 - 4.0 * z_r**2
    if disc < 0:
        raise NoSolutionError(
            f"waist {target_waist} m needs z_R = {z_r:.4g} m > Rc/2 = "
            f"{mirror_curvature / 2:.4g} m: no cavity length exists for this mirror"
        )
    root = math.sqrt(disc)
    return CavityLengths(
        hemispherical=0.5 * (mirror_curvature + root),
        planar=0.5 * (mirror_curvature - root),
    )


def beam_radius_at(beam: GaussianBeam, z: float) -> float:
    """Beam radius w(z) = w0 sqrt(1 + ((z - z_waist)/z_R)^2) [m]."""
    rel = (z - beam.waist_position) / rayleigh_range(beam)
    return beam.waist_radius * math.sqrt(1.0 + rel * rel)


def paraxial_figure_of_merit(cavity: CavityGeometry, beam: GaussianBeam) -> float:
    """Spot size on the curved mirror divided by its curvature radius.

    Dimensionless proxy for how well the spherical mirror approximates the
    mode's phase front; larger values mean the paraxial description (and the
    spherical surface) fit the mode less well.
    """
    return beam_radius_at(beam, cavity.cavity_length) / cavity.mirror_curvature


def gaussian_overlap(
    beam_a: GaussianBeam,
    beam_b: GaussianBeam,
    curvature_a: float = math.inf,
    curvature_b: float = math.inf,
    discount: float = 1.0,
) -> float:
    """Power coupling between two co-axial TEM00 modes at a common plane.

    `beam_a.waist_radius` and `beam_b.waist_radius` are the spot sizes at the
    plane; `curvature_a/b` the phase-front curvature radii there (inf = flat).
    For flat fronts this is the familiar (2 w_a w_b / (w_a^2 + w_b^2))^2; with
    curvature the mismatch term (pi w_a w_b / lambda)^2 (1/R_a - 1/R_b)^2
    enters the denominator.  `discount` is an optional scalar in (0, 1]
    representing non-Gaussian mode content of a real fiber mode.
    """
    if abs(beam_a.wavelength - beam_b.wavelength) > 1e-9 * beam_a.wavelength:
        raise ValueError("overlap requires both beams at the same wavelength")
    if curvature_a == 0 or curvature_b == 0:
        raise ValueError("phase-front curvature radius cannot be zero")
    if not 0 < discount <= 1:
        raise ValueError("discount must be in (0, 1]")
    w_a, w_b = beam_a.waist_radius, beam_b.waist_radius
    inv_a = 0.0 if math.isinf(curvature_a) else 1.0 / curvature_a
    inv_b = 0.0 if math.isinf(curvature_b) else 1.0 / curvature_b
    size_term = (w_a / w_b + w_b / w_a) ** 2
    phase_term = (math.pi * w_a * w_b / beam_a.wavelength) ** 2 * (inv_a - inv_b) ** 2
    return discount * 4.0 / (size_term + phase_term)
