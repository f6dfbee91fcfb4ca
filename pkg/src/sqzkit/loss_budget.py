"""Loss chains, loss (un)application and the three-tier measurement correction.

Quadrature variances are in shot-noise units (vacuum = 1).  A loss of power
transmission t maps a variance V to t V + (1 - t): it contracts every
variance toward shot noise, which is why the inverse map can turn
nonphysical when the assumed loss exceeds what the data allows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .opo_model import QuadraturePair


class NonphysicalCorrectionError(ValueError):
    """Undoing the assumed loss would push the variance at or below its floor."""


class SignalBelowDarkError(NonphysicalCorrectionError):
    """Measured variance does not clear the electronic dark-noise floor."""


def db_to_linear(value_db: float) -> float:
    """10^(dB/10)."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """10 log10(linear); rejects non-positive input."""
    if value <= 0:
        raise ValueError(f"linear value must be > 0 to convert to dB, got {value}")
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class LossStage:
    """One named loss with power transmission in (0, 1].

    Stages tagged `is_visibility` hold a mode-overlap visibility and enter
    chain products squared (overlap is a field quantity; its power efficiency
    is the square).
    """

    name: str
    transmission: float
    is_visibility: bool = False

    def __post_init__(self):
        if not 0 < self.transmission <= 1:
            raise ValueError(
                f"stage '{self.name}': transmission must be in (0, 1], "
                f"got {self.transmission}"
            )

    @property
    def power_efficiency(self) -> float:
        if self.is_visibility:
            return self.transmission**2
        return self.transmission


@dataclass(frozen=True)
class LossChain:
    """Ordered named loss stages, plus an optional dark-noise clearance.

    `dark_clearance_db` is how far the electronic noise sits below shot noise
    (positive dB); None means no dark-noise correction is applied.
    """

    stages: tuple[LossStage, ...]
    dark_clearance_db: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.dark_clearance_db is not None and self.dark_clearance_db < 0:
            raise ValueError("dark_clearance_db must be >= 0")


def chain_efficiency(chain: LossChain) -> float:
    """Product of stage power efficiencies (visibility stages squared)."""
    if not chain.stages:
        raise ValueError("chain_efficiency needs a non-empty chain")
    eff = 1.0
    for stage in chain.stages:
        eff *= stage.power_efficiency
    return eff


def apply_loss(variance: float, transmission: float) -> float:
    """Beam-splitter loss map t V + (1 - t); shot noise (V = 1) is its fixed point."""
    if variance <= 0:
        raise ValueError("variance must be > 0")
    if not 0 < transmission <= 1:
        raise ValueError(f"transmission must be in (0, 1], got {transmission}")
    return transmission * variance + (1.0 - transmission)


def unapply_loss(variance: float, transmission: float) -> float:
    """Exact inverse of apply_loss: (V - (1 - t)) / t.

    Requires V > 1 - t; anything at or below that floor means the assumed
    loss is inconsistent with the measurement.
    """
    if not 0 < transmission <= 1:
        raise ValueError(f"transmission must be in (0, 1], got {transmission}")
    floor = 1.0 - transmission
    if variance <= floor:
        raise NonphysicalCorrectionError(
            f"variance {variance:.6g} is at or below the loss floor "
            f"{floor:.6g} for transmission {transmission:.6g}"
        )
    return (variance - floor) / transmission


def dark_noise_correct(variance: float, clearance_db: float) -> float:
    """Subtract the electronic noise floor and renormalise to shot noise.

    The floor is V_dark = 10^(-clearance/10); the corrected variance is
    (V - V_dark) / (1 - V_dark) so that shot noise stays at 1.
    """
    if clearance_db < 0:
        raise ValueError("clearance_db must be >= 0")
    v_dark = 10.0 ** (-clearance_db / 10.0)
    if v_dark >= 1.0:
        raise ValueError("clearance of 0 dB leaves no signal above dark noise")
    if variance <= v_dark:
        raise SignalBelowDarkError(
            f"variance {variance:.6g} does not clear the dark floor {v_dark:.6g} "
            f"({clearance_db} dB below shot noise)"
        )
    return (variance - v_dark) / (1.0 - v_dark)


@dataclass(frozen=True)
class MeasurementRecord:
    """One measured squeezing point: dB values, homodyne visibility, context."""

    setup: str
    squeezing_db: float
    antisqueezing_db: float
    visibility: float
    sideband_frequency: float
    pump_power: float

    def __post_init__(self):
        if self.squeezing_db > 0:
            raise ValueError("squeezing_db must be <= 0 (below shot noise)")
        if self.antisqueezing_db < 0:
            raise ValueError("antisqueezing_db must be >= 0")
        if not 0 < self.visibility <= 1:
            raise ValueError("visibility must be in (0, 1]")
        if self.sideband_frequency < 0 or self.pump_power < 0:
            raise ValueError("sideband_frequency and pump_power must be >= 0")


@dataclass(frozen=True)
class CorrectionTiers:
    """The three correction tiers, innermost inference last.

    tier1: detection undone (dark noise, quantum efficiency, visibility^2,
           post-fiber optics)
    tier2: tier1 plus source losses undone (splice, crystal reflection);
           equals tier1 when the setup has no source losses
    tier3: tier2 plus the fiber-cavity coupling undone
    """

    tier1: QuadraturePair
    tier2: QuadraturePair
    tier3: QuadraturePair

    def rows_db(self):
        """(tier, squeezed dB, antisqueezed dB) rows, tiers 1..3."""
        return [
            (index + 1, pair.squeezed_db, pair.antisqueezed_db)
            for index, pair in enumerate((self.tier1, self.tier2, self.tier3))
        ]


def correction_pipeline(
    record: MeasurementRecord,
    detection_chain: LossChain,
    source_chain: LossChain | None,
    coupling_chain: LossChain | None,
) -> CorrectionTiers:
    """Undo the measured record's loss budget in three tiers.

    Dark noise is corrected first (order fixed: it reproduces the published
    corrections), then the detection chain is unapplied; the record's
    visibility joins the detection chain as a squared stage.  A None or
    empty source/coupling chain leaves that tier unchanged.  Nonphysical
    corrections raise with the tier and quadrature identified.
    """
    detection = LossChain(
        stages=detection_chain.stages
        + (LossStage("visibility", record.visibility, is_visibility=True),),
        dark_clearance_db=detection_chain.dark_clearance_db,
    )
    efficiencies = [
        chain_efficiency(detection),
        _optional_efficiency(source_chain),
        _optional_efficiency(coupling_chain),
    ]

    tiers = {}
    for quadrature, measured_db in (
        ("squeezed", record.squeezing_db),
        ("antisqueezed", record.antisqueezing_db),
    ):
        variance = db_to_linear(measured_db)
        try:
            if detection.dark_clearance_db is not None:
                variance = dark_noise_correct(variance, detection.dark_clearance_db)
        except SignalBelowDarkError as err:
            raise SignalBelowDarkError(
                f"{record.setup} {quadrature}: {err}"
            ) from err
        values = []
        for tier, efficiency in enumerate(efficiencies, start=1):
            try:
                variance = unapply_loss(variance, efficiency)
            except NonphysicalCorrectionError as err:
                raise NonphysicalCorrectionError(
                    f"{record.setup} {quadrature} tier {tier}: {err}"
                ) from err
            values.append(variance)
        tiers[quadrature] = values

    pairs = [
        QuadraturePair(tiers["squeezed"][k], tiers["antisqueezed"][k])
        for k in range(3)
    ]
    return CorrectionTiers(tier1=pairs[0], tier2=pairs[1], tier3=pairs[2])


def _optional_efficiency(chain: LossChain | None) -> float:
    if chain is None or not chain.stages:
        return 1.0
    return chain_efficiency(chain)
