"""Built-in reference dataset: the published fiber-squeezer measurements.

The "paper-2017-fiber-opo" dataset bundles the measured squeezing records of
the three fiber front ends (standard single-mode SF, photonic-crystal PCF,
tapered TF), their loss chains, the published corrected values per tier, the
worked spectrum example and the squeezing-vs-power fit parameters.  It feeds
the reproduce-paper command; user scenarios can supply their own chains.
"""

from __future__ import annotations

from dataclasses import dataclass

from .loss_budget import LossChain, LossStage, MeasurementRecord
from .opo_model import OpoParams

DATASET_NAME = "paper-2017-fiber-opo"


@dataclass(frozen=True)
class SetupData:
    """One fiber front end: its record, chains and published corrections."""

    record: MeasurementRecord
    source_chain: LossChain
    coupling_chain: LossChain
    # ((sq, asq) dB for tiers 1..3); tier 2 repeats tier 1 when no source loss
    published_tiers_db: tuple
    measured_mode_matching: float  # fraction, from cavity-peak areas
    cavity_waist: float  # m


@dataclass(frozen=True)
class ForwardFitPoint:
    """Squeezing-vs-power fit parameters and one measured squeezed point."""

    setup: str
    threshold_power: float  # W
    pump_power: float  # W
    measured_squeezing_db: float


@dataclass(frozen=True)
class ReferenceDataset:
    name: str
    detection_chain: LossChain
    setups: tuple
    worked_example: OpoParams
    worked_example_pump_power: float  # W
    worked_example_reference_db: tuple  # (sq, asq) as published
    fit_effective_efficiency: float
    fit_bandwidth: float  # Hz
    fit_sideband_frequency: float  # Hz
    forward_fit_points: tuple
    mirror_curvature: float  # m
    wavelength: float  # m
    crystal_index: float

    def setup(self, name: str) -> SetupData:
        for entry in self.setups:
            if entry.record.setup == name:
                return entry
        raise KeyError(f"no setup named {name!r}")


def _chain(*stages: tuple) -> LossChain:
    return LossChain(tuple(LossStage(name, value) for name, value in stages))


_DETECTION = LossChain(
    stages=(
        LossStage("quantum_efficiency", 0.92),
        LossStage("fiber_exit", 0.96),
        LossStage("homodyne_optics", 0.98),
    ),
    dark_clearance_db=8.0,
)

_SETUPS = (
    SetupData(
        record=MeasurementRecord(
            setup="SF",
            squeezing_db=-0.56,
            antisqueezing_db=1.05,
            visibility=0.96,
            sideband_frequency=3e6,
            pump_power=0.070,
        ),
        # crystal reflection measured at 0 +/- 2 %: tier 2 equals tier 1
        source_chain=_chain(("crystal_reflection", 1.00)),
        coupling_chain=_chain(("cavity_coupling", 0.60)),
        published_tiers_db=((-0.85, 1.5), (-0.85, 1.5), (-1.6, 2.25)),
        measured_mode_matching=0.60,
        cavity_waist=3.1e-6,
    ),
    SetupData(
        record=MeasurementRecord(
            setup="PCF",
            squeezing_db=-0.90,
            antisqueezing_db=1.8,
            visibility=0.92,
            sideband_frequency=3e6,
            pump_power=0.100,
        ),
        source_chain=_chain(("crystal_reflection", 0.88)),
        coupling_chain=_chain(("cavity_coupling", 0.78)),
        published_tiers_db=((-1.6, 2.6), (-1.8, 2.9), (-2.5, 3.5)),
        measured_mode_matching=0.88,
        cavity_waist=7.5e-6,
    ),
    SetupData(
        record=MeasurementRecord(
            setup="TF",
            squeezing_db=-1.0,
            antisqueezing_db=3.5,
            visibility=0.98,
            sideband_frequency=5e6,
            pump_power=0.015,
        ),
        source_chain=_chain(("splice", 0.88), ("crystal_reflection", 0.60)),
        coupling_chain=_chain(("cavity_coupling", 0.79)),
        published_tiers_db=((-1.5, 4.4), (-3.5, 6.4), (-5.3, 7.2)),
        measured_mode_matching=0.89,
        cavity_waist=6.5e-6,
    ),
)

_DATASET = ReferenceDataset(
    name=DATASET_NAME,
    detection_chain=_DETECTION,
    setups=_SETUPS,
    worked_example=OpoParams(
        quantum_efficiency=0.92,
        visibility=0.98,
        propagation_efficiency=0.39,
        coupler_transmission=0.85,
        round_trip_loss=0.01,
        round_trip_length=5e-3,
        threshold_power=0.090,
        sideband_frequency=5e6,
    ),
    worked_example_pump_power=0.015,
    worked_example_reference_db=(-1.4, 4.0),
    fit_effective_efficiency=0.2,
    fit_bandwidth=800e6,
    fit_sideband_frequency=3e6,
    forward_fit_points=(
        ForwardFitPoint("SF", threshold_power=1.200, pump_power=0.070,
                        measured_squeezing_db=-0.56),
        ForwardFitPoint("PCF", threshold_power=0.380, pump_power=0.100,
                        measured_squeezing_db=-0.90),
    ),
    mirror_curvature=5e-3,
    wavelength=1.064e-6,
    crystal_index=1.83,
)


def get_dataset(name: str = DATASET_NAME) -> ReferenceDataset:
    if name != DATASET_NAME:
        raise KeyError(f"unknown dataset {name!r}; available: {DATASET_NAME!r}")
    return _DATASET
