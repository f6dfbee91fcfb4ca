"""Scenario file loading: strict JSON with unit-suffixed keys.

Dimensioned quantities carry their unit in the key name (waist_um,
threshold_power_mw, bandwidth_mhz, phase_rad) and are converted to SI on
load.  Parsing is strict: unknown keys, missing required keys, duplicate
unit spellings of the same quantity and malformed values are all errors,
nothing is silently defaulted.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import datasets
from .gaussian_optics import KTP_INDEX_1064NM, GaussianBeam
from .gaussian_network import (
    Beamsplitter,
    Loss,
    NetworkScenario,
    PhaseShift,
    binary_tree_scenario,
)
from .loss_budget import LossChain, LossStage, MeasurementRecord
from .opo_model import OpoParams, cavity_bandwidth, effective_efficiency, escape_efficiency
from .units import TABLES, split_unit_key


class ScenarioError(ValueError):
    """Scenario file is malformed or inconsistent."""


class DataFileError(ValueError):
    """Measurement data CSV is malformed."""


@dataclass(frozen=True)
class Field:
    base: str
    kind: str  # length|power|frequency|angle|span:<dim>|number|int|string|bool|list
    required: bool = False
    default: object = None


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _parse_fields(raw, fields, where: str) -> dict:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: expected an object")
    out = {}
    matched = {}
    for key in raw:
        hits = [f for f in fields if _key_matches(key, f)]
        if not hits:
            raise ScenarioError(f"{where}: unknown key '{key}'")
        base = hits[0].base
        if base in matched:
            raise ScenarioError(
                f"{where}: '{key}' duplicates '{matched[base]}' (same quantity)"
            )
        matched[base] = key
    for spec in fields:
        key = matched.get(spec.base)
        if key is None:
            if spec.required:
                hint = spec.base
                if spec.kind in TABLES:
                    unit = next(iter(TABLES[spec.kind]))
                    hint = f"{spec.base}_<{'|'.join(TABLES[spec.kind])}>"
                raise ScenarioError(f"{where}: missing required key '{hint}'")
            out[spec.base] = spec.default
            continue
        out[spec.base] = _convert(raw[key], spec, key, where)
    return out


def _key_matches(key: str, spec: Field) -> bool:
    if spec.kind in TABLES:
        split = split_unit_key(key, spec.kind)
        return split is not None and split[0] == spec.base
    if spec.kind.startswith("span:"):
        split = split_unit_key(key, spec.kind.split(":", 1)[1])
        return split is not None and split[0] == spec.base
    return key == spec.base


def _convert(value, spec: Field, key: str, where: str):
    kind = spec.kind
    if kind in TABLES:
        if not _is_number(value):
            raise ScenarioError(f"{where}: '{key}' must be a number")
        return float(value) * split_unit_key(key, kind)[1]
    if kind.startswith("span:"):
        factor = split_unit_key(key, kind.split(":", 1)[1])[1]
        if (
            not isinstance(value, list)
            or len(value) != 3
            or not all(_is_number(v) for v in value)
        ):
            raise ScenarioError(f"{where}: '{key}' must be [low, high, count]")
        low, high, count = float(value[0]), float(value[1]), int(value[2])
        if count < 2 or high <= low:
            raise ScenarioError(f"{where}: '{key}' needs high > low and count >= 2")
        return (low * factor, high * factor, count)
    if kind == "number":
        if not _is_number(value):
            raise ScenarioError(f"{where}: '{key}' must be a number")
        return float(value)
    if kind == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ScenarioError(f"{where}: '{key}' must be an integer")
        return value
    if kind == "string":
        if not isinstance(value, str):
            raise ScenarioError(f"{where}: '{key}' must be a string")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ScenarioError(f"{where}: '{key}' must be true or false")
        return value
    if kind == "list":
        if not isinstance(value, list):
            raise ScenarioError(f"{where}: '{key}' must be a list")
        return value
    if kind == "object":
        if not isinstance(value, dict):
            raise ScenarioError(f"{where}: '{key}' must be an object")
        return value
    raise AssertionError(f"unhandled field kind {kind}")


# --- cavity section ---------------------------------------------------------

_CAVITY_FIELDS = (
    Field("waist", "length", required=True),
    Field("wavelength", "length", required=True),
    Field("mirror_curvature", "length", required=True),
    Field("cavity_length", "length"),
    Field("coupler_transmission", "number", default=1.0),
    Field("round_trip_loss", "number", default=0.0),
    Field("round_trip_length", "length"),
    Field("crystal_index", "number", default=KTP_INDEX_1064NM),
    Field("overlap_discount", "number", default=1.0),
)


@dataclass(frozen=True)
class CavitySection:
    fiber_beam: GaussianBeam
    mirror_curvature: float
    coupler_transmission: float
    round_trip_loss: float
    cavity_length: float | None
    round_trip_length: float | None
    crystal_index: float
    overlap_discount: float


def _parse_cavity(raw) -> CavitySection:
    got = _parse_fields(raw, _CAVITY_FIELDS, "cavity")
    beam = GaussianBeam(waist_radius=got["waist"], wavelength=got["wavelength"])
    return CavitySection(
        fiber_beam=beam,
        mirror_curvature=got["mirror_curvature"],
        coupler_transmission=got["coupler_transmission"],
        round_trip_loss=got["round_trip_loss"],
        cavity_length=got["cavity_length"],
        round_trip_length=got["round_trip_length"],
        crystal_index=got["crystal_index"],
        overlap_discount=got["overlap_discount"],
    )


# --- opo section ------------------------------------------------------------

_OPO_FIELDS = (
    Field("quantum_efficiency", "number"),
    Field("visibility", "number"),
    Field("propagation_efficiency", "number"),
    Field("escape_efficiency", "number"),
    Field("coupler_transmission", "number"),
    Field("round_trip_loss", "number"),
    Field("round_trip_length", "length"),
    Field("effective_efficiency", "number"),
    Field("threshold_power", "power"),
    Field("sideband_frequency", "frequency", required=True),
    Field("bandwidth", "frequency"),
    Field("pump_power", "power"),
    Field("pump_sweep", "span:power"),
    Field("trace_points", "int", default=0),
)


@dataclass(frozen=True)
class OpoSection:
    effective: float | None
    bandwidth: float
    threshold_power: float | None
    sideband_frequency: float
    pump_power: float | None
    sweep_powers: tuple | None
    trace_points: int
    params: OpoParams | None


def _parse_opo(raw) -> OpoSection:
    got = _parse_fields(raw, _OPO_FIELDS, "opo")
    decomposition = [got[k] is not None for k in
                     ("quantum_efficiency", "visibility", "propagation_efficiency")]
    params = None
    if got["effective_efficiency"] is not None:
        if any(decomposition) or got["escape_efficiency"] is not None:
            raise ScenarioError(
                "opo: give either effective_efficiency or its decomposition, not both"
            )
        effective = got["effective_efficiency"]
        if not 0 <= effective <= 1:
            raise ScenarioError("opo: effective_efficiency must be in [0, 1]")
    elif all(decomposition):
        if got["escape_efficiency"] is not None:
            escape = got["escape_efficiency"]
        elif got["coupler_transmission"] is not None and got["round_trip_loss"] is not None:
            escape = escape_efficiency(
                got["coupler_transmission"], got["round_trip_loss"]
            )
        else:
            raise ScenarioError(
                "opo: need escape_efficiency or coupler_transmission + round_trip_loss"
            )
        effective = effective_efficiency(
            got["quantum_efficiency"],
            got["visibility"],
            got["propagation_efficiency"],
            escape,
        )
        if (
            got["coupler_transmission"] is not None
            and got["round_trip_loss"] is not None
            and got["round_trip_length"] is not None
            and got["threshold_power"] is not None
        ):
            params = OpoParams(
                quantum_efficiency=got["quantum_efficiency"],
                visibility=got["visibility"],
                propagation_efficiency=got["propagation_efficiency"],
                coupler_transmission=got["coupler_transmission"],
                round_trip_loss=got["round_trip_loss"],
                round_trip_length=got["round_trip_length"],
                threshold_power=got["threshold_power"],
                sideband_frequency=got["sideband_frequency"],
                escape_efficiency=got["escape_efficiency"],
                bandwidth_override=got["bandwidth"],
            )
    elif any(decomposition):
        raise ScenarioError(
            "opo: incomplete decomposition; need quantum_efficiency, visibility "
            "and propagation_efficiency together"
        )
    else:
        # fit scenarios fix only the spectral parameters
        effective = None

    if got["bandwidth"] is not None:
        bandwidth = got["bandwidth"]
    elif (
        got["coupler_transmission"] is not None
        and got["round_trip_loss"] is not None
        and got["round_trip_length"] is not None
    ):
        bandwidth = cavity_bandwidth(
            got["coupler_transmission"],
            got["round_trip_loss"],
            got["round_trip_length"],
        )
    else:
        raise ScenarioError(
            "opo: need bandwidth or coupler_transmission + round_trip_loss "
            "+ round_trip_length"
        )

    sweep = None
    if got["pump_sweep"] is not None:
        low, high, count = got["pump_sweep"]
        if low < 0:
            raise ScenarioError("opo: pump_sweep powers must be >= 0")
        sweep = tuple(np.linspace(low, high, count))
    if got["trace_points"] < 0:
        raise ScenarioError("opo: trace_points must be >= 0")
    return OpoSection(
        effective=effective,
        bandwidth=bandwidth,
        threshold_power=got["threshold_power"],
        sideband_frequency=got["sideband_frequency"],
        pump_power=got["pump_power"],
        sweep_powers=sweep,
        trace_points=got["trace_points"],
        params=params,
    )


# --- losses section ---------------------------------------------------------

_STAGE_FIELDS = (
    Field("name", "string", required=True),
    Field("transmission", "number", required=True),
    Field("visibility", "bool", default=False),
)

_RECORD_FIELDS = (
    Field("setup", "string", required=True),
    Field("squeezing_db", "number", required=True),
    Field("antisqueezing_db", "number", required=True),
    Field("visibility", "number", required=True),
    Field("sideband_frequency", "frequency", required=True),
    Field("pump_power", "power", required=True),
)

_SETUP_FIELDS = (
    Field("record", "object", required=True),
    Field("source", "list"),
    Field("coupling", "list"),
)


@dataclass(frozen=True)
class LossSetup:
    record: MeasurementRecord
    source_chain: LossChain | None
    coupling_chain: LossChain | None


@dataclass(frozen=True)
class LossesSection:
    detection_chain: LossChain
    setups: tuple


def _parse_stage(raw, where: str) -> LossStage:
    got = _parse_fields(raw, _STAGE_FIELDS, where)
    return LossStage(
        name=got["name"],
        transmission=got["transmission"],
        is_visibility=got["visibility"],
    )


def _parse_chain(raw, where: str, dark: float | None = None) -> LossChain:
    if not isinstance(raw, list) or not raw:
        raise ScenarioError(f"{where}: expected a non-empty list of stages")
    stages = tuple(
        _parse_stage(entry, f"{where}[{index}]") for index, entry in enumerate(raw)
    )
    return LossChain(stages=stages, dark_clearance_db=dark)


def _parse_losses(raw) -> LossesSection:
    if not isinstance(raw, dict):
        raise ScenarioError("losses: expected an object")
    if "dataset" in raw:
        if set(raw) != {"dataset"}:
            raise ScenarioError("losses: 'dataset' cannot be combined with other keys")
        try:
            dataset = datasets.get_dataset(raw["dataset"])
        except KeyError as err:
            raise ScenarioError(f"losses: {err.args[0]}") from err
        setups = tuple(
            LossSetup(entry.record, entry.source_chain, entry.coupling_chain)
            for entry in dataset.setups
        )
        return LossesSection(detection_chain=dataset.detection_chain, setups=setups)

    fields = (
        Field("dark_clearance_db", "number"),
        Field("detection", "list", required=True),
        Field("setups", "list", required=True),
    )
    got = _parse_fields(raw, fields, "losses")
    if got["dark_clearance_db"] is not None and got["dark_clearance_db"] < 0:
        raise ScenarioError("losses: dark_clearance_db must be >= 0")
    detection = _parse_chain(got["detection"], "losses.detection",
                             dark=got["dark_clearance_db"])
    if not got["setups"]:
        raise ScenarioError("losses: 'setups' must not be empty")
    setups = []
    for index, entry in enumerate(got["setups"]):
        where = f"losses.setups[{index}]"
        parsed = _parse_fields(entry, _SETUP_FIELDS, where)
        record_raw = _parse_fields(parsed["record"], _RECORD_FIELDS, f"{where}.record")
        record = MeasurementRecord(**record_raw)
        source = (
            _parse_chain(parsed["source"], f"{where}.source")
            if parsed["source"] is not None
            else None
        )
        coupling = (
            _parse_chain(parsed["coupling"], f"{where}.coupling")
            if parsed["coupling"] is not None
            else None
        )
        setups.append(LossSetup(record=record, source_chain=source,
                                coupling_chain=coupling))
    return LossesSection(detection_chain=detection, setups=tuple(setups))


# --- network section --------------------------------------------------------

_SQUEEZER_FIELDS = (
    Field("mode", "int", required=True),
    Field("squeezed_variance", "number", required=True),
    Field("antisqueezed_variance", "number", required=True),
)

_HOMODYNE_FIELDS = (
    Field("mode", "int", required=True),
    Field("angle", "angle", default=0.0),
)


def _parse_gate(raw, where: str):
    if not isinstance(raw, dict) or "type" not in raw:
        raise ScenarioError(f"{where}: gate must be an object with a 'type'")
    kind = raw["type"]
    body = {k: v for k, v in raw.items() if k != "type"}
    if kind == "beamsplitter":
        fields = (
            Field("mode_a", "int", required=True),
            Field("mode_b", "int", required=True),
            Field("transmittance", "number", required=True),
            Field("phase", "angle", default=0.0),
        )
        got = _parse_fields(body, fields, where)
        return Beamsplitter(got["mode_a"], got["mode_b"], got["transmittance"],
                            got["phase"])
    if kind == "phase_shift":
        fields = (
            Field("mode", "int", required=True),
            Field("phase", "angle", required=True),
        )
        got = _parse_fields(body, fields, where)
        return PhaseShift(got["mode"], got["phase"])
    if kind == "loss":
        fields = (
            Field("mode", "int", required=True),
            Field("efficiency", "number", required=True),
        )
        got = _parse_fields(body, fields, where)
        return Loss(got["mode"], got["efficiency"])
    raise ScenarioError(f"{where}: unknown gate type '{kind}'")


def _parse_network(raw) -> NetworkScenario:
    if not isinstance(raw, dict):
        raise ScenarioError("network: expected an object")
    if "preset" in raw:
        fields = (
            Field("preset", "string", required=True),
            Field("squeezed_variance", "number", required=True),
            Field("antisqueezed_variance", "number", required=True),
            Field("phase", "angle", default=math.pi / 2),
        )
        got = _parse_fields(raw, fields, "network")
        if got["preset"] != "binary_tree":
            raise ScenarioError(
                f"network: unknown preset '{got['preset']}'; available: binary_tree"
            )
        return binary_tree_scenario(
            got["squeezed_variance"], got["antisqueezed_variance"], got["phase"]
        )

    fields = (
        Field("modes", "int", required=True),
        Field("squeezers", "list", default=[]),
        Field("gates", "list", default=[]),
        Field("homodyne", "list", default=[]),
    )
    got = _parse_fields(raw, fields, "network")
    n = got["modes"]
    if n < 1:
        raise ScenarioError("network: modes must be >= 1")
    squeezers = [None] * n
    for index, entry in enumerate(got["squeezers"]):
        spec = _parse_fields(entry, _SQUEEZER_FIELDS, f"network.squeezers[{index}]")
        mode = spec["mode"]
        if not 0 <= mode < n:
            raise ScenarioError(
                f"network.squeezers[{index}]: mode {mode} out of range for {n} modes"
            )
        if squeezers[mode] is not None:
            raise ScenarioError(f"network.squeezers[{index}]: mode {mode} repeated")
        squeezers[mode] = (spec["squeezed_variance"], spec["antisqueezed_variance"])
    gates = tuple(
        _parse_gate(entry, f"network.gates[{index}]")
        for index, entry in enumerate(got["gates"])
    )
    measurements = tuple(
        (spec["mode"], spec["angle"])
        for spec in (
            _parse_fields(entry, _HOMODYNE_FIELDS, f"network.homodyne[{index}]")
            for index, entry in enumerate(got["homodyne"])
        )
    )
    return NetworkScenario(
        squeezers=tuple(squeezers), gates=gates, measurements=measurements
    )


# --- whole scenario ---------------------------------------------------------

_TOP_KEYS = {"title", "units", "cavity", "opo", "losses", "network"}


@dataclass(frozen=True)
class Scenario:
    title: str
    units_note: str
    digest: str
    raw: dict = field(repr=False)
    cavity: CavitySection | None = None
    opo: OpoSection | None = None
    losses: LossesSection | None = None
    network: NetworkScenario | None = None


def parse_scenario(doc: dict, digest: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario root must be a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ScenarioError(f"unknown top-level keys: {', '.join(unknown)}")
    title = doc.get("title", "")
    units_note = doc.get("units", "")
    if not isinstance(title, str) or not isinstance(units_note, str):
        raise ScenarioError("'title' and 'units' must be strings")
    return Scenario(
        title=title,
        units_note=units_note,
        digest=digest,
        raw=doc,
        cavity=_parse_cavity(doc["cavity"]) if "cavity" in doc else None,
        opo=_parse_opo(doc["opo"]) if "opo" in doc else None,
        losses=_parse_losses(doc["losses"]) if "losses" in doc else None,
        network=_parse_network(doc["network"]) if "network" in doc else None,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as handle:
            blob = handle.read()
    except OSError as err:
        raise ScenarioError(f"cannot read scenario file: {err}") from err
    digest = "sha256:" + hashlib.sha256(blob).hexdigest()[:12]
    try:
        doc = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise ScenarioError(f"{path}: not valid JSON ({err})") from err
    return parse_scenario(doc, digest=digest)


def read_opo_data(path):
    """Measurement CSV: power_mW, squeezing_db, antisqueezing_db[, weight].

    The antisqueezing field may be empty (squeezed-quadrature-only point);
    an optional single header line and '#' comment lines are skipped.
    Returns (power_W, squeezing_db, antisqueezing_db_or_None, weight) rows.
    """
    rows = []
    try:
        handle = open(path, newline="")
    except OSError as err:
        raise DataFileError(f"cannot read data file: {err}") from err
    with handle:
        saw_data = False
        for lineno, cells in enumerate(csv.reader(handle), start=1):
            cells = [cell.strip() for cell in cells]
            if not cells or all(cell == "" for cell in cells):
                continue
            if cells[0].startswith("#"):
                continue
            if len(cells) not in (3, 4):
                raise DataFileError(
                    f"line {lineno}: expected 3 or 4 columns, got {len(cells)}"
                )
            try:
                power = float(cells[0])
            except ValueError:
                if not saw_data and not rows:
                    continue  # header line
                raise DataFileError(f"line {lineno}: cannot parse '{cells[0]}'")
            try:
                squeezing = float(cells[1])
                antisqueezing = None if cells[2] == "" else float(cells[2])
                weight = 1.0
                if len(cells) == 4 and cells[3] != "":
                    weight = float(cells[3])
            except ValueError as err:
                raise DataFileError(f"line {lineno}: {err}") from err
            if power <= 0:
                raise DataFileError(f"line {lineno}: power must be > 0 mW")
            saw_data = True
            rows.append((power * 1e-3, squeezing, antisqueezing, weight))
    if not rows:
        raise DataFileError("data file contains no data rows")
    return rows
