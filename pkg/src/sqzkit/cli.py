"""sqzkit command line: scenario-driven batch runs with CSV output.

    sqzkit <command> --scenario FILE [--data FILE] [--out DIR]
                     [--sweep KEY=LO:HI:N]

Commands: cavity-design, opo-curve, fit, loss-correct, network,
reproduce-paper.  Results go to stdout and to CSV files in --out (falling
back to $SQZKIT_OUT, then the current directory).  Exit codes: 0 success,
1 reproduction failure, 2 input error, 3 computation error.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import math
import os
import sys

import numpy as np

from . import __version__
from . import gaussian_optics as go
from .gaussian_network import NetworkError, run_scenario
from .loss_budget import NonphysicalCorrectionError, correction_pipeline
from .opo_model import (
    AboveThresholdError,
    FitError,
    ThresholdDivergenceError,
    fit_opo_curve,
    model_spectrum_db,
    squeezing_spectrum,
    homodyne_trace,
)
from .reproduce import build_report
from .results import ResultTable
from .scenario import (
    DataFileError,
    Scenario,
    ScenarioError,
    load_scenario,
    parse_scenario,
    read_opo_data,
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_COMPUTE = 3

_INPUT_ERRORS = (
    ScenarioError,
    DataFileError,
    FitError,
    NetworkError,
    go.StabilityError,
    go.NoSolutionError,
    FileNotFoundError,
)
_COMPUTE_ERRORS = (
    NonphysicalCorrectionError,
    ThresholdDivergenceError,
    AboveThresholdError,
)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:  # argparse already printed the diagnostic
        return int(exit_.code or 0)
    try:
        return _dispatch(args)
    except _COMPUTE_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_COMPUTE
    except _INPUT_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as err:  # domain validation of scenario-supplied values
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqzkit",
        description="fiber-coupled OPO squeezed-light design and data reduction",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, needs_scenario=True, needs_data=False, sweepable=False):
        cmd = sub.add_parser(name, help=help_)
        if needs_scenario:
            cmd.add_argument("--scenario", required=True, help="scenario JSON file")
        if needs_data:
            cmd.add_argument("--data", required=True,
                             help="CSV: power_mW, squeezing_db, antisqueezing_db[, weight]")
        if sweepable:
            cmd.add_argument("--sweep", default=None, metavar="KEY=LO:HI:N",
                             help="re-run over a scenario key span; adds min/max columns")
        cmd.add_argument("--out", default=None,
                         help="output directory (default $SQZKIT_OUT or '.')")
        return cmd

    add("cavity-design", "cavity geometry from a target waist", sweepable=True)
    add("opo-curve", "squeezing spectrum over a pump sweep", sweepable=True)
    add("fit", "fit effective efficiency and threshold to data",
        needs_data=True, sweepable=True)
    add("loss-correct", "three-tier corrected squeezing per setup", sweepable=True)
    add("network", "covariance simulation of a squeezer network")
    add("reproduce-paper", "check toolkit output against the published dataset",
        needs_scenario=False)
    return parser


def _dispatch(args) -> int:
    out_dir = args.out or os.environ.get("SQZKIT_OUT") or "."
    os.makedirs(out_dir, exist_ok=True)

    if args.command == "reproduce-paper":
        outcome = build_report()
        outcome.table.footer = _provenance("reproduce-paper", "builtin:paper-2017-fiber-opo")
        _emit(outcome.table, out_dir)
        if not outcome.all_pass:
            print("reproduce-paper: FAILING rows present", file=sys.stderr)
            return EXIT_MISMATCH
        return EXIT_OK

    scenario = load_scenario(args.scenario)
    data_rows, data_digest = None, None
    if getattr(args, "data", None):
        data_rows = read_opo_data(args.data)
        data_digest = _file_digest(args.data)

    builders = {
        "cavity-design": _run_cavity_design,
        "opo-curve": _run_opo_curve,
        "fit": lambda sc: _run_fit(sc, data_rows),
        "loss-correct": _run_loss_correct,
        "network": _run_network,
    }
    tables, exit_code = builders[args.command](scenario)

    sweep_spec = getattr(args, "sweep", None)
    if sweep_spec:
        tables[0] = _sweep(tables[0], sweep_spec, scenario, args, builders)

    for table in tables:
        table.footer = _provenance(
            args.command, scenario.digest, data_digest=data_digest,
            sweep=sweep_spec, title=scenario.title,
        )
        _emit(table, out_dir)
    return exit_code


def _provenance(command, digest, data_digest=None, sweep=None, title=""):
    lines = [f"command: sqzkit {command}", f"scenario: {digest or 'none'}"]
    if title:
        lines.append(f"title: {title}")
    if data_digest:
        lines.append(f"data: {data_digest}")
    if sweep:
        lines.append(f"sweep: {sweep}")
    lines.append(f"version: sqzkit {__version__}")
    return lines


def _file_digest(path) -> str:
    with open(path, "rb") as handle:
        return "sha256:" + hashlib.sha256(handle.read()).hexdigest()[:12]


def _emit(table: ResultTable, out_dir: str) -> None:
    path = os.path.join(out_dir, f"{table.name.replace('-', '_')}.csv")
    with open(path, "w", newline="") as handle:
        handle.write(table.to_csv())
    print(table.render())
    print(f"[wrote {path}]")


# --- commands ---------------------------------------------------------------


def _need(scenario: Scenario, section: str):
    value = getattr(scenario, section)
    if value is None:
        raise ScenarioError(f"scenario has no '{section}' section (required here)")
    return value


def _run_cavity_design(scenario: Scenario):
    section = _need(scenario, "cavity")
    fiber = section.fiber_beam
    lengths = go.cavity_length_for_waist(
        fiber.waist_radius, section.mirror_curvature, fiber.wavelength
    )
    cavity_length = (
        section.cavity_length if section.cavity_length is not None
        else lengths.hemispherical
    )
    cavity = go.CavityGeometry(
        mirror_curvature=section.mirror_curvature,
        cavity_length=cavity_length,
        coupler_transmission=section.coupler_transmission,
        round_trip_loss=section.round_trip_loss,
        round_trip_length=section.round_trip_length,
    )
    eigen_waist = go.hemispherical_waist(cavity, fiber.wavelength)
    eigen_beam = go.GaussianBeam(eigen_waist, fiber.wavelength)
    crystal_mode = go.GaussianBeam(eigen_waist, fiber.wavelength, section.crystal_index)
    overlap = go.gaussian_overlap(
        fiber, eigen_beam, discount=section.overlap_discount
    )
    table = ResultTable(
        name="cavity_design",
        columns=[
            "target_waist", "cavity_length", "cavity_length_hemispherical",
            "cavity_length_planar", "rayleigh_range", "confocal_crystal_length",
            "eigenmode_waist", "mirror_spot", "paraxial_fom",
            "fiber_cavity_overlap",
        ],
        units=["m", "m", "m", "m", "m", "m", "m", "m", "", ""],
    )
    table.add_row(
        fiber.waist_radius,
        cavity_length,
        lengths.hemispherical,
        lengths.planar,
        go.rayleigh_range(fiber),
        go.confocal_crystal_length(crystal_mode),
        eigen_waist,
        go.beam_radius_at(eigen_beam, cavity_length),
        go.paraxial_figure_of_merit(cavity, eigen_beam),
        overlap,
    )
    return [table], EXIT_OK


def _run_opo_curve(scenario: Scenario):
    section = _need(scenario, "opo")
    if section.effective is None:
        raise ScenarioError("opo-curve needs effective_efficiency or its decomposition")
    if section.threshold_power is None:
        raise ScenarioError("opo-curve needs threshold_power")
    if section.sweep_powers is not None:
        powers = np.array(section.sweep_powers)
    elif section.pump_power is not None:
        powers = np.array([section.pump_power])
    else:
        raise ScenarioError("opo-curve needs pump_sweep or pump_power")

    sq_db, asq_db = model_spectrum_db(
        section.effective, section.threshold_power, powers,
        section.sideband_frequency, section.bandwidth,
    )
    table = ResultTable(
        name="opo_curve",
        columns=["pump_power", "squeezing_db", "antisqueezing_db", "above_threshold"],
        units=["mW", "dB", "dB", ""],
    )
    for power, sq, asq in zip(powers, sq_db, asq_db):
        flagged = bool(np.isnan(sq))
        table.add_row(
            power * 1e3,
            None if flagged else float(sq),
            None if flagged else float(asq),
            int(flagged),
        )
    tables = [table]

    if section.trace_points > 0:
        if section.pump_power is None:
            raise ScenarioError("theta trace needs pump_power in the opo section")
        pair = squeezing_spectrum(
            section.effective,
            math.sqrt(section.pump_power / section.threshold_power),
            section.sideband_frequency / section.bandwidth,
        )
        trace = ResultTable(
            name="opo_trace",
            columns=["phase", "variance", "variance_db"],
            units=["rad", "snu", "dB"],
        )
        for theta in np.linspace(0.0, 2.0 * np.pi, section.trace_points):
            variance = homodyne_trace(pair, float(theta))
            trace.add_row(float(theta), variance, 10.0 * math.log10(variance))
        tables.append(trace)
    return tables, EXIT_OK


def _run_fit(scenario: Scenario, data_rows):
    section = _need(scenario, "opo")
    if data_rows is None:
        raise ScenarioError("fit needs --data")
    result = fit_opo_curve(
        data_rows, section.sideband_frequency, section.bandwidth
    )
    if result.on_boundary:
        print("warning: best fit sits on the search-domain boundary", file=sys.stderr)
    table = ResultTable(
        name="fit",
        columns=["effective_efficiency", "threshold_power", "rms_residual_db",
                 "on_boundary", "n_points"],
        units=["", "mW", "dB", "", ""],
    )
    table.add_row(
        result.effective_efficiency,
        result.threshold_power * 1e3,
        result.rms_residual_db,
        int(result.on_boundary),
        result.n_points,
    )
    powers = np.array([row[0] for row in data_rows])
    samples = np.linspace(powers.min(), powers.max(), 25)
    sq_db, asq_db = model_spectrum_db(
        result.effective_efficiency, result.threshold_power, samples,
        section.sideband_frequency, section.bandwidth,
    )
    curve = ResultTable(
        name="fit_curve",
        columns=["pump_power", "squeezing_db", "antisqueezing_db"],
        units=["mW", "dB", "dB"],
    )
    for power, sq, asq in zip(samples, sq_db, asq_db):
        curve.add_row(power * 1e3, float(sq), float(asq))
    return [table, curve], EXIT_OK


def _run_loss_correct(scenario: Scenario):
    section = _need(scenario, "losses")
    table = ResultTable(
        name="loss_correct",
        columns=["setup", "tier", "squeezing_db", "antisqueezing_db", "status"],
        units=["", "", "dB", "dB", ""],
    )
    failures = 0
    for setup in section.setups:
        try:
            tiers = correction_pipeline(
                setup.record, section.detection_chain,
                setup.source_chain, setup.coupling_chain,
            )
        except NonphysicalCorrectionError as err:
            print(f"warning: {err}", file=sys.stderr)
            table.add_row(setup.record.setup, "-", None, None, "nonphysical")
            failures += 1
            continue
        for tier, sq_db, asq_db in tiers.rows_db():
            table.add_row(setup.record.setup, str(tier), sq_db, asq_db, "ok")
    exit_code = EXIT_COMPUTE if failures == len(section.setups) else EXIT_OK
    return [table], exit_code


def _run_network(scenario: Scenario):
    section = _need(scenario, "network")
    result = run_scenario(section)
    homodyne = ResultTable(
        name="network_homodyne",
        columns=["mode", "angle", "variance"],
        units=["", "rad", "snu"],
    )
    for mode, phase, variance in result.homodyne:
        homodyne.add_row(mode, phase, variance)
    duan = ResultTable(
        name="network_duan",
        columns=["mode_a", "mode_b", "duan_value"],
        units=["", "", "snu"],
    )
    for mode_a, mode_b, value in result.duan:
        duan.add_row(mode_a, mode_b, value)
    covariance = ResultTable(
        name="covariance",
        columns=[f"{q}{m}" for m in range(result.state.mode_count) for q in ("x", "p")],
        units=["snu"] * 2 * result.state.mode_count,
        rows=[list(row) for row in result.state.covariance],
    )
    return [homodyne, duan, covariance], EXIT_OK


# --- sweep ------------------------------------------------------------------


def _sweep(base_table, spec, scenario, args, builders):
    key, low, high, count = _parse_sweep_spec(spec)
    if args.command == "network":
        raise ScenarioError("--sweep is not supported for network runs")
    minima = [list(row) for row in base_table.rows]
    maxima = [list(row) for row in base_table.rows]
    for value in np.linspace(low, high, count):
        doc = copy.deepcopy(scenario.raw)
        _set_path(doc, key.split("."), float(value))
        swept = parse_scenario(doc, digest=scenario.digest)
        if args.command == "fit":
            tables, _ = builders["fit"](swept)
        else:
            tables, _ = builders[args.command](swept)
        rows = tables[0].rows
        if len(rows) != len(base_table.rows):
            raise ScenarioError(
                f"sweep of '{key}' changes the row count; cannot aggregate"
            )
        for row_index, row in enumerate(rows):
            for col_index, cell in enumerate(row):
                if not isinstance(cell, (int, float)) or isinstance(cell, bool):
                    continue
                current_min = minima[row_index][col_index]
                current_max = maxima[row_index][col_index]
                if isinstance(current_min, (int, float)):
                    minima[row_index][col_index] = min(current_min, cell)
                    maxima[row_index][col_index] = max(current_max, cell)

    numeric_cols = [
        index for index in range(len(base_table.columns))
        if any(isinstance(row[index], (int, float)) and not isinstance(row[index], bool)
               for row in base_table.rows)
    ]
    columns = list(base_table.columns)
    units = list(base_table.units)
    for index in numeric_cols:
        columns += [f"{base_table.columns[index]}_min", f"{base_table.columns[index]}_max"]
        units += [base_table.units[index], base_table.units[index]]
    rows = []
    for row_index, row in enumerate(base_table.rows):
        extra = []
        for index in numeric_cols:
            extra += [minima[row_index][index], maxima[row_index][index]]
        rows.append(list(row) + extra)
    return ResultTable(name=base_table.name, columns=columns, units=units, rows=rows)


def _parse_sweep_spec(spec):
    key, sep, span = spec.partition("=")
    parts = span.split(":")
    if not sep or not key or len(parts) != 3:
        raise ScenarioError(f"--sweep must look like KEY=LO:HI:N, got '{spec}'")
    try:
        low, high = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as err:
        raise ScenarioError(f"--sweep '{spec}': {err}") from err
    if count < 1:
        raise ScenarioError("--sweep needs N >= 1")
    return key, low, high, count


def _set_path(doc, tokens, value):
    node = doc
    for position, token in enumerate(tokens):
        final = position == len(tokens) - 1
        if isinstance(node, list):
            try:
                index = int(token)
                node[index]
            except (ValueError, IndexError) as err:
                raise ScenarioError(f"sweep path element '{token}': {err}") from err
            if final:
                node[index] = value
            else:
                node = node[index]
        elif isinstance(node, dict):
            if token not in node:
                raise ScenarioError(f"sweep key '{'.'.join(tokens)}' not in scenario")
            if final:
                node[token] = value
            else:
                node = node[token]
        else:
            raise ScenarioError(f"sweep path '{'.'.join(tokens)}' descends into a scalar")
