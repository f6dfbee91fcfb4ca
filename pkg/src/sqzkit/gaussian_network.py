"""Covariance-matrix simulator for small networks of squeezers.

Conventions (they matter; continuous-variable literature uses several):
  * shot-noise units: the vacuum covariance is the identity, so 1 quadrature
    variance = shot noise, matching the dB bookkeeping of the other modules;
  * quadrature ordering is interleaved, (x1, p1, x2, p2, ...);
  * a state is physical iff all symplectic eigenvalues are >= 1 (pure states
    sit exactly at 1).

States are immutable values; every operation returns a new state, so
scenario batches can run concurrently without shared mutable data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PHYSICALITY_TOL = 1e-9


class NetworkError(ValueError):
    """Invalid network scenario; message lists every offending gate/measurement."""


def symplectic_form(n_modes: int) -> np.ndarray:
    """Canonical antisymmetric form for interleaved (x, p) ordering."""
    form = np.zeros((2 * n_modes, 2 * n_modes))
    for mode in range(n_modes):
        form[2 * mode, 2 * mode + 1] = 1.0
        form[2 * mode + 1, 2 * mode] = -1.0
    return form


def symplectic_eigenvalues(covariance: np.ndarray) -> np.ndarray:
    """Ascending symplectic spectrum: moduli of eig(i * Omega * Sigma), deduplicated."""
    covariance = np.asarray(covariance, dtype=float)
    n_modes = covariance.shape[0] // 2
    moduli = np.abs(np.linalg.eigvals(1j * symplectic_form(n_modes) @ covariance))
    return np.sort(moduli)[::2]


@dataclass(frozen=True)
class GaussianState:
    """N-mode Gaussian state: 2N x 2N covariance and 2N mean vector.

    The constructor copies its inputs, symmetrises the covariance and rejects
    unphysical matrices (smallest symplectic eigenvalue below 1 within
    PHYSICALITY_TOL).  Means default to zero.
    """

    covariance: np.ndarray
    mean: np.ndarray | None = None

    def __post_init__(self):
        cov = np.array(self.covariance, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise ValueError(f"covariance must be 2N x 2N, got shape {cov.shape}")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > 1e-8 * scale:
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        nu_min = symplectic_eigenvalues(cov).min()
        if nu_min < 1.0 - PHYSICALITY_TOL:
            raise ValueError(
                f"unphysical covariance: smallest symplectic eigenvalue {nu_min:.12g}"
            )
        mean = (
            np.zeros(cov.shape[0])
            if self.mean is None
            else np.array(self.mean, dtype=float)
        )
        if mean.shape != (cov.shape[0],):
            raise ValueError(f"mean must have length {cov.shape[0]}")
        cov.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "mean", mean)

    @property
    def mode_count(self) -> int:
        return self.covariance.shape[0] // 2

    def symplectic_spectrum(self) -> np.ndarray:
        return symplectic_eigenvalues(self.covariance)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.symplectic_spectrum() - 1.0) <= tol))


def vacuum(n_modes: int) -> GaussianState:
    """N-mode vacuum: identity covariance, zero mean."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    return GaussianState(np.eye(2 * n_modes))


def squeezed_vacuum(
    squeezed_variance: float, antisqueezed_variance: float
) -> GaussianState:
    """Single mode with covariance diag(R_minus, R_plus).

    The variances are linear shot-noise units with
    0 < R_minus <= 1 <= R_plus; pure squeezed vacuum has R_minus R_plus = 1,
    OPO output below that product is mixed.
    """
    if not 0 < squeezed_variance <= 1.0 + 1e-12:
        raise ValueError(
            f"squeezed_variance must be in (0, 1], got {squeezed_variance}"
        )
    if antisqueezed_variance < 1.0 - 1e-12:
        raise ValueError(
            f"antisqueezed_variance must be >= 1, got {antisqueezed_variance}"
        )
    return GaussianState(np.diag([squeezed_variance, antisqueezed_variance]))


def _rotation(phase: float) -> np.ndarray:
    c, s = math.cos(phase), math.sin(phase)
    return np.array([[c, -s], [s, c]])


def phase_shift_matrix(n_modes: int, mode: int, phase: float) -> np.ndarray:
    """Symplectic rotation by `phase` in the (x, p) plane of one mode."""
    _check_mode(n_modes, mode)
    matrix = np.eye(2 * n_modes)
    matrix[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = _rotation(phase)
    return matrix


def beamsplitter_matrix(
    n_modes: int, mode_a: int, mode_b: int, transmittance: float, phase: float = 0.0
) -> np.ndarray:
    """Symplectic beam splitter between two modes.

    Transmitted amplitude sqrt(t) on the diagonal, cross coupling
    sqrt(1 - t) carrying the relative phase as a rotation block.  t = 1 is
    the identity, t = 0 swaps the modes up to phase.
    """
    _check_mode(n_modes, mode_a)
    _check_mode(n_modes, mode_b)
    if mode_a == mode_b:
        raise ValueError("beamsplitter needs two distinct modes")
    if not 0 <= transmittance <= 1:
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    amp_t = math.sqrt(transmittance)
    amp_r = math.sqrt(1.0 - transmittance)
    matrix = np.eye(2 * n_modes)
    a, b = 2 * mode_a, 2 * mode_b
    matrix[a : a + 2, a : a + 2] = amp_t * np.eye(2)
    matrix[b : b + 2, b : b + 2] = amp_t * np.eye(2)
    matrix[a : a + 2, b : b + 2] = amp_r * _rotation(phase)
    matrix[b : b + 2, a : a + 2] = -amp_r * _rotation(-phase)
    return matrix


def apply_symplectic(state: GaussianState, matrix: np.ndarray) -> GaussianState:
    """Conjugate the covariance and transform the mean by a symplectic matrix."""
    return GaussianState(
        covariance=matrix @ state.covariance @ matrix.T, mean=matrix @ state.mean
    )


def apply_beamsplitter(
    state: GaussianState,
    mode_a: int,
    mode_b: int,
    transmittance: float,
    phase: float = 0.0,
) -> GaussianState:
    return apply_symplectic(
        state,
        beamsplitter_matrix(state.mode_count, mode_a, mode_b, transmittance, phase),
    )


def apply_phase_shift(state: GaussianState, mode: int, phase: float) -> GaussianState:
    return apply_symplectic(state, phase_shift_matrix(state.mode_count, mode, phase))


def apply_loss_channel(
    state: GaussianState, mode: int, efficiency: float
) -> GaussianState:
    """Mix one mode with vacuum: its block maps to t*Sigma + (1-t)*I, cross
    blocks scale by sqrt(t).  Agrees with loss_budget.apply_loss on diagonal
    quadrature variances."""
    _check_mode(state.mode_count, mode)
    if not 0 <= efficiency <= 1:
        raise ValueError(f"efficiency must be in [0, 1], got {efficiency}")
    scale = np.ones(2 * state.mode_count)
    scale[2 * mode : 2 * mode + 2] = math.sqrt(efficiency)
    cov = state.covariance * np.outer(scale, scale)
    cov = np.array(cov)
    cov[2 * mode, 2 * mode] += 1.0 - efficiency
    cov[2 * mode + 1, 2 * mode + 1] += 1.0 - efficiency
    return GaussianState(covariance=cov, mean=scale * state.mean)


def homodyne_variance(state: GaussianState, mode: int, phase: float) -> float:
    """Variance of cos(theta) x + sin(theta) p on one mode."""
    _check_mode(state.mode_count, mode)
    direction = np.zeros(2 * state.mode_count)
    direction[2 * mode] = math.cos(phase)
    direction[2 * mode + 1] = math.sin(phase)
    return float(direction @ state.covariance @ direction)


def duan_value(state: GaussianState, mode_a: int, mode_b: int) -> float:
    """Var(x_a - x_b) + Var(p_a + p_b); below 4 witnesses entanglement.

    In these units (vacuum = 1 per quadrature) the separability threshold is
    exactly 4, attained by two-mode vacuum.
    """
    _check_mode(state.mode_count, mode_a)
    _check_mode(state.mode_count, mode_b)
    if mode_a == mode_b:
        raise ValueError("duan_value needs two distinct modes")
    n = 2 * state.mode_count
    minus = np.zeros(n)
    minus[2 * mode_a] = 1.0
    minus[2 * mode_b] = -1.0
    plus = np.zeros(n)
    plus[2 * mode_a + 1] = 1.0
    plus[2 * mode_b + 1] = 1.0
    cov = state.covariance
    return float(minus @ cov @ minus + plus @ cov @ plus)


def _check_mode(n_modes: int, mode) -> None:
    if not isinstance(mode, (int, np.integer)):
        raise IndexError(f"mode index must be an integer, got {mode!r}")
    if not 0 <= mode < n_modes:
        raise IndexError(f"mode {mode} out of range for {n_modes} modes")


# --- scenario layer -------------------------------------------------------


@dataclass(frozen=True)
class Beamsplitter:
    mode_a: int
    mode_b: int
    transmittance: float
    phase: float = 0.0


@dataclass(frozen=True)
class PhaseShift:
    mode: int
    phase: float


@dataclass(frozen=True)
class Loss:
    mode: int
    efficiency: float


@dataclass(frozen=True)
class NetworkScenario:
    """Squeezer inputs, an ordered gate list and homodyne measurements.

    `squeezers[k]` is a (squeezed, antisqueezed) variance pair for mode k or
    None for vacuum; `measurements` are (mode, phase) homodyne requests.
    """

    squeezers: tuple
    gates: tuple = field(default_factory=tuple)
    measurements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "squeezers", tuple(self.squeezers))
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "measurements", tuple(self.measurements))
        if not self.squeezers:
            raise NetworkError("scenario needs at least one mode")

    @property
    def mode_count(self) -> int:
        return len(self.squeezers)


def binary_tree_scenario(
    squeezed_variance: float,
    antisqueezed_variance: float,
    phase: float = math.pi / 2,
) -> NetworkScenario:
    """Default four-squeezer topology: two balanced splitter pairs, then one
    splitter across the tree, each second input rotated by `phase`.

    The figure this mimics does not fix the splitter layout or phases; this
    binary tree is the shipped default and scenarios may override it.
    """
    pair = (squeezed_variance, antisqueezed_variance)
    return NetworkScenario(
        squeezers=(pair, pair, pair, pair),
        gates=(
            PhaseShift(1, phase),
            Beamsplitter(0, 1, 0.5),
            PhaseShift(3, phase),
            Beamsplitter(2, 3, 0.5),
            PhaseShift(2, phase),
            Beamsplitter(1, 2, 0.5),
        ),
        measurements=tuple((mode, 0.0) for mode in range(4)),
    )


@dataclass(frozen=True)
class NetworkResult:
    """Final state plus the requested measurement tables."""

    state: GaussianState
    homodyne: tuple  # (mode, phase, variance) rows
    duan: tuple  # (mode_a, mode_b, value) rows for every pair a < b


def run_scenario(scenario: NetworkScenario) -> NetworkResult:
    """Build the input state, apply the gates in order, then measure.

    All gates and measurements are validated up front; every problem is
    reported at once, tagged with its gate index.
    """
    _validate_scenario(scenario)
    n = scenario.mode_count
    cov = np.eye(2 * n)
    for mode, spec in enumerate(scenario.squeezers):
        if spec is None:
            continue
        squeezed, antisqueezed = spec
        cov[2 * mode, 2 * mode] = squeezed
        cov[2 * mode + 1, 2 * mode + 1] = antisqueezed
    state = GaussianState(cov)

    for gate in scenario.gates:
        if isinstance(gate, Beamsplitter):
            state = apply_beamsplitter(
                state, gate.mode_a, gate.mode_b, gate.transmittance, gate.phase
            )
        elif isinstance(gate, PhaseShift):
            state = apply_phase_shift(state, gate.mode, gate.phase)
        else:
            state = apply_loss_channel(state, gate.mode, gate.efficiency)

    homodyne_rows = tuple(
        (mode, phase, homodyne_variance(state, mode, phase))
        for mode, phase in scenario.measurements
    )
    duan_rows = tuple(
        (a, b, duan_value(state, a, b)) for a in range(n) for b in range(a + 1, n)
    )
    return NetworkResult(state=state, homodyne=homodyne_rows, duan=duan_rows)


def _validate_scenario(scenario: NetworkScenario) -> None:
    n = scenario.mode_count
    problems = []
    for mode, spec in enumerate(scenario.squeezers):
        if spec is None:
            continue
        try:
            squeezed, antisqueezed = spec
            squeezed_vacuum(float(squeezed), float(antisqueezed))
        except (TypeError, ValueError) as err:
            problems.append(f"squeezer {mode}: {err}")
    for index, gate in enumerate(scenario.gates):
        label = f"gate {index} ({type(gate).__name__.lower()})"
        if isinstance(gate, Beamsplitter):
            if not _mode_ok(gate.mode_a, n) or not _mode_ok(gate.mode_b, n):
                problems.append(f"{label}: mode out of range for {n} modes")
            elif gate.mode_a == gate.mode_b:
                problems.append(f"{label}: modes must differ")
            if not 0 <= gate.transmittance <= 1:
                problems.append(f"{label}: transmittance {gate.transmittance} not in [0, 1]")
        elif isinstance(gate, PhaseShift):
            if not _mode_ok(gate.mode, n):
                problems.append(f"{label}: mode {gate.mode} out of range for {n} modes")
        elif isinstance(gate, Loss):
            if not _mode_ok(gate.mode, n):
                problems.append(f"{label}: mode {gate.mode} out of range for {n} modes")
            if not 0 <= gate.efficiency <= 1:
                problems.append(f"{label}: efficiency {gate.efficiency} not in [0, 1]")
        else:
            problems.append(f"{label}: unknown gate type")
    for index, measurement in enumerate(scenario.measurements):
        mode = measurement[0]
        if not _mode_ok(mode, n):
            problems.append(
                f"measurement {index}: mode {mode} out of range for {n} modes"
            )
    if problems:
        raise NetworkError("; ".join(problems))


def _mode_ok(mode, n_modes: int) -> bool:
    return isinstance(mode, (int, np.integer)) and 0 <= mode < n_modes
