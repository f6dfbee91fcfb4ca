"""Below-threshold OPO squeezing spectrum and fits to squeezing-vs-power data.

The measured quadrature variances, in shot-noise units (vacuum = 1), follow

    R_minus = 1 - C * 4x / ((1 + x)^2 + 4 W^2)     (squeezed)
    R_plus  = 1 + C * 4x / ((1 - x)^2 + 4 W^2)     (antisqueezed)

with C the effective efficiency (detector quantum efficiency times homodyne
visibility squared times propagation efficiency times cavity escape
efficiency), x = sqrt(P / P_th) the pump ratio and W = f / gamma the sideband
frequency in units of the cavity bandwidth.  dB values are 10*log10(linear)
throughout, so squeezing is negative dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Search domain of the fit: C in (0, 1], P_th in [max(P), 100 max(P)].
_THRESHOLD_SPAN = 100.0


class AboveThresholdError(ValueError):
    """Pump ratio exceeds 1; the below-threshold model does not apply."""


class ThresholdDivergenceError(ValueError):
    """Antisqueezing diverges at pump ratio 1 with zero sideband frequency."""


class FitError(ValueError):
    """Fit input data cannot constrain the model."""


def escape_efficiency(coupler_transmission: float, round_trip_loss: float) -> float:
    """Fraction T / (T + L) of intracavity squeezing leaving via the coupler."""
    if coupler_transmission <= 0:
        raise ValueError("coupler_transmission must be > 0")
    if round_trip_loss < 0:
        raise ValueError("round_trip_loss must be >= 0")
    return coupler_transmission / (coupler_transmission + round_trip_loss)


def cavity_bandwidth(
    coupler_transmission: float, round_trip_loss: float, round_trip_length: float
) -> float:
    """Cavity bandwidth c (T + L) / l [Hz]."""
    if round_trip_length <= 0:
        raise ValueError("round_trip_length must be > 0")
    return SPEED_OF_LIGHT * (coupler_transmission + round_trip_loss) / round_trip_length


def pump_ratio(pump_power: float, threshold_power: float) -> float:
    """sqrt(P / P_th); equals 1 at the oscillation threshold."""
    if threshold_power <= 0:
        raise ValueError("threshold_power must be > 0")
    if pump_power < 0:
        raise ValueError("pump_power must be >= 0")
    return math.sqrt(pump_power / threshold_power)


def effective_efficiency(
    quantum_efficiency: float,
    visibility: float,
    propagation_efficiency: float,
    escape: float,
) -> float:
    """Total detection efficiency: quantum eff * visibility^2 * propagation * escape."""
    for name, value in (
        ("quantum_efficiency", quantum_efficiency),
        ("visibility", visibility),
        ("propagation_efficiency", propagation_efficiency),
        ("escape", escape),
    ):
        if not 0 <= value <= 1:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    return quantum_efficiency * visibility**2 * propagation_efficiency * escape


@dataclass(frozen=True)
class QuadraturePair:
    """Squeezed / antisqueezed variance pair in shot-noise units.

    Ordering 0 < R_minus <= 1 <= R_plus is enforced.  The minimum-uncertainty
    product R_minus * R_plus >= 1 is deliberately NOT asserted: loss maps both
    variances toward 1, so lossy states sit below the pure-state hyperbola.
    """

    squeezed_variance: float
    antisqueezed_variance: float

    def __post_init__(self):
        if not 0 < self.squeezed_variance <= 1.0 + 1e-12:
            raise ValueError(
                f"squeezed_variance must be in (0, 1], got {self.squeezed_variance}"
            )
        if self.antisqueezed_variance < 1.0 - 1e-12:
            raise ValueError(
                f"antisqueezed_variance must be >= 1, got {self.antisqueezed_variance}"
            )

    @property
    def squeezed_db(self) -> float:
        return 10.0 * math.log10(self.squeezed_variance)

    @property
    def antisqueezed_db(self) -> float:
        return 10.0 * math.log10(self.antisqueezed_variance)


@dataclass(frozen=True)
class OpoParams:
    """Everything the spectrum needs, as measured quantities.

    `escape_efficiency` overrides the T/(T+L) value when set;
    `bandwidth_override` [Hz] replaces c(T+L)/l (the formula value and the
    bandwidth inferred from measured spectra can disagree, so fits always
    receive an explicit bandwidth).
    """

    quantum_efficiency: float
    visibility: float
    propagation_efficiency: float
    coupler_transmission: float
    round_trip_loss: float
    round_trip_length: float
    threshold_power: float
    sideband_frequency: float
    escape_efficiency: float | None = None
    bandwidth_override: float | None = None

    def __post_init__(self):
        for name in (
            "quantum_efficiency",
            "visibility",
            "propagation_efficiency",
            "coupler_transmission",
            "round_trip_loss",
        ):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.threshold_power <= 0:
            raise ValueError("threshold_power must be > 0")
        if self.sideband_frequency < 0:
            raise ValueError("sideband_frequency must be >= 0")
        if self.escape_efficiency is not None and not 0 <= self.escape_efficiency <= 1:
            raise ValueError("escape_efficiency must be in [0, 1]")
        if self.bandwidth_override is not None and self.bandwidth_override <= 0:
            raise ValueError("bandwidth_override must be > 0")

    def resolved_escape(self) -> float:
        if self.escape_efficiency is not None:
            return self.escape_efficiency
        return escape_efficiency(self.coupler_transmission, self.round_trip_loss)

    def bandwidth(self) -> float:
        if self.bandwidth_override is not None:
            return self.bandwidth_override
        return cavity_bandwidth(
            self.coupler_transmission, self.round_trip_loss, self.round_trip_length
        )

    def sideband_ratio(self) -> float:
        return self.sideband_frequency / self.bandwidth()

    def effective(self) -> float:
        return effective_efficiency(
            self.quantum_efficiency,
            self.visibility,
            self.propagation_efficiency,
            self.resolved_escape(),
        )

    def spectrum_at(self, pump_power: float) -> QuadraturePair:
        """Spectrum for a given pump power [W]."""
        return squeezing_spectrum(
            self.effective(),
            pump_ratio(pump_power, self.threshold_power),
            self.sideband_ratio(),
        )


def squeezed_variance(
    effective: float, pump: float, sideband_ratio: float = 0.0
) -> float:
    """Squeezed-quadrature variance alone; finite up to and including pump = 1."""
    _check_spectrum_domain(effective, pump)
    return 1.0 - effective * 4.0 * pump / ((1.0 + pump) ** 2 + 4.0 * sideband_ratio**2)


def squeezing_spectrum(
    effective: float, pump: float, sideband_ratio: float = 0.0
) -> QuadraturePair:
    """Both quadrature variances for pump ratio < 1.

    Raises ThresholdDivergenceError at pump = 1 with zero sideband ratio
    (antisqueezing diverges there; use squeezed_variance for the finite side)
    and AboveThresholdError for pump > 1.
    """
    _check_spectrum_domain(effective, pump)
    denom_plus = (1.0 - pump) ** 2 + 4.0 * sideband_ratio**2
    if denom_plus == 0.0:
        raise ThresholdDivergenceError(
            "antisqueezing diverges at pump ratio 1 with zero sideband ratio; "
            "squeezed_variance() still evaluates the finite quadrature"
        )
    gain = effective * 4.0 * pump
    return QuadraturePair(
        squeezed_variance=1.0 - gain / ((1.0 + pump) ** 2 + 4.0 * sideband_ratio**2),
        antisqueezed_variance=1.0 + gain / denom_plus,
    )


def _check_spectrum_domain(effective: float, pump: float) -> None:
    if not 0 <= effective <= 1:
        raise ValueError(f"effective efficiency must be in [0, 1], got {effective}")
    if pump < 0:
        raise ValueError(f"pump ratio must be >= 0, got {pump}")
    if pump > 1:
        raise AboveThresholdError(
            f"pump ratio {pump} > 1: below-threshold model is invalid"
        )


def homodyne_trace(pair: QuadraturePair, phase: float) -> float:
    """Variance seen at local-oscillator phase theta: R- cos^2 + R+ sin^2."""
    c, s = math.cos(phase), math.sin(phase)
    return pair.squeezed_variance * c * c + pair.antisqueezed_variance * s * s


def model_spectrum_db(
    effective: float,
    threshold_power: float,
    powers: np.ndarray,
    sideband_frequency: float,
    bandwidth: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised (squeezed dB, antisqueezed dB) over an array of pump powers.

    Powers above threshold yield NaN rows rather than raising, so sweeps can
    cross the threshold and flag the offending rows.
    """
    powers = np.asarray(powers, dtype=float)
    omega = sideband_frequency / bandwidth
    x = np.sqrt(np.clip(powers, 0.0, None) / threshold_power)
    gain = effective * 4.0 * x
    with np.errstate(divide="ignore", invalid="ignore"):
        r_minus = 1.0 - gain / ((1.0 + x) ** 2 + 4.0 * omega**2)
        r_plus = 1.0 + gain / ((1.0 - x) ** 2 + 4.0 * omega**2)
        sq_db = 10.0 * np.log10(r_minus)
        asq_db = 10.0 * np.log10(r_plus)
    invalid = x >= 1.0
    sq_db = np.where(invalid, np.nan, sq_db)
    asq_db = np.where(invalid, np.nan, asq_db)
    return sq_db, asq_db


@dataclass(frozen=True)
class FitResult:
    """Outcome of fit_opo_curve."""

    effective_efficiency: float
    threshold_power: float
    rms_residual_db: float
    on_boundary: bool
    n_points: int


def fit_opo_curve(
    data, sideband_frequency: float, bandwidth: float
) -> FitResult:
    """Weighted least squares of (C, P_th) against measured dB data.

    `data` is a sequence of (pump_power [W], squeezing_db, antisqueezing_db,
    weight); antisqueezing_db may be None to fit the squeezed quadrature only
    and the weight entry may be omitted (default 1).  The residual is
    minimised in dB space.  Deterministic: a coarse grid over C in (0, 1] and
    P_th in [max P, 100 max P] seeds a Nelder-Mead simplex refined to 1e-9
    relative tolerance.  `on_boundary` flags optima pinned at the edge of the
    search domain.
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be > 0")
    if sideband_frequency < 0:
        raise ValueError("sideband_frequency must be >= 0")

    powers, sq_db, asq_db, weights = _unpack_fit_data(data)
    p_max = powers.max()
    has_asq = ~np.isnan(asq_db)

    def objective(u: np.ndarray) -> float:
        c, v = u
        if not (0.0 < c <= 1.0) or not (1.0 <= v <= _THRESHOLD_SPAN):
            return np.inf
        m_sq, m_asq = model_spectrum_db(
            c, v * p_max, powers, sideband_frequency, bandwidth
        )
        if np.any(np.isnan(m_sq)):
            return np.inf
        sse = float(np.sum(weights * (m_sq - sq_db) ** 2))
        if has_asq.any():
            err = (m_asq - asq_db)[has_asq]
            sse += float(np.sum(weights[has_asq] * err**2))
        return sse

    best_seed, best_sse = None, np.inf
    for c_seed in np.linspace(0.05, 1.0, 20):
        for v_seed in np.geomspace(1.0, _THRESHOLD_SPAN, 25):
            sse = objective(np.array([c_seed, v_seed]))
            if sse < best_sse:
                best_sse, best_seed = sse, np.array([c_seed, v_seed])

    options = dict(xatol=1e-12, fatol=1e-24, maxiter=2000, maxfev=4000)
    result = minimize(objective, best_seed, method="Nelder-Mead", options=options)
    result = minimize(objective, result.x, method="Nelder-Mead", options=options)

    c_fit, v_fit = float(result.x[0]), float(result.x[1])
    rms = math.sqrt(result.fun / float(np.sum(weights) + np.sum(weights[has_asq])))
    on_boundary = (
        c_fit <= 1e-3
        or c_fit >= 1.0 - 1e-9
        or v_fit <= 1.0 + 1e-9
        or v_fit >= _THRESHOLD_SPAN * (1.0 - 1e-9)
    )
    return FitResult(
        effective_efficiency=c_fit,
        threshold_power=v_fit * p_max,
        rms_residual_db=rms,
        on_boundary=on_boundary,
        n_points=len(powers),
    )


def _unpack_fit_data(data):
    rows = list(data)
    if len(rows) < 2:
        raise FitError("need at least 2 data points")
    powers, sq, asq, weights = [], [], [], []
    for row in rows:
        if len(row) == 3:
            p, s, a = row
            w = 1.0
        elif len(row) == 4:
            p, s, a, w = row
            w = 1.0 if w is None else float(w)
        else:
            raise FitError(f"data rows must have 3 or 4 entries, got {len(row)}")
        if p <= 0:
            raise FitError(f"pump powers must be > 0, got {p}")
        if w <= 0:
            raise FitError(f"weights must be > 0, got {w}")
        powers.append(float(p))
        sq.append(float(s))
        asq.append(np.nan if a is None else float(a))
        weights.append(w)
    powers = np.array(powers)
    if np.ptp(powers) == 0.0:
        raise FitError("all pump powers are equal; the curve is unconstrained")
    return powers, np.array(sq), np.array(asq), np.array(weights)
