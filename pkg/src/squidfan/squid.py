"""Flux dynamics of a symmetric two-junction SQUID.

The device is modelled with resistively-shunted junctions.  State
variables are the two junction phases; the circulating current follows
from flux quantization around the loop,

    phi1 - phi2 = 2*pi*(phi_a + beta_l*j/2),

with phi_a the applied flux in flux-quantum units, j the circulating
current in units of the junction critical current, and
beta_l = 2*L_sq*I_c/Phi0 the screening parameter.  Each junction obeys

    beta_c * phi_i'' + phi_i' = i_bias -/+ j - sin(phi_i),

in dimensionless time tau = t * 2*pi*I_c*R/Phi0 (signs fixed so
positive applied flux drives junction 1 toward critical current).
With beta_c = 0 (the overdamped default) the system is first order.

Above threshold the pair phase phi1 + phi2 advances steadily; each 4*pi
of advance is one emitted fluxon.  Rates are reported as the mean pair
phase velocity (phi1 + phi2)/2 per unit tau, which equals the physical
fluxon rate in units of I_c*R/Phi0.  Rate measurement is event based:
the integrator records first-passage times of the pair phase through
successive 4*pi targets and averages over complete inter-event
intervals, which is exact on the periodic running attractor.

The applied flux is ramped up linearly from zero before the settle
window so the device tracks its resting state adiabatically; the
measured threshold is then the fold at which the static state
disappears, independent of initial-condition artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .constants import PHI0
from .errors import IntegrationError, NoThresholdError

_TWO_PI = 2.0 * math.pi
_FOUR_PI = 4.0 * math.pi

# Integrator tuning.  The embedded-pair controller rarely shrinks the
# step below MAX_STEP for this smooth system; the cap keeps phase-slip
# interpolation accurate and results deterministic.
DEFAULT_MAX_STEP = 0.01
_RTOL = 1e-8
_ATOL = 1e-10
_H_MIN = 1e-12
_SPEED_EPS = 1e-12   # phase speed below which the state counts as static
_DISCARD_EVENTS = 3  # slip events dropped before rate averaging
_MIN_INTERVALS = 4   # complete intervals required for a nonzero rate
_MAX_INTERVALS = 64  # stop measuring once this many intervals are banked

# Measured rates below this normalized value count as zero (finite window).
RATE_FLOOR = 1e-6


@dataclass(frozen=True)
class SquidParams:
    """Physical identity of one dendrite/soma SQUID.

    ``l_sq`` is the geometric loop inductance; the default ``None``
    applies the standard beta_l = 1 sizing, l_sq = Phi0/(2*I_c).
    ``r_shunt`` scales the physical time unit Phi0/(2*pi*I_c*R) and does
    not enter the normalized dynamics.
    """

    bias_ratio: float          # I_b/I_c per junction, in [0, 1)
    ic: float = 300e-6         # junction critical current, A
    l_sq: float | None = None  # loop inductance, H (None -> Phi0/(2*ic))
    beta_c: float = 0.0        # Stewart-McCumber parameter, 0 = overdamped
    r_shunt: float = 1.0       # dimensionless shunt-resistance scale

    def __post_init__(self) -> None:
        if not 0.0 <= self.bias_ratio < 1.0:
            raise ValueError(f"bias_ratio must lie in [0, 1), got {self.bias_ratio}")
        if self.ic <= 0.0:
            raise ValueError(f"critical current must be positive, got {self.ic}")
        if self.l_sq is None:
            object.__setattr__(self, "l_sq", PHI0 / (2.0 * self.ic))
        if self.l_sq <= 0.0:
            raise ValueError(f"loop inductance must be positive, got {self.l_sq}")
        if self.beta_c < 0.0:
            raise ValueError(f"beta_c must be non-negative, got {self.beta_c}")
        if self.r_shunt <= 0.0:
            raise ValueError(f"r_shunt must be positive, got {self.r_shunt}")

    @property
    def beta_l(self) -> float:
        """Screening parameter 2*L_sq*I_c/Phi0."""
        return 2.0 * self.l_sq * self.ic / PHI0


@dataclass(frozen=True)
class ResponseCurve:
    """Sampled flux-to-rate response at one bias point.

    Samples are (applied flux in Phi0 units, rate in I_c*R/Phi0 units),
    sorted by flux.
    """

    bias_ratio: float
    samples: tuple[tuple[float, float], ...] = field(repr=False)

    def __post_init__(self) -> None:
        phis = [s[0] for s in self.samples]
        if any(b < a for a, b in zip(phis, phis[1:])):
            raise ValueError("samples must be sorted by applied flux")
        if any(s[1] < 0.0 for s in self.samples):
            raise ValueError("rates cannot be negative")

    @property
    def phis(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def rates(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    def max_rate(self) -> float:
        return max((s[1] for s in self.samples), default=0.0)


@njit(cache=True)
def _rhs(y1, y2, u1, u2, pa, ib, inv_pibl, beta_c):
    j = (y1 - y2 - _TWO_PI * pa) * inv_pibl
    f1 = ib - j - math.sin(y1)
    f2 = ib + j - math.sin(y2)
    if beta_c > 0.0:
        return u1, u2, (f1 - u1) / beta_c, (f2 - u2) / beta_c
    return f1, f2, 0.0, 0.0


@njit(cache=True)
def _flux_at(ts, phi_a, t_ramp):
    if ts >= t_ramp:
        return phi_a
    return phi_a * ts / t_ramp


@njit(cache=True)
def _rate_kernel(ib, beta_l, beta_c, phi_a, t_ramp, t_settle, t_measure, max_step):
    """Integrate the junction phases and return (rate, n_intervals, status).

    status: 0 = ok, 1 = adaptive step-size underflow.
    Cash-Karp 5(4) embedded pair, step capped at ``max_step``.
    """
    inv_pibl = 1.0 / (math.pi * beta_l)

    # Rest state at zero applied flux.
    y1 = math.asin(ib)
    y2 = y1
    u1 = 0.0
    u2 = 0.0

    t = 0.0
    h = max_step
    t1 = t_ramp
    t2 = t_ramp + t_settle
    t3 = t_ramp + t_settle + t_measure

    measuring = False
    target = 0.0
    n_ev = 0
    t_first = 0.0
    t_last = 0.0

    while t < t3:
        if not measuring and t >= t2:
            measuring = True
            s0 = y1 + y2
            target = _FOUR_PI * (math.floor(s0 / _FOUR_PI) + 1.0)

        # Never step across a phase boundary (flux kink, measure start).
        t_stop = t3
        if t < t1:
            t_stop = t1
        elif t < t2:
            t_stop = t2
        if t_stop - t < _H_MIN:
            t = t_stop
            continue
        if h > t_stop - t:
            h = t_stop - t

        a1, b1, c1, d1 = _rhs(y1, y2, u1, u2,
                              _flux_at(t, phi_a, t_ramp), ib, inv_pibl, beta_c)
        a2, b2, c2, d2 = _rhs(
            y1 + h * 0.2 * a1, y2 + h * 0.2 * b1,
            u1 + h * 0.2 * c1, u2 + h * 0.2 * d1,
            _flux_at(t + 0.2 * h, phi_a, t_ramp), ib, inv_pibl, beta_c)
        a3, b3, c3, d3 = _rhs(
            y1 + h * (0.075 * a1 + 0.225 * a2), y2 + h * (0.075 * b1 + 0.225 * b2),
            u1 + h * (0.075 * c1 + 0.225 * c2), u2 + h * (0.075 * d1 + 0.225 * d2),
            _flux_at(t + 0.3 * h, phi_a, t_ramp), ib, inv_pibl, beta_c)
        a4, b4, c4, d4 = _rhs(
            y1 + h * (0.3 * a1 - 0.9 * a2 + 1.2 * a3),
            y2 + h * (0.3 * b1 - 0.9 * b2 + 1.2 * b3),
            u1 + h * (0.3 * c1 - 0.9 * c2 + 1.2 * c3),
            u2 + h * (0.3 * d1 - 0.9 * d2 + 1.2 * d3),
            _flux_at(t + 0.6 * h, phi_a, t_ramp), ib, inv_pibl, beta_c)
        a5, b5, c5, d5 = _rhs(
            y1 + h * (-11.0 / 54.0 * a1 + 2.5 * a2 - 70.0 / 27.0 * a3 + 35.0 / 27.0 * a4),
            y2 + h * (-11.0 / 54.0 * b1 + 2.5 * b2 - 70.0 / 27.0 * b3 + 35.0 / 27.0 * b4),
            u1 + h * (-11.0 / 54.0 * c1 + 2.5 * c2 - 70.0 / 27.0 * c3 + 35.0 / 27.0 * c4),
            u2 + h * (-11.0 / 54.0 * d1 + 2.5 * d2 - 70.0 / 27.0 * d3 + 35.0 / 27.0 * d4),
            _flux_at(t + h, phi_a, t_ramp), ib, inv_pibl, beta_c)
        a6, b6, c6, d6 = _rhs(
            y1 + h * (1631.0 / 55296.0 * a1 + 175.0 / 512.0 * a2 + 575.0 / 13824.0 * a3
                      + 44275.0 / 110592.0 * a4 + 253.0 / 4096.0 * a5),
            y2 + h * (1631.0 / 55296.0 * b1 + 175.0 / 512.0 * b2 + 575.0 / 13824.0 * b3
                      + 44275.0 / 110592.0 * b4 + 253.0 / 4096.0 * b5),
            u1 + h * (1631.0 / 55296.0 * c1 + 175.0 / 512.0 * c2 + 575.0 / 13824.0 * c3
                      + 44275.0 / 110592.0 * c4 + 253.0 / 4096.0 * c5),
            u2 + h * (1631.0 / 55296.0 * d1 + 175.0 / 512.0 * d2 + 575.0 / 13824.0 * d3
                      + 44275.0 / 110592.0 * d4 + 253.0 / 4096.0 * d5),
            _flux_at(t + 0.875 * h, phi_a, t_ramp), ib, inv_pibl, beta_c)

        # 5th-order solution and embedded 4th-order error estimate.
        y1n = y1 + h * (37.0 / 378.0 * a1 + 250.0 / 621.0 * a3 + 125.0 / 594.0 * a4 + 512.0 / 1771.0 * a6)
        y2n = y2 + h * (37.0 / 378.0 * b1 + 250.0 / 621.0 * b3 + 125.0 / 594.0 * b4 + 512.0 / 1771.0 * b6)
        u1n = u1 + h * (37.0 / 378.0 * c1 + 250.0 / 621.0 * c3 + 125.0 / 594.0 * c4 + 512.0 / 1771.0 * c6)
        u2n = u2 + h * (37.0 / 378.0 * d1 + 250.0 / 621.0 * d3 + 125.0 / 594.0 * d4 + 512.0 / 1771.0 * d6)

        e1 = h * ((37.0 / 378.0 - 2825.0 / 27648.0) * a1 + (250.0 / 621.0 - 18575.0 / 48384.0) * a3
                  + (125.0 / 594.0 - 13525.0 / 55296.0) * a4 - 277.0 / 14336.0 * a5
                  + (512.0 / 1771.0 - 0.25) * a6)
        e2 = h * ((37.0 / 378.0 - 2825.0 / 27648.0) * b1 + (250.0 / 621.0 - 18575.0 / 48384.0) * b3
                  + (125.0 / 594.0 - 13525.0 / 55296.0) * b4 - 277.0 / 14336.0 * b5
                  + (512.0 / 1771.0 - 0.25) * b6)
        e3 = h * ((37.0 / 378.0 - 2825.0 / 27648.0) * c1 + (250.0 / 621.0 - 18575.0 / 48384.0) * c3
                  + (125.0 / 594.0 - 13525.0 / 55296.0) * c4 - 277.0 / 14336.0 * c5
                  + (512.0 / 1771.0 - 0.25) * c6)
        e4 = h * ((37.0 / 378.0 - 2825.0 / 27648.0) * d1 + (250.0 / 621.0 - 18575.0 / 48384.0) * d3
                  + (125.0 / 594.0 - 13525.0 / 55296.0) * d4 - 277.0 / 14336.0 * d5
                  + (512.0 / 1771.0 - 0.25) * d6)

        err = abs(e1) / (_ATOL + _RTOL * abs(y1n))
        r = abs(e2) / (_ATOL + _RTOL * abs(y2n))
        if r > err:
            err = r
        r = abs(e3) / (_ATOL + _RTOL * abs(u1n))
        if r > err:
            err = r
        r = abs(e4) / (_ATOL + _RTOL * abs(u2n))
        if r > err:
            err = r

        if err > 1.0:
            h = h * max(0.1, 0.9 * err**-0.25)
            if h < _H_MIN:
                return 0.0, 0, 1
            continue

        t_new = t + h
        if measuring:
            s_old = y1 + y2
            s_new = y1n + y2n
            if s_new >= target:
                t_ev = t + h * (target - s_old) / (s_new - s_old)
                n_ev += 1
                if n_ev == _DISCARD_EVENTS:
                    t_first = t_ev
                elif n_ev > _DISCARD_EVENTS:
                    t_last = t_ev
                target += _FOUR_PI
                if n_ev - _DISCARD_EVENTS >= _MAX_INTERVALS:
                    n_int = n_ev - _DISCARD_EVENTS
                    return _TWO_PI * n_int / (t_last - t_first), n_int, 0

        y1, y2, u1, u2, t = y1n, y2n, u1n, u2n, t_new

        # Static state: nothing will ever fire; skip the rest of the window.
        if t >= t1:
            speed = abs(a1) + abs(b1)
            if beta_c > 0.0:
                speed += abs(u1) + abs(u2)
            if speed < _SPEED_EPS and n_ev == 0:
                return 0.0, 0, 0

        if err > 1e-10:
            h = min(max_step, h * min(5.0, 0.9 * err**-0.2))
        else:
            h = max_step

    n_int = n_ev - _DISCARD_EVENTS
    if n_int >= _MIN_INTERVALS:
        return _TWO_PI * n_int / (t_last - t_first), n_int, 0
    return 0.0, max(n_int, 0), 0


def simulate_rfq(
    params: SquidParams,
    phi_applied: float,
    t_settle: float = 300.0,
    t_measure: float = 3000.0,
    *,
    t_ramp: float = 100.0,
    max_step: float = DEFAULT_MAX_STEP,
) -> float:
    """Time-averaged fluxon-production rate at one applied flux.

    Args:
        params: SQUID parameters.
        phi_applied: applied flux in Phi0 units (any real value).
        t_settle: transient discarded before measuring, normalized time.
        t_measure: maximum measurement window; must be long enough to
            capture at least ~20 fluxons when above threshold.
        t_ramp: duration of the initial linear flux ramp from zero.
        max_step: integrator step cap (must stay at or below 0.01).

    Returns:
        Rate in I_c*R/Phi0 units; exactly 0.0 below threshold.
    """
    if t_settle < 0.0 or t_measure <= 0.0 or t_ramp < 0.0:
        raise ValueError("durations must be non-negative and t_measure positive")
    if not 0.0 < max_step <= DEFAULT_MAX_STEP:
        raise ValueError(f"max_step must lie in (0, {DEFAULT_MAX_STEP}], got {max_step}")
    rate, _n, status = _rate_kernel(
        params.bias_ratio, params.beta_l, params.beta_c, float(phi_applied),
        t_ramp, t_settle, t_measure, max_step,
    )
    if status != 0:
        raise IntegrationError(
            f"step-size underflow integrating at phi_applied={phi_applied}"
        )
    return rate if rate >= RATE_FLOOR else 0.0


def sweep_response(
    params: SquidParams,
    phi_min: float,
    phi_max: float,
    n_points: int,
    **sim_kwargs,
) -> ResponseCurve:
    """Sample the response on an equally spaced flux grid."""
    if phi_min >= phi_max:
        raise ValueError(f"need phi_min < phi_max, got [{phi_min}, {phi_max}]")
    if n_points < 2:
        raise ValueError(f"need at least 2 points, got {n_points}")
    samples = []
    for phi in np.linspace(phi_min, phi_max, n_points):
        try:
            rate = simulate_rfq(params, float(phi), **sim_kwargs)
        except IntegrationError as exc:
            raise IntegrationError(f"sweep failed at phi_applied={phi}: {exc}") from exc
        samples.append((float(phi), rate))
    return ResponseCurve(bias_ratio=params.bias_ratio, samples=tuple(samples))


def find_threshold_flux(
    params: SquidParams,
    tol: float = 1e-3,
    **sim_kwargs,
) -> float:
    """Smallest applied flux in [0, 0.5] with a nonzero rate, by bisection.

    Raises :class:`NoThresholdError` when the device stays quiet over the
    whole bracket (bias too low to ever fire).
    """
    if not 0.0 < params.bias_ratio < 1.0:
        raise ValueError(f"threshold search needs 0 < bias_ratio < 1, got {params.bias_ratio}")
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if simulate_rfq(params, 0.5, **sim_kwargs) <= 0.0:
        raise NoThresholdError(
            f"no fluxon production anywhere in [0, 0.5] at bias_ratio={params.bias_ratio}"
        )
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if simulate_rfq(params, mid, **sim_kwargs) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi
