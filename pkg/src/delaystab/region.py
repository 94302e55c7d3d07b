"""Stability-region classification and bifurcation boundary tracing.

A parameter point is a stable steady state when every eigenvalue has
negative real part, oscillates when some eigenvalue has positive real part,
and sits on the boundary band when the spectral bound is numerically zero.
Exact membership of the boundary set has measure zero, so it is reported as
the band |max Re lambda| <= eps0.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .characteristic import char_fn
from .eigensolver import BelowThreshold, spectral_bound
from .errors import (
    BracketingFailed,
    DelayStabError,
    DenominatorVanishes,
    InvalidParameter,
    NonPositiveF,
    NonPositiveL,
)
from .params import (
    SystemParams,
    decay_certificate,
    eig_bound_radius,
    monotonicity_margin,
    threshold_gain,
)

_OMEGA_SCAN_POINTS = 4000
_OMEGA_XTOL = 1e-12
_DENOM_TOL = 1e-14
_RESIDUAL_TOL = 1e-8


class Label(str, Enum):
    STABLE_STEADY_STATE = "StableSteadyState"
    LIMIT_CYCLE_OSCILLATION = "LimitCycleOscillation"
    BOUNDARY_BAND = "BoundaryBand"


class Evidence(str, Enum):
    SPECTRAL_SEARCH = "SpectralSearch"
    DECAY_CERTIFICATE = "DecayCertificate"
    GAIN_THRESHOLD_ALL_TAU = "GainThresholdAllTau"
    GAIN_THRESHOLD_TAU_WINDOW = "GainThresholdTauWindow"


@dataclass(frozen=True)
class RegionLabel:
    """Classification of one parameter point.

    max_real_part is the spectral bound when evidence is SpectralSearch, a
    BelowThreshold witness when the decay certificate applies, and None when
    a gain-threshold fast path decided without locating eigenvalues.
    """

    label: Label
    evidence: Evidence
    max_real_part: float | BelowThreshold | None


@dataclass(frozen=True)
class BoundaryPoint:
    """One traced point of the oscillation boundary.

    omega is the imaginary-axis frequency (only omega >= 0 is stored; the
    mirror -omega crossing carries the same beta), and residual is the
    characteristic-function modulus at i*omega after substituting beta.
    """

    tau: float
    beta: float
    omega: float
    residual: float


@dataclass(frozen=True)
class TraceResult:
    points: tuple[BoundaryPoint, ...]
    failures: tuple[tuple[float, str], ...] = ()


@dataclass(frozen=True)
class SweepNode:
    tau: float
    beta: float
    result: RegionLabel | None
    error: str | None = None


class FastPath(Enum):
    OSCILLATES_ALL_TAU = "OscillatesAllTau"
    OSCILLATES_TAU_WINDOW = "OscillatesTauWindow"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class FastPathResult:
    kind: FastPath
    tau_upper: float | None = None


def oscillation_fast_path(
    fixed: tuple[float, float, float, float], beta: float
) -> FastPathResult:
    """Analytic oscillation test for gains above the threshold.

    fixed = (alpha, delta, l, f) with delta > 0 and f > 0.  Gains at or
    below the threshold are Undecided.  Above it, a non-negative
    monotonicity margin yields oscillation for every delay; otherwise the
    point oscillates for delays up to -ln(threshold/beta)/x0, where x0 > 0
    is where the real-axis gain map returns to the threshold value.
    """
    alpha, delta, l, f = fixed
    if delta <= 0.0:
        raise InvalidParameter("oscillation fast path requires delta > 0")
    if f <= 0.0:
        raise NonPositiveF("oscillation fast path requires f > 0")
    b0 = threshold_gain(alpha, delta, l, f)
    if beta <= b0:
        return FastPathResult(FastPath.UNDECIDED)
    if monotonicity_margin(alpha, delta, l, f) >= 0.0:
        return FastPathResult(FastPath.OSCILLATES_ALL_TAU)

    def gain_gap(x: float) -> float:
        return (x + alpha) * (x + delta) / -math.expm1(-(x + delta) * l / f) - b0

    x0 = _return_to_zero(gain_gap)
    return FastPathResult(FastPath.OSCILLATES_TAU_WINDOW, -math.log(b0 / beta) / x0)


def _return_to_zero(fn) -> float:
    """Positive root of fn given fn(0) = 0 and an initial dip below zero."""
    x_neg = None
    x = 1.0
    for _ in range(80):
        if fn(x) < 0.0:
            x_neg = x
            break
        x /= 2.0
    if x_neg is None:
        raise BracketingFailed("no negative value of the gain gap found near 0")
    x = max(1.0, 2.0 * x_neg)
    for _ in range(80):
        if fn(x) > 0.0:
            return float(brentq(fn, x_neg, x, xtol=1e-14, rtol=8.9e-16))
        x_neg = x
        x *= 2.0
    raise BracketingFailed("gain gap never became positive while doubling")


def classify(params: SystemParams, eps0: float = 1e-8) -> RegionLabel:
    """Label one parameter point, preferring analytic evidence to numerics.

    Order: decay certificate, then the gain-threshold fast paths (delta > 0
    only), then a spectral search with sigma = 1000*eps0 thresholded at
    +/- eps0.
    """
    if eps0 <= 0.0:
        raise ValueError(f"eps0 must be > 0, got {eps0}")
    cert = decay_certificate(params)
    if cert is not None:
        return RegionLabel(
            Label.STABLE_STEADY_STATE,
            Evidence.DECAY_CERTIFICATE,
            BelowThreshold(-0.5 * cert.rate),
        )
    if params.delta > 0.0:
        fast = oscillation_fast_path(
            (params.alpha, params.delta, params.l, params.f), params.beta
        )
        if fast.kind is FastPath.OSCILLATES_ALL_TAU:
            return RegionLabel(
                Label.LIMIT_CYCLE_OSCILLATION, Evidence.GAIN_THRESHOLD_ALL_TAU, None
            )
        if fast.kind is FastPath.OSCILLATES_TAU_WINDOW and params.tau <= fast.tau_upper:
            return RegionLabel(
                Label.LIMIT_CYCLE_OSCILLATION, Evidence.GAIN_THRESHOLD_TAU_WINDOW, None
            )
    bound = spectral_bound(params, sigma=eps0 * 1e3)
    if isinstance(bound, BelowThreshold) or bound < -eps0:
        return RegionLabel(Label.STABLE_STEADY_STATE, Evidence.SPECTRAL_SEARCH, bound)
    if bound > eps0:
        return RegionLabel(Label.LIMIT_CYCLE_OSCILLATION, Evidence.SPECTRAL_SEARCH, bound)
    return RegionLabel(Label.BOUNDARY_BAND, Evidence.SPECTRAL_SEARCH, bound)


def _classify_node(args) -> SweepNode:
    fixed, beta, tau, eps0 = args
    alpha, delta, l, f = fixed
    try:
        params = SystemParams(alpha, beta, delta, l, f, tau)
        return SweepNode(tau=tau, beta=beta, result=classify(params, eps0))
    except (DelayStabError, ValueError) as exc:
        return SweepNode(tau=tau, beta=beta, result=None, error=str(exc))


def sweep(
    fixed: tuple[float, float, float, float],
    beta_range: tuple[float, float],
    tau_range: tuple[float, float],
    grid_counts: tuple[int, int],
    eps0: float = 1e-8,
    workers: int = 1,
) -> list[SweepNode]:
    """Classify a (beta, tau) grid; row-major with beta as the outer index.

    grid_counts = (n_beta, n_tau), both >= 2.  Per-node failures are
    recorded on the node and do not stop the sweep.  With workers > 1 the
    nodes are classified in a process pool; output order is deterministic
    either way.
    """
    n_beta, n_tau = grid_counts
    if n_beta < 2 or n_tau < 2:
        raise ValueError(f"grid_counts must be >= 2 each, got {grid_counts}")
    if not all(map(math.isfinite, (*beta_range, *tau_range))):
        raise ValueError("sweep ranges must be finite")
    betas = np.linspace(beta_range[0], beta_range[1], n_beta)
    taus = np.linspace(tau_range[0], tau_range[1], n_tau)
    jobs = [
        (fixed, float(beta), float(tau), eps0) for beta in betas for tau in taus
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_classify_node, jobs, chunksize=8))
    return [_classify_node(job) for job in jobs]


def _axis_gain(fixed, omega, tau):
    """Complex gain making i*omega an eigenvalue at delay tau (vectorized).

    Callers mask or reject entries whose returned denominator modulus is
    below tolerance; those slots divide to non-finite values here.
    """
    alpha, delta, l, f = fixed
    iw = 1j * np.asarray(omega, dtype=float)
    den = 1.0 - np.exp(-(iw + delta) * l / f)
    with np.errstate(invalid="ignore", divide="ignore"):
        value = np.exp(iw * tau) * (iw + alpha) * (iw + delta) / den
    return value, np.abs(den)


def _axis_gain_scalar(fixed, omega: float, tau: float) -> complex:
    alpha, delta, l, f = fixed
    if l <= 0.0:
        raise NonPositiveL("l must be > 0")
    if f <= 0.0:
        raise NonPositiveF("f must be > 0")
    value, den = _axis_gain(fixed, omega, tau)
    if den < _DENOM_TOL:
        raise DenominatorVanishes(
            f"axis gain denominator vanishes at omega={omega}, delta={delta}"
        )
    return complex(value)


def phase_residual(fixed, omega: float, tau: float) -> float:
    """Imaginary part of the axis gain; zero iff a real gain puts an
    eigenvalue at i*omega for this delay.  Odd in omega."""
    return _axis_gain_scalar(fixed, omega, tau).imag


def beta_on_axis(fixed, omega: float, tau: float) -> float:
    """Real part of the axis gain; the gain that places an eigenvalue at
    i*omega once phase_residual vanishes there."""
    return _axis_gain_scalar(fixed, omega, tau).real


def _omega_roots(fixed, tau: float, omega_max: float) -> list[float]:
    grid = np.linspace(0.0, omega_max, _OMEGA_SCAN_POINTS)
    values, dens = _axis_gain(fixed, grid, tau)
    imag = values.imag
    valid = dens >= _DENOM_TOL
    roots = [float(w) for w, v, ok in zip(grid, imag, valid) if ok and v == 0.0]

    def f(w: float) -> float:
        return phase_residual(fixed, w, tau)

    for i in range(len(grid) - 1):
        if not (valid[i] and valid[i + 1]):
            continue
        a, b = imag[i], imag[i + 1]
        if a == 0.0 or b == 0.0 or (a < 0.0) == (b < 0.0):
            continue
        roots.append(float(brentq(f, grid[i], grid[i + 1], xtol=_OMEGA_XTOL, rtol=8.9e-16)))
    deduped: list[float] = []
    for w in sorted(roots):
        if not deduped or w - deduped[-1] > 1e-9:
            deduped.append(w)
    return deduped


def trace_boundary(
    fixed: tuple[float, float, float, float],
    tau_max: float,
    num_tau: int,
    omega_max: float,
) -> TraceResult:
    """Trace the oscillation boundary over a uniform delay grid.

    For each of num_tau delays spanning [0, tau_max], all real crossing
    frequencies omega in [0, omega_max] are located by a 4000-point sign
    scan plus bisection, the matching gain is read off, and the point is
    kept only if the characteristic residual at i*omega stays below 1e-8.
    Per-delay failures are recorded and skipped.
    """
    if tau_max <= 0.0 or num_tau < 2:
        raise ValueError("need tau_max > 0 and num_tau >= 2")
    alpha, delta, l, f = fixed
    points: list[BoundaryPoint] = []
    failures: list[tuple[float, str]] = []
    for p in range(num_tau):
        tau = p * tau_max / (num_tau - 1)
        try:
            omegas = _omega_roots(fixed, tau, omega_max)
        except (DelayStabError, ValueError) as exc:
            failures.append((tau, str(exc)))
            continue
        for omega in omegas:
            try:
                beta = beta_on_axis(fixed, omega, tau)
                params = SystemParams(alpha, beta, delta, l, f, tau)
                residual = abs(char_fn(params, 1j * omega))
            except (DelayStabError, ValueError) as exc:
                failures.append((tau, f"omega={omega}: {exc}"))
                continue
            if residual <= _RESIDUAL_TOL:
                points.append(BoundaryPoint(tau=tau, beta=beta, omega=omega, residual=residual))
            else:
                failures.append((tau, f"omega={omega}: residual {residual:.3e}"))
    return TraceResult(points=tuple(points), failures=tuple(failures))


def axis_crossing_candidates(params: SystemParams) -> list[float]:
    """Non-negative frequencies where an imaginary-axis eigenvalue is
    possible on modulus grounds (delay-independent necessary condition).

    Solves |i*omega + alpha|^2 |i*omega + delta|^2 =
    beta^2 * |1 - exp(-(i*omega + delta) l/f)|^2 by sign scan and bisection;
    the quartic left side dominates beyond the scan ceiling, so the list is
    finite.
    """
    alpha, delta, l, f = params.alpha, params.delta, params.l, params.f
    x = delta * l / f
    gain_sq = params.beta * params.beta

    def mismatch(omega):
        omega = np.asarray(omega, dtype=float)
        lhs = (omega**2 + alpha**2) * (omega**2 + delta**2)
        rhs = gain_sq * (
            1.0 + math.exp(-2.0 * x) - 2.0 * math.exp(-x) * np.cos(omega * l / f)
        )
        return lhs - rhs

    ceiling = eig_bound_radius(params.beta, params.delta) + 1.0
    if delta < 0.0:
        ceiling = max(
            ceiling, math.sqrt(abs(params.beta) * (1.0 + math.exp(-x))) + 1.0
        )
    roots: list[float] = []
    scale0 = delta**2 * alpha**2 + gain_sq * math.expm1(-x) ** 2 + 1.0
    if abs(float(mismatch(0.0))) <= 1e-12 * scale0:
        roots.append(0.0)
    grid = np.linspace(0.0, ceiling, _OMEGA_SCAN_POINTS)
    vals = mismatch(grid)
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
            continue
        if (a < 0.0) != (b < 0.0):
            roots.append(
                float(
                    brentq(
                        lambda w: float(mismatch(w)),
                        grid[i],
                        grid[i + 1],
                        xtol=_OMEGA_XTOL,
                        rtol=8.9e-16,
                    )
                )
            )
    deduped: list[float] = []
    for w in sorted(roots):
        if not deduped or w - deduped[-1] > 1e-9:
            deduped.append(w)
    return deduped
