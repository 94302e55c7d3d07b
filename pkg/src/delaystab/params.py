"""Parameter tuple of the feedback loop and its closed-form scalar quantities.

The model couples a transported concentration c(x,t) on a tube [0, l] to an
activation a(t) that feeds back into the transport source after a delay tau:

    dc/dt = -f dc/dx + beta*a - delta*c,   c(0,t) = 0,
    da/dt = c(l, t - tau) - alpha*a.

Everything in this module is a pure function of the six coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    InvalidParameter,
    NegativeTau,
    NonFiniteField,
    NonPositiveAlpha,
    NonPositiveF,
    NonPositiveL,
)

# |delta*l/f| below this switches the threshold gain to its delta -> 0 limit,
# where 1 - exp(-x) has lost too many digits to stay meaningful.
_DELTA_LIMIT_SWITCH = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """The six coefficients (alpha, beta, delta, l, f, tau).

    alpha : activation decay rate, > 0
    beta  : feedback gain, any real
    delta : concentration decay rate, any real
    l     : tube length, > 0
    f     : transport speed, > 0 (every closed form below divides by f)
    tau   : feedback delay, >= 0

    Construction validates ranges and finiteness; instances are immutable
    and safe to share across threads.
    """

    alpha: float
    beta: float
    delta: float
    l: float
    f: float
    tau: float

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "l", "f", "tau"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise NonFiniteField(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.alpha <= 0.0:
            raise NonPositiveAlpha(f"alpha must be > 0, got {self.alpha}")
        if self.l <= 0.0:
            raise NonPositiveL(f"l must be > 0, got {self.l}")
        if self.f <= 0.0:
            raise NonPositiveF(f"f must be > 0, got {self.f}")
        if self.tau < 0.0:
            raise NegativeTau(f"tau must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class DecayCertificate:
    """Witness of exponential energy decay.

    gamma          : energy weight used by the certificate
    rate           : guaranteed decay rate of the energy functional, > 0
    gamma_interval : admissible weight range (lo, hi], half-open on the left
    """

    gamma: float
    rate: float
    gamma_interval: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.gamma_interval
        if not (lo < self.gamma <= hi):
            raise InvalidParameter(
                f"gamma={self.gamma} outside admissible interval ({lo}, {hi}]"
            )
        if not self.rate > 0.0:
            raise InvalidParameter(f"certificate rate must be > 0, got {self.rate}")


def _require(cond: bool, exc: type[InvalidParameter], msg: str) -> None:
    if not cond:
        raise exc(msg)


def threshold_gain(alpha: float, delta: float, l: float, f: float) -> float:
    """Critical gain at which a zero-frequency eigenvalue appears.

    Returns alpha*delta/(1 - exp(-delta*l/f)); the delta -> 0 limit alpha*f/l
    is substituted once |delta*l/f| drops below 1e-9.  The value is also
    evaluated for delta < 0, but the oscillation fast path must not rely on
    it there.
    """
    _require(alpha > 0.0, NonPositiveAlpha, "alpha must be > 0")
    _require(l > 0.0, NonPositiveL, "l must be > 0")
    _require(f > 0.0, NonPositiveF, "f must be > 0")
    x = delta * l / f
    if abs(x) < _DELTA_LIMIT_SWITCH:
        return alpha * f / l
    return alpha * delta / -math.expm1(-x)


def eig_bound_radius(beta: float, delta: float) -> float:
    """Radius bounding |lambda| for every eigenvalue with Re lambda >= 0."""
    return 0.5 * (abs(delta) + math.sqrt(delta * delta + 8.0 * abs(beta)))


def monotonicity_margin(alpha: float, delta: float, l: float, f: float) -> float:
    """Margin deciding whether the real-axis gain map is increasing.

    Returns exp(delta*l/f) - 1 - (l/f)*alpha*delta/(alpha + delta).  A
    non-negative value puts the point in the regime where every gain above
    the threshold oscillates for all delays; callers branch on the sign.
    Requires alpha, delta, l, f > 0.
    """
    _require(alpha > 0.0, NonPositiveAlpha, "alpha must be > 0")
    _require(delta > 0.0, InvalidParameter, "monotonicity_margin requires delta > 0")
    _require(l > 0.0, NonPositiveL, "l must be > 0")
    _require(f > 0.0, NonPositiveF, "f must be > 0")
    try:
        grown = math.expm1(delta * l / f)
    except OverflowError:
        return math.inf
    return grown - (l / f) * alpha * delta / (alpha + delta)


def decay_certificate(
    params: SystemParams, gamma: float | None = None
) -> DecayCertificate | None:
    """Exponential-decay certificate for the energy functional, if one exists.

    The certificate applies when f*(2*alpha - beta) > 1, delta > beta*l/2 > 0
    and exp(tau) < f*(2*alpha - beta).  Its rate is

        min(gamma/2, alpha - beta/2 - 1/(2*gamma), delta - beta*l/2)

    with gamma defaulting to f*exp(-tau), the right endpoint of the
    admissible interval.  Returns None when the conditions fail, which does
    NOT imply instability.
    """
    damping = params.f * (2.0 * params.alpha - params.beta)
    if not damping > 1.0:
        return None
    if not (params.delta > 0.5 * params.beta * params.l > 0.0):
        return None
    if not math.exp(params.tau) < damping:
        return None

    gamma_lo = 1.0 / (2.0 * params.alpha - params.beta)
    gamma_hi = params.f * math.exp(-params.tau)
    if gamma is None:
        gamma = gamma_hi
    rate = min(
        0.5 * gamma,
        params.alpha - 0.5 * params.beta - 0.5 / gamma,
        params.delta - 0.5 * params.beta * params.l,
    )
    return DecayCertificate(gamma=gamma, rate=rate, gamma_interval=(gamma_lo, gamma_hi))
