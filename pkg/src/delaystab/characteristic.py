"""Characteristic function of the loop and its pole-free numerator.

Away from lambda = -alpha the eigenvalues of the system operator are exactly
the zeros of

    char_fn(lambda) = 1 - beta*exp(-lambda*tau) * phi(w) * (l/f) / (lambda + alpha)

with w = (lambda + delta)*l/f and phi(w) = (1 - exp(-w))/w extended by
phi(0) = 1.  The entire numerator

    char_num(lambda) = (lambda + alpha)*(lambda + delta)*char_fn(lambda)

is what the contour machinery counts; it carries a structural zero at
lambda = -delta that is an eigenvalue only under the condition reported by
``exclusions``.  All evaluators accept scalars or numpy arrays of lambda.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import PoleAtMinusAlpha
from .params import SystemParams

# |w| below this evaluates phi and phi' by truncated series; the direct
# quotient loses relative accuracy through the 1 - exp(-w) cancellation.
_SERIES_SWITCH = 1e-6
_POLE_TOL = 1e-12


def _quiet(fn):
    # Newton iterates may wander to extreme lambda where exp overflows;
    # callers check finiteness, so the numpy warnings are just noise.
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return fn(*args, **kwargs)

    return wrapper


@_quiet
def _phi(w: np.ndarray) -> np.ndarray:
    """(1 - exp(-w))/w, entire, with the removable singularity at w = 0."""
    small = np.abs(w) < _SERIES_SWITCH
    ws = np.where(small, 1.0, w)
    direct = (1.0 - np.exp(-ws)) / ws
    series = 1.0 - w / 2.0 + w**2 / 6.0 - w**3 / 24.0 + w**4 / 120.0
    return np.where(small, series, direct)


@_quiet
def _phi_prime(w: np.ndarray) -> np.ndarray:
    """Derivative of _phi, with the same series switch near w = 0."""
    small = np.abs(w) < _SERIES_SWITCH
    ws = np.where(small, 1.0, w)
    direct = ((1.0 + ws) * np.exp(-ws) - 1.0) / (ws * ws)
    series = -0.5 + w / 3.0 - w**2 / 8.0 + w**3 / 30.0 - w**4 / 144.0
    return np.where(small, series, direct)


def _as_complex(lam) -> tuple[np.ndarray, bool]:
    arr = np.asarray(lam, dtype=complex)
    return arr, arr.ndim == 0


def _maybe_scalar(value: np.ndarray, scalar: bool):
    return complex(value) if scalar else value


@_quiet
def _deflated(params: SystemParams, lam):
    """char_num / (lambda + delta), entire; its zeros are the eigenvalues
    whenever beta != 0."""
    arr, scalar = _as_complex(lam)
    w = (arr + params.delta) * (params.l / params.f)
    val = (arr + params.alpha) - params.beta * np.exp(-arr * params.tau) * (
        params.l / params.f
    ) * _phi(w)
    return _maybe_scalar(val, scalar)


@_quiet
def _deflated_prime(params: SystemParams, lam):
    arr, scalar = _as_complex(lam)
    ratio = params.l / params.f
    w = (arr + params.delta) * ratio
    expl = np.exp(-arr * params.tau)
    val = 1.0 - params.beta * expl * ratio * (ratio * _phi_prime(w) - params.tau * _phi(w))
    return _maybe_scalar(val, scalar)


def _check_pole(params: SystemParams, arr: np.ndarray) -> None:
    if np.any(np.abs(arr + params.alpha) < _POLE_TOL * (1.0 + abs(params.alpha))):
        raise PoleAtMinusAlpha(
            f"characteristic function has a pole at lambda = {-params.alpha}"
        )


@_quiet
def char_fn(params: SystemParams, lam):
    """Characteristic function; zeros (away from -alpha) are the eigenvalues.

    Raises PoleAtMinusAlpha when |lambda + alpha| < 1e-12*(1 + |alpha|).
    At lambda = -delta the removable singularity is evaluated by series,
    giving the convention value 1 - beta*l*exp(delta*tau)/(f*(alpha - delta)).
    """
    arr, scalar = _as_complex(lam)
    _check_pole(params, arr)
    w = (arr + params.delta) * (params.l / params.f)
    val = 1.0 - params.beta * np.exp(-arr * params.tau) * (
        params.l / params.f
    ) * _phi(w) / (arr + params.alpha)
    return _maybe_scalar(val, scalar)


@_quiet
def char_fn_no_delay(params: SystemParams, lam):
    """Characteristic function of the delay-free (tau = 0) operator."""
    arr, scalar = _as_complex(lam)
    _check_pole(params, arr)
    w = (arr + params.delta) * (params.l / params.f)
    val = 1.0 - params.beta * (params.l / params.f) * _phi(w) / (arr + params.alpha)
    return _maybe_scalar(val, scalar)


@_quiet
def char_num(params: SystemParams, lam):
    """Entire numerator (lambda + alpha)(lambda + delta)*char_fn(lambda).

    No pole; char_num(-delta) = 0 exactly for every parameter point, and
    char_num(-alpha) vanishes iff beta = 0 or delta = alpha.
    """
    arr, scalar = _as_complex(lam)
    val = (arr + params.delta) * np.asarray(_deflated(params, arr))
    return _maybe_scalar(val, scalar)


@_quiet
def char_num_prime(params: SystemParams, lam):
    """Analytic derivative of char_num (used by Newton polishing)."""
    arr, scalar = _as_complex(lam)
    q = np.asarray(_deflated(params, arr))
    qp = np.asarray(_deflated_prime(params, arr))
    val = q + (arr + params.delta) * qp
    return _maybe_scalar(val, scalar)


@_quiet
def _num_with_scale(params: SystemParams, arr: np.ndarray):
    """char_num values plus a cancellation scale for on-zero detection."""
    ratio = params.l / params.f
    w = (arr + params.delta) * ratio
    coupling = params.beta * np.exp(-arr * params.tau) * ratio * _phi(w)
    q = (arr + params.alpha) - coupling
    vals = (arr + params.delta) * q
    scale = np.abs(arr + params.delta) * (np.abs(arr + params.alpha) + np.abs(coupling)) + 1.0
    return vals, scale


@_quiet
def _deflated_with_scale(params: SystemParams, arr: np.ndarray):
    ratio = params.l / params.f
    w = (arr + params.delta) * ratio
    coupling = params.beta * np.exp(-arr * params.tau) * ratio * _phi(w)
    vals = (arr + params.alpha) - coupling
    scale = np.abs(arr + params.alpha) + np.abs(coupling) + 1.0
    return vals, scale


@dataclass(frozen=True)
class ExclusionReport:
    """Structural facts about the zeros of char_num.

    minus_delta_is_eigen : -delta is a genuine eigenvalue (the deflated
                           numerator vanishes there too)
    minus_alpha_note     : -alpha is never an eigenvalue while beta != 0
    delta_equals_alpha   : degenerate case where the structural zero sits on
                           the pole; treated as excluded
    """

    minus_delta_is_eigen: bool
    minus_alpha_note: bool
    delta_equals_alpha: bool


def exclusions(params: SystemParams, tol: float = 1e-10) -> ExclusionReport:
    """Report whether -delta is an eigenvalue; requires beta != 0."""
    if params.beta == 0.0:
        raise ValueError("exclusions requires beta != 0")
    if params.delta == params.alpha:
        return ExclusionReport(
            minus_delta_is_eigen=False, minus_alpha_note=True, delta_equals_alpha=True
        )
    condition = 1.0 - params.beta * params.l * np.exp(params.delta * params.tau) / (
        params.f * (params.alpha - params.delta)
    )
    return ExclusionReport(
        minus_delta_is_eigen=bool(abs(condition) <= tol),
        minus_alpha_note=True,
        delta_equals_alpha=False,
    )
