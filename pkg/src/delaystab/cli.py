"""Command-line front end: spectra, classification, sweeps, boundary traces,
simulations and decay certificates, serialized as CSV, JSON or SVG.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
Identical flags produce byte-identical output; floats are written in their
shortest round-trip form.  The DDE_THREADS environment variable caps the
worker count used by ``sweep``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from .eigensolver import BelowThreshold, spectrum
from .errors import DelayStabError, InvalidParameter
from .params import SystemParams, decay_certificate, eig_bound_radius
from .region import Label, sweep, trace_boundary, _classify_node
from .simulator import SimConfig, run as run_sim, sine_profile, zero_fn

_SCHEMA_VERSION = 1

_SWEEP_COLORS = {
    Label.STABLE_STEADY_STATE.value: "#4878cf",
    Label.LIMIT_CYCLE_OSCILLATION.value: "#d65f5f",
    Label.BOUNDARY_BAND.value: "#eead33",
    "": "#bbbbbb",
}


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def _bound_field(bound) -> object:
    if isinstance(bound, BelowThreshold):
        return f"<{bound.threshold!r}"
    return bound


def _write_csv(stream, header, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _write_json(stream, command, header, rows) -> None:
    payload = {
        "schema_version": _SCHEMA_VERSION,
        "command": command,
        "rows": [dict(zip(header, row)) for row in rows],
    }
    json.dump(payload, stream, indent=2)
    stream.write("\n")


def _emit(args, command, header, rows, svg: str | None = None) -> None:
    if args.format == "svg":
        if svg is None:
            raise InvalidParameter(f"--format svg is not valid for {command}")
        text = svg
    else:
        buf = io.StringIO()
        if args.format == "csv":
            _write_csv(buf, header, rows)
        else:
            _write_json(buf, command, header, rows)
        text = buf.getvalue()
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)


def _add_param_flags(parser: argparse.ArgumentParser, with_beta_tau: bool = True) -> None:
    parser.add_argument("--alpha", type=float, required=True)
    parser.add_argument("--delta", type=float, required=True)
    parser.add_argument("--l", type=float, required=True)
    parser.add_argument("--f", type=float, required=True)
    if with_beta_tau:
        parser.add_argument("--beta", type=float, required=True)
        parser.add_argument("--tau", type=float, required=True)


def _add_output_flags(parser: argparse.ArgumentParser, formats=("csv", "json")) -> None:
    parser.add_argument("--format", choices=formats, default="csv")
    parser.add_argument("--output", default="-", help="output path, '-' for stdout")


def _params_from(args) -> SystemParams:
    return SystemParams(args.alpha, args.beta, args.delta, args.l, args.f, args.tau)


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise InvalidParameter(f"range must look like A:B, got {text!r}") from exc
    return lo, hi


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        n_tau, n_beta = (int(part) for part in text.lower().split("x"))
    except ValueError as exc:
        raise InvalidParameter(f"grid must look like NTAUxNBETA, got {text!r}") from exc
    return n_tau, n_beta


def _svg_doc(width, height, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


class _Frame:
    """Maps (tau, beta) data coordinates onto a fixed SVG plot frame."""

    def __init__(self, tau_range, beta_range):
        self.width, self.height = 720, 540
        self.left, self.right, self.top, self.bottom = 70.0, 20.0, 20.0, 50.0
        self.tau_lo, self.tau_hi = tau_range
        self.beta_lo, self.beta_hi = beta_range

    @property
    def plot_w(self):
        return self.width - self.left - self.right

    @property
    def plot_h(self):
        return self.height - self.top - self.bottom

    def x(self, tau: float) -> float:
        return self.left + (tau - self.tau_lo) / (self.tau_hi - self.tau_lo) * self.plot_w

    def y(self, beta: float) -> float:
        return self.top + (self.beta_hi - beta) / (self.beta_hi - self.beta_lo) * self.plot_h

    def axes(self) -> list[str]:
        parts = [
            f'<rect x="{self.left:.2f}" y="{self.top:.2f}" width="{self.plot_w:.2f}" '
            f'height="{self.plot_h:.2f}" fill="none" stroke="#000000" stroke-width="1"/>'
        ]
        for frac in (0.0, 0.5, 1.0):
            tau = self.tau_lo + frac * (self.tau_hi - self.tau_lo)
            beta = self.beta_lo + frac * (self.beta_hi - self.beta_lo)
            parts.append(
                f'<text x="{self.x(tau):.2f}" y="{self.height - 28:.2f}" font-size="12" '
                f'text-anchor="middle">{tau:.3g}</text>'
            )
            parts.append(
                f'<text x="{self.left - 8:.2f}" y="{self.y(beta) + 4:.2f}" font-size="12" '
                f'text-anchor="end">{beta:.3g}</text>'
            )
        parts.append(
            f'<text x="{self.left + self.plot_w / 2:.2f}" y="{self.height - 8:.2f}" '
            f'font-size="14" text-anchor="middle">tau</text>'
        )
        parts.append(
            f'<text x="16" y="{self.top + self.plot_h / 2:.2f}" font-size="14" '
            f'text-anchor="middle" transform="rotate(-90 16 {self.top + self.plot_h / 2:.2f})">beta</text>'
        )
        return parts


def _sweep_svg(nodes, tau_range, beta_range, n_tau, n_beta) -> str:
    frame = _Frame(tau_range, beta_range)
    cell_w = frame.plot_w / n_tau
    cell_h = frame.plot_h / n_beta
    body = []
    for idx, node in enumerate(nodes):
        i_beta, i_tau = divmod(idx, n_tau)
        label = node.result.label.value if node.result else ""
        color = _SWEEP_COLORS.get(label, "#bbbbbb")
        x = frame.left + i_tau * cell_w
        y = frame.top + frame.plot_h - (i_beta + 1) * cell_h
        body.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell_w:.2f}" height="{cell_h:.2f}" '
            f'fill="{color}"/>'
        )
    body.extend(frame.axes())
    legend_y = frame.top + 6
    for label, color in list(_SWEEP_COLORS.items())[:3]:
        body.append(
            f'<rect x="{frame.left + 6:.2f}" y="{legend_y:.2f}" width="12" height="12" '
            f'fill="{color}" stroke="#000000" stroke-width="0.5"/>'
        )
        body.append(
            f'<text x="{frame.left + 22:.2f}" y="{legend_y + 10:.2f}" font-size="11">{label}</text>'
        )
        legend_y += 16
    return _svg_doc(frame.width, frame.height, body)


def _trace_svg(points) -> str:
    if points:
        beta_lo = min(p.beta for p in points)
        beta_hi = max(p.beta for p in points)
        tau_hi = max(p.tau for p in points)
    else:
        beta_lo, beta_hi, tau_hi = -1.0, 1.0, 1.0
    if beta_hi - beta_lo < 1e-12:
        beta_lo, beta_hi = beta_lo - 1.0, beta_hi + 1.0
    frame = _Frame((0.0, max(tau_hi, 1e-12)), (beta_lo, beta_hi))
    body = frame.axes()
    for p in points:
        body.append(
            f'<circle cx="{frame.x(p.tau):.2f}" cy="{frame.y(p.beta):.2f}" r="1.5" '
            f'fill="#333333"/>'
        )
    return _svg_doc(frame.width, frame.height, body)


def _cmd_eig(args) -> int:
    params = _params_from(args)
    result = spectrum(params, args.sigma, tol=args.tol)
    header = ["re", "im", "residual", "structural"]
    rows = []
    for root in result.roots:
        for _ in range(root.multiplicity):
            rows.append([root.lam.real, root.lam.imag, root.residual, root.structural])
    _emit(args, "eig", header, rows)
    return 0


def _cmd_classify(args) -> int:
    node = _classify_node(((args.alpha, args.delta, args.l, args.f), args.beta, args.tau, args.eps0))
    if node.error is not None:
        raise InvalidParameter(node.error)
    header = ["label", "evidence", "max_real_part"]
    rows = [[node.result.label.value, node.result.evidence.value, _bound_field(node.result.max_real_part)]]
    _emit(args, "classify", header, rows)
    return 0


def _cmd_sweep(args) -> int:
    n_tau, n_beta = _parse_grid(args.grid)
    beta_range = _parse_range(args.beta_range)
    tau_range = _parse_range(args.tau_range)
    fixed = (args.alpha, args.delta, args.l, args.f)
    workers = int(os.environ.get("DDE_THREADS", "1"))
    nodes = sweep(fixed, beta_range, tau_range, (n_beta, n_tau), eps0=args.eps0, workers=workers)
    header = ["tau", "beta", "label", "evidence", "max_real_part", "error"]
    rows = []
    for node in nodes:
        if node.result is None:
            rows.append([node.tau, node.beta, "", "", "", node.error or ""])
        else:
            rows.append(
                [
                    node.tau,
                    node.beta,
                    node.result.label.value,
                    node.result.evidence.value,
                    _bound_field(node.result.max_real_part),
                    "",
                ]
            )
    svg = _sweep_svg(nodes, tau_range, beta_range, n_tau, n_beta)
    _emit(args, "sweep", header, rows, svg=svg)
    return 0


def _cmd_trace_r0(args) -> int:
    fixed = (args.alpha, args.delta, args.l, args.f)
    omega_max = args.omega_max
    if omega_max is None:
        omega_max = eig_bound_radius(10.0, args.delta) + 1.0
    result = trace_boundary(fixed, args.tau_max, args.steps, omega_max)
    for tau, message in result.failures:
        print(f"trace-r0: tau={tau!r}: {message}", file=sys.stderr)
    header = ["tau", "omega", "beta", "residual"]
    rows = [[p.tau, p.omega, p.beta, p.residual] for p in result.points]
    _emit(args, "trace-r0", header, rows, svg=_trace_svg(result.points))
    return 0


def _cmd_simulate(args) -> int:
    params = _params_from(args)
    gamma = args.gamma
    if gamma is None:
        gamma = params.f * math.exp(-params.tau)
    config = SimConfig(nx=args.nx, t_final=args.t_final, gamma=gamma, output_stride=args.stride)
    c0 = sine_profile(params.l) if args.c0 == "sine" else zero_fn
    _, etrace = run_sim(params, config, c0, args.a0, zero_fn)
    header = ["t", "E", "a_sq", "c_l"]
    rows = [[s.t, s.energy, s.a_sq, s.c_l] for s in etrace.samples]
    _emit(args, "simulate", header, rows)
    return 0


def _cmd_certify(args) -> int:
    params = _params_from(args)
    cert = decay_certificate(params, gamma=args.gamma)
    header = ["applicable", "gamma", "rate", "gamma_lo", "gamma_hi"]
    if cert is None:
        rows = [[False, None, None, None, None]]
    else:
        rows = [[True, cert.gamma, cert.rate, cert.gamma_interval[0], cert.gamma_interval[1]]]
    _emit(args, "certify", header, rows)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delaystab",
        description="Spectral stability analysis of a delayed transport feedback loop.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eig = sub.add_parser("eig", help="eigenvalues in the right half-plane strip")
    _add_param_flags(p_eig)
    p_eig.add_argument("--sigma", type=float, default=1e-6)
    p_eig.add_argument("--tol", type=float, default=1e-12)
    _add_output_flags(p_eig)
    p_eig.set_defaults(handler=_cmd_eig)

    p_cls = sub.add_parser("classify", help="stability label of one point")
    _add_param_flags(p_cls)
    p_cls.add_argument("--eps0", type=float, default=1e-8)
    _add_output_flags(p_cls)
    p_cls.set_defaults(handler=_cmd_classify)

    p_sweep = sub.add_parser("sweep", help="classify a (tau, beta) grid")
    _add_param_flags(p_sweep, with_beta_tau=False)
    p_sweep.add_argument("--beta-range", required=True, help="A:B")
    p_sweep.add_argument("--tau-range", required=True, help="A:B")
    p_sweep.add_argument("--grid", required=True, help="NTAUxNBETA, e.g. 50x50")
    p_sweep.add_argument("--eps0", type=float, default=1e-8)
    _add_output_flags(p_sweep, formats=("csv", "json", "svg"))
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_trace = sub.add_parser("trace-r0", help="trace the oscillation boundary")
    _add_param_flags(p_trace, with_beta_tau=False)
    p_trace.add_argument("--tau-max", type=float, default=10.0)
    p_trace.add_argument("--steps", type=int, default=500)
    p_trace.add_argument("--omega-max", type=float, default=None)
    _add_output_flags(p_trace, formats=("csv", "json", "svg"))
    p_trace.set_defaults(handler=_cmd_trace_r0)

    p_sim = sub.add_parser("simulate", help="time-domain energy trace")
    _add_param_flags(p_sim)
    p_sim.add_argument("--nx", type=int, required=True)
    p_sim.add_argument("--t-final", type=float, required=True)
    p_sim.add_argument("--gamma", type=float, default=None)
    p_sim.add_argument("--c0", choices=("zero", "sine"), default="sine")
    p_sim.add_argument("--a0", type=float, default=1.0)
    p_sim.add_argument("--stride", type=int, default=1)
    _add_output_flags(p_sim)
    p_sim.set_defaults(handler=_cmd_simulate)

    p_cert = sub.add_parser("certify", help="exponential decay certificate")
    _add_param_flags(p_cert)
    p_cert.add_argument("--gamma", type=float, default=None)
    _add_output_flags(p_cert)
    p_cert.set_defaults(handler=_cmd_certify)

    return parser


def _merge_range_flags(argv: list[str]) -> list[str]:
    # argparse mistakes "-5:5" for an option; splice range values onto their
    # flag with '=' so negative lower bounds parse.
    merged = []
    skip = False
    for i, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token in ("--beta-range", "--tau-range") and i + 1 < len(argv):
            merged.append(f"{token}={argv[i + 1]}")
            skip = True
        else:
            merged.append(token)
    return merged


def main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_merge_range_flags(list(argv)))
    try:
        return args.handler(args)
    except InvalidParameter as exc:
        print(f"delaystab: {exc}", file=sys.stderr)
        return 2
    except DelayStabError as exc:
        print(f"delaystab: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"delaystab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
