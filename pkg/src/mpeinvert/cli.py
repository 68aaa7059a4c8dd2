"""Command-line frontend.

Subcommands: ``coeffs``, ``forward``, ``invert``, ``iss``, ``demo-model``,
``demo-adk``.  Outputs are plot-ready CSV files (optionally mirrored as
minimal SVG line charts with ``--svg``); identical inputs and flags produce
byte-identical outputs.  The environment variable ``MPE_LOG`` selects the
diagnostic verbosity (error, warn, info, debug).

Exit status: 0 success, 2 usage error, 3 validation/restriction error,
4 computation (accuracy) error.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import io as curve_io
from .curves import ProbabilityCurve, SignalCurve
from .errors import AccuracyError, MPEError
from .forward import average_quadrature
from .geometry import as_geometry, build_coefficients
from .inversion import iss_invert, mpe_invert
from .models import (
    DEFAULT_MODEL,
    ModelParams,
    PulseParams,
    XENON_ION,
    XENON_NEUTRAL,
    model_probability,
    model_yield,
    pulse_probabilities,
)

log = logging.getLogger("mpeinvert")

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _configure_logging():
    level = os.environ.get("MPE_LOG", "warn").strip().lower()
    logging.basicConfig(
        level=_LOG_LEVELS.get(level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


class _OutputSet:
    """Tracks written files so failures leave no partial outputs behind."""

    def __init__(self):
        self.paths = []

    def curve(self, curve, path, svg=False):
        curve_io.write_curve(curve, path)
        self.paths.append(path)
        if svg:
            svg_path = str(path) + ".svg"
            _write_svg(curve, svg_path)
            self.paths.append(svg_path)

    def table(self, table, path):
        curve_io.write_volumetric_coefficients(table, path)
        self.paths.append(path)

    def series(self, signal_series, prob_series, table, path):
        curve_io.write_series_coefficients(path, signal_series, prob_series, table)
        self.paths.append(path)

    def cleanup(self):
        for p in self.paths:
            try:
                os.remove(p)
            except OSError:
                pass


def _write_svg(curve, path):
    """Minimal deterministic SVG line chart: log10(I0) vs value."""
    xs = np.log10(curve.intensities)
    ys = curve.values
    w, h, pad = 640.0, 400.0, 50.0
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    px = pad + (xs - x0) / (x1 - x0) * (w - 2 * pad)
    py = h - pad - (ys - y0) / (y1 - y0) * (h - 2 * pad)
    points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    label = getattr(curve, "label", "curve")
    body = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.0f} {h:.0f}">\n'
        f'<rect x="{pad}" y="{pad}" width="{w - 2 * pad}" height="{h - 2 * pad}" '
        f'fill="none" stroke="black"/>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{points}"/>\n'
        f'<text x="{w / 2:.0f}" y="{h - 10:.0f}" text-anchor="middle" font-size="12">'
        f"log10 intensity (W/cm^2)</text>\n"
        f'<text x="{w / 2:.0f}" y="20" text-anchor="middle" font-size="12">{label}</text>\n'
        f"</svg>\n"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(body)


def _add_shared_flags(sub):
    sub.add_argument("--geometry", choices=["1d", "2d", "3d"], default="2d")
    sub.add_argument("--m", type=int, default=0)
    sub.add_argument("--kmax", type=int, default=36)
    sub.add_argument("--spline-factor", type=int, default=10)
    sub.add_argument("--weight-post", type=float, default=None,
                     help="post-saturation residual weight ratio")
    sub.add_argument("--ridge", type=float, default=0.0)
    sub.add_argument("--mode", choices=["strict", "continuation"], default="strict")
    sub.add_argument("--svg", action="store_true", help="also emit SVG charts")


def _inversion_kwargs(args):
    weighting = "uniform"
    ratio = 10.0
    if args.weight_post is not None:
        weighting = "post_saturation"
        ratio = args.weight_post
    return dict(
        geometry=args.geometry,
        m=args.m,
        k_max=args.kmax,
        spline_factor=args.spline_factor,
        weighting=weighting,
        post_saturation_ratio=ratio,
        regularization=args.ridge,
        mode=args.mode,
    )


def _model_from_args(args):
    return ModelParams(n1=args.n1, n2=args.n2, I_S1=args.is1, I_S2=args.is2)


def _prob_function_from_curve(curve):
    """Interpolate a tabulated probability for use under the integral.

    Monotone log-log interpolation inside the tabulated range, zero below
    it, constant extension above (the averaging integral never evaluates
    above the largest grid intensity).
    """
    from scipy.interpolate import PchipInterpolator

    I = curve.intensities
    P = curve.values
    if np.any(P <= 0):
        interp = PchipInterpolator(np.log(I), P, extrapolate=False)

        def prob(i):
            v = interp(np.log(i))
            return float(np.nan_to_num(v, nan=0.0))

        return prob
    interp = PchipInterpolator(np.log(I), np.log(P), extrapolate=False)
    lo, hi = np.log(I[0]), np.log(I[-1])
    top = float(np.log(P[-1]))

    def prob(i):
        u = np.log(i)
        if u < lo:
            return 0.0
        if u > hi:
            return float(np.exp(top))
        return float(np.exp(interp(u)))

    return prob


def _cmd_coeffs(args, out):
    table = build_coefficients(args.geometry, args.m, args.kmax, mode=args.mode)
    out.table(table, args.out)
    log.info("wrote %s", args.out)


def _cmd_forward(args, out):
    if args.model:
        params = _model_from_args(args)

        def prob(i):
            return model_probability(params, i)

        grid = np.geomspace(args.imin, args.imax, args.points)
    else:
        curve = curve_io.read_curve(args.probability)
        prob = _prob_function_from_curve(curve)
        grid = curve.intensities
    signal = average_quadrature(prob, args.geometry, grid, rel_tol=args.rel_tol)
    out.curve(signal, args.out, svg=args.svg)
    log.info("wrote %s", args.out)


def _cmd_invert(args, out):
    curve = curve_io.read_curve(args.input)
    result = mpe_invert(curve, **_inversion_kwargs(args))
    out.curve(result, args.out, svg=args.svg)
    coeffs_path = args.coeffs_out or (os.path.splitext(args.out)[0] + "_coefficients.csv")
    out.series(
        result.diagnostics["signal_series"],
        result.series,
        result.diagnostics["coefficients"],
        coeffs_path,
    )
    d = result.diagnostics
    print(
        "diagnostics: relative_residual=%.3e condition=%.3e noise=%.3e "
        "oscillations=%d diverged=%s excluded=%s"
        % (
            d["relative_residual"],
            d["condition_number"],
            d["noise_estimate"],
            d["oscillation_count"],
            d["diverged"],
            list(d["excluded_indices"]),
        ),
        file=sys.stderr,
    )


def _cmd_iss(args, out):
    curve = curve_io.read_curve(args.input)
    result = iss_invert(curve)
    out.curve(result, args.out, svg=args.svg)


def _cmd_demo_model(args, out):
    params = _model_from_args(args)
    grid = np.geomspace(args.imin, args.imax, args.points)
    prob = ProbabilityCurve(
        grid, model_probability(params, grid), series=None, label="probability"
    )
    signal = SignalCurve(grid, model_yield(params, grid), label="signal")
    mpe = mpe_invert(signal, geometry="2d", m=0, k_max=36, mode="continuation")
    iss = iss_invert(signal)
    os.makedirs(args.out, exist_ok=True)
    out.curve(prob, os.path.join(args.out, "model_probability.csv"), svg=args.svg)
    out.curve(signal, os.path.join(args.out, "model_signal.csv"), svg=args.svg)
    out.curve(mpe, os.path.join(args.out, "mpe_recovered.csv"), svg=args.svg)
    out.curve(iss, os.path.join(args.out, "iss_recovered.csv"), svg=args.svg)
    log.info("wrote demo quartet to %s", args.out)


def _cmd_demo_adk(args, out):
    pulse = PulseParams(duration_fwhm=args.fwhm)
    grid = np.geomspace(args.imin, args.imax, args.points)
    dense = np.geomspace(args.imin / 10.0, args.imax * 1.05, 400)
    p1 = np.empty(dense.size)
    p2 = np.empty(dense.size)
    for i, ip in enumerate(dense):
        p1[i], p2[i] = pulse_probabilities(XENON_NEUTRAL, XENON_ION, pulse, ip)
    os.makedirs(args.out, exist_ok=True)
    for tag, dense_p in (("xe1", p1), ("xe2", p2)):
        sel = dense_p > 0
        curve_p = ProbabilityCurve(dense[sel], dense_p[sel], series=None)
        prob = _prob_function_from_curve(curve_p)
        signal = average_quadrature(prob, "3d", grid, rel_tol=args.rel_tol)
        recovered = mpe_invert(signal, geometry="3d", m=3, k_max=36)
        out.curve(curve_p, os.path.join(args.out, f"adk_{tag}_probability.csv"), svg=args.svg)
        out.curve(signal, os.path.join(args.out, f"adk_{tag}_signal.csv"), svg=args.svg)
        out.curve(recovered, os.path.join(args.out, f"adk_{tag}_recovered.csv"), svg=args.svg)
    log.info("wrote demo curves to %s", args.out)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mpeinvert",
        description="Recover ionization probabilities from spatially averaged ion yields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="dump volumetric coefficients G_k")
    _add_shared_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_coeffs)

    p = sub.add_parser("forward", help="spatially average a probability curve or model")
    _add_shared_flags(p)
    p.add_argument("--probability", help="input probability CSV")
    p.add_argument("--model", action="store_true", help="use the built-in saturating model")
    p.add_argument("--n1", type=int, default=DEFAULT_MODEL.n1)
    p.add_argument("--n2", type=int, default=DEFAULT_MODEL.n2)
    p.add_argument("--is1", type=float, default=DEFAULT_MODEL.I_S1)
    p.add_argument("--is2", type=float, default=DEFAULT_MODEL.I_S2)
    p.add_argument("--imin", type=float, default=1e13)
    p.add_argument("--imax", type=float, default=6e14)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_forward)

    p = sub.add_parser("invert", help="multiphoton-expansion inversion of a signal CSV")
    _add_shared_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--coeffs-out", default=None)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("iss", help="derivative (intensity-selective scanning) inversion")
    _add_shared_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_iss)

    p = sub.add_parser("demo-model", help="model-problem demonstration curves")
    _add_shared_flags(p)
    p.add_argument("--n1", type=int, default=DEFAULT_MODEL.n1)
    p.add_argument("--n2", type=int, default=DEFAULT_MODEL.n2)
    p.add_argument("--is1", type=float, default=DEFAULT_MODEL.I_S1)
    p.add_argument("--is2", type=float, default=DEFAULT_MODEL.I_S2)
    p.add_argument("--imin", type=float, default=1e13)
    p.add_argument("--imax", type=float, default=6e14)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--out", default="demo-model")
    p.set_defaults(func=_cmd_demo_model)

    p = sub.add_parser("demo-adk", help="xenon tunneling demonstration curves (3D)")
    _add_shared_flags(p)
    p.add_argument("--fwhm", type=float, default=100e-15)
    p.add_argument("--imin", type=float, default=1e13)
    p.add_argument("--imax", type=float, default=1e15)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--rel-tol", type=float, default=1e-7)
    p.add_argument("--out", default="demo-adk")
    p.set_defaults(func=_cmd_demo_adk)

    return parser


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "forward" and bool(args.model) == bool(args.probability):
        parser.error("forward needs exactly one of --probability or --model")
    out = _OutputSet()
    try:
        args.func(args, out)
    except AccuracyError as exc:
        out.cleanup()
        log.error("computation failed: %s", exc)
        return 4
    except MPEError as exc:
        out.cleanup()
        log.error("invalid request: %s", exc)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
