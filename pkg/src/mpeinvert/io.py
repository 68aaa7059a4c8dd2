"""CSV serialization for curves and coefficient tables.

Formats are the package's public data contract:

* curves: header ``intensity_wcm2,<signal|probability>``, one row per
  point, full-precision scientific notation, ``#`` comment lines ignored;
* volumetric coefficients: header ``k,G_k,excluded``;
* inversion coefficients: header ``k,A_k,G_k,B_k,excluded`` with empty
  numeric fields on excluded rows.
"""

import csv
import warnings

import numpy as np

from .curves import ProbabilityCurve, SignalCurve
from .errors import CurveParseError, CurveValidationError

__all__ = [
    "read_curve",
    "write_curve",
    "write_volumetric_coefficients",
    "write_series_coefficients",
]

_FMT = "%.17e"   # 17 significant digits round-trip any double


def _fmt(value):
    return _FMT % value


def read_curve(path):
    """Read a curve CSV into a SignalCurve.

    Accepts ``intensity_wcm2,signal`` or ``intensity_wcm2,probability``
    headers.  Rows are sorted by intensity (a warning reports reordering);
    duplicate or nonpositive intensities are rejected.
    """
    rows = []
    header = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                if len(header) != 2 or header[0] != "intensity_wcm2" or header[1] not in (
                    "signal",
                    "probability",
                ):
                    raise CurveParseError(
                        f"unrecognized header {line!r}; expected "
                        "'intensity_wcm2,signal' or 'intensity_wcm2,probability'",
                        line=lineno,
                    )
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise CurveParseError(f"expected 2 fields, got {len(parts)}", line=lineno)
            try:
                I = float(parts[0])
                S = float(parts[1])
            except ValueError as exc:
                raise CurveParseError(f"malformed number in {line!r}", line=lineno) from exc
            rows.append((lineno, I, S))
    if header is None:
        raise CurveParseError("file has no header line", line=1)
    if not rows:
        return SignalCurve(np.array([]), np.array([]), label=header[1])
    I = np.array([r[1] for r in rows])
    S = np.array([r[2] for r in rows])
    if np.any(~np.isfinite(I)) or np.any(~np.isfinite(S)):
        raise CurveValidationError("curve contains non-finite values")
    if np.any(I <= 0):
        bad = rows[int(np.argmax(I <= 0))][0]
        raise CurveValidationError(f"nonpositive intensity at line {bad}")
    if np.unique(I).size != I.size:
        raise CurveValidationError("duplicate intensities in curve file")
    order = np.argsort(I)
    if not np.all(order == np.arange(I.size)):
        warnings.warn(
            f"curve rows in {path} were not sorted by intensity; sorted on read",
            stacklevel=2,
        )
        I = I[order]
        S = S[order]
    return SignalCurve(I, S, label=header[1])


def write_curve(curve, path):
    """Write a curve to CSV; the value column is named after the curve kind."""
    column = "probability" if isinstance(curve, ProbabilityCurve) else "signal"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["intensity_wcm2", column])
        for I, v in zip(curve.intensities, curve.values):
            writer.writerow([_fmt(I), _fmt(v)])


def write_volumetric_coefficients(table, path):
    """Write a VolumetricCoefficients table as ``k,G_k,excluded``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "G_k", "excluded"])
        for k, v in enumerate(table.values):
            if v is None:
                writer.writerow([k, "", "true"])
            else:
                writer.writerow([k, _fmt(v), "false"])


def write_series_coefficients(path, signal_series, prob_series, table):
    """Write the inversion coefficients as ``k,A_k,G_k,B_k,excluded``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "A_k", "G_k", "B_k", "excluded"])
        for k in range(prob_series.k_max + 1):
            if k in table.excluded:
                writer.writerow([k, "", "", "", "true"])
            else:
                writer.writerow(
                    [
                        k,
                        _fmt(signal_series.coefficients[k]),
                        _fmt(table.value(k)),
                        _fmt(prob_series.coefficients[k]),
                        "false",
                    ]
                )
