"""Convergence-rate series: log-log slope fits, CSV, and SVG output.

A rate series records hierarchy bounds against a reference minimum and
fits the asymptotic decay exponent of the error by least squares on
(log r, log error). The first two orders are excluded from the fit by
default (transient regime); entries with error below 1e-12 are excluded
as numerically converged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ZERO_ERROR_FLOOR = 1e-12


@dataclass
class RateSeries:
    label: str
    entries: list[tuple[int, float, float]]  # (r, bound, error)
    reference: float
    reference_kind: str  # "closed-form" | "grid-estimate"
    fitted_slope: float | None = None
    fit_range: tuple[int, int] | None = None
    diagnostics: dict = field(default_factory=dict)


def make_rate_series(
    label: str,
    rows: list[tuple[int, float]],
    reference: float,
    reference_kind: str,
    skip_head: int = 2,
) -> RateSeries:
    entries = [(r, v, abs(v - reference)) for r, v in rows]
    series = RateSeries(
        label=label,
        entries=entries,
        reference=reference,
        reference_kind=reference_kind,
    )
    usable = [
        (r, e) for r, _, e in entries[skip_head:] if e > ZERO_ERROR_FLOOR
    ]
    if len(usable) < 2:
        series.diagnostics["fit"] = (
            "errors at or below the numerical floor; slope not fitted"
        )
        return series
    rs = np.array([u[0] for u in usable], dtype=float)
    es = np.array([u[1] for u in usable])
    slope, intercept = np.polyfit(np.log(rs), np.log(es), 1)
    series.fitted_slope = float(slope)
    series.fit_range = (int(rs[0]), int(rs[-1]))
    series.diagnostics["intercept"] = float(intercept)
    return series


def parse_r_range(text: str) -> list[int]:
    """Either a single order '12' or an inclusive range '4..32'."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty r range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def series_csv(series: RateSeries) -> str:
    lines = ["r,bound,error"]
    for r, v, e in series.entries:
        lines.append(f"{r},{v:.12g},{e:.12g}")
    return "\n".join(lines) + "\n"


def series_svg(series: RateSeries, width: int = 640, height: int = 440) -> str:
    """Minimal hand-rolled log-log scatter with the fitted slope line."""
    pts = [(r, e) for r, _, e in series.entries if e > 0 and r > 0]
    margin = 56
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if pts:
        xs = np.log10([p[0] for p in pts])
        ys = np.log10([p[1] for p in pts])
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
        x1 = x1 if x1 > x0 else x0 + 1.0
        y1 = y1 if y1 > y0 else y0 + 1.0

        def px(x):
            return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

        def py(y):
            return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

        body.append(
            f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
            f'y2="{height - margin}" stroke="black"/>'
        )
        body.append(
            f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
            f'y2="{height - margin}" stroke="black"/>'
        )
        for tick in np.linspace(x0, x1, 5):
            body.append(
                f'<text x="{px(tick):.1f}" y="{height - margin + 18}" '
                f'font-size="11" text-anchor="middle">10^{tick:.2f}</text>'
            )
        for tick in np.linspace(y0, y1, 5):
            body.append(
                f'<text x="{margin - 6}" y="{py(tick):.1f}" font-size="11" '
                f'text-anchor="end">10^{tick:.2f}</text>'
            )
        path = " ".join(
            f"{'M' if i == 0 else 'L'}{px(x):.2f},{py(y):.2f}"
            for i, (x, y) in enumerate(zip(xs, ys))
        )
        body.append(f'<path d="{path}" fill="none" stroke="#2060c0"/>')
        for x, y in zip(xs, ys):
            body.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="#2060c0"/>'
            )
        if series.fitted_slope is not None:
            c = series.diagnostics.get("intercept", 0.0) / np.log(10.0)
            s = series.fitted_slope
            yy0 = s * x0 + c
            yy1 = s * x1 + c
            body.append(
                f'<line x1="{px(x0):.2f}" y1="{py(yy0):.2f}" x2="{px(x1):.2f}" '
                f'y2="{py(yy1):.2f}" stroke="#c03020" stroke-dasharray="5,4"/>'
            )
        slope_text = (
            f"slope {series.fitted_slope:.3f}"
            if series.fitted_slope is not None
            else "slope n/a"
        )
        body.append(
            f'<text x="{width / 2:.0f}" y="{margin - 18}" font-size="13" '
            f'text-anchor="middle">{series.label} ({slope_text}, '
            f"ref {series.reference_kind})</text>"
        )
    body.append("</svg>")
    return "\n".join(body) + "\n"
