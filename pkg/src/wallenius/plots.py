"""SVG figures for likelihood curves, ternary regions, traces and error bars.

Every figure uses fixed axes placed in inches with fixed data limits, so the
map from data to SVG user units (points, origin top-left) is

    x_svg = 72 * (left + (x - x0) / (x1 - x0) * width)
    y_svg = 72 * (fig_height - bottom - (y - y0) / (y1 - y0) * height)

with the constants of the layout object exposed on each module-level
``*_LAYOUT``/``*_layout`` helper.  Output is byte-for-byte deterministic:
the id salt is fixed, text is kept as ``<text>`` elements and the date is
omitted.

Contractual colours: the MLE marker is red (``#ff0000``) and Wilks interval
endpoints are blue (``#0000ff``).  Everything else follows a fixed default
theme.
"""

from dataclasses import dataclass
import io
import math
import re

import matplotlib
from matplotlib.figure import Figure
import numpy as np

from .exceptions import DomainError
from .simplex import SQRT3_2, barycentric_to_cartesian, check_on_simplex

__all__ = [
    "Layout",
    "LIKELIHOOD_LAYOUT",
    "TERNARY_LAYOUT",
    "trace_layout",
    "errorbar_layout",
    "HISTOGRAM_LAYOUT",
    "MAX_TRACE_POINTS",
    "ERRORBAR_TICK",
    "thin_indices",
    "render_likelihood_1d",
    "render_ternary",
    "render_trace_panel",
    "render_errorbars",
    "render_histogram",
    "write_svg",
]

RED = "#ff0000"
BLUE = "#0000ff"
CURVE = "#000000"
GREY = "#808080"
REGION_COLORS = ("#c6dbef", "#6baed6", "#08519c")
COMPONENT_COLORS = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
                    "#e6ab02", "#a6761d", "#666666")
MAX_TRACE_POINTS = 10_000
MAX_SCATTER_POINTS = 5_000
# width of the tick drawn for a zero-length interval, in x data units
ERRORBAR_TICK = 0.1
PT_PER_INCH = 72.0

_RC = {
    "svg.hashsalt": "wallenius",
    "svg.fonttype": "none",
    "path.simplify": False,
    "font.size": 9.0,
}
_METADATA = {"Date": None, "Creator": None, "Format": None, "Type": None}
_DOCTYPE = re.compile(r"<!DOCTYPE[^>]*>\s*")


@dataclass(frozen=True)
class Layout:
    """Axes geometry in inches plus the data limits of the axes."""

    fig_width: float
    fig_height: float
    left: float
    bottom: float
    width: float
    height: float
    xlim: tuple
    ylim: tuple

    def rect(self):
        return (self.left / self.fig_width, self.bottom / self.fig_height,
                self.width / self.fig_width, self.height / self.fig_height)

    def to_svg(self, x, y):
        """Data coordinates to SVG user units."""
        x0, x1 = self.xlim
        y0, y1 = self.ylim
        xs = PT_PER_INCH * (self.left + (np.asarray(x, dtype=float) - x0) / (x1 - x0) * self.width)
        ys = PT_PER_INCH * (self.fig_height - self.bottom
                            - (np.asarray(y, dtype=float) - y0) / (y1 - y0) * self.height)
        return xs, ys


LIKELIHOOD_LAYOUT = Layout(6.0, 4.0, 0.8, 0.6, 5.0, 3.1, (0.0, 1.0), (0.0, 1.05))
# 4 inches per data unit on both axes keeps the triangle equilateral.
TERNARY_LAYOUT = Layout(5.6, 5.1, 0.4, 0.4, 4.8, 4.8 * (SQRT3_2 + 0.2) / 1.2,
                        (-0.1, 1.1), (-0.1, SQRT3_2 + 0.1))
HISTOGRAM_LAYOUT = Layout(6.0, 4.0, 0.8, 0.6, 5.0, 3.1, (0.0, 1.0), (0.0, 1.0))
TRACE_PANEL_HEIGHT = 1.2
TRACE_GAP = 0.25


def trace_layout(n_panels, n_points, index):
    """Layout of panel ``index`` (0 is the top) in a stack of ``n_panels``."""
    fig_height = 0.5 + 0.4 + n_panels * TRACE_PANEL_HEIGHT + (n_panels - 1) * TRACE_GAP
    bottom = 0.5 + (n_panels - 1 - index) * (TRACE_PANEL_HEIGHT + TRACE_GAP)
    return Layout(7.0, fig_height, 0.8, bottom, 6.0, TRACE_PANEL_HEIGHT,
                  (0.0, max(n_points - 1, 1)), (0.0, 1.0))


def errorbar_layout(n_units, K):
    return Layout(max(4.0, 1.2 + 0.35 * n_units * (K + 1)), 4.0, 0.8, 0.8,
                  max(2.8, 0.35 * n_units * (K + 1)), 2.9,
                  (-0.5, n_units - 0.5), (0.0, 1.0))


def _figure(layout):
    fig = Figure(figsize=(layout.fig_width, layout.fig_height))
    ax = fig.add_axes(layout.rect())
    ax.set_xlim(*layout.xlim)
    ax.set_ylim(*layout.ylim)
    ax.set_autoscale_on(False)
    return fig, ax


def _to_svg(fig):
    buf = io.StringIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata=_METADATA)
    return _DOCTYPE.sub("", buf.getvalue(), count=1)


def write_svg(svg, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)


def _with_rc(func):
    # rc settings also affect artist creation (font size, simplification).
    def wrapper(*args, **kwargs):
        with matplotlib.rc_context(_RC):
            return func(*args, **kwargs)
    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


@_with_rc
def render_likelihood_1d(grid, mle=None, interval=None, label="w_1"):
    """Normalized likelihood of a two-category model against ``w_1``.

    Parameters
    ----------
    grid : GridEvaluation
        Two-category grid from ``evaluate_grid``.
    mle : MleResult, optional
        Drawn as a red vertical line (id ``mle-marker``).
    interval : WilksInterval, optional
        Endpoints drawn as blue vertical lines (ids ``wilks-lower`` and
        ``wilks-upper``).

    Returns
    -------
    str
        SVG document.  A flat likelihood is drawn as a horizontal line with
        a warning note and no markers.
    """
    points = np.asarray(grid.points, dtype=float)
    if points.size == 0:
        raise DomainError("likelihood grid is empty")
    if points.ndim != 2 or points.shape[1] != 2:
        raise DomainError("render_likelihood_1d needs a two-category grid")
    ll = np.asarray(grid.loglik, dtype=float)
    finite = np.isfinite(ll)
    flat = not finite.any() or np.ptp(ll[finite]) <= 1e-12 * max(1.0, abs(ll[finite].max()))
    if flat:
        curve = np.where(finite, 1.0, 0.0) if finite.any() else np.ones_like(ll)
    else:
        curve = np.exp(ll - ll[finite].max())
    order = np.argsort(points[:, 0], kind="stable")

    layout = LIKELIHOOD_LAYOUT
    fig, ax = _figure(layout)
    ax.plot(points[order, 0], curve[order], color=CURVE, linewidth=1.2, gid="likelihood-curve")
    ax.set_xlabel(f"${label}$")
    ax.set_ylabel("L(w) / max L")
    if flat:
        ax.text(0.5, 0.5, "flat likelihood: no maximum", transform=ax.transAxes,
                ha="center", va="center", color=GREY, gid="flat-warning")
    else:
        if mle is not None:
            w1 = float(mle.w_hat[0])
            ax.plot([w1, w1], list(layout.ylim), color=RED, linewidth=1.2, gid="mle-marker",
                    snap=False)
        if interval is not None:
            for name, v in (("wilks-lower", interval.lower), ("wilks-upper", interval.upper)):
                ax.plot([v, v], list(layout.ylim), color=BLUE, linewidth=1.0,
                        linestyle="--", gid=name, snap=False)
    return _to_svg(fig)


def _draw_triangle(ax):
    corners = barycentric_to_cartesian(np.eye(3))
    loop = np.vstack([corners, corners[:1]])
    ax.plot(loop[:, 0], loop[:, 1], color=CURVE, linewidth=1.0, gid="simplex")
    for name, (x, y), (dx, dy), ha in zip(("w_1", "w_2", "w_3"), corners,
                                         ((-0.02, -0.04), (0.02, -0.04), (0.0, 0.03)),
                                         ("right", "left", "center")):
        ax.text(x + dx, y + dy, f"${name}$", ha=ha, va="center")


def _point_spec(p):
    if isinstance(p, dict):
        return p["label"], p["w"], p.get("color", RED), p.get("marker", "o")
    label, w, *rest = p
    color = rest[0] if rest else RED
    marker = rest[1] if len(rest) > 1 else "o"
    return label, w, color, marker


def _svg_id(text):
    return re.sub(r"[^A-Za-z0-9_-]+", "-", str(text)).strip("-") or "x"


@_with_rc
def render_ternary(regions=(), points=(), samples=None, title=None):
    """Ternary plot of 3-category weights.

    Parameters
    ----------
    regions : sequence of ConfidenceRegion
        Drawn largest first so smaller regions sit on top (ids
        ``region-<level>``).
    points : sequence
        ``(label, w)``, ``(label, w, color)``, ``(label, w, color, marker)``
        or dicts with those keys; each becomes one marker (id
        ``point-<i>``) and one text label.
    samples : array_like, optional
        ``(N, 3)`` weights drawn as a light scatter, thinned to at most
        5000 points by fixed stride.
    """
    specs = [_point_spec(p) for p in points]
    for label, w, _, _ in specs:
        check_on_simplex(np.asarray(w, dtype=float), what=f"point {label!r}")
    for reg in regions:
        check_on_simplex(reg.contour, tol=1e-7, what=f"region {reg.level}")
    if samples is not None:
        samples = check_on_simplex(samples, tol=1e-7, what="sample")

    fig, ax = _figure(TERNARY_LAYOUT)
    ax.set_axis_off()
    _draw_triangle(ax)
    if samples is not None and len(samples):
        idx = thin_indices(len(samples), MAX_SCATTER_POINTS)
        xy = barycentric_to_cartesian(samples[idx])
        ax.plot(xy[:, 0], xy[:, 1], linestyle="none", marker=".", markersize=1.5,
                color=GREY, alpha=0.5, gid="samples")
    ordered = sorted(regions, key=lambda r: -r.area)
    for i, reg in enumerate(ordered):
        xy = reg.cartesian
        color = REGION_COLORS[min(i, len(REGION_COLORS) - 1)]
        ax.fill(xy[:, 0], xy[:, 1], facecolor=color, edgecolor=CURVE, linewidth=0.6,
                gid=f"region-{_svg_id(reg.level)}")
    for i, (label, w, color, marker) in enumerate(specs):
        x, y = barycentric_to_cartesian(np.asarray(w, dtype=float))
        ax.plot([x], [y], linestyle="none", marker=marker, markersize=6, color=color,
                gid=f"point-{i}", snap=False)
        ax.text(x + 0.02, y + 0.02, str(label), color=color, gid=f"point-label-{i}")
    if title:
        ax.set_title(title)
    return _to_svg(fig)


def thin_indices(n, max_points=MAX_TRACE_POINTS):
    """Fixed-stride subsample of ``range(n)`` that keeps the first and last index."""
    if n <= max_points:
        return np.arange(n)
    stride = math.ceil((n - 1) / (max_points - 2))
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


@_with_rc
def render_trace_panel(chains, labels=None):
    """Stacked trace plots, one panel per weight component.

    ``chains`` is a ``(N, K)`` array, a ``Chain`` or a sequence of equally
    long series.  Each series is thinned to at most 10,000 points by fixed
    stride, keeping the first and last points.  Panel ``k`` carries id
    ``trace-<k>`` and its label.
    """
    if hasattr(chains, "samples"):
        series = [np.asarray(chains.samples)[:, k] for k in range(chains.samples.shape[1])]
        if labels is None and chains.labels:
            labels = chains.labels
    elif isinstance(chains, np.ndarray) and chains.ndim == 2:
        series = [chains[:, k] for k in range(chains.shape[1])]
    else:
        series = [np.asarray(s, dtype=float) for s in chains]
    if not series:
        raise DomainError("need at least one series")
    n = len(series[0])
    if any(len(s) != n for s in series):
        raise DomainError("trace series have different lengths: "
                          + ", ".join(str(len(s)) for s in series))
    if n == 0:
        raise DomainError("trace series are empty")
    labels = [f"w_{k + 1}" for k in range(len(series))] if labels is None else list(labels)
    if len(labels) != len(series):
        raise DomainError(f"{len(labels)} labels for {len(series)} series")

    idx = thin_indices(n)
    first = trace_layout(len(series), n, 0)
    fig = Figure(figsize=(first.fig_width, first.fig_height))
    for k, (s, label) in enumerate(zip(series, labels)):
        layout = trace_layout(len(series), n, k)
        ax = fig.add_axes(layout.rect())
        ax.set_xlim(*layout.xlim)
        ax.set_ylim(*layout.ylim)
        ax.set_autoscale_on(False)
        ax.plot(idx, np.asarray(s, dtype=float)[idx], color=COMPONENT_COLORS[k % 8],
                linewidth=0.4, gid=f"trace-{k}", snap=False)
        ax.set_ylabel(str(label))
        if k < len(series) - 1:
            ax.tick_params(labelbottom=False)
    ax.set_xlabel("iteration")
    return _to_svg(fig)


@_with_rc
def render_errorbars(units, labels=None):
    """Posterior means with credible-interval bars, grouped by unit.

    ``units`` is a sequence of ``(label, posterior_mean, CredibleInterval)``.
    Component ``k`` of unit ``u`` is drawn at ``x = u + (k - (K - 1) / 2) *
    0.8 / K`` with a vertical bar (id ``bar-<u>-<k>``) from lower to upper
    and a point marker (id ``mean-<u>-<k>``).  A zero-length bar becomes a
    horizontal tick ``ERRORBAR_TICK`` wide.
    """
    units = list(units)
    if not units:
        raise DomainError("need at least one unit")
    K = None
    for label, mean, ci in units:
        lo, hi = np.asarray(ci.lower, dtype=float), np.asarray(ci.upper, dtype=float)
        if np.any(lo > hi):
            raise DomainError(f"unit {label!r}: interval lower bound exceeds upper bound")
        K = lo.size if K is None else K
        if lo.size != K or len(mean) != K:
            raise DomainError(f"unit {label!r} has the wrong number of components")
    layout = errorbar_layout(len(units), K)
    fig, ax = _figure(layout)
    spacing = 0.8 / K
    names = [f"w_{k + 1}" for k in range(K)] if labels is None else list(labels)
    for u, (label, mean, ci) in enumerate(units):
        for k in range(K):
            x = u + (k - (K - 1) / 2) * spacing
            color = COMPONENT_COLORS[k % 8]
            lo, hi = float(ci.lower[k]), float(ci.upper[k])
            if hi > lo:
                ax.plot([x, x], [lo, hi], color=color, linewidth=1.2, gid=f"bar-{u}-{k}",
                        snap=False)
            else:
                half = ERRORBAR_TICK / 2
                ax.plot([x - half, x + half], [lo, lo], color=color, linewidth=1.2,
                        gid=f"bar-{u}-{k}", snap=False)
            ax.plot([x], [float(mean[k])], linestyle="none", marker="o", markersize=3,
                    color=color, gid=f"mean-{u}-{k}", snap=False,
                    label=names[k] if u == 0 else None)
    ax.set_xticks(range(len(units)))
    ax.set_xticklabels([str(u[0]) for u in units])
    ax.set_ylabel("weight")
    if K > 1:
        ax.legend(loc="upper right", frameon=False, ncol=min(K, 5))
    return _to_svg(fig)


@_with_rc
def render_histogram(values, masses=None, reference=None, bins=40, label="w_1"):
    """Histogram of bootstrap replicates of one weight component.

    ``masses`` weights the replicates (ideal bootstrap); ``reference`` is
    drawn as a red vertical line (id ``reference-marker``).
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError("no values to plot")
    masses = np.ones_like(values) / values.size if masses is None else np.asarray(masses, float)
    edges = np.linspace(0.0, 1.0, bins + 1)
    heights, _ = np.histogram(np.clip(values, 0.0, 1.0), edges, weights=masses)
    top = heights.max() if heights.max() > 0 else 1.0
    layout = HISTOGRAM_LAYOUT
    fig, ax = _figure(layout)
    ax.bar(edges[:-1], heights / top * 0.95, width=np.diff(edges), align="edge",
           color=REGION_COLORS[1], edgecolor=CURVE, linewidth=0.4, gid="histogram")
    if reference is not None:
        ax.plot([reference, reference], list(layout.ylim), color=RED, linewidth=1.2,
                gid="reference-marker", snap=False)
    ax.set_xlabel(f"${label}$")
    ax.set_ylabel("relative mass")
    return _to_svg(fig)
