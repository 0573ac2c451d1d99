import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from wallenius import (CredibleInterval, DomainError, WeightVector, evaluate_grid, fit_mle,
                       likelihood_region, wilks_interval)
from wallenius.inference import GridEvaluation
from wallenius.plots import (ERRORBAR_TICK, LIKELIHOOD_LAYOUT, MAX_TRACE_POINTS, TERNARY_LAYOUT,
                             errorbar_layout, render_errorbars, render_histogram,
                             render_likelihood_1d, render_ternary, render_trace_panel,
                             thin_indices, trace_layout)
from wallenius.simplex import SQRT3_2

SVG = "{http://www.w3.org/2000/svg}"
XLINK = "{http://www.w3.org/1999/xlink}href"


def _parse(svg):
    root = ET.fromstring(svg)
    assert root.tag == SVG + "svg"
    return root


def _by_id(root, gid):
    found = [el for el in root.iter() if el.get("id") == gid]
    assert len(found) == 1, gid
    return found[0]


def _path_xy(group):
    path = next(el for el in group.iter(SVG + "path") if el.get("d"))
    nums = [float(v) for v in re.findall(r"-?\d+(?:\.\d+)?(?:e-?\d+)?", path.get("d"))]
    return np.array(nums).reshape(-1, 2)


def _marker_xy(group):
    use = next(group.iter(SVG + "use"))
    return float(use.get("x")), float(use.get("y"))


def _transform(layout, x, y):
    # independent restatement of the documented data-to-SVG map
    (x0, x1), (y0, y1) = layout.xlim, layout.ylim
    px = 72 * (layout.left + (x - x0) / (x1 - x0) * layout.width)
    py = 72 * (layout.fig_height - layout.bottom - (y - y0) / (y1 - y0) * layout.height)
    return px, py


def _self_contained(svg):
    root = _parse(svg)
    for el in root.iter():
        href = el.get(XLINK) or el.get("href")
        assert href is None or href.startswith("#")
        assert el.tag != SVG + "image"
    assert "<!DOCTYPE" not in svg
    assert not re.search(r"url\((?!#)", svg)


def _colored(root, color):
    return [el for el in root.iter() if color in (el.get("style") or "")]


@pytest.fixture(scope="module")
def likelihood_inputs(two_cat):
    mle = fit_mle(two_cat)
    return evaluate_grid(two_cat, 200), mle, wilks_interval(two_cat, 0.95, mle)


class TestLikelihood1d:
    def test_markers(self, likelihood_inputs):
        grid, mle, iv = likelihood_inputs
        svg = render_likelihood_1d(grid, mle, iv)
        _self_contained(svg)
        root = _parse(svg)
        assert len(_colored(root, "#ff0000")) == 1
        assert len(_colored(root, "#0000ff")) == 2
        for gid, value in (("mle-marker", mle.w_hat[0]), ("wilks-lower", iv.lower),
                           ("wilks-upper", iv.upper)):
            xy = _path_xy(_by_id(root, gid))
            px, _ = _transform(LIKELIHOOD_LAYOUT, value, 0.0)
            assert np.all(np.abs(xy[:, 0] - px) <= 0.5)

    def test_curve_peak_at_one(self, likelihood_inputs):
        grid, mle, iv = likelihood_inputs
        xy = _path_xy(_by_id(_parse(render_likelihood_1d(grid, mle, iv)), "likelihood-curve"))
        _, top = _transform(LIKELIHOOD_LAYOUT, 0.0, 1.0)
        assert xy[:, 1].min() == pytest.approx(top, abs=0.5)

    def test_flat_grid(self):
        pts = np.stack([np.linspace(0.1, 0.9, 9), 1 - np.linspace(0.1, 0.9, 9)], axis=1)
        grid = GridEvaluation(pts, np.zeros(9), np.arange(9)[:, None], 9, 1e-6)
        svg = render_likelihood_1d(grid)
        root = _parse(svg)
        _by_id(root, "flat-warning")
        assert not _colored(root, "#ff0000")
        xy = _path_xy(_by_id(root, "likelihood-curve"))
        assert np.ptp(xy[:, 1]) == 0

    def test_empty_grid(self):
        grid = GridEvaluation(np.empty((0, 2)), np.empty(0), np.empty((0, 1)), 0, 1e-6)
        with pytest.raises(DomainError):
            render_likelihood_1d(grid)

    def test_deterministic(self, likelihood_inputs):
        assert render_likelihood_1d(*likelihood_inputs) == render_likelihood_1d(*likelihood_inputs)


class TestTernary:
    POINTS = [("Individual 20", [0.305, 0.303, 0.392]), ("Individual 108", [0.095, 0.071, 0.834])]

    def test_reference_points(self):
        svg = render_ternary(points=self.POINTS)
        _self_contained(svg)
        root = _parse(svg)
        texts = [t.text for t in root.iter(SVG + "text")]
        positions = []
        for i, (label, w) in enumerate(self.POINTS):
            x, y = _marker_xy(_by_id(root, f"point-{i}"))
            ex, ey = _transform(TERNARY_LAYOUT, w[1] + w[2] / 2, SQRT3_2 * w[2])
            assert abs(x - ex) <= 0.5 and abs(y - ey) <= 0.5
            assert label in texts
            positions.append((x, y))
        assert positions[0] != positions[1]

    def test_vertices_and_centroid(self):
        eye = [("a", [1, 0, 0]), ("b", [0, 1, 0]), ("c", [0, 0, 1]), ("g", [1 / 3] * 3)]
        root = _parse(render_ternary(points=eye))
        corners = [_transform(TERNARY_LAYOUT, *c) for c in ((0, 0), (1, 0), (0.5, SQRT3_2))]
        for i, expected in enumerate(corners):
            assert np.allclose(_marker_xy(_by_id(root, f"point-{i}")), expected, atol=1e-5)
        centroid = np.mean(corners, axis=0)
        assert np.allclose(_marker_xy(_by_id(root, "point-3")), centroid, atol=1e-5)
        tri = _path_xy(_by_id(root, "simplex"))
        assert np.allclose(tri[:3], corners, atol=1e-5)

    def test_regions_outermost_first(self, three_cat):
        mle = fit_mle(three_cat)
        regions = likelihood_region(three_cat, (0.05, 0.95, 0.5), 60, mle=mle)
        svg = render_ternary(regions, [("w_hat", mle.w_hat)], samples=np.full((10, 3), 1 / 3))
        ids = [el.get("id") for el in _parse(svg).iter() if (el.get("id") or "").startswith("region-")]
        assert ids == ["region-0-95", "region-0-5", "region-0-05"]

    def test_off_simplex(self):
        with pytest.raises(DomainError):
            render_ternary(points=[("bad", [0.5, 0.6, 0.1])])
        with pytest.raises(DomainError):
            render_ternary(samples=np.array([[0.5, 0.5, 0.5]]))

    def test_deterministic(self):
        assert render_ternary(points=self.POINTS) == render_ternary(points=self.POINTS)


class TestTrace:
    def test_five_labels(self, rng):
        series = rng.dirichlet(np.ones(5), size=3_000)
        svg = render_trace_panel(series, list("CMSEP"))
        _self_contained(svg)
        root = _parse(svg)
        texts = [t.text for t in root.iter(SVG + "text")]
        ys = []
        for k, label in enumerate("CMSEP"):
            assert label in texts
            xy = _path_xy(_by_id(root, f"trace-{k}"))
            assert len(xy) == 3_000
            ys.append(xy[:, 1].mean())
        assert ys == sorted(ys)

    def test_constant_series(self):
        svg = render_trace_panel([np.full(50, 0.25), np.full(50, 0.75)], ["a", "b"])
        root = _parse(svg)
        for k, value in enumerate((0.25, 0.75)):
            xy = _path_xy(_by_id(root, f"trace-{k}"))
            _, py = _transform(trace_layout(2, 50, k), 0.0, value)
            assert np.all(np.abs(xy[:, 1] - py) <= 0.5)

    def test_thinning(self):
        n = 123_457
        idx = thin_indices(n)
        assert len(idx) <= MAX_TRACE_POINTS
        assert idx[0] == 0 and idx[-1] == n - 1
        assert len(set(np.diff(idx[:-1]))) == 1
        series = np.linspace(0.1, 0.9, n)
        root = _parse(render_trace_panel([series], ["w"]))
        xy = _path_xy(_by_id(root, "trace-0"))
        layout = trace_layout(1, n, 0)
        assert len(xy) <= MAX_TRACE_POINTS
        for row, i in ((xy[0], 0), (xy[-1], n - 1)):
            assert np.allclose(row, _transform(layout, i, series[i]), atol=1e-5)

    def test_errors(self):
        with pytest.raises(DomainError):
            render_trace_panel([np.zeros(5), np.zeros(6)], ["a", "b"])
        with pytest.raises(DomainError):
            render_trace_panel([])


def _ci(lower, upper):
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    return CredibleInterval(0.95, lower, upper, WeightVector((lower + upper) / 2))


class TestErrorbars:
    def test_bar_endpoints(self):
        units = [(f"fly {i + 1}", [0.2, 0.3, 0.5], _ci([0.1, 0.2, 0.4], [0.3, 0.4, 0.6]))
                 for i in range(8)]
        svg = render_errorbars(units)
        _self_contained(svg)
        root = _parse(svg)
        layout = errorbar_layout(8, 3)
        texts = [t.text for t in root.iter(SVG + "text")]
        assert [t for t in texts if t and t.startswith("fly")] == [u[0] for u in units]
        for u in (0, 7):
            for k in range(3):
                xy = _path_xy(_by_id(root, f"bar-{u}-{k}"))
                x = u + (k - 1) * 0.8 / 3
                lo = _transform(layout, x, units[u][2].lower[k])
                hi = _transform(layout, x, units[u][2].upper[k])
                assert np.allclose(xy, [lo, hi], atol=0.5)

    def test_degenerate_tick(self):
        root = _parse(render_errorbars([("u", [0.4, 0.6], _ci([0.4, 0.6], [0.4, 0.6]))]))
        xy = _path_xy(_by_id(root, "bar-0-0"))
        assert xy[0, 1] == xy[1, 1]
        width = 72 * errorbar_layout(1, 2).width / 1.0 * ERRORBAR_TICK
        assert xy[1, 0] - xy[0, 0] == pytest.approx(width, abs=0.01)

    def test_errors(self):
        with pytest.raises(DomainError):
            render_errorbars([("u", [0.5, 0.5], _ci([0.6, 0.4], [0.5, 0.6]))])
        with pytest.raises(DomainError):
            render_errorbars([])


def test_histogram():
    svg = render_histogram([0.2, 0.4, 0.4, 0.9], masses=[0.1, 0.2, 0.3, 0.4], reference=0.4)
    _self_contained(svg)
    assert len(_colored(_parse(svg), "#ff0000")) == 1
    with pytest.raises(DomainError):
        render_histogram([])
