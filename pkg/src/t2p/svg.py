"""Minimal deterministic SVG charts: assignment maps, patterns, heatmaps, dendrograms.

Output depends only on the inputs (fixed number formatting, no timestamps),
so identical runs produce identical files.
"""

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def color(i):
    return PALETTE[int(i) % len(PALETTE)]


def _f(x):
    return f"{float(x):.2f}"


def _doc(width, height, body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n<rect width="100%" height="100%" fill="white"/>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def _polyline(xs, ys, stroke, width=1.0):
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" stroke="{stroke}" stroke-width="{width}" points="{pts}"/>'


def _scale(values, lo_px, hi_px):
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo if hi > lo else 1.0
    # larger values go up (smaller y)
    return hi_px - (v - lo) / span * (hi_px - lo_px)


def assignment_map(values, summary, width=900, height=260, title="pattern assignment"):
    """Series drawn window by window, coloured by assigned pattern.

    The band behind each window is the pattern colour with opacity equal to
    the assignment score.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    pad = 30
    xs = pad + np.arange(n) * (width - 2 * pad) / max(n - 1, 1)
    ys = _scale(values, pad, height - pad)
    body = [f'<text x="{pad}" y="18" font-family="sans-serif" font-size="13">{escape(title)}</text>']
    m = summary.window_length
    step = (width - 2 * pad) / max(n - 1, 1)
    for start, pid, score in zip(summary.starts, summary.pattern_ids, summary.scores):
        x0 = pad + start * step
        body.append(f'<rect x="{_f(x0)}" y="{pad}" width="{_f(m * step)}" height="{height - 2 * pad}" '
                    f'fill="{color(pid)}" fill-opacity="{_f(0.35 * float(score))}"/>')
    for start, pid in zip(summary.starts, summary.pattern_ids):
        seg = slice(int(start), int(start) + m)
        body.append(_polyline(xs[seg], ys[seg], color(pid), 1.2))
    if summary.remainder:
        tail = slice(n - summary.remainder, n)
        body.append(_polyline(xs[tail], ys[tail], "#999999", 1.0))
    return _doc(width, height, body)


def patterns_chart(patterns, width=900, cell_height=90, title="learned patterns"):
    patterns = np.asarray(patterns, dtype=np.float64)
    k, m = patterns.shape
    pad = 30
    height = pad + k * cell_height + 10
    body = [f'<text x="{pad}" y="18" font-family="sans-serif" font-size="13">{escape(title)}</text>']
    xs = pad + np.arange(m) * (width - 2 * pad) / max(m - 1, 1)
    for i in range(k):
        top = pad + i * cell_height
        ys = _scale(patterns[i], top + 8, top + cell_height - 8)
        body.append(f'<text x="4" y="{_f(top + cell_height / 2)}" font-family="sans-serif" '
                    f'font-size="11">P{i}</text>')
        body.append(_polyline(xs, ys, color(i), 1.5))
    return _doc(width, height, body)


def heatmap(matrix, row_labels, col_labels, cell=60, title="", fmt="{:.2f}"):
    """Grid of coloured cells (white to blue by value) with the value printed."""
    mat = np.asarray(matrix, dtype=np.float64)
    rows, cols = mat.shape
    left, top = 70, 50
    width = left + cols * cell + 20
    height = top + rows * cell + 20
    finite = mat[np.isfinite(mat)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0
    span = hi - lo if hi > lo else 1.0
    body = [f'<text x="10" y="18" font-family="sans-serif" font-size="13">{escape(title)}</text>']
    for j, lab in enumerate(col_labels):
        body.append(f'<text x="{_f(left + (j + 0.5) * cell)}" y="{top - 8}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="11">{escape(str(lab))}</text>')
    for i, lab in enumerate(row_labels):
        body.append(f'<text x="{left - 8}" y="{_f(top + (i + 0.5) * cell + 4)}" text-anchor="end" '
                    f'font-family="sans-serif" font-size="11">{escape(str(lab))}</text>')
        for j in range(cols):
            v = mat[i, j]
            if np.isfinite(v):
                t = (v - lo) / span
                shade = int(round(255 - 180 * t))
                fill = f"rgb({shade},{shade},255)"
                text = fmt.format(v)
            else:
                fill, text = "#eeeeee", "n/a"
            x, y = left + j * cell, top + i * cell
            body.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="#555555"/>')
            body.append(f'<text x="{_f(x + cell / 2)}" y="{_f(y + cell / 2 + 4)}" text-anchor="middle" '
                        f'font-family="sans-serif" font-size="11">{escape(text)}</text>')
    return _doc(width, height, body)


def dendrogram(dg, width=600, height=320, title="complete linkage"):
    """Classic U-link drawing of a :class:`t2p.baseline.Dendrogram`."""
    n = dg.n_leaves
    pad, bottom = 30, 60
    order = dg.leaf_order()
    slot = (width - 2 * pad) / max(n, 1)
    x_of = {leaf: pad + (pos + 0.5) * slot for pos, leaf in enumerate(order)}
    top_h = max((m[2] for m in dg.merges), default=1.0) or 1.0
    base = height - bottom

    def y_of(h):
        return base - h / top_h * (base - pad)

    y_node = {leaf: base for leaf in range(n)}
    body = [f'<text x="{pad}" y="18" font-family="sans-serif" font-size="13">{escape(title)}</text>']
    for step, (a, b, h, _) in enumerate(dg.merges):
        node = n + step
        ya, yb, yh = y_node[a], y_node[b], y_of(h)
        xa, xb = x_of[a], x_of[b]
        body.append(f'<path fill="none" stroke="#333333" d="M{_f(xa)},{_f(ya)} V{_f(yh)} H{_f(xb)} V{_f(yb)}"/>')
        x_of[node] = (xa + xb) / 2
        y_node[node] = yh
    for leaf in order:
        body.append(f'<text x="{_f(x_of[leaf])}" y="{base + 16}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="11">{escape(str(dg.labels[leaf]))}</text>')
    return _doc(width, height, body)


def write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
