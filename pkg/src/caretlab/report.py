"""Report plumbing: delimited output, key-value text, and companion figures.

Payloads are either scalar key/value sequences or a header plus rows; the
same payload renders as CSV or as line-oriented ``key = value`` text with
rationals written p/q.  Figure helpers draw the matplotlib companions the
CLI report path writes next to the delimited output.
"""

from __future__ import annotations

import csv
import io
from fractions import Fraction

from .measures import frac_str


def fmt_value(v) -> str:
    if isinstance(v, Fraction):
        return frac_str(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


class Report:
    """Scalar entries plus at most one table, rendered as text or CSV."""

    def __init__(self):
        self.scalars = []
        self.header = None
        self.rows = []

    def add(self, key, value):
        self.scalars.append((str(key), fmt_value(value)))

    def table(self, header, rows):
        self.header = list(header)
        self.rows = [[fmt_value(v) for v in row] for row in rows]

    def as_text(self) -> str:
        out = [f"{k} = {v}" for k, v in self.scalars]
        if self.header is not None:
            for i, row in enumerate(self.rows):
                for name, value in zip(self.header, row):
                    out.append(f"row{i}.{name} = {value}")
        return "\n".join(out) + "\n"

    def as_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if self.header is not None:
            writer.writerow(self.header)
            writer.writerows(self.rows)
        else:
            writer.writerow(["key", "value"])
            writer.writerows(self.scalars)
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.as_csv()
        if fmt == "text":
            return self.as_text()
        raise ValueError(f"unknown format {fmt!r}")


def _axes():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    return plt, fig, ax


def _finish(plt, fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_count_figure(sizes, counts, path):
    plt, fig, ax = _axes()
    ax.bar(sizes, counts, color="#4878a8")
    ax.set_yscale("log")
    ax.set_xlabel("tree size (leaves)")
    ax.set_ylabel("class size")
    ax.set_title("Catalan growth of the tree classes")
    _finish(plt, fig, path)


def render_residual_figure(history, path):
    plt, fig, ax = _axes()
    if history:
        ax.semilogy(range(1, len(history) + 1), history, color="#a84848")
    ax.set_xlabel("iteration")
    ax.set_ylabel("sup-norm residual")
    ax.set_title("Idempotent solve residual history")
    _finish(plt, fig, path)


def render_scan_figure(rows, path):
    plt, fig, ax = _axes()
    ns = [row.n for row in rows]
    oscs = [float(row.oscillation) for row in rows]
    palette = {"suffices": "#48a860", "fails": "#a84848", "unknown": "#999999"}
    colors = [palette[row.verdict] for row in rows]
    ax.bar(ns, oscs, color=colors)
    ax.set_xticks(ns)
    ax.set_xlabel("target size n")
    ax.set_ylabel("worst certified min oscillation")
    ax.set_title("Scan verdicts (green suffices, red fails, grey unknown)")
    _finish(plt, fig, path)


def render_certificate_figure(entries, r, eps, path):
    plt, fig, ax = _axes()
    singles = [(e.i, float(e.value)) for e in entries if e.kind == "single"]
    pairs = [(e.i + 0.15, float(e.value)) for e in entries if e.kind == "pair"]
    if singles:
        ax.scatter(*zip(*singles), marker="o", label="family members", color="#4878a8")
    if pairs:
        ax.scatter(*zip(*pairs), marker="x", label="pairwise carets", color="#a87848")
    ax.axhline(float(r), color="black", linewidth=1)
    ax.axhline(float(r + eps), color="black", linewidth=0.8, linestyle="--")
    ax.axhline(float(r - eps), color="black", linewidth=0.8, linestyle="--")
    ax.set_xlabel("family index")
    ax.set_ylabel("coloring value")
    ax.set_title("Certified values against the target band")
    ax.legend(loc="best", fontsize=8)
    _finish(plt, fig, path)


def render_profile_figure(labels, masses, path):
    plt, fig, ax = _axes()
    ax.bar(labels, [float(m) for m in masses], color="#4878a8")
    ax.set_ylabel("mass")
    ax.set_title("Measure profile")
    _finish(plt, fig, path)
