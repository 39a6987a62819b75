"""Self-contained static HTML report: inline CSS, inline SVG charts, no external assets."""

from __future__ import annotations

from html import escape
from pathlib import Path

from .index_matcher import STATS_LABELS, format_average
from .miur import display_label
from .reporting import (
    NO_PIDS,
    STATUSES,
    UNMATCHED,
    CoverageReport,
    OutputUnwritable,
    all_types_in_order,
    distribution_top_types,
    format_percent,
)

SECTIONS = ("run-metadata", "pid-summary", "coverage", "citations", "per-year", "per-type")

CSS = """
body{font-family:system-ui,sans-serif;margin:2rem auto;max-width:60rem;color:#222}
h1{font-size:1.6rem}h2{border-bottom:1px solid #ccc;padding-bottom:.2rem;margin-top:2rem}
table{border-collapse:collapse;margin:.5rem 0}td,th{border:1px solid #ddd;padding:.25rem .6rem}
td.n{text-align:right;font-variant-numeric:tabular-nums}th{background:#f3f3f3;text-align:left}
.empty{color:#888;font-style:italic}.charts{display:flex;flex-wrap:wrap;gap:2rem}
svg text{font-size:11px;fill:#333}
"""

BAR = "#3b6ea5"


def fmt_int(n: int) -> str:
    return f"{n:,}"


def _table(headers: list[str], rows: list[list[str]], numeric_from: int = 1) -> str:
    if not rows:
        return '<p class="empty">no data</p>'
    head = "".join(f"<th>{escape(h)}</th>" for h in headers)
    body = []
    for row in rows:
        cells = "".join(
            f'<td class="n">{escape(c)}</td>' if i >= numeric_from else f"<td>{escape(c)}</td>"
            for i, c in enumerate(row)
        )
        body.append(f"<tr>{cells}</tr>")
    return f"<table><tr>{head}</tr>{''.join(body)}</table>"


def _hbar_chart(title: str, items: list[tuple[str, int]]) -> str:
    if not any(c for _, c in items):
        return f'<figure><figcaption>{escape(title)}</figcaption><p class="empty">no data</p></figure>'
    peak = max(c for _, c in items)
    label_w, bar_w, row_h = 230, 260, 20
    height = row_h * len(items) + 10
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{label_w + bar_w + 80}" height="{height}">']
    for i, (label, count) in enumerate(items):
        y = 5 + i * row_h
        w = round(bar_w * count / peak, 1) if peak else 0
        parts.append(f'<text x="{label_w - 6}" y="{y + 14}" text-anchor="end">{escape(label)}</text>')
        parts.append(f'<rect x="{label_w}" y="{y + 3}" width="{w}" height="{row_h - 6}" fill="{BAR}"/>')
        parts.append(f'<text x="{label_w + w + 4}" y="{y + 14}">{fmt_int(count)}</text>')
    parts.append("</svg>")
    return f"<figure><figcaption>{escape(title)}</figcaption>{''.join(parts)}</figure>"


def _year_chart(per_year: dict[str, int]) -> str:
    if not per_year:
        return '<p class="empty">no data</p>'
    items = list(per_year.items())
    peak = max(per_year.values())
    col_w, plot_h = 14, 180
    width = col_w * len(items) + 60
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{plot_h + 60}">']
    for i, (year, count) in enumerate(items):
        h = round(plot_h * count / peak, 1) if peak else 0
        x = 40 + i * col_w
        parts.append(
            f'<rect x="{x}" y="{round(plot_h - h + 10, 1)}" width="{col_w - 2}" height="{h}" fill="{BAR}">'
            f"<title>{escape(year)}: {fmt_int(count)}</title></rect>"
        )
        parts.append(
            f'<text x="{x + 5}" y="{plot_h + 16}" transform="rotate(60 {x + 5} {plot_h + 16})">{escape(year)}</text>'
        )
    parts.append(f'<text x="2" y="18">{fmt_int(peak)}</text>')
    parts.append("</svg>")
    return "".join(parts)


def _section(sid: str, title: str, body: str) -> str:
    return f'<section id="{sid}">\n<h2>{escape(title)}</h2>\n{body}\n</section>\n'


def render_html(report: CoverageReport) -> str:
    meta_rows = [[k, v] for k, v in sorted(report.metadata.items())]
    meta_rows += [[k, fmt_int(v)] for k, v in sorted(report.counters.items())]
    s = report.pid_summary
    pid_rows = [[label, fmt_int(v)] for label, v in s.rows()] if s.total_records else []
    rej_rows = [[f"{scheme}: {reason}", fmt_int(n)] for (scheme, reason), n in sorted(s.rejections.items())]

    if report.total_records:
        coverage_rows = [
            ["Total records", fmt_int(report.total_records)],
            [f"Records published by {report.cutoff_year} (or undated)", fmt_int(report.eligible_records)],
            ["Records without publication year", fmt_int(report.unknown_year_records)],
            ["Records matched in OpenCitations Meta", fmt_int(report.matched_count)],
            ["Matched (%)", format_percent(report.matched_pct) or "n/a"],
        ] + [[f"Sub-dataset: {name}", fmt_int(n)] for name, n in report.subset_sizes.items()]
    else:
        coverage_rows = []

    c = report.citation_stats
    cit_rows = []
    if report.matched_count:
        cit_rows = [
            [STATS_LABELS[0], fmt_int(c.outgoing_total), format_average(c.outgoing_avg) or "n/a", fmt_int(c.outgoing_ocis)],
            [STATS_LABELS[1], fmt_int(c.incoming_total), format_average(c.incoming_avg) or "n/a", fmt_int(c.incoming_ocis)],
            [STATS_LABELS[2], fmt_int(c.internal_total), "", ""],
        ]

    types = all_types_in_order(report)
    type_rows = [
        [
            display_label(t),
            fmt_int(report.type_total(t)),
            *(fmt_int(report.per_type[t][st]) for st in STATUSES),
            format_percent(report.type_coverage(t)) or "n/a",
        ]
        for t in types
    ]
    unmatched = distribution_top_types({t: report.per_type[t][UNMATCHED] for t in types})
    no_pids = distribution_top_types({t: report.per_type[t][NO_PIDS] for t in types})
    charts = (
        '<div class="charts">'
        + _hbar_chart("Records with PIDs not found in OpenCitations Meta", unmatched)
        + _hbar_chart("Records without persistent identifiers", no_pids)
        + "</div>"
    )

    body = "".join(
        [
            _section("run-metadata", "Run metadata", _table(["Field", "Value"], meta_rows)),
            _section(
                "pid-summary",
                "PID extraction and validation",
                _table(["", "Value"], pid_rows) + "<h3>Rejected identifiers</h3>" + _table(["Reason", "Count"], rej_rows),
            ),
            _section("coverage", "Records matched in OpenCitations Meta", _table(["", "Value"], coverage_rows)),
            _section(
                "citations",
                "Citations involving the records in the OpenCitations Index",
                _table(["", "Citations", "Average per matched record", "Distinct OCIs"], cit_rows),
            ),
            _section("per-year", "Records per publication year", _year_chart(report.per_year)),
            _section(
                "per-type",
                "Coverage by MIUR publication type",
                _table(["MIUR type", "Records", "Matched", "PIDs, unmatched", "No PIDs", "Coverage (%)"], type_rows)
                + charts,
            ),
        ]
    )
    return (
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
        "<title>OpenCitations coverage report</title>\n"
        f"<style>{CSS}</style>\n</head>\n<body>\n<h1>OpenCitations coverage report</h1>\n{body}</body>\n</html>\n"
    )


def render_html_report(report: CoverageReport, out: str | Path) -> Path:
    out = Path(out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(render_html(report), encoding="utf-8")
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {out}: {exc}") from exc
    return out

