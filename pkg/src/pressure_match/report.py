"""Markdown and CSV rendering of result tables."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .analytics import KeyStatistics
from .calibration import MarketObservation, provenance

INFEASIBLE = "infeasible"
TABLE_COLUMNS = ("market", "P1", "P2", "L", "a", "e", "RL", "RL_rand", "Q_lower", "PRL_alpha", "QL", "alpha", "engine")


@dataclass(frozen=True)
class ReportRow:
    observation: MarketObservation
    alpha: float
    stats: KeyStatistics
    engine: str = "analytic"
    provenance: Dict[str, str] = field(default_factory=dict)

    @property
    def market(self) -> str:
        return self.observation.label

    def cells(self) -> Dict[str, object]:
        s = self.stats
        return {
            "market": self.market,
            "P1": self.observation.P1,
            "P2": self.observation.P2,
            "L": self.observation.L,
            "a": s.a,
            "e": s.e,
            "RL": s.rank_loss,
            "RL_rand": s.random_rank_loss,
            "Q_lower": s.q_lower,
            "PRL_alpha": s.prl_alpha,
            "QL": s.quantile_loss,
            "alpha": self.alpha,
            "engine": self.engine,
        }


def make_row(obs: MarketObservation, alpha: float, stats: KeyStatistics, engine: str) -> ReportRow:
    return ReportRow(obs, alpha, stats, engine, provenance(engine))


def format_number(value, precision) -> str:
    """Render a cell. ``precision=None`` means full round-trip precision."""
    if value is None:
        return INFEASIBLE
    if isinstance(value, bool) or isinstance(value, str):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if precision is None:
        return repr(float(value))
    return f"{value:.{precision}f}"


def parse_precision(text) -> Optional[int]:
    if text is None:
        return 4
    if isinstance(text, int):
        return text
    if str(text).strip().lower() in ("full", "max", "repr"):
        return None
    value = int(text)
    if value < 0:
        raise ValueError("precision must be non-negative")
    return value


# observed inputs of the headline table are echoed exactly
TABLE_VERBATIM = ("P1", "P2", "alpha")


def _cell(name: str, value, precision, verbatim: Sequence[str]) -> str:
    if name in verbatim and isinstance(value, float):
        return repr(value) if precision is None else f"{value:.12g}"
    return format_number(value, precision)


def render_markdown(columns: Sequence[str], rows: Sequence[Dict[str, object]], precision=4, verbatim=()) -> str:
    header = "| " + " | ".join(columns) + " |"
    rule = "|" + "|".join("---" for _ in columns) + "|"
    lines = [header, rule]
    for row in rows:
        lines.append("| " + " | ".join(_cell(c, row.get(c), precision, verbatim) for c in columns) + " |")
    return "\n".join(lines) + "\n"


def render_csv(columns: Sequence[str], rows: Sequence[Dict[str, object]], precision=4, verbatim=()) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(c, row.get(c), precision, verbatim) for c in columns])
    return buf.getvalue()


def render(columns, rows, fmt: str = "md", precision=4, verbatim=()) -> str:
    """Render ``rows`` (dicts keyed by column) as markdown or CSV.

    Columns named in ``verbatim`` skip the fixed-decimal rounding.
    """
    if fmt == "csv":
        return render_csv(columns, rows, precision, verbatim)
    return render_markdown(columns, rows, precision, verbatim)


def render_table(report_rows: Sequence[ReportRow], fmt: str = "md", precision=4) -> str:
    return render(TABLE_COLUMNS, [r.cells() for r in report_rows], fmt, precision, TABLE_VERBATIM)


def parse_table_csv(text: str) -> List[Dict[str, object]]:
    """Read back a CSV written by :func:`render_table`."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed: Dict[str, object] = {}
        for key, value in row.items():
            if key in ("market", "engine"):
                parsed[key] = value
            elif key == "L":
                parsed[key] = int(value)
            elif value == INFEASIBLE:
                parsed[key] = None
            else:
                parsed[key] = float(value)
        out.append(parsed)
    return out
