"""Readers for count and observation files.

Counts (one market per record):

* CSV, one row per (market, rank)::

      market,applicants,rank,matched,unmatched_at_length
      Japan,100,1,70,10
      Japan,100,2,10,0

  ``unmatched_at_length`` is optional; leave the column out, or every cell of a
  market empty, for markets without unmatched-by-length data.
* JSON, an object or a list of objects::

      {"market": "Japan", "applicants": 100, "matched_by_rank": [70, 10],
       "unmatched_by_list_length": [10, 0]}

Observations (input to the headline table):

* CSV with header ``market,P1,P2,L``.
* JSON, an object or list of objects with keys ``market, P1, P2, L``.

The format is chosen by file extension. Problems are reported as
:class:`ParseError` carrying ``path:line`` for CSV and ``path:record[i].field``
for JSON.
"""
from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path
from typing import Dict, List

from .calibration import AggregateCounts, MarketObservation
from .errors import ParseError, PressureMatchError

COUNT_COLUMNS = ("market", "applicants", "rank", "matched")
OBSERVATION_COLUMNS = ("market", "P1", "P2", "L")


def _format_of(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".csv", ".tsv", ".txt"):
        return "csv"
    if suffix == ".json":
        return "json"
    raise ParseError(path, 0, f"unsupported extension {suffix!r}; use .csv or .json")


def _int(value, path, where, name) -> int:
    try:
        number = float(value) if isinstance(value, str) else value
        if isinstance(number, bool) or number != int(number):
            raise ValueError
        return int(number)
    except (TypeError, ValueError):
        raise ParseError(path, where, f"field {name!r}: expected an integer, got {value!r}")


def _float(value, path, where, name) -> float:
    try:
        if isinstance(value, bool):
            raise ValueError
        return float(value)
    except (TypeError, ValueError):
        raise ParseError(path, where, f"field {name!r}: expected a number, got {value!r}")


def _csv_rows(text: str, path, required):
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return []
    header = [h.strip() for h in reader.fieldnames]
    reader.fieldnames = header
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(path, 1, f"missing column(s) {', '.join(missing)}; header is {header}")
    rows = []
    for row in reader:
        if all((v or "").strip() == "" for v in row.values() if isinstance(v, str)):
            continue
        rows.append((reader.line_num, {k: (v or "").strip() for k, v in row.items() if k}))
    return rows


def _json_records(text: str, path) -> list:
    if not text.strip():
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}")
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not all(isinstance(r, dict) for r in data):
        raise ParseError(path, "record[0]", "expected an object or a list of objects")
    return data


def parse_counts(text: str, fmt: str, path="<string>") -> List[AggregateCounts]:
    if fmt == "json":
        return [_counts_from_json(rec, path, i) for i, rec in enumerate(_json_records(text, path))]

    markets: Dict[str, dict] = {}
    for line, row in _csv_rows(text, path, COUNT_COLUMNS):
        name = row["market"]
        if not name:
            raise ParseError(path, line, "field 'market' is empty")
        applicants = _int(row["applicants"], path, line, "applicants")
        rank = _int(row["rank"], path, line, "rank")
        matched = _int(row["matched"], path, line, "matched")
        raw_unmatched = row.get("unmatched_at_length", "")
        unmatched = None if raw_unmatched == "" else _int(raw_unmatched, path, line, "unmatched_at_length")
        entry = markets.setdefault(name, {"applicants": applicants, "ranks": {}, "line": line})
        if entry["applicants"] != applicants:
            raise ParseError(
                path, line,
                f"market {name!r}: applicants {applicants} disagrees with {entry['applicants']} "
                f"on line {entry['line']}",
            )
        if rank in entry["ranks"]:
            raise ParseError(path, line, f"market {name!r}: rank {rank} listed twice")
        entry["ranks"][rank] = (matched, unmatched, line)

    out = []
    for name, entry in markets.items():
        ranks = sorted(entry["ranks"])
        if ranks != list(range(1, len(ranks) + 1)):
            raise ParseError(
                path, entry["line"], f"market {name!r}: ranks must run 1..K without gaps, got {ranks}"
            )
        cells = [entry["ranks"][k] for k in ranks]
        given = [c[1] is not None for c in cells]
        if any(given) and not all(given):
            line = next(c[2] for c in cells if c[1] is None)
            raise ParseError(
                path, line, f"market {name!r}: unmatched_at_length must be filled for every rank or none"
            )
        try:
            out.append(
                AggregateCounts(
                    market=name,
                    applicants=entry["applicants"],
                    matched_by_rank=tuple(c[0] for c in cells),
                    unmatched_by_list_length=tuple(c[1] for c in cells) if all(given) else None,
                )
            )
        except PressureMatchError as exc:
            raise ParseError(path, entry["line"], str(exc))
    return out


def _counts_from_json(rec: dict, path, i: int) -> AggregateCounts:
    where = f"record[{i}]"
    for key in ("market", "applicants", "matched_by_rank"):
        if key not in rec:
            raise ParseError(path, where, f"missing field {key!r}")
    matched = rec["matched_by_rank"]
    if not isinstance(matched, list):
        raise ParseError(path, f"{where}.matched_by_rank", "expected a list of counts")
    unmatched = rec.get("unmatched_by_list_length")
    if unmatched is not None and not isinstance(unmatched, list):
        raise ParseError(path, f"{where}.unmatched_by_list_length", "expected a list of counts or null")
    try:
        return AggregateCounts(
            market=str(rec["market"]),
            applicants=_int(rec["applicants"], path, f"{where}.applicants", "applicants"),
            matched_by_rank=tuple(
                _int(v, path, f"{where}.matched_by_rank[{j}]", "matched_by_rank")
                for j, v in enumerate(matched)
            ),
            unmatched_by_list_length=None if unmatched is None else tuple(
                _int(v, path, f"{where}.unmatched_by_list_length[{j}]", "unmatched_by_list_length")
                for j, v in enumerate(unmatched)
            ),
        )
    except ParseError:
        raise
    except PressureMatchError as exc:
        raise ParseError(path, where, str(exc))


def parse_observations(text: str, fmt: str, path="<string>") -> List[MarketObservation]:
    out = []
    if fmt == "json":
        items = [(f"record[{i}]", rec) for i, rec in enumerate(_json_records(text, path))]
    else:
        items = _csv_rows(text, path, OBSERVATION_COLUMNS)
    for where, rec in items:
        for key in OBSERVATION_COLUMNS:
            if key not in rec:
                raise ParseError(path, where, f"missing field {key!r}")
        try:
            out.append(
                MarketObservation(
                    P1=_float(rec["P1"], path, where, "P1"),
                    P2=_float(rec["P2"], path, where, "P2"),
                    L=_int(rec["L"], path, where, "L"),
                    label=str(rec["market"]),
                )
            )
        except ParseError:
            raise
        except PressureMatchError as exc:
            raise ParseError(path, where, str(exc))
    return out


def load_counts(path) -> List[AggregateCounts]:
    fmt = _format_of(path)
    return parse_counts(Path(path).read_text(encoding="utf-8-sig"), fmt, path)


def load_observations(path) -> List[MarketObservation]:
    fmt = _format_of(path)
    return parse_observations(Path(path).read_text(encoding="utf-8-sig"), fmt, path)


def bundled_observations() -> List[MarketObservation]:
    """The three markets of the headline table: U.S. (L=10), Japan (L=3), Japan (L=4)."""
    text = resources.files("pressure_match").joinpath("data/observations.csv").read_text()
    return parse_observations(text, "csv", "observations.csv")
