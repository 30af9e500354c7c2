"""Readers and writers for every external artifact (CSV and JSON-lines).

All writers are atomic (temp file plus rename) and deterministic: keys are
sorted, members are exported as sorted labels and floats use their shortest
round-trip representation, so a seeded pipeline rerun reproduces files byte
for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import tempfile
from contextlib import contextmanager
from typing import Iterable, Sequence

from .graphs import AttributeTable, EventFormatError, NameMap
from .percolation import Community, CommunityCover
from .tracking import CommunityTimeline, EventRecord

EVENTS_HEADER = ["time", "u", "v", "w"]
ATTRIBUTES_HEADER = ["node", "categorical", "numeric"]
TRACK_EVENTS_HEADER = ["t", "kind", "participants", "size_delta"]


@contextmanager
def atomic_write(path: str):
    """Open a sibling temp file for writing and rename it over ``path`` on success."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with open(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def write_csv(
    path: str,
    header: Sequence[str],
    rows: Iterable[Sequence],
    meta: dict | None = None,
) -> None:
    """Write a CSV with optional ``# key=value`` comment lines before the header."""
    with atomic_write(path) as fh:
        for key in sorted(meta or {}):
            fh.write(f"# {key}={meta[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(x) for x in row])


def _open_csv(path: str):
    fh = open(path, newline="", encoding="utf-8")
    return fh


def read_events_csv(path: str) -> list[tuple[float, str, str, float]]:
    """Parse a ``time,u,v,w`` file; malformed rows raise EventFormatError
    carrying their line number."""
    out: list[tuple[float, str, str, float]] = []
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EventFormatError("empty events file", line=1)
        if [h.strip() for h in header] != EVENTS_HEADER:
            raise EventFormatError(
                f"expected header {','.join(EVENTS_HEADER)!r}, got {','.join(header)!r}", line=1
            )
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 4:
                raise EventFormatError(f"expected 4 fields, got {len(row)}", line=line)
            try:
                time = float(row[0])
                w = float(row[3])
            except ValueError:
                raise EventFormatError(f"non-numeric field in {row!r}", line=line) from None
            if not math.isfinite(time) or time < 0:
                raise EventFormatError(f"invalid time {row[0]!r}", line=line)
            if not math.isfinite(w) or w < 0:
                raise EventFormatError(f"invalid weight {row[3]!r}", line=line)
            out.append((time, row[1], row[2], w))
    return out


def write_events_csv(path: str, events: Iterable[tuple[float, str, str, float]]) -> None:
    write_csv(path, EVENTS_HEADER, ((t, u, v, w) for t, u, v, w in events))


def read_attributes_csv(path: str) -> list[tuple[str, str | None, float | None]]:
    """Parse a ``node,categorical,numeric`` file; empty fields are allowed."""
    out: list[tuple[str, str | None, float | None]] = []
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EventFormatError("empty attributes file", line=1)
        if [h.strip() for h in header] != ATTRIBUTES_HEADER:
            raise EventFormatError(
                f"expected header {','.join(ATTRIBUTES_HEADER)!r}, got {','.join(header)!r}",
                line=1,
            )
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 3:
                raise EventFormatError(f"expected 3 fields, got {len(row)}", line=line)
            cat = row[1] if row[1] != "" else None
            num: float | None = None
            if row[2] != "":
                try:
                    num = float(row[2])
                except ValueError:
                    raise EventFormatError(f"non-numeric value {row[2]!r}", line=line) from None
            out.append((row[0], cat, num))
    return out


def write_attributes_csv(
    path: str, rows: Iterable[tuple[str, str | None, float | None]]
) -> None:
    write_csv(path, ATTRIBUTES_HEADER, rows)


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_cover_jsonl(path: str, cover: CommunityCover, names: NameMap) -> None:
    """One community per line: t, k, w_star and the sorted member labels."""
    with atomic_write(path) as fh:
        for comm in cover:
            fh.write(
                _dump(
                    {
                        "t": int(cover.t),
                        "k": int(cover.k),
                        "w_star": float(cover.w_star),
                        "members": sorted(names.label(m) for m in comm.members),
                    }
                )
                + "\n"
            )


def read_cover_jsonl(
    path: str,
    names: NameMap,
    *,
    t: int | None = None,
    k: int | None = None,
    w_star: float | None = None,
) -> CommunityCover:
    """Read one cover file; line parameters must agree with each other and
    with any expected values given (required for files with no lines)."""
    communities: list[Community] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                members = rec["members"]
                rec_t, rec_k, rec_w = int(rec["t"]), int(rec["k"]), float(rec["w_star"])
            except (KeyError, TypeError, ValueError) as exc:
                raise EventFormatError(f"bad cover record: {exc}", line=line_no) from None
            for expected, got, what in ((t, rec_t, "t"), (k, rec_k, "k"), (w_star, rec_w, "w_star")):
                if expected is not None and got != expected:
                    raise EventFormatError(
                        f"cover {what}={got} does not match expected {expected}", line=line_no
                    )
            t, k, w_star = rec_t, rec_k, rec_w
            try:
                ids = frozenset(names.id(lab) for lab in members)
            except KeyError as exc:
                raise EventFormatError(f"unknown node label {exc}", line=line_no) from None
            communities.append(Community(ids, k, t))
    if t is None or k is None or w_star is None:
        raise EventFormatError(
            f"{path}: empty cover file needs expected t, k and w_star to be supplied"
        )
    return CommunityCover(communities, k=k, w_star=w_star, t=t)


def write_timelines_jsonl(
    path: str, timelines: Iterable[CommunityTimeline], names: NameMap
) -> None:
    with atomic_write(path) as fh:
        for tl in timelines:
            fh.write(
                _dump(
                    {
                        "id": tl.id,
                        "t0": tl.t0,
                        "alive_at_end": tl.alive_at_end,
                        "states": [sorted(names.label(m) for m in s) for s in tl.states],
                    }
                )
                + "\n"
            )


def read_timelines_jsonl(path: str, names: NameMap) -> list[CommunityTimeline]:
    timelines = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                states = [frozenset(names.id(lab) for lab in s) for s in rec["states"]]
                timelines.append(
                    CommunityTimeline(
                        id=int(rec["id"]),
                        t0=int(rec["t0"]),
                        states=states,
                        alive_at_end=bool(rec["alive_at_end"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise EventFormatError(f"bad timeline record: {exc}", line=line_no) from None
    return timelines


def write_track_events_csv(path: str, events: Iterable[EventRecord], meta: dict | None = None) -> None:
    rows = (
        (e.t, e.kind, ";".join(str(p) for p in e.participants), e.size_delta) for e in events
    )
    write_csv(path, TRACK_EVENTS_HEADER, rows, meta=meta)


def read_track_events_csv(path: str) -> list[EventRecord]:
    out = []
    with _open_csv(path) as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    for row in rows[1:]:
        participants = tuple(int(p) for p in row[2].split(";") if p != "")
        out.append(EventRecord(int(row[0]), row[1], participants, int(row[3])))
    return out


def write_manifest(path: str, payload: dict) -> None:
    with atomic_write(path) as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_manifest(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def attribute_table_rows(table: AttributeTable, names: NameMap) -> list[tuple[str, str | None, float | None]]:
    """Rows for write_attributes_csv, ordered by node id."""
    ids = sorted(set(table.categorical) | set(table.numeric))
    return [
        (names.label(nid), table.categorical.get(nid), table.numeric.get(nid)) for nid in ids
    ]
