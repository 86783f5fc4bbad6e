"""JSON and CSV serialization of persistence diagrams.

JSON layout is ``{"points": [[birth, death], ...]}``; CSV has an optional
``birth,death`` header and one point per line.  Floats are written with
``repr`` (shortest round-trip form, at most 17 significant digits), so
``read(write(D)) == D`` exactly.
"""

from __future__ import annotations

import io
import json
import os
from pathlib import Path
from typing import BinaryIO, Union

from .diagram import PersistenceDiagram

FORMATS = ("json", "csv")

Source = Union[bytes, str, BinaryIO]


class DiagramFormatError(ValueError):
    """Malformed diagram input."""


def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        raise ValueError(f"unknown diagram format {fmt!r}; expected one of {FORMATS}")


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def read_diagram(source: Source, format: str = "json") -> PersistenceDiagram:
    _check_format(format)
    text = _read_text(source)
    if format == "json":
        return _parse_json(text)
    return _parse_csv(text)


def _parse_json(text: str) -> PersistenceDiagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict) or "points" not in doc:
        raise DiagramFormatError('expected an object with a "points" array')
    raw = doc["points"]
    if not isinstance(raw, list):
        raise DiagramFormatError('"points" must be an array')
    pts = []
    for i, item in enumerate(raw):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in item)
        ):
            raise DiagramFormatError(f"points[{i}]: expected [birth, death] numbers, got {item!r}")
        pts.append((float(item[0]), float(item[1])))
    return PersistenceDiagram(pts)


def _parse_csv(text: str) -> PersistenceDiagram:
    pts = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if lineno == 1 and line.replace(" ", "").lower() == "birth,death":
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise DiagramFormatError(f"line {lineno}: expected 2 fields, got {len(fields)}")
        try:
            pts.append((float(fields[0]), float(fields[1])))
        except ValueError:
            raise DiagramFormatError(f"line {lineno}: non-numeric field in {line!r}") from None
    return PersistenceDiagram(pts)


def write_diagram(D: PersistenceDiagram, format: str = "json") -> bytes:
    _check_format(format)
    if format == "json":
        body = ", ".join(f"[{float(b)!r}, {float(d)!r}]" for b, d in D.points)
        return f'{{"points": [{body}]}}\n'.encode()
    buf = io.StringIO()
    buf.write("birth,death\n")
    for b, d in D.points:
        buf.write(f"{float(b)!r},{float(d)!r}\n")
    return buf.getvalue().encode()


def load_diagram(path: Union[str, os.PathLike], format: str | None = None) -> PersistenceDiagram:
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "json")
    try:
        return read_diagram(path.read_bytes(), fmt)
    except DiagramFormatError as exc:
        raise DiagramFormatError(f"{path}: {exc}") from None


def save_diagram(D: PersistenceDiagram, path: Union[str, os.PathLike], format: str | None = None) -> None:
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "json")
    path.write_bytes(write_diagram(D, fmt))
