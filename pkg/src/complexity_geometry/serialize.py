"""Deterministic JSON/CSV output and atomic file writes.

JSON keys are sorted and floats are printed with 17 significant digits, so a
fixed input always produces the same bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile
from typing import Iterable, Optional

import numpy as np


def _scalar(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        raise ValueError("infinite value cannot be written as JSON")
    return format(x, ".17g")


def _emit(obj, out: list, indent: int, level: int) -> None:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    if obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (bool, int, float, np.bool_, np.integer, np.floating)):
        out.append(_scalar(obj))
    elif isinstance(obj, complex):
        _emit([obj.real, obj.imag], out, indent, level)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            out.append(("," if i else "") + pad + json.dumps(str(key)) + ": ")
            _emit(obj[key], out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(items):
            out.append(("," if i else "") + pad)
            _emit(item, out, indent, level + 1)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 0) -> str:
    """JSON text with sorted keys and ``.17g`` floats; NaN becomes null."""
    out: list = []
    _emit(obj, out, indent, 0)
    return "".join(out) + "\n"


def csv_text(rows: Iterable[dict], columns: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: (_scalar(v) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
    return buf.getvalue()


def atomic_write(path: Optional[str], text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and rename; ``None``/``-`` is stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
