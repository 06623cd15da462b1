"""CSV and JSON writers with round-trippable float formatting."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return format_float(value)
    return value


def csv_text(fieldnames: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(path: str | Path, fieldnames: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Write rows to ``path``; returns the number of data rows."""
    text = csv_text(fieldnames, rows)
    Path(path).write_text(text, encoding="utf-8")
    return text.count("\n") - 1


def _plain(value: Any) -> Any:
    if hasattr(value, "model_dump"):
        return _plain(value.model_dump())
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    return value


class FixedPrecisionEncoder(json.JSONEncoder):
    """JSON encoder that writes every float like the CSV writer does."""

    def iterencode(self, o: Any, _one_shot: bool = False):
        def floatstr(value: float) -> str:
            if math.isnan(value):
                return "NaN"
            if math.isinf(value):
                return "Infinity" if value > 0 else "-Infinity"
            return format_float(value)

        encoder = json.encoder.encode_basestring_ascii if self.ensure_ascii else json.encoder.encode_basestring
        iterencode = json.encoder._make_iterencode(
            {} if self.check_circular else None,
            self.default,
            encoder,
            self.indent,
            floatstr,
            self.key_separator,
            self.item_separator,
            self.sort_keys,
            self.skipkeys,
            _one_shot,
        )
        return iterencode(o, 0)


def json_text(data: Any) -> str:
    """Indented JSON with floats at 17 significant digits."""
    return json.dumps(_plain(data), indent=2, cls=FixedPrecisionEncoder) + "\n"


def write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(json_text(data), encoding="utf-8")
