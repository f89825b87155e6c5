import json
import logging
from io import StringIO
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd
import pandera as pa

from fresco.curves import Curve, normalize
from fresco.utils.errors import InvalidInputError
from fresco.utils.utils import format_number

logger = logging.getLogger(__name__)

LONG_HEADER = ["id", "t", "value"]

SERIES_SCHEMA = pa.DataFrameSchema(
    {
        "row": pa.Column(int),
        "id": pa.Column(str, pa.Check.str_length(min_value=1)),
        "value": pa.Column(float, pa.Check(np.isfinite, element_wise=True)),
    },
    coerce=True,
)

LONG_SCHEMA = pa.DataFrameSchema(
    {
        "row": pa.Column(int),
        "id": pa.Column(str, pa.Check.str_length(min_value=1)),
        "t": pa.Column(float),
        "value": pa.Column(float, pa.Check(np.isfinite, element_wise=True)),
    },
    coerce=True,
)

PathLike = Union[str, Path]


def detect_format(path: PathLike, fmt: str = "auto") -> str:
    """Resolve "auto" to "json" or "csv" from the file suffix."""
    if fmt not in ("auto", "csv", "json"):
        raise InvalidInputError(f"Unknown input format {fmt!r}.")
    if fmt != "auto":
        return fmt
    return "json" if Path(path).suffix.lower() == ".json" else "csv"


def validate_series_data(
    frame: pd.DataFrame, schema: pa.DataFrameSchema
) -> pd.DataFrame:
    """Validate a tidy series frame, naming the first offending input row.

    Args:
        frame: pd.DataFrame with a "row" column holding 1-based input rows.
        schema: pa.DataFrameSchema to validate against.

    Returns:
        The validated, coerced frame.

    Raises:
        InvalidInputError: on the first failing row.
    """
    try:
        return schema.validate(frame, lazy=True)
    except pa.errors.SchemaErrors as exc:
        cases = exc.failure_cases
        located = cases.dropna(subset=["index"])
        if located.empty:
            message = f"Malformed input: {cases.iloc[0].to_dict()}"
            raise InvalidInputError(message) from exc
        first = located.sort_values("index").iloc[0]
        row = frame.loc[int(first["index"]), "row"]
        raise InvalidInputError(
            f"row {row}: {first['column']} {first['failure_case']!r} "
            f"fails {first['check']}"
        ) from exc


def _read_lines(path: PathLike) -> List[str]:
    try:
        with open(path, encoding="utf-8") as file:
            return file.read().splitlines()
    except OSError as exc:
        raise InvalidInputError(f"Cannot read {path}: {exc.strerror}") from exc


def _group(frame: pd.DataFrame) -> Tuple[List[str], List[Curve]]:
    ids, curves = [], []
    for series_id, group in frame.groupby("id", sort=False):
        ids.append(str(series_id))
        curves.append(normalize(group["value"].to_numpy()))
    return ids, curves


def _numbered(lines: Sequence[str]) -> Tuple[List[int], str]:
    """1-based numbers of the non-blank lines, and those lines joined."""
    kept = [(n, line) for n, line in enumerate(lines, start=1) if line.strip()]
    return [number for number, _ in kept], "\n".join(line for _, line in kept)


def _read_wide_csv(lines: Sequence[str]) -> pd.DataFrame:
    numbers, text = _numbered(lines)
    width = max(line.count(",") for line in lines) + 1
    if width < 2:
        raise InvalidInputError(f"row {numbers[0]}: series has no values")
    raw = pd.read_csv(
        StringIO(text),
        header=None,
        names=range(width),
        dtype=str,
        keep_default_na=False,
        na_values=[],
    )
    raw.insert(0, "row", numbers)
    for row, values in zip(raw["row"], raw[1].to_numpy()):
        if pd.isna(values) or values == "":
            raise InvalidInputError(f"row {row}: series has no values")
    tidy = raw.melt(id_vars=["row", 0], var_name="position", value_name="value")
    tidy = tidy.dropna(subset=["value"]).rename(columns={0: "id"})
    tidy = tidy.sort_values(["row", "position"], kind="stable").reset_index(drop=True)
    return validate_series_data(tidy[["row", "id", "value"]], SERIES_SCHEMA)


def _read_long_csv(lines: Sequence[str]) -> pd.DataFrame:
    numbers, text = _numbered(lines)
    raw = pd.read_csv(StringIO(text), dtype=str, keep_default_na=False)
    if list(raw.columns) != LONG_HEADER:
        raise InvalidInputError(
            f"row {numbers[0]}: expected header {','.join(LONG_HEADER)}"
        )
    raw.insert(0, "row", numbers[1:])
    tidy = validate_series_data(raw, LONG_SCHEMA)
    # timestamps only order the measurements
    order = {series_id: i for i, series_id in enumerate(pd.unique(tidy["id"]))}
    tidy = tidy.assign(rank=tidy["id"].map(order))
    return tidy.sort_values(["rank", "t"], kind="stable")[["row", "id", "value"]]


def _read_json(text: str) -> pd.DataFrame:
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(
            f"Invalid JSON at line {exc.lineno}: {exc.msg}"
        ) from exc
    if not isinstance(records, list):
        raise InvalidInputError("JSON input must be an array of series.")
    rows = []
    for number, record in enumerate(records, start=1):
        if not isinstance(record, dict) or not isinstance(record.get("values"), list):
            raise InvalidInputError(f"row {number}: expected {{\"id\", \"values\"}}")
        if not record["values"]:
            raise InvalidInputError(f"row {number}: series has no values")
        series_id = record.get("id", str(number))
        rows.extend((number, str(series_id), value) for value in record["values"])
    frame = pd.DataFrame(rows, columns=["row", "id", "value"])
    return validate_series_data(frame, SERIES_SCHEMA)


def read_curves(path: PathLike, fmt: str = "auto") -> Tuple[List[str], List[Curve]]:
    """Read and normalize every series of a curve file.

    Wide CSV holds one series per line as `id,v1,v2,...` with ragged lengths
    allowed. A CSV whose first line is `id,t,value` is read in long format,
    where t only orders each series' measurements. JSON holds an array of
    {"id": ..., "values": [...]} objects.

    Args:
        path: str or Path, the input file.
        fmt: str, one of "auto", "csv" or "json".

    Returns:
        Tuple of series ids and normalized curves, in file order.

    Raises:
        InvalidInputError: if the file is unreadable, empty or malformed, or if
            an id repeats.
    """
    fmt = detect_format(path, fmt)
    lines = _read_lines(path)
    if not any(line.strip() for line in lines):
        raise InvalidInputError(f"{path} holds no series.")
    header = [c.strip() for c in lines[0].split(",")]
    long_format = fmt == "csv" and header == LONG_HEADER
    if fmt == "json":
        frame = _read_json("\n".join(lines))
    elif long_format:
        frame = _read_long_csv(lines)
    else:
        frame = _read_wide_csv(lines)
    if not long_format:
        repeated = frame.drop_duplicates(["row"])
        duplicated = repeated[repeated["id"].duplicated()]
        if not duplicated.empty:
            first = duplicated.iloc[0]
            raise InvalidInputError(f"row {first['row']}: repeated id {first['id']!r}")
    ids, curves = _group(frame)
    if not curves:
        raise InvalidInputError(f"{path} holds no series.")
    logger.info(f"Read {len(curves)} series from {path}")
    return ids, curves


def format_curves(
    ids: Sequence[str], curves: Sequence[Curve], fmt: str = "csv"
) -> str:
    """Render curves in the wide CSV or JSON input format."""
    if len(ids) != len(curves):
        raise InvalidInputError("Need exactly one id per curve.")
    if fmt == "json":
        items = []
        for i, c in zip(ids, curves):
            values = ", ".join(format_number(v) for v in c)
            items.append(f'{{"id": {json.dumps(str(i))}, "values": [{values}]}}')
        return "[\n" + ",\n".join(f"  {item}" for item in items) + "\n]\n"
    if fmt != "csv":
        raise InvalidInputError(f"Unknown output format {fmt!r}.")
    return "".join(
        ",".join([str(i)] + [format_number(v) for v in c]) + "\n"
        for i, c in zip(ids, curves)
    )


def write_curves(
    ids: Sequence[str],
    curves: Sequence[Curve],
    output: Optional[Union[PathLike, TextIO]] = None,
    fmt: str = "csv",
) -> str:
    """Write curves in an input format to a path or stream and return the text."""
    text = format_curves(ids, curves, fmt)
    if output is None:
        return text
    if hasattr(output, "write"):
        output.write(text)
    else:
        with open(output, "w", encoding="utf-8") as file:
            file.write(text)
    return text
