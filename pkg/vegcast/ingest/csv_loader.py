import glob
import logging
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from vegcast.core import (DuplicateRecordError, InvalidInputError, ObservationSeries, ParseError,
                          Quality, Sample)
from vegcast.utils import parse_date

logger = logging.getLogger(__name__)

# the header occupies line 1 of every file
_FIRST_DATA_LINE = 2


@dataclass(frozen=True)
class CsvSchema:
    """
    Column layout of an observation CSV file.

    Attributes
    ----------
    pixel_column, region_column, date_column, value_column, quality_column : str
        Column names.
    value_scale : float
        Stored NDVI values are divided by this factor (e.g. 10000 for scaled
        integer products). The default 1.0 means values are plain NDVI.
    """

    pixel_column: str = "pixel_id"
    region_column: str = "region_id"
    date_column: str = "date"
    value_column: str = "ndvi"
    quality_column: str = "quality"
    value_scale: float = 1.0

    @property
    def columns(self) -> list[str]:
        return [self.pixel_column, self.region_column, self.date_column,
                self.value_column, self.quality_column]


def observation_files(path: str) -> list[str]:
    """
    The CSV files named by ``path``: the file itself, or every ``*.csv`` in a directory.
    """
    if os.path.isdir(path):
        return sorted(glob.glob(os.path.join(path, "*.csv")))
    if os.path.isfile(path):
        return [path]
    raise InvalidInputError(f"input path {path!r} does not exist")


def load_observations(path: str, schema: CsvSchema = CsvSchema()) -> list[ObservationSeries]:
    """
    Read per-pixel observation streams from a CSV file or a directory of CSV files.

    Parameters
    ----------
    path : str
        A CSV file, or a directory whose ``*.csv`` files are read in name order.
    schema : CsvSchema, optional
        Column layout.

    Returns
    -------
    list[ObservationSeries]
        One series per pixel, sorted by pixel id; samples sorted by date.

    Raises
    ------
    ParseError
        A row has a malformed date, value or quality token (carries the line number).
    DuplicateRecordError
        The same (pixel, date) pair appears twice.
    """
    frames = []
    for file_name in observation_files(path):
        frame = _read_file(file_name, schema)
        frame["file"] = file_name
        frames.append(frame)
    if not frames:
        return []

    observations = pd.concat(frames, ignore_index=True)
    _check_duplicates(observations)

    series = []
    for pixel_id, rows in observations.groupby("pixel_id", sort=True):
        regions = rows["region_id"].unique()
        if len(regions) > 1:
            row = rows[rows["region_id"] != regions[0]].iloc[0]
            raise ParseError(f"{row['file']}: pixel {pixel_id} is assigned to regions "
                             f"{sorted(regions)}", int(row["line"]))
        rows = rows.sort_values("date", kind="mergesort")
        samples = tuple(Sample(d.date(), float(v), q)
                        for d, v, q in zip(rows["date"], rows["ndvi"], rows["quality"]))
        series.append(ObservationSeries(str(pixel_id), str(regions[0]), samples))

    logger.info("loaded %d observations for %d pixels from %s", len(observations), len(series), path)
    return series


def _read_file(file_name: str, schema: CsvSchema) -> pd.DataFrame:
    raw = pd.read_csv(file_name, dtype=str, keep_default_na=False, encoding="utf-8")
    missing = [c for c in schema.columns if c not in raw.columns]
    if missing:
        raise ParseError(f"{file_name}: missing column(s) {missing}", 1)

    frame = pd.DataFrame({
        "pixel_id": raw[schema.pixel_column].str.strip(),
        "region_id": raw[schema.region_column].str.strip(),
        "line": np.arange(len(raw)) + _FIRST_DATA_LINE,
    })

    def fail(mask, message):
        if mask.any():
            first = int(np.flatnonzero(mask.to_numpy())[0])
            raise ParseError(f"{file_name}: {message} {raw.iloc[first].tolist()!r}", first + _FIRST_DATA_LINE)

    fail((frame["pixel_id"] == "") | (frame["region_id"] == ""), "empty pixel or region id in row")

    dates = _parse_dates(raw[schema.date_column].str.strip())
    fail(dates.isna(), "malformed ISO-8601 date in row")
    frame["date"] = dates

    tokens = raw[schema.quality_column].str.strip().str.lower()
    fail(~tokens.isin(["good", "bad"]), "quality must be 'good' or 'bad' in row")
    frame["quality"] = [Quality.GOOD if t == "good" else Quality.BAD for t in tokens]

    values = pd.to_numeric(raw[schema.value_column].str.strip(), errors="coerce") / schema.value_scale
    good = tokens == "good"
    # bad-quality rows may carry fill values, they are masked downstream
    fail(good & ~values.between(-1.0, 1.0), "good-quality NDVI missing or outside [-1, 1] in row")
    frame["ndvi"] = values.astype(float)
    return frame


def _parse_dates(tokens: pd.Series) -> pd.Series:
    """Whole-field ISO-8601 dates; timestamps keep their calendar date, anything else is NaT."""
    dates = pd.to_datetime(tokens, format="%Y-%m-%d", errors="coerce")
    timestamps = dates.isna() & (tokens.str.len() > 10)
    if timestamps.any():
        dates.loc[timestamps] = pd.to_datetime([_timestamp_date(t) for t in tokens[timestamps]]).to_numpy()
    return dates


def _timestamp_date(token: str):
    try:
        return parse_date(token)
    except ValueError:
        return pd.NaT


def _check_duplicates(observations: pd.DataFrame):
    duplicated = observations.duplicated(["pixel_id", "date"], keep="first")
    if duplicated.any():
        row = observations[duplicated].iloc[0]
        raise DuplicateRecordError(
            f"{row['file']}: duplicate observation for pixel {row['pixel_id']} on {row['date'].date()}",
            int(row["line"]))
