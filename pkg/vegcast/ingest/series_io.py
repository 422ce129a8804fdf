import numpy as np
import pandas as pd

from vegcast.core import InvalidInputError, ParseError, TimeGrid, WeeklySeries
from vegcast.utils import save_frame

REGIONAL_COLUMNS = ["region_id", "date", "value"]


def series_frame(series_map: dict[str, WeeklySeries]) -> pd.DataFrame:
    """
    Long-format table of several regional series, one row per slot, gaps as NaN.
    Regions are written in sorted order.
    """
    frames = []
    for region_id in sorted(series_map):
        series = series_map[region_id]
        frames.append(pd.DataFrame({
            "region_id": region_id,
            "date": [d.isoformat() for d in series.grid.dates()],
            "value": series.values,
        }))
    if not frames:
        return pd.DataFrame(columns=REGIONAL_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def write_regional_series(series_map: dict[str, WeeklySeries], filename: str):
    """
    Write regional series as CSV ``region_id,date,value`` with an empty value for gaps.

    Every slot of every grid is written, so reading the file back reproduces the
    grids and values exactly.
    """
    save_frame(series_frame(series_map), filename)


def read_regional_series(filename: str) -> dict[str, WeeklySeries]:
    """
    Read a file written by :func:`write_regional_series`.

    Raises
    ------
    ParseError
        If a region's dates are not consecutive weekly slots.
    """
    frame = pd.read_csv(filename, dtype={"region_id": str, "date": str}, float_precision="round_trip",
                        keep_default_na=False, na_values={"value": [""]})
    missing = [c for c in REGIONAL_COLUMNS if c not in frame.columns]
    if missing:
        raise ParseError(f"{filename}: missing column(s) {missing}", 1)

    frame["line"] = np.arange(len(frame)) + 2
    frame["date"] = pd.to_datetime(frame["date"], format="%Y-%m-%d", errors="coerce")
    if frame["date"].isna().any():
        raise ParseError(f"{filename}: malformed date", int(frame.loc[frame["date"].isna(), "line"].iloc[0]))

    result = {}
    for region_id, rows in frame.groupby("region_id", sort=True):
        dates = [d.date() for d in rows["date"]]
        steps = np.diff([d.toordinal() for d in dates])
        if (steps != 7).any():
            bad = int(np.flatnonzero(steps != 7)[0]) + 1
            raise ParseError(f"{filename}: region {region_id} dates are not consecutive weeks",
                             int(rows["line"].iloc[bad]))
        grid = TimeGrid(dates[0], len(dates))
        result[str(region_id)] = WeeklySeries(grid, rows["value"].to_numpy(dtype=float))
    return result


def common_grid(series_map: dict[str, WeeklySeries]) -> TimeGrid:
    """The grid shared by every series in the map."""
    grids = {s.grid for s in series_map.values()}
    if len(grids) != 1:
        raise InvalidInputError(f"expected series on one shared grid, found {len(grids)} grids")
    return grids.pop()


def align_series(series: WeeklySeries, grid: TimeGrid) -> WeeklySeries:
    """Re-index ``series`` onto ``grid`` (same weekday); slots outside the source become gaps."""
    offset = grid.offset_of(series.grid)
    values = np.full(grid.length, np.nan)
    lo, hi = max(0, offset), min(grid.length, offset + series.grid.length)
    if lo < hi:
        values[lo:hi] = series.values[lo - offset:hi - offset]
    return WeeklySeries(grid, values)
