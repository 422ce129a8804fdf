from .errors import OutOfRangeError
from .series import ObservationSeries
from .time_grid import TimeGrid


def align_to_grid(obs: ObservationSeries, grid: TimeGrid) -> list[tuple[int, float]]:
    """
    Map the good samples of an observation stream onto a weekly grid.

    Each good sample goes to the slot whose window ``[slot_date - 6, slot_date]``
    contains its date. Bad-quality samples are dropped. Several samples in the
    same window are all emitted with the same slot index, in date order.

    Parameters
    ----------
    obs : ObservationSeries
        The raw stream.
    grid : TimeGrid
        Target grid; it must cover every sample date.

    Returns
    -------
    list[tuple[int, float]]
        ``(slot_index, value)`` pairs in date order.

    Raises
    ------
    OutOfRangeError
        If any sample (good or bad) lies outside the grid span.
    """
    aligned = []
    outside = []
    for sample in obs.samples:
        index = grid.slot_of(sample.date)
        if index is None:
            outside.append(sample.date)
            continue
        if sample.is_good:
            aligned.append((index, float(sample.value)))

    if outside:
        raise OutOfRangeError(
            f"pixel {obs.pixel_id}: {len(outside)} sample(s) outside grid "
            f"{grid.window_start} .. {grid.end_date}", outside)
    return aligned
