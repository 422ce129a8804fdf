import logging
import math
import os
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta

import numpy as np
import pandas as pd

from vegcast.core import ConfigError, TimeGrid, WeeklySeries
from vegcast.ingest import write_regional_series
from vegcast.utils import rng_for, save_frame, save_json

logger = logging.getLogger(__name__)

TRUTH_FILE = "truth_series.csv"
CLEAR_COUNTS_FILE = "clear_counts.csv"
SIDECAR_FILE = "truth.json"
OBSERVATIONS_DIR = "observations"

# cloudy samples carry a low contaminated reading
CLOUD_READING = 0.05


@dataclass(frozen=True)
class Coupling:
    """
    The anomaly of ``target`` receives ``coefficient`` times the anomaly of
    ``source`` from ``lag`` weeks earlier.
    """

    source: str
    target: str
    coefficient: float
    lag: int = 4


@dataclass(frozen=True)
class DroughtEvent:
    region_id: str
    start: date
    weeks: int
    depth: float

    @property
    def end(self) -> date:
        return self.start + timedelta(weeks=self.weeks - 1)


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Parameters of a synthetic NDVI benchmark.

    Regional NDVI is a base level plus a 52-week seasonal cycle plus an AR(1)
    anomaly; pixels add a fixed offset (zero mean across the region) and
    observation noise. Whole-region cloudy weeks follow a seasonal probability,
    and single pixels are clouded independently on clear weeks.

    Attributes
    ----------
    regions : int
        Number of regions, named ``R01``, ``R02``, ...
    years : int
        Length in years of 52 weeks.
    pixels_per_region : int
        Sampled pixels per region.
    start_date : date
        First slot date; its weekday anchors the grid.
    base_ndvi, seasonal_amplitude : float
        Mean level and half peak-to-trough of the seasonal cycle.
    persistence : float
        AR(1) coefficient of the weekly anomaly, in [0, 1).
    anomaly_std : float
        Innovation standard deviation of the anomaly.
    noise_std : float
        Per-observation noise.
    pixel_offset_std : float
        Spread of the fixed per-pixel offsets.
    gap_probability : float
        Mean weekly probability of a whole-region cloudy week.
    gap_seasonality : float
        Relative seasonal modulation of that probability, in [0, 1].
    pixel_gap_probability : float
        Probability that a single pixel is clouded on an otherwise clear week.
    drought_events : int
        Injected drought events per region.
    drought_weeks : int
        Length of each event.
    drought_depth : float
        Relative NDVI depression during an event, e.g. 0.3 for 30 percent.
    couplings : tuple[Coupling, ...]
        Inter-region couplings, by region name.
    min_pixels_for_aggregate, l_max, order, train_length, lead, min_valid_fraction, strict_window
        Rules used to derive the expected forecast coverage of each region.
    """

    regions: int = 3
    years: int = 15
    pixels_per_region: int = 40
    start_date: date = date(2001, 1, 6)
    base_ndvi: float = 0.45
    seasonal_amplitude: float = 0.2
    persistence: float = 0.9
    anomaly_std: float = 0.02
    noise_std: float = 0.01
    pixel_offset_std: float = 0.02
    gap_probability: float = 0.05
    gap_seasonality: float = 0.5
    pixel_gap_probability: float = 0.05
    drought_events: int = 0
    drought_weeks: int = 20
    drought_depth: float = 0.3
    couplings: tuple[Coupling, ...] = ()
    min_pixels_for_aggregate: int = 25
    l_max: int = 6
    order: int = 3
    train_length: int = 200
    lead: int = 4
    min_valid_fraction: float = 0.8
    strict_window: bool = False

    def __post_init__(self):
        if self.regions < 1 or self.years < 1 or self.pixels_per_region < 1:
            raise ConfigError("regions, years and pixels_per_region must be >= 1")
        if not 0.0 <= self.persistence < 1.0:
            raise ConfigError(f"persistence must be in [0, 1), got {self.persistence}")
        for name in ("gap_probability", "gap_seasonality", "pixel_gap_probability", "drought_depth"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {getattr(self, name)}")
        for name in ("anomaly_std", "noise_std", "pixel_offset_std"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be >= 0")
        if self.drought_events and self.drought_weeks > 52:
            raise ConfigError("drought events are placed within a year, drought_weeks must be <= 52")
        if self.drought_events > max(self.years - 2, 0):
            raise ConfigError(f"{self.drought_events} drought events do not fit after the first two years")
        names = set(self.region_ids)
        for c in self.couplings:
            if c.source not in names or c.target not in names or c.source == c.target:
                raise ConfigError(f"coupling {c.source}->{c.target} must join two distinct generated regions")
            if c.lag < 1:
                raise ConfigError("coupling lag must be >= 1")

    @property
    def region_ids(self) -> list[str]:
        return [f"R{i + 1:02d}" for i in range(self.regions)]

    @property
    def weeks(self) -> int:
        return 52 * self.years

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.start_date, self.weeks)


@dataclass
class SyntheticBundle:
    """
    What :func:`generate_synthetic` wrote, plus the ground truth it knows.

    Attributes
    ----------
    output_dir : str
        Root of the bundle.
    observation_files : list[str]
        One ingest-format CSV per region.
    grid : TimeGrid
        The weekly grid of the truth series.
    truth : dict[str, WeeklySeries]
        Gap-free regional NDVI.
    clear_counts : dict[str, numpy.ndarray]
        Clear pixels per region and week.
    events : list[DroughtEvent]
    couplings : list[Coupling]
    expected_coverage : dict[str, float]
        Percentage of assessment weeks where a forecast can be made, per region.
    """

    output_dir: str
    observation_files: list[str]
    grid: TimeGrid
    truth: dict[str, WeeklySeries]
    clear_counts: dict[str, np.ndarray]
    events: list[DroughtEvent] = field(default_factory=list)
    couplings: list[Coupling] = field(default_factory=list)
    expected_coverage: dict[str, float] = field(default_factory=dict)

    @property
    def observations_dir(self) -> str:
        return os.path.join(self.output_dir, OBSERVATIONS_DIR)


def _anomalies(spec: SyntheticSpec, seed: int) -> np.ndarray:
    ids = spec.region_ids
    index = {r: i for i, r in enumerate(ids)}
    rng = rng_for(seed, "synth", "anomaly")
    innovations = rng.normal(0.0, spec.anomaly_std, size=(spec.weeks, len(ids)))
    anomaly = np.zeros((spec.weeks, len(ids)))
    for t in range(spec.weeks):
        previous = anomaly[t - 1] if t else np.zeros(len(ids))
        anomaly[t] = spec.persistence * previous + innovations[t]
        for c in spec.couplings:
            if t >= c.lag:
                anomaly[t, index[c.target]] += c.coefficient * anomaly[t - c.lag, index[c.source]]
    return anomaly


def _events(spec: SyntheticSpec, seed: int) -> list[DroughtEvent]:
    events = []
    for region_id in spec.region_ids:
        rng = rng_for(seed, "synth", "events", region_id)
        years = np.sort(rng.choice(np.arange(2, spec.years), size=spec.drought_events, replace=False))
        for year in years:
            offset = int(rng.integers(0, 52 - spec.drought_weeks + 1))
            start = spec.grid.slot_date(52 * int(year) + offset)
            events.append(DroughtEvent(region_id, start, spec.drought_weeks, spec.drought_depth))
    return events


def _cloud_masks(spec: SyntheticSpec, seed: int, region_id: str) -> np.ndarray:
    """Boolean (pixels, weeks) matrix, True where the pixel is clouded."""
    rng = rng_for(seed, "synth", "clouds", region_id)
    weeks = spec.grid.weeks_of_year()
    probability = spec.gap_probability * (1.0 + spec.gap_seasonality * np.cos(2.0 * np.pi * (weeks - 1) / 52.0))
    cloudy_week = rng.random(spec.weeks) < np.clip(probability, 0.0, 1.0)
    cloudy_pixel = rng.random((spec.pixels_per_region, spec.weeks)) < spec.pixel_gap_probability
    return cloudy_pixel | cloudy_week[None, :]


def generate_synthetic(spec: SyntheticSpec, seed: int, output_dir: str) -> SyntheticBundle:
    """
    Write a deterministic synthetic NDVI benchmark.

    The bundle holds one observation CSV per region under ``observations/``,
    the gap-free regional truth, the clear pixel counts, and a JSON sidecar with
    the generator settings, drought events, couplings and expected forecast coverage.

    Raises
    ------
    ConfigError
        If the synthetic settings are invalid.
    """
    grid = spec.grid
    weeks_of_year = grid.weeks_of_year()
    seasonal = spec.base_ndvi + spec.seasonal_amplitude * np.sin(2.0 * np.pi * (weeks_of_year - 1) / 52.0)
    anomaly = _anomalies(spec, seed)
    events = _events(spec, seed)
    dates = grid.dates()

    bundle = SyntheticBundle(output_dir, [], grid, {}, {}, events, list(spec.couplings))
    os.makedirs(os.path.join(output_dir, OBSERVATIONS_DIR), exist_ok=True)

    for r, region_id in enumerate(spec.region_ids):
        regional = seasonal + anomaly[:, r]
        for event in (e for e in events if e.region_id == region_id):
            first = grid.index_of(event.start)
            regional[first:first + event.weeks] *= 1.0 - event.depth
        regional = np.clip(regional, -1.0, 1.0)
        bundle.truth[region_id] = WeeklySeries(grid, regional)

        rng = rng_for(seed, "synth", "pixels", region_id)
        offsets = rng.normal(0.0, spec.pixel_offset_std, spec.pixels_per_region)
        offsets -= offsets.mean()
        noise = rng.normal(0.0, spec.noise_std, (spec.pixels_per_region, spec.weeks))
        day_shift = rng.integers(0, 7, (spec.pixels_per_region, spec.weeks))
        values = np.clip(regional[None, :] + offsets[:, None] + noise, -1.0, 1.0)
        clouded = _cloud_masks(spec, seed, region_id)
        bundle.clear_counts[region_id] = (~clouded).sum(axis=0)

        pixel_ids = [f"{region_id}-P{p:03d}" for p in range(spec.pixels_per_region)]
        frame = pd.DataFrame({
            "pixel_id": np.repeat(pixel_ids, spec.weeks),
            "region_id": region_id,
            "date": [(dates[t] - timedelta(days=int(day_shift[p, t]))).isoformat()
                     for p in range(spec.pixels_per_region) for t in range(spec.weeks)],
            "ndvi": np.where(clouded, CLOUD_READING, values).ravel().round(6),
            "quality": np.where(clouded, "bad", "good").ravel(),
        })
        filename = os.path.join(output_dir, OBSERVATIONS_DIR, f"{region_id}.csv")
        save_frame(frame, filename)
        bundle.observation_files.append(filename)
        bundle.expected_coverage[region_id] = expected_coverage(bundle.clear_counts[region_id], spec)

    write_regional_series(bundle.truth, os.path.join(output_dir, TRUTH_FILE))
    counts = pd.DataFrame({"date": [d.isoformat() for d in dates]} |
                          {r: c for r, c in sorted(bundle.clear_counts.items())})
    save_frame(counts, os.path.join(output_dir, CLEAR_COUNTS_FILE))
    save_json(_sidecar(spec, seed, bundle), os.path.join(output_dir, SIDECAR_FILE))
    logger.info("synthetic bundle: %d regions, %d weeks, %d events written to %s",
                spec.regions, spec.weeks, len(events), output_dir)
    return bundle


def _sidecar(spec: SyntheticSpec, seed: int, bundle: SyntheticBundle) -> dict:
    parameters = asdict(spec)
    parameters["start_date"] = spec.start_date.isoformat()
    return {
        "seed": seed,
        "spec": parameters,
        "events": [{"region_id": e.region_id, "start": e.start.isoformat(), "end": e.end.isoformat(),
                    "weeks": e.weeks, "depth": e.depth} for e in bundle.events],
        "couplings": [asdict(c) for c in bundle.couplings],
        "expected_coverage": bundle.expected_coverage,
    }


def expected_coverage(clear_counts: np.ndarray, spec: SyntheticSpec) -> float:
    """
    Percentage of assessment weeks on which the regional series, after gap
    filling, admits a forecast.

    Works on the presence pattern alone: a week is present with at least
    ``min_pixels_for_aggregate`` clear pixels, internal gap runs of at most
    ``l_max`` weeks count as filled, and an issue week is forecastable when its
    ``order`` most recent weeks are present and the training segment holds
    enough complete regression rows.
    """
    present = [int(c) >= spec.min_pixels_for_aggregate for c in clear_counts]
    n = len(present)

    filled = list(present)
    t = 0
    while t < n:
        if present[t]:
            t += 1
            continue
        stop = t
        while stop < n and not present[stop]:
            stop += 1
        if t > 0 and stop < n and stop - t <= spec.l_max:
            for k in range(t, stop):
                filled[k] = True
        t = stop

    p, length, lead = spec.order, spec.train_length, spec.lead
    needed = math.ceil(spec.min_valid_fraction * (length - p - lead))
    assessed = ok = 0
    for issue in range(length - 1, n - lead):
        assessed += 1
        first = issue - length + 1
        if not all(filled[issue - k] for k in range(p)):
            continue
        if spec.strict_window:
            ok += all(filled[first:issue + 1])
            continue
        rows = 0
        for target in range(first + p + lead - 1, issue + 1):
            if filled[target] and all(filled[target - lead - k] for k in range(p)):
                rows += 1
        ok += rows >= needed
    return 100.0 * ok / assessed if assessed else 0.0
