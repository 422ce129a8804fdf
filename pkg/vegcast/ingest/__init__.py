from .csv_loader import CsvSchema, load_observations, observation_files
from .compositing import (RegionSampleSet, composite_weekly, aggregate_region, aggregate_values, grid_for,
                          build_region_sets, DEFAULT_MIN_PIXELS)
from .series_io import (write_regional_series, read_regional_series, series_frame, common_grid,
                        align_series)
