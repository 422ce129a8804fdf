import dataclasses
import json
import logging
import os
import types
import typing
from dataclasses import dataclass, field

from vegcast.core.errors import ConfigError

logger = logging.getLogger(__name__)


class ConfigClass:
    """
    A class that can be used to create a configuration object.
    Objects can be loaded from or saved to a file.
    Data in files is stored in the following schema:

    ```python
        # A comment
        key=value
        key2=[value1, value2] #json array
        key3={"key4": "value4"} #json object
    ```

    All attributes starting with an underscore (_) are considered private and will not be saved or loaded.

    Attributes starting with "cc_" are treated as comments and will be written to the file
    as comments, but will not be loaded.
    If an attribute starting with "cc_" followed by the name of another attribute is found,
    it will be treated as a comment for that attribute
    and will be written in the line before the attribute.

    Comments should either be a string or a callable that returns a string.

    Other attributes are considered public and will be saved and loaded.
    Values are converted using the type annotation of the attribute, so subclasses
    should be annotated dataclasses.
    """

    def load(self, file_name: str, create_if_missing: bool = False) -> "ConfigClass":
        """
        Load the configuration from the file.

        Parameters
        ----------
        file_name : str
            The name of the file to load the configuration from.
        create_if_missing : bool, optional
            Whether to write the current (default) values to a new file if the file
            does not exist. The default is False.

        Returns
        -------
        ConfigClass (or subclass)
            The configuration object itself.

        Raises
        ------
        ConfigError
            If a line cannot be parsed or names an unknown key.
        """
        if not os.path.exists(file_name):
            if create_if_missing:
                logger.info("config file %s does not exist, creating it", file_name)
                self.save(file_name)
                return self
            raise ConfigError(f"config file {file_name} does not exist")

        values = {}
        with open(file_name, "r", encoding="utf-8") as file:
            for line_number, line in enumerate(file, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{file_name}:{line_number}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                values[key.strip()] = value.strip()

        return self.apply_overrides(values, source=file_name)

    def apply_overrides(self, values: dict, source: str = "overrides") -> "ConfigClass":
        """
        Set attributes from a mapping of raw string (or already typed) values.

        Parameters
        ----------
        values : dict
            Attribute name to value. String values are converted using the attribute's annotation.
        source : str, optional
            Where the values came from, used in error messages.

        Returns
        -------
        ConfigClass (or subclass)
            The configuration object itself.
        """
        annotations = self._annotations()
        for key, value in values.items():
            if key.startswith("_") or key.startswith("cc_"):
                continue
            if key not in annotations:
                raise ConfigError(f"{source}: unknown configuration key {key!r}")
            if isinstance(value, str):
                try:
                    value = parse_value(value, annotations[key])
                except (TypeError, ValueError) as e:
                    raise ConfigError(f"{source}: bad value for {key}: {e}") from None
            setattr(self, key, value)

        if hasattr(self, "validate"):
            self.validate()
        return self

    def save(self, file_name: str):
        """
        Save the configuration to the file.

        Parameters
        ----------
        file_name : str
            The name of the file to save the configuration to.
        """
        path = os.path.dirname(file_name)
        if path and not os.path.exists(path):
            os.makedirs(path)

        with open(file_name, "w", encoding="utf-8", newline="\n") as file:
            file.write(self.dumps())

    def dumps(self) -> str:
        """The file representation of the configuration."""
        lines = []
        for key, value in self.items(include_comments=True):
            if key.startswith("cc_"):
                if not hasattr(self, key[3:]):
                    lines.extend(_comment_lines(value))
                continue

            comment = getattr(self, f"cc_{key}", None)
            if comment:
                lines.extend(_comment_lines(comment))

            if isinstance(value, (list, dict)):
                value = json.dumps(value)
            elif isinstance(value, str):
                value = value.replace("\n", "\\n")
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    def items(self, include_comments: bool = False):
        for key, value in vars(self).items():
            if key.startswith("_"):
                continue
            if key.startswith("cc_") and not include_comments:
                continue
            yield key, value

    def to_dict(self) -> dict:
        return {key: value for key, value in self.items()}

    def _annotations(self) -> dict:
        if dataclasses.is_dataclass(self):
            hints = typing.get_type_hints(type(self))
            return {f.name: hints.get(f.name, str) for f in dataclasses.fields(self)
                    if not f.name.startswith("cc_") and not f.name.startswith("_")}
        return {key: type(value) for key, value in self.items()}


def _comment_lines(comment) -> list[str]:
    if callable(comment):
        comment = comment()
    return [f"# {line}" for line in str(comment).split("\n")]


def parse_value(value: str, annotation):
    """Convert a raw config string to ``annotation``."""
    origin = typing.get_origin(annotation)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        if value in ("", "None", "null"):
            return None
        return parse_value(value, args[0])
    if origin in (list, tuple):
        if not value.startswith("["):
            # allow comma separated lists on the command line
            items = [v.strip() for v in value.split(",") if v.strip()]
        else:
            items = json.loads(value)
        (item_type,) = typing.get_args(annotation)[:1] or (str,)
        converted = [parse_value(str(v), item_type) if not isinstance(v, item_type) else v for v in items]
        return converted if origin is list else tuple(converted)
    if origin is dict or annotation is dict:
        return json.loads(value)
    if annotation is bool:
        lowered = value.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {value!r}")
    if annotation is int:
        return int(value)
    if annotation is float:
        return float(value)
    return value.replace("\\n", "\n")


STYLES = ("MODIS_INTERP", "LANDSAT_GP")
CLIMATOLOGY_MODES = ("pixel", "regional")
DEGENERATE_POLICIES = ("error", "midpoint")
DEMEAN_SOURCES = ("window", "history")


@dataclass
class PipelineConfig(ConfigClass):
    """
    Flat configuration of a full pipeline run.

    Every attribute can be set in the config file (``key=value``) and overridden
    by the command line flag of the same name (``--key value``, underscores as dashes).
    """

    cc_start: str = "vegcast pipeline configuration"

    cc_input_path: str = "Observation CSV file, or a directory of CSV files"
    input_path: str = ""
    cc_output_dir: str = "Where series, forecast records and skill reports are written"
    output_dir: str = "vegcast_out"
    cc_cache_dir: str = "Stage cache directory (empty = platform data directory)"
    cache_dir: str = ""
    cc_style: str = "Preprocessing branch: MODIS_INTERP (interpolate + smooth) or LANDSAT_GP (GP gap-filling)"
    style: str = "MODIS_INTERP"
    cc_seed: str = "Run seed; every random stream is derived from it"
    seed: int = 0
    cc_leads: str = "Forecast lead times in weeks"
    leads: list[int] = field(default_factory=lambda: list(range(1, 11)))
    cc_index_kinds: str = "Indices to forecast (VCI3M, NDVI_ANOMALY)"
    index_kinds: list[str] = field(default_factory=lambda: ["VCI3M", "NDVI_ANOMALY"])
    cc_methods: str = "Forecasters to run (AR, GP, PERSISTENCE)"
    methods: list[str] = field(default_factory=lambda: ["AR", "GP", "PERSISTENCE"])
    cc_workers: str = "Region-level worker threads"
    workers: int = 1
    cc_log_level: str = "Console log level"
    log_level: str = "INFO"

    cc_anchor_weekday: str = "Weekday of the weekly grid (Monday=0, Saturday=5)"
    anchor_weekday: int = 5
    cc_min_pixels_for_aggregate: str = "Fewer present pixels than this at a week leaves a regional gap"
    min_pixels_for_aggregate: int = 25

    cc_l_max: str = "Longest gap (weeks) the interpolator may fill"
    l_max: int = 6
    cc_interpolator: str = "QUADRATIC, LINEAR, CUBIC, LAST_VALUE, MEAN_VALUE or GP"
    interpolator: str = "QUADRATIC"
    cc_savgol_window: str = "Savitzky-Golay window length in weeks (odd)"
    savgol_window: int = 7
    cc_savgol_order: str = "Savitzky-Golay polynomial order"
    savgol_order: int = 2

    cc_kernel: str = "Kernel structure of the GP forecaster"
    kernel: str = "RBF"
    cc_gapfill_kernel: str = "Kernel structure used for GP gap-filling of pixel series"
    gapfill_kernel: str = "RBF+PERIODIC"
    cc_restarts: str = "Random optimiser restarts per GP fit (on top of the fixed initialisations)"
    restarts: int = 5
    cc_gp_min_history: str = "Present observations required before the issue date for a GP forecast"
    gp_min_history: int = 52
    cc_gp_train_length: str = "Most recent weeks the GP forecaster trains on (0 = all history)"
    gp_train_length: int = 200

    cc_order: str = "AR model order p"
    order: int = 3
    cc_train_length: str = "AR training segment length T in weeks"
    train_length: int = 200
    cc_demean: str = "Remove the training mean before fitting the AR model"
    demean: bool = True
    cc_demean_source: str = "Mean removed before AR fitting: window (training window) or history (all data to date)"
    demean_source: str = "window"
    cc_strict_window: str = "Require a fully gap-free AR training window"
    strict_window: bool = False

    cc_granger: str = "Run the inter-region Granger analysis"
    granger: bool = True
    cc_granger_threshold: str = "Smallest percentage RMSE reduction reported as Granger causal"
    granger_threshold: float = 5.0
    cc_granger_lead: str = "Lead time of the Granger models"
    granger_lead: int = 4
    cc_granger_min_coverage: str = "Regions forecastable on fewer percent of weeks are left out of the Granger analysis"
    granger_min_coverage: float = 50.0

    cc_burn_in: str = "Weeks skipped before the first assessed issue date (-1 = train_length + 52)"
    burn_in: int = -1
    cc_issue_stride: str = "Assess every n-th week"
    issue_stride: int = 1
    cc_drought_threshold: str = "VCI3M drought alert threshold"
    drought_threshold: float = 35.0
    cc_extra_drought_thresholds: str = "Additional drought thresholds for ROC curves"
    extra_drought_thresholds: list[float] = field(default_factory=lambda: [20.0, 10.0])
    cc_climatology_mode: str = "pixel (per-pixel climatology, VCI averaged) or regional"
    climatology_mode: str = "pixel"
    cc_degenerate_week_policy: str = "error or midpoint (VCI=50 where climatology max == min)"
    degenerate_week_policy: str = "error"
    cc_region_groups_path: str = "Optional CSV region_id,group for grouped breakdowns"
    region_groups_path: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        """
        Check the configuration.

        Raises
        ------
        ConfigError
            If any value is out of its documented range.
        """
        if self.style not in STYLES:
            raise ConfigError(f"style must be one of {STYLES}, got {self.style!r}")
        if not self.leads or any(int(n) < 1 for n in self.leads):
            raise ConfigError(f"leads must be a non-empty list of weeks >= 1, got {self.leads}")
        if self.climatology_mode not in CLIMATOLOGY_MODES:
            raise ConfigError(f"climatology_mode must be one of {CLIMATOLOGY_MODES}")
        if self.degenerate_week_policy not in DEGENERATE_POLICIES:
            raise ConfigError(f"degenerate_week_policy must be one of {DEGENERATE_POLICIES}")
        if self.demean_source not in DEMEAN_SOURCES:
            raise ConfigError(f"demean_source must be one of {DEMEAN_SOURCES}")
        if not 0 <= self.anchor_weekday <= 6:
            raise ConfigError("anchor_weekday must be in 0..6")
        if self.min_pixels_for_aggregate < 1:
            raise ConfigError("min_pixels_for_aggregate must be >= 1")
        if self.workers < 1 or self.issue_stride < 1:
            raise ConfigError("workers and issue_stride must be >= 1")
        if self.restarts < 0:
            raise ConfigError("restarts must be >= 0")
        for method in self.methods:
            if method.upper() not in ("AR", "GP", "PERSISTENCE"):
                raise ConfigError(f"unknown method {method!r}")
        for kind in self.index_kinds:
            if kind.upper() not in ("VCI3M", "NDVI_ANOMALY"):
                raise ConfigError(f"only VCI3M and NDVI_ANOMALY can be forecast, got {kind!r}")
        # the sub-configs validate their own invariants
        self.gapfill_config()
        for lead in self.leads:
            self.ar_config(int(lead))

    @property
    def effective_burn_in(self) -> int:
        return self.train_length + 52 if self.burn_in < 0 else self.burn_in

    def gapfill_config(self):
        from vegcast.gapfill import GapFillConfig, Interpolator
        try:
            return GapFillConfig(l_max=self.l_max,
                                 interpolator=Interpolator.from_string(self.interpolator),
                                 savgol_window=self.savgol_window,
                                 savgol_order=self.savgol_order,
                                 gp_kernel=self.gapfill_kernel,
                                 gp_restarts=self.restarts,
                                 seed=self.seed)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def ar_config(self, lead: int, demean: bool | None = None):
        from vegcast.ar import ARConfig
        try:
            return ARConfig(order=self.order, train_length=self.train_length, lead=lead,
                            demean=self.demean if demean is None else demean,
                            strict_window=self.strict_window, demean_source=self.demean_source)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def gp_forecast_settings(self) -> dict:
        return {"kernel_structure": self.kernel, "restarts": self.restarts,
                "min_history": self.gp_min_history, "train_length": self.gp_train_length}
