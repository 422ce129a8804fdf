from .config import ConfigClass, PipelineConfig, parse_value, STYLES, CLIMATOLOGY_MODES
