from .cli import CLI, main, load_config, setup_logging, synthetic_spec, COMMANDS
