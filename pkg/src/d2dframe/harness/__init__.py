from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import crossover, run_experiment, single_shot

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config",
           "crossover", "run_experiment", "single_shot"]
