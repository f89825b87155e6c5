"""fresco: clustering univariate time series under the Fréchet distance."""

import logging
import logging.config
import os
from pathlib import Path
from typing import Optional

import yaml

__version__ = "0.1.0"


def get_yaml_config(file_path: Path) -> Optional[dict]:
    """Fetch yaml config and return as dict if it exists."""
    if file_path.exists():
        with open(file_path, "rt") as f:
            return yaml.safe_load(f.read())


# Define project base directory
PROJECT_DIR = Path(__file__).resolve().parents[1]
CONFIG_DIR = Path(__file__).parent.resolve() / "config"

# Log files go to FRESCO_LOG_DIR when set, else the project directory
_log_dir = Path(os.environ.get("FRESCO_LOG_DIR", PROJECT_DIR))
info_out = str(_log_dir / "info.log")
error_out = str(_log_dir / "errors.log")

# Read log config file
_logging_config = get_yaml_config(CONFIG_DIR / "logging.yaml")
if _logging_config:
    logging.config.dictConfig(_logging_config)

# Define module logger
logger = logging.getLogger(__name__)

# base/global config; every module reads its defaults from here
config = get_yaml_config(CONFIG_DIR / "base.yaml")
if config is None:
    raise FileNotFoundError(f"Missing base config {CONFIG_DIR / 'base.yaml'}")
