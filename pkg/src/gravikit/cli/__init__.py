"""Configuration loading, verification suites, reports and the command line."""

from .config import SceneConfig, config_from_dict, load_config
from .report import Report, export, run_suite, to_json
from .suites import SUITES, Check, Context, run_checks

__all__ = ["Check", "Context", "Report", "SUITES", "SceneConfig", "config_from_dict", "export",
           "load_config", "run_checks", "run_suite", "to_json"]
