"""Verification suite and command line entry point."""

from .suite import CHECKS, ConfigError, Report, SuiteConfig, run_check, run_suite

__all__ = ["CHECKS", "ConfigError", "Report", "SuiteConfig", "run_check", "run_suite"]
