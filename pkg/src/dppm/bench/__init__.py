"""Benchmark harness: grid runner, CSV persistence, performance profiles, CLI."""

from .profiles import ProfileCurve, performance_profile, write_profile_svg
from .runner import CSV_HEADER, RunResult, read_csv, run_grid, write_csv
