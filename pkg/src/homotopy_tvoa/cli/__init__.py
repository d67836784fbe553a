"""Command-line front end: check specifications, dispatch and reports."""
from .checkspec import Check, CheckSpec, CheckSpecError, parse_checkspec
from .dispatch import DISPATCH, validate
from .runner import Report, emit_report, parse_report, run

__all__ = ["Check", "CheckSpec", "CheckSpecError", "DISPATCH", "Report", "emit_report",
           "parse_checkspec", "parse_report", "run", "validate"]
