"""Toolkit version, echoed into every report document."""

__version__ = "1.0.0"
TOOL_NAME = "ambiguity-toolkit"
