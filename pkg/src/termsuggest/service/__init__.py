"""Operational shell: configuration, ingestion, the HTTP suggestion and
logging endpoints, and the analyze-and-report command line."""

from .config import ServiceConfig, load_config  # noqa: F401
