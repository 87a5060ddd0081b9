"""Checkpoint-to-logits exporter feeding the ppxfuse ensemble toolkit."""

from .exporter import ConfigError, CorpusError, ExportJob, ExporterError, export

__version__ = "0.1.0"

__all__ = ["ExportJob", "export", "ExporterError", "ConfigError", "CorpusError", "__version__"]
