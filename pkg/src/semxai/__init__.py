"""Semantic, context-enriched explanations for demand forecasts."""

__version__ = "0.1.0"
