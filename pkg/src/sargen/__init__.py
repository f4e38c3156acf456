"""sargen: agentic AML pipeline for SAR narrative drafting and evaluation."""

__version__ = "0.1.0"
