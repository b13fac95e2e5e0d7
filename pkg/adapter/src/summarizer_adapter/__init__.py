"""Batch adapter turning long consumer health questions into short summary
queries for the faqmatch engine.

Input is JSONL ``{"id": str, "chq": str}``; output is JSONL
``{"id", "chq", "summary"}`` (plus ``"fallback": true`` when a record had
to fall back to the leading sentence). Every output line is valid
faqmatch batch-query input.
"""

from .summarize import LEAD_MODEL, SummaryRecord, lead_summary, summarize_file

__version__ = "0.1.0"

__all__ = ["LEAD_MODEL", "SummaryRecord", "lead_summary", "summarize_file"]
