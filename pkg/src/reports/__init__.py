"""
JSON and CSV report writers.
"""

__all__ = [
    'ReportGenerator',
    'to_json_text'
]
