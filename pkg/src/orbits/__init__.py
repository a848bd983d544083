"""
Orbit distribution estimates.
"""

__all__ = [
    'distribution_rank',
    'bracket_span_rank',
    'rank_profile'
]
