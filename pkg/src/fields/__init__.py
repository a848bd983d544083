"""
Vector-field expressions, families and their flows.
"""

# Avoid circular imports - import modules directly when needed

__all__ = [
    'parse',
    'VectorFieldFamily',
    'FamilyFactory',
    'flow',
    'apply_ddiffeo',
    'pushforward'
]
