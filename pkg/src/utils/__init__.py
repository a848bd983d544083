"""
Input loading helpers.
"""

__all__ = [
    'load_family',
    'load_path',
    'load_rough_path',
    'load_vector'
]
