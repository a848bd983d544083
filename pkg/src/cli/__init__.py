"""
Command-line surface of the Rough Path Accessibility Toolkit.
"""

# Avoid circular imports - import modules directly when needed

__all__ = [
    'main',
    'run',
    'RunConfig'
]
