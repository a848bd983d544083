"""
Configuration and shared data structures for the Rough Path Accessibility Toolkit.
"""

# Avoid circular imports - import modules directly when needed

__all__ = [
    'ConfigManager',
    'DEFAULT_CONFIG',
    'PiecewiseLinearPath',
    'SignatureResult',
    'RoughPathL2',
    'RDESolution',
    'DDiffeo',
    'FlowRequest',
    'DistributionEstimate',
    'ControlProgram',
    'ReachReport',
]
