"""
Tensor algebra, path signatures and the exception hierarchy.
"""

# Avoid circular imports - import modules directly when needed

__all__ = [
    'TruncatedTensor',
    'LieElement',
    'tensor_mul',
    'tensor_exp',
    'tensor_log',
    'shuffle_check',
    'sig_pl',
    'chen_concat',
    'ToolkitError'
]
