"""
Rough Path Accessibility Toolkit
Signatures, vector-field orbits, log-ODE RDE solving and piecewise-linear
controls reproducing rough-path terminal states.
"""

__version__ = "1.0.0"
__author__ = "Rough Toolkit Team"
__description__ = "Reach the terminal state of a rough-path-driven system with a piecewise linear control"
