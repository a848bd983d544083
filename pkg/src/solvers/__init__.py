"""
RDE/ODE solvers and the accessibility search.
"""

# Avoid circular imports - import modules directly when needed

__all__ = [
    'solve_rde',
    'solve_ode',
    'pl_lift',
    'pure_area',
    'reach_step2_exact',
    'reach_shooting',
    'verify_accessibility'
]
