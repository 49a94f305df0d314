"""Dimension-dependent constants used by the spectral certificates."""

import math


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in d dimensions, pi^(d/2) / Gamma(d/2 + 1)."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def supnorm_constant(d: int) -> float:
    """Constant 2 (4 pi)^(-d/4) e of the ground-state sup-norm bound.

    The bound reads ||phi||_inf^2 <= C^2 * lambda1^(d/2) for the normalized
    Dirichlet ground state at energy lambda1; always recomputed from d.
    """
    return 2.0 * (4.0 * math.pi) ** (-d / 4.0) * math.e
