"""Closed-form constants of the sharpness analysis.

Everything here is elementary arithmetic on the tiling parameters
(M, N, eta): the decay step L after which the confined-component
probability provably drops by a factor e, the sharpness coefficient
C built from it, and the extra neighbour budget that upgrades plain
connectivity to s-connectivity.  The rigorous band for the connectivity
threshold constant is exposed for reporting next to empirical estimates.
"""

from __future__ import annotations

import math

# best known rigorous band for the constant c in k = c log n at which
# the k-NN graph on a unit-intensity Poisson square becomes connected
THRESHOLD_CONSTANT_LOWER = 0.3043
THRESHOLD_CONSTANT_UPPER = 1.0 / math.log(7.0)


def _validate(M: int, N: int, eta: float) -> None:
    if not (isinstance(M, (int,)) and not isinstance(M, bool) and M >= 1):
        raise ValueError(f"M must be an integer >= 1, got {M!r}")
    if not (isinstance(N, (int,)) and not isinstance(N, bool) and N >= 1):
        raise ValueError(f"N must be an integer >= 1, got {N!r}")
    if not (0.0 < eta <= 0.5):
        raise ValueError(f"eta must lie in (0, 1/2], got {eta}")


def threshold_constant_band() -> tuple[float, float]:
    """Rigorous (lower, upper) band for the threshold constant."""
    return (THRESHOLD_CONSTANT_LOWER, THRESHOLD_CONSTANT_UPPER)


def decay_step(M: int, N: int, eta: float) -> int:
    """Neighbour increment forcing an e-fold drop of the local event rate.

    L = ceil(log(M^2 N^2 e^2) / log(1 + eta/2)).
    """
    _validate(M, N, eta)
    num = 2.0 * math.log(M) + 2.0 * math.log(N) + 2.0
    return int(math.ceil(num / math.log1p(eta / 2.0)))


def sharpness_coefficient(M: int, N: int, eta: float) -> float:
    """C = (2 + 6/log 2) * decay_step(M, N, eta)."""
    return (2.0 + 6.0 / math.log(2.0)) * decay_step(M, N, eta)


def fault_tolerance_increment(s: int, n: float, M: int, N: int, eta: float) -> int:
    """Extra neighbours, floor(2 C s log log n), for s-fold connectivity."""
    if not (isinstance(s, (int,)) and not isinstance(s, bool) and s >= 1):
        raise ValueError(f"s must be an integer >= 1, got {s!r}")
    if isinstance(n, bool) or not (math.isfinite(n) and n > math.e):
        raise ValueError(f"n must exceed e for log log n > 0, got {n}")
    c = sharpness_coefficient(M, N, eta)
    return int(math.floor(2.0 * c * s * math.log(math.log(n))))


def prescribed_tile_count(M: int) -> int:
    """Conservative per-side tile refinement, 10 * ceil(27 M pi).

    Orders of magnitude beyond anything simulable; exposed so the
    closed-form constants can be evaluated at their nominal parameters.
    """
    if not (isinstance(M, (int,)) and not isinstance(M, bool) and M >= 1):
        raise ValueError(f"M must be an integer >= 1, got {M!r}")
    return 10 * int(math.ceil(27.0 * M * math.pi))
