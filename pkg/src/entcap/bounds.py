"""Closed-form upper bounds on detection capability.

Every bound has the shape ``value = exp(prefactor_log - exponent_rate * k)``
and is reported even when vacuous (>= 1) so the functional form can be
plotted; the ``vacuous`` flag marks those results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum import InvalidInputError, Spectrum

# (sqrt(2) - 1)^2 = 3 - 2 sqrt(2): the universal decay rate at alpha = 1
MIN_ALPHA_RATE = (math.sqrt(2.0) - 1.0) ** 2


@dataclass(frozen=True)
class BoundResult:
    """A capability bound split into its k-free and k-linear log parts."""

    value: float
    exponent_rate: float
    prefactor_log: float
    vacuous: bool

    def __post_init__(self):
        if self.value < 0.0:
            raise InvalidInputError("bound value cannot be negative")


def _result(prefactor_log: float, rate: float, k: int) -> BoundResult:
    value = math.exp(prefactor_log - rate * k)
    return BoundResult(value, rate, prefactor_log, value >= 1.0)


def _zero_result() -> BoundResult:
    # exp(-inf - 0*k) reconstructs 0 for every k
    return BoundResult(0.0, 0.0, -math.inf, False)


def ew_bound(alpha: float, k: int) -> BoundResult:
    """2 exp(-(sqrt(1 + alpha) - 1)^2 k) for a witness with factor alpha."""
    if alpha < 1.0:
        raise InvalidInputError(f"alpha must be >= 1, got {alpha}")
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    rate = (math.sqrt(1.0 + alpha) - 1.0) ** 2
    return _result(math.log(2.0), rate, k)


def ew_set_bound(n_witnesses: int, alpha_min: float, k: int) -> BoundResult:
    """Union bound over a finite witness set: 2 N exp(-rate(alpha_min) k)."""
    if n_witnesses < 1:
        raise InvalidInputError("witness count must be positive")
    single = ew_bound(alpha_min, k)
    return _result(math.log(2.0 * n_witnesses), single.exponent_rate, k)


def spectrum_tail_exponents(
    spec: Spectrum, k: int, c: float
) -> tuple[float, float]:
    """Un-optimized two-parameter tail exponents (t1, t2) at crossing level c.

    Internal helper for tests: t2 from the lower chi-square tail of the
    positive part, t1 from the upper tail of the negative part.
    """
    lam = spec.eigenvalues
    a = lam[lam > 0]
    b = -lam[lam < 0]
    m = 2 * k
    a1, a2 = float(a.sum()), float(np.linalg.norm(a))
    b1, b2, binf = float(b.sum()), float(np.linalg.norm(b)), float(b.max())
    root_t2 = (m * a1 - c) / (2.0 * math.sqrt(m) * a2)
    t2 = root_t2 * root_t2 if root_t2 > 0 else 0.0
    # solve 2 binf t1 + 2 sqrt(m) b2 sqrt(t1) + (m b1 - c) = 0 for sqrt(t1)
    disc = m * b2 * b2 + 2.0 * binf * (c - m * b1)
    if disc < 0:
        raise InvalidInputError("no real tail exponent at this crossing level")
    root_t1 = (-math.sqrt(m) * b2 + math.sqrt(disc)) / (2.0 * binf)
    t1 = root_t1 * root_t1 if root_t1 > 0 else 0.0
    return t1, t2


def spectrum_bound(spec: Spectrum, k: int) -> BoundResult:
    """Spectrum-optimized tail bound 2 exp(-t) with t1 = t2 = t.

    sqrt(t / 2k) = (-(|a|_2 + |b|_2) + sqrt((|a|_2 + |b|_2)^2
                    + 2 |b|_inf tr)) / (2 |b|_inf)
    where a / b are the positive / absolute negative eigenvalues.
    """
    if k < 1:
        raise InvalidInputError("k must be positive")
    lam = spec.eigenvalues
    trace = float(lam.sum())
    if trace <= 0.0:
        raise InvalidInputError("spectrum must have positive trace")
    b = -lam[lam < 0]
    if b.size == 0:
        return _zero_result()
    a = lam[lam > 0]
    a2 = float(np.linalg.norm(a))
    b2 = float(np.linalg.norm(b))
    binf = float(b.max())
    s = a2 + b2
    root = (-s + math.sqrt(s * s + 2.0 * binf * trace)) / (2.0 * binf)
    rate = 2.0 * root * root
    return _result(math.log(2.0), rate, k)


def param_ew_bound(
    m_params: int,
    lipschitz: float,
    d: int,
    alpha_min: float,
    k: int,
    eps: float = 0.5,
) -> BoundResult:
    """Coarse-grained bound 2 exp(C1 - C2 k) for an M-parameter witness family.

    C1 = M ln(2 sqrt(M) l d / eps) and C2 = (sqrt(1 + alpha_min - eps) - 1)^2.
    eps = 0.5 reproduces the headline constants C1 = M ln(4 sqrt(M) l d).
    """
    if not 0.0 < eps < 1.0:
        raise InvalidInputError(f"eps must lie in (0, 1), got {eps}")
    if alpha_min < 1.0:
        raise InvalidInputError(f"alpha_min must be >= 1, got {alpha_min}")
    if lipschitz <= 0.0:
        raise InvalidInputError("lipschitz constant must be positive")
    if m_params < 1:
        raise InvalidInputError("parameter count must be positive")
    c1 = m_params * math.log(2.0 * math.sqrt(m_params) * lipschitz * d / eps)
    c2 = (math.sqrt(1.0 + alpha_min - eps) - 1.0) ** 2
    return _result(math.log(2.0) + c1, c2, k)


def positive_map_bound(d: int, lipschitz: float, alpha_min: float, k: int) -> BoundResult:
    """Positive-map specialization: M = 2d parameters, eps = 0.5.

    C1 = 2d ln(2^2.5 d^1.5 l), C2 = (sqrt(0.5 + alpha_min) - 1)^2.
    """
    return param_ew_bound(2 * d, lipschitz, d, alpha_min, k, eps=0.5)


def faithful_ratio_bound(d: int, k: int) -> BoundResult:
    """Bound on the ratio of faithfully detectable states.

    C1 = 3d ln(4d), C2 = (sqrt(0.5 + sqrt((d - sqrt(d))/2)) - 1)^2; valid for
    perfect-square d >= 4 (the fidelity witness family needs a square split).
    """
    root = math.isqrt(d)
    if d < 4 or root * root != d:
        raise InvalidInputError(f"d must be a perfect square >= 4, got {d}")
    alpha_min = math.sqrt((d - root) / 2.0)
    c1 = 3.0 * d * math.log(4.0 * d)
    c2 = (math.sqrt(0.5 + alpha_min) - 1.0) ** 2
    return _result(math.log(2.0) + c1, c2, k)


def single_copy_bound(m_observables: int, d: int, k: int, eps: float = 0.5) -> BoundResult:
    """Bound for criteria checkable from m single-copy expectation values.

    The identity is appended to the observable set, so M = m + 1;
    C1 = M ln(2 sqrt(M) d / eps), C2 = (sqrt(2 - eps) - 1)^2.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidInputError(f"eps must lie in (0, 1), got {eps}")
    if m_observables < 1:
        raise InvalidInputError("observable count must be positive")
    m = m_observables + 1
    c1 = m * math.log(2.0 * math.sqrt(m) * d / eps)
    c2 = (math.sqrt(2.0 - eps) - 1.0) ** 2
    return _result(math.log(2.0) + c1, c2, k)


def adaptive_bound(m_queries: int, k: int) -> BoundResult:
    """Bound for adaptive sign-oracle protocols: 2^(m+1) exp(-(3 - 2 sqrt(2)) k)."""
    if m_queries < 0:
        raise InvalidInputError("query count must be nonnegative")
    return _result((m_queries + 1) * math.log(2.0), 3.0 - 2.0 * math.sqrt(2.0), k)
