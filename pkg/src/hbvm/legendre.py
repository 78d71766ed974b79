"""Shifted Legendre polynomials orthonormal on [0, 1] and Gauss-Legendre rules.

The polynomial family used throughout the package is normalized so that
``integral_0^1 P_i(x) P_j(x) dx = delta_ij``. Two identities drive
everything: the three-term recurrence
``(n+1) xi(n+1) P_{n+1} = (x - 1/2) P_n - n xi(n) P_{n-1}`` and the
antiderivative relation
``integral_0^c P_j = xi(j+1) P_{j+1}(c) - xi(j) P_{j-1}(c)``, both with
``xi(j) = 1 / (2 sqrt(4 j^2 - 1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

MAX_NODES = 64


def xi(j: int) -> float:
    """Off-diagonal recurrence coefficient 1 / (2 sqrt(4 j^2 - 1))."""
    if j < 1:
        raise DomainError(f"xi requires j >= 1, got {j}")
    return 1.0 / (2.0 * math.sqrt(4.0 * j * j - 1.0))


def _check_unit_interval(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError("evaluation point outside [0, 1]")
    return x


def eval_legendre(j: int, x):
    """Evaluate the degree-j orthonormal shifted Legendre polynomial at x.

    Uses the forward three-term recurrence, which is stable on [0, 1].
    Accepts a scalar or an ndarray; returns the matching shape.
    """
    if j < 0:
        raise DomainError(f"polynomial degree must be >= 0, got {j}")
    xv = _check_unit_interval(x)
    scalar = xv.ndim == 0
    xv = np.atleast_1d(xv)
    p_prev = np.ones_like(xv)
    if j == 0:
        return float(p_prev[0]) if scalar else p_prev
    p = (xv - 0.5) / xi(1)
    for n in range(1, j):
        p, p_prev = ((xv - 0.5) * p - n * xi(n) * p_prev) / ((n + 1) * xi(n + 1)), p
    return float(p[0]) if scalar else p


def legendre_row(r: int, x):
    """Values [P_0(x), ..., P_{r-1}(x)] as an array of shape (..., r)."""
    if r < 1:
        raise DomainError(f"need at least one polynomial, got r = {r}")
    xv = np.atleast_1d(_check_unit_interval(x))
    out = np.empty(xv.shape + (r,))
    out[..., 0] = 1.0
    if r > 1:
        out[..., 1] = (xv - 0.5) / xi(1)
    for n in range(1, r - 1):
        out[..., n + 1] = ((xv - 0.5) * out[..., n] - n * xi(n) * out[..., n - 1]) / (
            (n + 1) * xi(n + 1)
        )
    return out


def integrate_legendre(j: int, c):
    """Integral of P_j from 0 to c, in closed form.

    For j >= 1 the primitive follows from the recurrence:
    ``integral_0^c P_j = xi(j+1) P_{j+1}(c) - xi(j) P_{j-1}(c)``;
    for j = 0 the integral is just c.
    """
    if j < 0:
        raise DomainError(f"polynomial degree must be >= 0, got {j}")
    cv = _check_unit_interval(c)
    if j == 0:
        return cv if cv.ndim else float(cv)
    return xi(j + 1) * eval_legendre(j + 1, cv) - xi(j) * eval_legendre(j - 1, cv)


def _eval_with_derivative(k: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P_k(x) and P_k'(x) from the recurrence and its derivative."""
    p_prev = np.ones_like(x)
    dp_prev = np.zeros_like(x)
    p = (x - 0.5) / xi(1)
    dp = np.full_like(x, 1.0 / xi(1))
    for n in range(1, k):
        lo, hi = n * xi(n), (n + 1) * xi(n + 1)
        p_next = ((x - 0.5) * p - lo * p_prev) / hi
        dp_next = ((x - 0.5) * dp + p - lo * dp_prev) / hi
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return p, dp


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre quadrature rule on [0, 1]: k nodes c and weights b."""

    k: int
    c: np.ndarray
    b: np.ndarray


def gauss_rule(k: int) -> QuadratureRule:
    """Gauss-Legendre rule with k nodes on [0, 1].

    Nodes are the roots of the degree-k shifted Legendre polynomial, found
    by Newton iteration started from the Chebyshev approximation of the
    roots and polished to ~1e-15; weights come from the derivative formula
    ``b_i = (2k + 1) / (c_i (1 - c_i) P_k'(c_i)^2)``.
    """
    if not 1 <= k <= MAX_NODES:
        raise ConfigurationError(f"node count must be in 1..{MAX_NODES}, got {k}")
    if k == 1:
        return QuadratureRule(1, np.array([0.5]), np.array([1.0]))
    i = np.arange(k, 0, -1)  # reversed so mapped nodes come out ascending
    t = np.cos(math.pi * (4.0 * i - 1.0) / (4.0 * k + 2.0))
    x = 0.5 * (1.0 + t)
    for _ in range(100):
        p, dp = _eval_with_derivative(k, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    # one last polish step, then symmetrize to kill last-bit asymmetry
    p, dp = _eval_with_derivative(k, x)
    x -= p / dp
    x = 0.5 * (x + (1.0 - x[::-1]))
    _, dp = _eval_with_derivative(k, x)
    b = (2.0 * k + 1.0) / (x * (1.0 - x) * dp * dp)
    b = 0.5 * (b + b[::-1])
    return QuadratureRule(k, x, b)
