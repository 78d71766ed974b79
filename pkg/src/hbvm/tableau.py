"""HBVM(k, s) coefficient matrices and the identities linking them.

An HBVM(k, s) method is the k-stage Runge-Kutta scheme with Butcher matrix
``I_s P_s^T Omega`` built on the k-node Gauss-Legendre rule, where P_s
collects Legendre values at the nodes and I_s their integrals. For k = s it
collapses to the classical s-stage Gauss collocation method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .legendre import MAX_NODES, QuadratureRule, gauss_rule, integrate_legendre, legendre_row, xi


def x_matrix(s: int) -> np.ndarray:
    """Tridiagonal s x s matrix X_s of the Legendre integration recurrence.

    (X)_11 = 1/2, super-diagonal -xi(j), sub-diagonal +xi(j), zero elsewhere.
    """
    if s < 1:
        raise ConfigurationError(f"s must be positive, got {s}")
    x = np.zeros((s, s))
    x[0, 0] = 0.5
    for j in range(1, s):
        x[j - 1, j] = -xi(j)
        x[j, j - 1] = xi(j)
    return x


def xhat_matrix(s: int) -> np.ndarray:
    """(s+1) x s extension of X_s with the extra row (0, ..., 0, xi(s))."""
    xh = np.zeros((s + 1, s))
    xh[:s] = x_matrix(s)
    xh[s, s - 1] = xi(s)
    return xh


@dataclass(frozen=True)
class TableauSet:
    """All coefficient matrices of one HBVM(k, s) method."""

    k: int
    s: int
    rule: QuadratureRule
    P_s: np.ndarray       # k x s, values P_{j-1}(c_i)
    P_s1: np.ndarray      # k x (s+1)
    I_s: np.ndarray       # k x s, integrals of P_{j-1} up to c_i
    X_s: np.ndarray       # s x s
    Xhat_s: np.ndarray    # (s+1) x s
    butcher_A: np.ndarray  # k x k, equals I_s P_s^T Omega


def build_tableau(k: int, s: int) -> TableauSet:
    """Construct the HBVM(k, s) tableau on the k-node Gauss rule."""
    if s < 1:
        raise ConfigurationError(f"s must be positive, got {s}")
    if s > k:
        raise ConfigurationError(f"s must not exceed k, got s={s} > k={k}")
    if k > MAX_NODES:
        raise ConfigurationError(f"k must be at most {MAX_NODES}, got {k}")
    rule = gauss_rule(k)
    p_s1 = legendre_row(s + 1, rule.c)
    p_s = p_s1[:, :s]
    i_s = np.column_stack([integrate_legendre(j, rule.c) for j in range(s)])
    butcher = i_s @ (p_s.T * rule.b)
    return TableauSet(
        k=k,
        s=s,
        rule=rule,
        P_s=p_s,
        P_s1=p_s1,
        I_s=i_s,
        X_s=x_matrix(s),
        Xhat_s=xhat_matrix(s),
        butcher_A=butcher,
    )


def verify_identities(t: TableauSet) -> dict[str, float]:
    """Max absolute residual of each structural identity of the tableau.

    Checked:
      * integral_via_extension:  I_s = P_{s+1} Xhat_s
      * orthonormality:          P_s^T Omega P_s = I
      * projected_integrals:     P_s^T Omega I_s = X_s
      * node_recovery:           I_s P_s^T Omega e = c
    """
    b = t.rule.b
    ptw = t.P_s.T * b
    return {
        "integral_via_extension": float(np.max(np.abs(t.I_s - t.P_s1 @ t.Xhat_s))),
        "orthonormality": float(np.max(np.abs(ptw @ t.P_s - np.eye(t.s)))),
        "projected_integrals": float(np.max(np.abs(ptw @ t.I_s - t.X_s))),
        "node_recovery": float(np.max(np.abs(t.butcher_A @ np.ones(t.k) - t.rule.c))),
    }
