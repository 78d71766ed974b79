"""Small dense linear algebra kept in-repo: pivoted LU, a Hessenberg
double-shift QR eigensolver for matrices up to 16x16, and the
Kronecker-structured block solves used by the stage solvers.

Nothing here is tuned for large matrices; the package only ever factors
s x s coefficient blocks (s <= 6), m x m Hessians, and sm x sm simplified
Newton systems with small m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EigensolverError, SingularMatrixError

MAX_EIG_DIM = 16


@dataclass(frozen=True)
class LUFactors:
    """Combined LU storage (unit lower / upper in one array) plus pivots."""

    lu: np.ndarray
    piv: np.ndarray


def lu_factor(a: np.ndarray) -> LUFactors:
    """LU factorization with partial pivoting: P A = L U."""
    a = np.asarray(a, dtype=float)
    n, nc = a.shape
    if n != nc:
        raise ValueError(f"matrix must be square, got {a.shape}")
    lu = a.copy()
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if lu[p, k] == 0.0:
            raise SingularMatrixError(f"zero pivot column at index {k}")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return LUFactors(lu, piv)


def lu_solve(f: LUFactors, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = rhs (vector or multi-column) from the LU factors."""
    lu, piv = f.lu, f.piv
    n = lu.shape[0]
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != n:
        raise ValueError(f"rhs has leading dimension {rhs.shape[0]}, expected {n}")
    x = rhs[piv].copy()
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] -= lu[k, k + 1:] @ x[k + 1:]
        x[k] /= lu[k, k]
    return x


def determinant(a: np.ndarray) -> float:
    """Determinant via pivoted LU (sign from the permutation parity)."""
    try:
        f = lu_factor(a)
    except SingularMatrixError:
        return 0.0
    perm = list(f.piv)
    sign = 1.0
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign * float(np.prod(np.diag(f.lu)))


def _hessenberg(a: np.ndarray) -> np.ndarray:
    """Reduce to upper Hessenberg form by Householder similarity."""
    h = np.array(a, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        col = h[k + 1:, k]
        norm = np.sqrt(col @ col)
        if norm == 0.0 or np.sqrt(col[1:] @ col[1:]) == 0.0:
            continue
        alpha = -norm if col[0] >= 0.0 else norm
        v = col.copy()
        v[0] -= alpha
        v /= np.sqrt(v @ v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def eigenvalues_small(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a real square matrix with n <= 16.

    Hessenberg reduction followed by Francis double-shift QR iteration
    with deflation threshold 1e-14 * ||H||_F and a budget of 30n sweeps.
    Complex eigenvalues come out in exactly conjugate pairs.
    """
    a = np.asarray(a, dtype=float)
    n, nc = a.shape
    if n != nc:
        raise ValueError(f"matrix must be square, got {a.shape}")
    if n > MAX_EIG_DIM:
        raise ValueError(f"eigensolver limited to n <= {MAX_EIG_DIM}, got {n}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if n == 0:
        return np.empty(0, dtype=complex)
    if n == 1:
        return a.astype(complex).ravel()
    hess = _hessenberg(a)
    tol = 1e-14 * math.sqrt(float(np.sum(hess * hess)))
    return _hqr(hess, tol, 30 * n)


def _hqr(hess: np.ndarray, tol: float, max_sweeps: int) -> np.ndarray:
    """Francis double-shift QR on an upper Hessenberg matrix (values only)."""
    n = hess.shape[0]
    a = [list(map(float, row)) for row in hess]
    wr = [0.0] * n
    wi = [0.0] * n
    sweeps = 0
    t = 0.0
    nn = n - 1
    while nn >= 0:
        its = 0
        while True:
            # find the largest l with a negligible subdiagonal below it
            l = nn
            while l > 0:
                if abs(a[l][l - 1]) <= tol:
                    a[l][l - 1] = 0.0
                    break
                l -= 1
            x = a[nn][nn]
            if l == nn:  # 1x1 block isolated
                wr[nn] = x + t
                nn -= 1
                break
            y = a[nn - 1][nn - 1]
            w = a[nn][nn - 1] * a[nn - 1][nn]
            if l == nn - 1:  # 2x2 block isolated
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:  # real pair
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                else:  # complex conjugate pair
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = z
                    wi[nn] = -z
                nn -= 2
                break
            if sweeps >= max_sweeps or its >= 30:
                raise EigensolverError(
                    f"QR iteration exceeded {max_sweeps} sweeps on block size {nn - l + 1}"
                )
            if its == 10 or its == 20:  # exceptional shift to break cycling
                t += x
                for i in range(nn + 1):
                    a[i][i] -= x
                s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                y = x = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            sweeps += 1
            # position m where the bulge chase can safely start
            m = nn - 2
            while m >= l:
                z = a[m][m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                q = a[m + 1][m + 1] - z - r - s
                r = a[m + 2][m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                if u <= 1e-16 * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i][i - 2] = 0.0
                if i != m + 2:
                    a[i][i - 3] = 0.0
            # double QR sweep: chase the bulge from row m down to nn
            for k in range(m, nn):
                if k != m:
                    p = a[k][k - 1]
                    q = a[k + 1][k - 1]
                    r = a[k + 2][k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k][k - 1] = -a[k][k - 1]
                else:
                    a[k][k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):  # row modification
                    p = a[k][j] + q * a[k + 1][j]
                    if k != nn - 1:
                        p += r * a[k + 2][j]
                        a[k + 2][j] -= p * z
                    a[k + 1][j] -= p * y
                    a[k][j] -= p * x
                mmin = nn if nn < k + 3 else k + 3
                for i in range(l, mmin + 1):  # column modification
                    p = x * a[i][k] + y * a[i][k + 1]
                    if k != nn - 1:
                        p += z * a[i][k + 2]
                        a[i][k + 2] -= p * r
                    a[i][k + 1] -= p * q
                    a[i][k] -= p
    return np.array(wr, dtype=float) + 1j * np.array(wi, dtype=float)


def spectral_radius(a: np.ndarray) -> float:
    """Largest eigenvalue modulus, from the small dense eigensolver."""
    return float(np.max(np.abs(eigenvalues_small(a))))


def kron_apply(b: np.ndarray, hess, v: np.ndarray) -> np.ndarray:
    """Apply (B kron H) to v blockwise without forming the product.

    ``hess`` is an m x m array or None for the identity. v is flattened
    into cols(B) blocks of length m; the result has rows(B) blocks.
    """
    b = np.asarray(b, dtype=float)
    rows, cols = b.shape
    v = np.asarray(v, dtype=float)
    if v.size % cols != 0:
        raise ValueError(f"vector length {v.size} not divisible into {cols} blocks")
    blocks = v.reshape(cols, v.size // cols)
    if hess is not None:
        blocks = blocks @ np.asarray(hess, dtype=float).T
    return (b @ blocks).ravel()


def block_lower_triangular_solve(
    ls: np.ndarray,
    hess: np.ndarray,
    d_factors: LUFactors,
    h2: float,
    rhs: np.ndarray,
) -> np.ndarray:
    """Solve [I + h2 * (L kron H)] x = rhs by block forward substitution.

    L must be lower triangular with constant diagonal d, and d_factors must
    hold the LU factorization of I + h2*d*H: that single m x m factorization
    is reused for every block row.
    """
    ls = np.asarray(ls, dtype=float)
    s = ls.shape[0]
    rhs = np.asarray(rhs, dtype=float)
    m = rhs.size // s
    if rhs.size != s * m:
        raise ValueError("rhs length does not match block structure")
    hess = np.asarray(hess, dtype=float)
    x = np.empty((s, m))
    r = rhs.reshape(s, m)
    for i in range(s):
        acc = r[i]
        if i > 0:
            coupled = ls[i, :i] @ x[:i]
            acc = acc - h2 * (hess @ coupled)
        x[i] = lu_solve(d_factors, acc)
    return x.ravel()
