"""Exact integer matrix algebra and floating-point lattice utilities.

Integer matrices are plain nested lists of Python ints (arbitrary precision;
intermediate values in Smith reduction overflow 64-bit even for small inputs).
Real matrices and vectors are numpy arrays; lattice bases are stored with
basis vectors as *columns*.
"""

import math

import numpy as np

from . import errors


def gcd_vector(c):
    """gcd of the absolute values of a nonempty integer sequence (0 for all-zero)."""
    vals = [abs(int(x)) for x in c]
    if not vals:
        raise errors.EmptyInput("gcd_vector: empty sequence")
    return math.gcd(*vals)


def _xgcd(a, b):
    """Extended Euclid: returns (g, x, y) with g = gcd(a, b) = a*x + b*y, g >= 0."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def _int_rows(M):
    rows = [[int(x) for x in row] for row in M]
    if not rows or not rows[0]:
        raise errors.EmptyInput("empty integer matrix")
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise errors.DimensionMismatch("ragged integer matrix")
    return rows


def int_det(M):
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    A = _int_rows(M)
    n = len(A)
    if any(len(r) != n for r in A):
        raise errors.DimensionMismatch("int_det: matrix not square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def smith_normal_form(M):
    """Smith normal form of an integer matrix.

    Returns (divisors, U, V) where U*M*V is diagonal with the nonnegative
    invariant factors d_1 | d_2 | ... on the diagonal, U and V are unimodular,
    and `divisors` lists only the nonzero factors.  Uses gcd-driven row/column
    reduction with the pivot chosen as the entry of minimal absolute value.
    """
    A = _int_rows(M)
    m, n = len(A), len(A[0])
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_combine(i1, i2, a, b, c, d):
        # rows (i1, i2) <- (a*r1 + b*r2, c*r1 + d*r2) on A and U
        for X in (A, U):
            r1, r2 = X[i1], X[i2]
            for j in range(len(r1)):
                x, y = r1[j], r2[j]
                r1[j] = a * x + b * y
                r2[j] = c * x + d * y

    def col_combine(j1, j2, a, b, c, d):
        for X in (A, V):
            for row in X:
                x, y = row[j1], row[j2]
                row[j1] = a * x + b * y
                row[j2] = c * x + d * y

    def swap_rows(i1, i2):
        A[i1], A[i2] = A[i2], A[i1]
        U[i1], U[i2] = U[i2], U[i1]

    def swap_cols(j1, j2):
        for X in (A, V):
            for row in X:
                row[j1], row[j2] = row[j2], row[j1]

    t = 0
    limit = min(m, n)
    while t < limit:
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                v = A[i][j]
                if v != 0 and (piv is None or abs(v) < abs(A[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        if piv[0] != t:
            swap_rows(t, piv[0])
        if piv[1] != t:
            swap_cols(t, piv[1])

        while True:
            # clear column t, then row t; column ops can repollute the column
            for i in range(t + 1, m):
                if A[i][t] != 0:
                    a, b = A[t][t], A[i][t]
                    if b % a == 0:
                        q = b // a
                        for X in (A, U):
                            X[i] = [x - q * y for x, y in zip(X[i], X[t])]
                    else:
                        g, x, y = _xgcd(a, b)
                        row_combine(t, i, x, y, -(b // g), a // g)
            for j in range(t + 1, n):
                if A[t][j] != 0:
                    a, b = A[t][t], A[t][j]
                    if b % a == 0:
                        q = b // a
                        for X in (A, V):
                            for row in X:
                                row[j] -= q * row[t]
                    else:
                        g, x, y = _xgcd(a, b)
                        col_combine(t, j, x, y, -(b // g), a // g)
            if all(A[i][t] == 0 for i in range(t + 1, m)) and all(
                A[t][j] == 0 for j in range(t + 1, n)
            ):
                # pivot must divide the remaining block for the divisor chain
                d = A[t][t]
                offender = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if A[i][j] % d != 0:
                            offender = i
                            break
                    if offender is not None:
                        break
                if offender is None:
                    break
                for X in (A, U):
                    X[t] = [x + y for x, y in zip(X[t], X[offender])]
        t += 1

    for i in range(limit):
        if A[i][i] < 0:
            for X in (A, U):
                X[i] = [-x for x in X[i]]
    divisors = tuple(A[i][i] for i in range(limit) if A[i][i] != 0)
    return divisors, U, V


def lll_reduce(B, delta=0.99):
    """Lovász-reduce the columns of a square nonsingular real matrix.

    Returns (B_red, U) with B_red = B @ U, U an integer matrix of determinant
    +-1 (returned as nested Python ints, exact).  Designed for repeated calls
    on nearly reduced bases: size reduction updates the Gram-Schmidt
    coefficients in place and a full recompute happens only after a swap.
    """
    B = np.array(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise errors.DimensionMismatch(f"lll_reduce: expected square matrix, got {B.shape}")
    if not np.all(np.isfinite(B)):
        raise errors.SingularBasis("lll_reduce: non-finite entries")
    if not 0.25 < delta < 1.0:
        raise ValueError("lll_reduce: delta must lie in (0.25, 1)")
    n = B.shape[0]
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > 1e13:
        raise errors.SingularBasis("lll_reduce: basis numerically singular")

    basis = B.copy()
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    ortho = np.zeros_like(basis)
    mu = np.zeros((n, n))
    norms = np.zeros(n)

    def gso():
        for i in range(n):
            v = basis[:, i].copy()
            for j in range(i):
                mu[i, j] = (basis[:, i] @ ortho[:, j]) / norms[j]
                v -= mu[i, j] * ortho[:, j]
            ortho[:, i] = v
            norms[i] = v @ v

    gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q != 0:
                basis[:, k] -= q * basis[:, j]
                for r in range(n):
                    U[r][k] -= q * U[r][j]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            basis[:, [k - 1, k]] = basis[:, [k, k - 1]]
            for r in range(n):
                U[r][k - 1], U[r][k] = U[r][k], U[r][k - 1]
            gso()
            k = max(k - 1, 1)
    return basis, U


def integer_coefficients(B, v, tol=1e-9):
    """Recover the integer coefficient vector c with v = B @ c.

    Raises NotInLattice when the rounded solution leaves a residual larger
    than `tol` in the max norm.
    """
    B = np.asarray(B, dtype=float)
    v = np.asarray(v, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise errors.DimensionMismatch(f"integer_coefficients: basis shape {B.shape}")
    if v.shape != (B.shape[0],):
        raise errors.DimensionMismatch(
            f"integer_coefficients: vector shape {v.shape} vs basis {B.shape}"
        )
    if tol <= 0:
        raise ValueError("integer_coefficients: tol must be positive")
    try:
        c = np.linalg.solve(B, v)
    except np.linalg.LinAlgError as exc:
        raise errors.SingularBasis(str(exc)) from exc
    ci = np.rint(c)
    residual = float(np.max(np.abs(B @ ci - v)))
    if residual > tol:
        raise errors.NotInLattice(f"residual {residual:g} exceeds tol {tol:g}")
    return tuple(int(x) for x in ci)


def rank_with_tolerance(vectors, tol=1e-9):
    """Numerical rank of a set of real vectors: singular values >= tol * s_max.

    The empty set has rank 0 (span of the empty set is the zero space).
    """
    if tol <= 0:
        raise ValueError("rank_with_tolerance: tol must be positive")
    vs = [np.asarray(v, dtype=float) for v in vectors]
    if not vs:
        return 0
    dim = vs[0].shape
    if len(dim) != 1 or any(v.shape != dim for v in vs):
        raise errors.DimensionMismatch("rank_with_tolerance: mixed dimensions")
    s = np.linalg.svd(np.vstack(vs), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s >= tol * s[0]))
