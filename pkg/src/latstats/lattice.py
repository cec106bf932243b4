"""Unimodular lattices, primitivity tests, and bounded point enumeration.

A lattice is stored as a real n x n basis whose columns generate it; the
constructor keeps bases LLL-reduced and of determinant +1.  Enumerated points
carry their exact integer coefficient vectors, so primitivity and Smith-form
tests never have to re-derive integers from floating coordinates.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import errors, linalg
from .regions import unit_ball_volume

_REL_SLACK = 1e-12  # closed-boundary comparisons allow this relative slack


@dataclass(frozen=True, eq=False)
class LatticePoint:
    """Nonzero lattice vector: ambient coordinates v and coefficients c (v = basis @ c)."""

    v: np.ndarray
    c: tuple


class UnimodularLattice:
    """Full-rank lattice in R^n of covolume 1, represented by a reduced column basis."""

    def __init__(self, basis, det_tolerance=1e-9, reduce=True):
        B = np.array(basis, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise errors.DimensionMismatch(f"lattice basis must be square, got {B.shape}")
        if not np.all(np.isfinite(B)):
            raise errors.SingularBasis("lattice basis has non-finite entries")
        if reduce:
            B, _ = linalg.lll_reduce(B)
            if np.linalg.det(B) < 0:
                # negating one basis vector keeps the lattice and the reduction
                B[:, -1] = -B[:, -1]
        det = float(np.linalg.det(B))
        if abs(det - 1.0) > det_tolerance:
            raise errors.NotUnimodular(f"|det - 1| = {abs(det - 1.0):.3g} > {det_tolerance:g}")
        B.setflags(write=False)
        self.n = B.shape[0]
        self.basis = B
        self.det_tolerance = det_tolerance

    @classmethod
    def standard(cls, n):
        """The integer lattice Z^n."""
        return cls(np.eye(n), reduce=False)

    def point(self, c):
        """Lattice point with coefficient vector c."""
        c = tuple(int(x) for x in c)
        if len(c) != self.n:
            raise errors.DimensionMismatch(f"coefficient length {len(c)} != n = {self.n}")
        return LatticePoint(v=self.basis @ np.array(c, dtype=float), c=c)

    def coefficients(self, v, tol=1e-9):
        """Integer coefficients of an ambient vector that lies in the lattice."""
        return linalg.integer_coefficients(self.basis, v, tol)

    def __repr__(self):
        return f"<UnimodularLattice n={self.n}>"


def is_primitive(lat, p):
    """True when the point extends to a basis of the lattice (coefficient gcd 1)."""
    if all(x == 0 for x in p.c):
        raise errors.ZeroVector("is_primitive: zero vector")
    return linalg.gcd_vector(p.c) == 1


def is_primitive_tuple(lat, points):
    """True when the k points jointly extend to a basis of the lattice.

    Criterion: the k x n matrix of coefficient rows has exactly k Smith
    invariant factors, all equal to 1.
    """
    k = len(points)
    if k == 0:
        raise errors.EmptyInput("is_primitive_tuple: empty tuple")
    if k > lat.n:
        raise errors.TupleTooLong(f"tuple length {k} exceeds dimension {lat.n}")
    divisors, _, _ = linalg.smith_normal_form([list(p.c) for p in points])
    return divisors == (1,) * k


def enumerate_nonzero_in_radius(lat, radius, budget=10_000_000):
    """All nonzero lattice points of Euclidean norm <= radius.

    Fincke-Pohst depth-first search over the Cholesky form of the basis Gram
    matrix, with a final exact recheck |B c| <= radius * (1 + 1e-12).  Output
    is ordered lexicographically by coefficient vector and contains v and -v
    in pairs.
    """
    if radius <= 0:
        raise ValueError("enumerate_nonzero_in_radius: radius must be positive")
    n = lat.n
    expected = unit_ball_volume(n) * radius**n
    if expected > budget:
        raise errors.EnumerationBudgetExceeded(
            f"expected about {expected:.3g} points, budget {budget}"
        )
    B = lat.basis
    try:
        chol = np.linalg.cholesky(B.T @ B)
    except np.linalg.LinAlgError as exc:
        raise errors.SingularBasis(f"Gram matrix not positive definite: {exc}") from exc
    Rt = chol.T  # upper triangular, |B c|^2 = |Rt c|^2
    bound = (radius * (1.0 + _REL_SLACK)) ** 2
    limit = radius * (1.0 + _REL_SLACK)

    found = []
    coeffs = [0] * n
    counter = [0]

    def descend(i, partial):
        if i < 0:
            if any(coeffs):
                counter[0] += 1
                if counter[0] > budget:
                    raise errors.EnumerationBudgetExceeded(
                        f"more than {budget} points inside radius {radius:g}"
                    )
                found.append(tuple(coeffs))
            return
        rem = bound - partial
        if rem < 0:
            return
        off = 0.0
        for j in range(i + 1, n):
            off += Rt[i, j] * coeffs[j]
        half = math.sqrt(rem)
        lo = math.ceil((-half - off) / Rt[i, i])
        hi = math.floor((half - off) / Rt[i, i])
        for ci in range(lo, hi + 1):
            contrib = Rt[i, i] * ci + off
            coeffs[i] = ci
            descend(i - 1, partial + contrib * contrib)
        coeffs[i] = 0

    descend(n - 1, 0.0)
    found.sort()
    points = []
    for c in found:
        v = B @ np.array(c, dtype=float)
        if math.sqrt(float(v @ v)) <= limit:
            points.append(LatticePoint(v=v, c=c))
    return points


def enumerate_in_region(lat, region, points=None, budget=10_000_000):
    """Nonzero lattice points lying in the region.

    `points` may carry a precomputed enumeration covering the region's
    bounding radius; otherwise one is performed here.
    """
    if region.dim != lat.n:
        raise errors.DimensionMismatch(
            f"region dimension {region.dim} != lattice dimension {lat.n}"
        )
    if points is None:
        points = enumerate_nonzero_in_radius(lat, region.bounding_radius, budget=budget)
    return [p for p in points if region.indicator(p.v) == 1]
