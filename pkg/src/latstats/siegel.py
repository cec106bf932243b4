"""Counting statistics of one lattice over one region.

All functions are pure in (region, lattice).  Each accepts an optional
precomputed `points` list (from enumerate_nonzero_in_radius) that must cover
the region's bounding radius; the heavy per-lattice enumeration can then be
shared across many regions and statistics.

Statistic names used on the wire and in CSV output:
    siegel            number of nonzero lattice points in the region
    siegel_pr         number of primitive points
    tilde_k:<k>       ordered linearly independent k-tuples of nonzero points
    tilde_k_pr:<k>    same, restricted to primitive points
    pr_tuples:<k>     ordered primitive k-tuples
    span_dim_pr       dimension spanned by the primitive points in the region
    omega:<k>         0/1 event: span_dim_pr < k
    pr_card_le:<m>    0/1 event: at most m primitive points in the region
"""

from dataclasses import dataclass, field

from . import errors, linalg
from .lattice import enumerate_in_region, is_primitive_tuple

_RANK_TOL = 1e-9


def _region_points(region, lat, points):
    return enumerate_in_region(lat, region, points=points)


def _primitive(pts):
    return [p for p in pts if linalg.gcd_vector(p.c) == 1]


def siegel_count(region, lat, points=None):
    """Number of nonzero lattice points in the region."""
    return len(_region_points(region, lat, points))


def primitive_count(region, lat, points=None):
    """Number of primitive lattice points in the region."""
    return len(_primitive(_region_points(region, lat, points)))


def independent_tuple_count(region, lat, k, primitive_only, points=None, budget=10_000_000):
    """Ordered k-tuples of (optionally primitive) points in the region spanning rank k."""
    if not 1 <= k <= lat.n - 1:
        raise errors.BadTupleOrder(f"independent tuples need 1 <= k <= n-1, got k={k}, n={lat.n}")
    pts = _region_points(region, lat, points)
    if primitive_only:
        pts = _primitive(pts)
    if k == 1:
        return len(pts)
    if len(pts) ** k > budget:
        raise errors.CombinatorialBudgetExceeded(
            f"{len(pts)}^{k} ordered tuples exceeds budget {budget}"
        )
    vectors = [p.v for p in pts]
    count = 0
    evaluations = 0
    chosen = []

    def extend(depth):
        nonlocal count, evaluations
        for v in vectors:
            evaluations += 1
            if evaluations > budget:
                raise errors.CombinatorialBudgetExceeded(
                    f"more than {budget} tuple evaluations"
                )
            if linalg.rank_with_tolerance(chosen + [v], _RANK_TOL) == depth + 1:
                if depth + 1 == k:
                    count += 1
                else:
                    chosen.append(v)
                    extend(depth + 1)
                    chosen.pop()

    extend(0)
    return count


def primitive_ktuple_count(region, lat, k, points=None, budget=10_000_000):
    """Ordered k-tuples of points in the region that jointly extend to a lattice basis."""
    if not 1 <= k <= lat.n:
        raise errors.BadTupleOrder(f"primitive tuples need 1 <= k <= n, got k={k}, n={lat.n}")
    pts = _primitive(_region_points(region, lat, points))
    if k == 1:
        return len(pts)
    if len(pts) ** k > budget:
        raise errors.CombinatorialBudgetExceeded(
            f"{len(pts)}^{k} ordered tuples exceeds budget {budget}"
        )
    count = 0
    evaluations = 0
    chosen = []

    def extend(depth):
        nonlocal count, evaluations
        for p in pts:
            evaluations += 1
            if evaluations > budget:
                raise errors.CombinatorialBudgetExceeded(
                    f"more than {budget} tuple evaluations"
                )
            # a prefix of a primitive tuple is itself primitive, so pruning is exact
            if is_primitive_tuple(lat, chosen + [p]):
                if depth + 1 == k:
                    count += 1
                else:
                    chosen.append(p)
                    extend(depth + 1)
                    chosen.pop()

    extend(0)
    return count


def span_dim_primitive(region, lat, points=None):
    """Dimension of the real span of the primitive points in the region."""
    pts = _primitive(_region_points(region, lat, points))
    return linalg.rank_with_tolerance([p.v for p in pts], _RANK_TOL)


@dataclass
class CountReport:
    """Counts for one (region, lattice) pair plus any named statistics."""

    total_nonzero: int
    primitive: int
    by_statistic: dict = field(default_factory=dict)


def count_report(region, lat, statistics=(), points=None):
    if points is None:
        from .lattice import enumerate_nonzero_in_radius

        points = enumerate_nonzero_in_radius(lat, region.bounding_radius)
    pts = _region_points(region, lat, points)
    report = CountReport(total_nonzero=len(pts), primitive=len(_primitive(pts)))
    for name in statistics:
        report.by_statistic[name] = evaluate_statistic(name, region, lat, points=points)
    return report


def evaluate_statistic(name, region, lat, points=None):
    """Evaluate a named statistic (see module docstring) as a float."""
    if name == "siegel":
        return float(siegel_count(region, lat, points))
    if name == "siegel_pr":
        return float(primitive_count(region, lat, points))
    if name == "span_dim_pr":
        return float(span_dim_primitive(region, lat, points))
    if ":" in name:
        base, _, arg = name.partition(":")
        try:
            k = int(arg)
        except ValueError:
            raise errors.ConfigError(f"statistic {name!r}: malformed integer argument")
        if base == "tilde_k":
            return float(independent_tuple_count(region, lat, k, primitive_only=False, points=points))
        if base == "tilde_k_pr":
            return float(independent_tuple_count(region, lat, k, primitive_only=True, points=points))
        if base == "pr_tuples":
            return float(primitive_ktuple_count(region, lat, k, points=points))
        if base == "omega":
            return 1.0 if span_dim_primitive(region, lat, points) < k else 0.0
        if base == "pr_card_le":
            return 1.0 if primitive_count(region, lat, points) <= k else 0.0
    raise errors.ConfigError(f"unknown statistic {name!r}")
