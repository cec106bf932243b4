"""Bounded Borel subsets of R^n used as counting regions.

Every region knows its dimension, an enclosing radius (points outside the
origin-centered ball of that radius are never members), its Lebesgue volume,
and a volume error (0 for kinds with exact volume).  Membership uses closed
boundaries throughout; the boundary is a null set, so the convention only
pins down test determinism.  Comparisons against computed radii allow 1e-12
relative slack so that points constructed to sit on a boundary stay inside.
"""

import math

import numpy as np

from . import errors

_REL_SLACK = 1e-12


def gamma_half(k):
    """Gamma(k/2) for a positive integer k, by the recurrence from Gamma(1/2), Gamma(1)."""
    if k < 1:
        raise ValueError("gamma_half: k must be a positive integer")
    if k % 2 == 1:
        val, x = math.sqrt(math.pi), 0.5
    else:
        val, x = 1.0, 1.0
    while 2 * x < k:
        val *= x
        x += 1.0
    return val


def unit_ball_volume(n):
    """Volume of the unit Euclidean ball in R^n: pi^(n/2) / Gamma(n/2 + 1)."""
    if n < 1:
        raise ValueError("unit_ball_volume: n must be a positive integer")
    return math.pi ** (n / 2) / gamma_half(n + 2)


class Region:
    """Base class; subclasses fill in membership and a config descriptor."""

    kind = "abstract"

    def __init__(self, dim, bounding_radius, volume, volume_error=0.0):
        self.dim = int(dim)
        self.bounding_radius = float(bounding_radius)
        self.volume = float(volume)
        self.volume_error = float(volume_error)

    def indicator(self, x):
        """1 if x belongs to the region, else 0."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise errors.DimensionMismatch(
                f"indicator: point shape {x.shape}, region dimension {self.dim}"
            )
        return 1 if self._contains(x) else 0

    def contains_many(self, X):
        """Vectorized membership for an (m, n) array of points; returns bool array."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise errors.DimensionMismatch(
                f"contains_many: array shape {X.shape}, region dimension {self.dim}"
            )
        return self._contains_many(X)

    def _contains(self, x):
        raise NotImplementedError

    def _contains_many(self, X):
        return np.array([self._contains(x) for x in X], dtype=bool)

    def config(self):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim} volume={self.volume:g}>"


class BallByVolume(Region):
    """Closed origin-centered ball of prescribed Lebesgue volume t."""

    kind = "ball_by_volume"

    def __init__(self, n, t):
        if t <= 0:
            raise errors.InvalidVolume(f"ball volume must be positive, got {t}")
        radius = (float(t) / unit_ball_volume(n)) ** (1.0 / n)
        super().__init__(n, radius, float(t))
        self.t = float(t)
        self.radius = radius

    def _contains(self, x):
        return float(x @ x) <= self.radius * self.radius * (1.0 + _REL_SLACK)

    def _contains_many(self, X):
        return np.einsum("ij,ij->i", X, X) <= self.radius * self.radius * (1.0 + _REL_SLACK)

    def config(self):
        return {"kind": self.kind, "n": self.dim, "t": self.t}


class Box(Region):
    """Axis-aligned closed box [low_1, high_1] x ... x [low_n, high_n]."""

    kind = "box"

    def __init__(self, low, high):
        low = np.asarray(low, dtype=float)
        high = np.asarray(high, dtype=float)
        if low.ndim != 1 or low.shape != high.shape:
            raise errors.DimensionMismatch("box: low/high must be vectors of equal length")
        if np.any(high <= low):
            raise errors.EmptyRegion("box: every interval must satisfy low < high")
        volume = float(np.prod(high - low))
        radius = math.sqrt(float(np.sum(np.maximum(low * low, high * high))))
        super().__init__(low.size, radius, volume)
        self.low = low
        self.high = high

    def _contains(self, x):
        return bool(np.all(x >= self.low) and np.all(x <= self.high))

    def _contains_many(self, X):
        return np.all((X >= self.low) & (X <= self.high), axis=1)

    def config(self):
        return {"kind": self.kind, "low": self.low.tolist(), "high": self.high.tolist()}


class Annulus(Region):
    """Closed spherical shell inner_radius <= |x| <= outer_radius."""

    kind = "annulus"

    def __init__(self, n, inner_radius, outer_radius):
        if inner_radius < 0 or outer_radius <= inner_radius:
            raise errors.EmptyRegion("annulus: need 0 <= inner_radius < outer_radius")
        vn = unit_ball_volume(n)
        volume = vn * (outer_radius**n - inner_radius**n)
        super().__init__(n, outer_radius, volume)
        self.inner_radius = float(inner_radius)
        self.outer_radius = float(outer_radius)

    def _contains(self, x):
        r2 = float(x @ x)
        lo = self.inner_radius**2 * (1.0 - _REL_SLACK)
        hi = self.outer_radius**2 * (1.0 + _REL_SLACK)
        return lo <= r2 <= hi

    def _contains_many(self, X):
        r2 = np.einsum("ij,ij->i", X, X)
        lo = self.inner_radius**2 * (1.0 - _REL_SLACK)
        hi = self.outer_radius**2 * (1.0 + _REL_SLACK)
        return (r2 >= lo) & (r2 <= hi)

    def config(self):
        return {
            "kind": self.kind,
            "n": self.dim,
            "inner_radius": self.inner_radius,
            "outer_radius": self.outer_radius,
        }


class ShiftedBall(Region):
    """Closed ball of given radius centered away from the origin."""

    kind = "shifted_ball"

    def __init__(self, center, radius):
        center = np.asarray(center, dtype=float)
        if center.ndim != 1:
            raise errors.DimensionMismatch("shifted_ball: center must be a vector")
        if radius <= 0:
            raise errors.InvalidVolume(f"shifted_ball: radius must be positive, got {radius}")
        n = center.size
        volume = unit_ball_volume(n) * radius**n
        bounding = float(np.linalg.norm(center)) + radius
        super().__init__(n, bounding, volume)
        self.center = center
        self.radius = float(radius)

    def _contains(self, x):
        d = x - self.center
        return float(d @ d) <= self.radius * self.radius * (1.0 + _REL_SLACK)

    def _contains_many(self, X):
        D = X - self.center
        return np.einsum("ij,ij->i", D, D) <= self.radius * self.radius * (1.0 + _REL_SLACK)

    def config(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


class Union(Region):
    """Union of two regions; volume estimated by seeded Monte Carlo."""

    kind = "union"

    def __init__(self, a, b, mc_samples=200_000, seed=0):
        if a.dim != b.dim:
            raise errors.DimensionMismatch("union: operand dimensions differ")
        self.a = a
        self.b = b
        self.mc_samples = int(mc_samples)
        self.seed = int(seed)
        super().__init__(a.dim, max(a.bounding_radius, b.bounding_radius), 0.0)
        self.volume, self.volume_error = composite_volume(self, self.mc_samples, self.seed)

    def _contains(self, x):
        return self.a._contains(x) or self.b._contains(x)

    def _contains_many(self, X):
        return self.a._contains_many(X) | self.b._contains_many(X)

    def config(self):
        return {
            "kind": self.kind,
            "a": self.a.config(),
            "b": self.b.config(),
            "mc_samples": self.mc_samples,
            "seed": self.seed,
        }


class Difference(Region):
    """Set difference a minus b; volume estimated by seeded Monte Carlo."""

    kind = "difference"

    def __init__(self, a, b, mc_samples=200_000, seed=0):
        if a.dim != b.dim:
            raise errors.DimensionMismatch("difference: operand dimensions differ")
        self.a = a
        self.b = b
        self.mc_samples = int(mc_samples)
        self.seed = int(seed)
        super().__init__(a.dim, a.bounding_radius, 0.0)
        self.volume, self.volume_error = composite_volume(self, self.mc_samples, self.seed)

    def _contains(self, x):
        return self.a._contains(x) and not self.b._contains(x)

    def _contains_many(self, X):
        return self.a._contains_many(X) & ~self.b._contains_many(X)

    def config(self):
        return {
            "kind": self.kind,
            "a": self.a.config(),
            "b": self.b.config(),
            "mc_samples": self.mc_samples,
            "seed": self.seed,
        }


def ball_of_volume(n, t):
    """Closed origin-centered ball in R^n of Lebesgue volume t."""
    return BallByVolume(n, t)


def box(low, high):
    """Axis-aligned closed box with corners low and high."""
    return Box(low, high)


def uniform_ball_points(rng, count, n, radius):
    """Sample `count` points uniformly from the closed ball of given radius."""
    g = rng.normal(size=(count, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    u = rng.random(count) ** (1.0 / n)
    return g / norms * (u * radius)[:, None]


def composite_volume(region, mc_samples, seed):
    """Monte Carlo volume of a region by uniform sampling in its bounding ball.

    Returns (volume, volume_error) with the error set to three standard errors.
    """
    if mc_samples < 1:
        raise ValueError("composite_volume: mc_samples must be positive")
    rng = np.random.default_rng(seed)
    n = region.dim
    R = region.bounding_radius
    ball_vol = unit_ball_volume(n) * R**n
    X = uniform_ball_points(rng, int(mc_samples), n, R)
    hits = int(np.count_nonzero(region.contains_many(X)))
    p = hits / mc_samples
    volume = p * ball_vol
    stderr = math.sqrt(p * (1.0 - p) / mc_samples) * ball_vol
    return volume, 3.0 * stderr


def region_from_config(cfg):
    """Build a region from its serialized descriptor (as found in experiment configs)."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise errors.ConfigError(f"region descriptor must be a table with a 'kind': {cfg!r}")
    kind = cfg["kind"]
    params = {k: v for k, v in cfg.items() if k != "kind"}
    try:
        if kind == "ball_by_volume":
            return BallByVolume(params["n"], params["t"])
        if kind == "box":
            return Box(params["low"], params["high"])
        if kind == "annulus":
            return Annulus(params["n"], params["inner_radius"], params["outer_radius"])
        if kind == "shifted_ball":
            return ShiftedBall(params["center"], params["radius"])
        if kind in ("union", "difference"):
            a = region_from_config(params["a"])
            b = region_from_config(params["b"])
            cls = Union if kind == "union" else Difference
            return cls(
                a,
                b,
                mc_samples=params.get("mc_samples", 200_000),
                seed=params.get("seed", 0),
            )
    except KeyError as exc:
        raise errors.ConfigError(f"region '{kind}': missing parameter {exc}") from exc
    raise errors.ConfigError(f"unknown region kind {kind!r}")
