"""Monte Carlo checks of front-depth asymptotics on [0,1]^d.

For i.i.d. samples from a separable density, the depth field scaled by
n^(-1/d) converges to a constant times F(x)^(1/d), F the CDF.  The
constant is never hardcoded; comparisons either take ratios or calibrate
it from the largest-n run at the all-ones corner.  Depths at scale are
computed through longest-chain lengths, which coincide with front indices
for coordinate-distinct samples, so a d=2 run at n=1e5 stays in the
O(n log n) sweep instead of building every front.

The quasiconcavity probe extracts an empirical level curve of the scaled
depth field (the front at the corresponding depth) and scores how far its
points rise above their own lower convex envelope; log-concave separable
densities should score near zero while planted non-convex clouds do not.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import ValidationError
from .pareto import longest_chain_depths

__all__ = [
    "UniformAxis",
    "TruncatedExponentialAxis",
    "TwoBumpAxis",
    "SeparableDensity",
    "sample_density",
    "DepthField",
    "depth_field",
    "scaled_depth_at",
    "ContinuumTable",
    "continuum_comparison",
    "default_eval_grid",
    "LevelCurveReport",
    "quasiconcavity_probe",
    "level_curve_defects",
    "two_block_cloud",
]

# vertical rise above the lower convex envelope beyond which a level-curve
# point counts as a convexity defect (unit-box coordinates)
LEVEL_CURVE_TOLERANCE = 0.05


class UniformAxis:
    """Uniform density on [0, 1]."""

    name = "uniform"

    def cdf(self, t):
        return np.clip(np.asarray(t, dtype=float), 0.0, 1.0)

    def ppf(self, u):
        return np.asarray(u, dtype=float)


class TruncatedExponentialAxis:
    """Exponential(rate) truncated to [0, 1]; log-concave."""

    name = "truncexp"

    def __init__(self, rate: float = 2.0):
        if rate <= 0:
            raise ValidationError("rate must be positive")
        self.rate = float(rate)
        self._mass = 1.0 - np.exp(-self.rate)

    def cdf(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return (1.0 - np.exp(-self.rate * t)) / self._mass

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return -np.log1p(-u * self._mass) / self.rate


def _normal_cdf(x):
    return 0.5 * (1.0 + erf(np.asarray(x, dtype=float) / np.sqrt(2.0)))


class TwoBumpAxis:
    """Mixture of two truncated normals on [0, 1]; not log-concave.

    The cdf is closed form; the inverse is found by vectorized bisection,
    deterministic to ~1e-18.
    """

    name = "twobump"

    def __init__(self, centers=(0.3, 0.7), widths=(0.12, 0.12), weight: float = 0.5):
        if not 0.0 < weight < 1.0:
            raise ValidationError("mixture weight must lie in (0, 1)")
        self.centers = tuple(float(c) for c in centers)
        self.widths = tuple(float(w) for w in widths)
        self.weight = float(weight)
        self._lo = [_normal_cdf((0.0 - c) / w) for c, w in zip(self.centers, self.widths)]
        self._hi = [_normal_cdf((1.0 - c) / w) for c, w in zip(self.centers, self.widths)]

    def _component_cdf(self, t, j: int):
        raw = _normal_cdf((t - self.centers[j]) / self.widths[j])
        return (raw - self._lo[j]) / (self._hi[j] - self._lo[j])

    def cdf(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return self.weight * self._component_cdf(t, 0) + (
            1.0 - self.weight
        ) * self._component_cdf(t, 1)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


_AXIS_FACTORIES = {
    "uniform": UniformAxis,
    "truncexp": TruncatedExponentialAxis,
    "twobump": TwoBumpAxis,
}


@dataclass(frozen=True)
class SeparableDensity:
    """Product of per-axis densities on the unit cube."""

    axes: tuple

    def __post_init__(self):
        if len(self.axes) < 1:
            raise ValidationError("need at least one axis density")
        object.__setattr__(self, "axes", tuple(self.axes))

    @classmethod
    def of(cls, kind: str, d: int, **kwargs) -> "SeparableDensity":
        if kind not in _AXIS_FACTORIES:
            raise ValidationError(f"unknown density {kind!r}")
        return cls(axes=tuple(_AXIS_FACTORIES[kind](**kwargs) for _ in range(d)))

    @property
    def d(self) -> int:
        return len(self.axes)

    def cdf(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.ones(len(x))
        for j, axis in enumerate(self.axes):
            out = out * axis.cdf(x[:, j])
        return out

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Inverse-CDF draws, resampled until all rows are distinct."""
        if n < 1:
            raise ValidationError("n must be >= 1")
        rng = np.random.default_rng(seed)
        pts = self._draw(rng, n)
        while True:
            _, first = np.unique(pts, axis=0, return_index=True)
            if len(first) == n:
                return pts
            dupes = np.setdiff1d(np.arange(n), first)
            pts[dupes] = self._draw(rng, len(dupes))

    def _draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random((n, self.d))
        cols = [axis.ppf(u[:, j]) for j, axis in enumerate(self.axes)]
        return np.column_stack(cols)


def sample_density(density: SeparableDensity, n: int, seed: int) -> np.ndarray:
    return density.sample(n, seed)


@dataclass(frozen=True)
class DepthField:
    """Scaled depths n^(-1/d) u_n(x) over a set of evaluation points."""

    eval_points: np.ndarray
    scaled_depths: np.ndarray
    n: int
    d: int
    seed: int | None = None


def depth_field(points: np.ndarray, eval_points, seed: int | None = None) -> DepthField:
    """Evaluate the scaled depth at many points with one chain sweep.

    The depth at x is the longest chain among sample points componentwise
    <= x, i.e. the running maximum of per-point chain lengths below x.
    """
    points = np.asarray(points, dtype=float)
    eval_points = np.atleast_2d(np.asarray(eval_points, dtype=float))
    n, d = points.shape
    depths = longest_chain_depths(points)
    out = np.empty(len(eval_points))
    for i, x in enumerate(eval_points):
        mask = np.all(points <= x, axis=1)
        out[i] = depths[mask].max() if mask.any() else 0
    return DepthField(
        eval_points=eval_points,
        scaled_depths=out * n ** (-1.0 / d),
        n=n,
        d=d,
        seed=seed,
    )


def scaled_depth_at(points: np.ndarray, x) -> float:
    """n^(-1/d) times the depth of ``x`` in the sampled point set."""
    return float(depth_field(points, [x]).scaled_depths[0])


def default_eval_grid(d: int) -> np.ndarray:
    """Interior lattice plus the all-ones corner.

    Nine steps per axis for d <= 2; a coarser four-step lattice beyond
    that to keep the point count manageable.
    """
    steps = np.arange(0.1, 0.95, 0.1) if d <= 2 else np.arange(0.2, 0.9, 0.2)
    mesh = np.meshgrid(*([steps] * d), indexing="ij")
    grid = np.column_stack([m.ravel() for m in mesh])
    return np.vstack([grid, np.ones(d)])


@dataclass
class ContinuumTable:
    """Max relative error of scaled depth vs. rate * F(x)^(1/d), per n."""

    ns: list[int]
    max_rel_errors: list[float]
    mean_rel_errors: list[float]
    rate: float                      # calibrated at the all-ones corner, largest n
    eval_grid: np.ndarray
    per_point: dict[int, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return [
            {"n": n, "max_rel_error": mx, "mean_rel_error": mn}
            for n, mx, mn in zip(self.ns, self.max_rel_errors, self.mean_rel_errors)
        ]

    def to_json(self) -> dict:
        return {
            "rate": self.rate,
            "rows": self.rows(),
            "meta": self.meta,
        }


def continuum_comparison(
    density: SeparableDensity,
    n_schedule: list[int],
    eval_grid=None,
    seed: int = 0,
    reps: int = 1,
) -> ContinuumTable:
    """Compare scaled depths against the separable-density limit on a grid.

    The limit at x is rate * F(x)^(1/d); the rate is calibrated from the
    largest n in the schedule at the all-ones corner and reused everywhere
    else, so the table measures shape agreement, not the constant.  Depth
    fields are averaged over ``reps`` independent seeds per n.
    """
    if not n_schedule:
        raise ValidationError("n_schedule must be nonempty")
    if reps < 1:
        raise ValidationError("reps must be >= 1")
    d = density.d
    grid = default_eval_grid(d) if eval_grid is None else np.atleast_2d(eval_grid)
    ns = sorted(int(n) for n in n_schedule)
    corner = np.ones(d)
    grid_with_corner = np.vstack([grid, corner])

    mean_fields: dict[int, np.ndarray] = {}
    for n in ns:
        acc = np.zeros(len(grid_with_corner))
        for rep in range(reps):
            pts = density.sample(n, seed=seed + 1000 * rep + n)
            acc += depth_field(pts, grid_with_corner).scaled_depths
        mean_fields[n] = acc / reps

    rate = mean_fields[ns[-1]][-1] / float(density.cdf(corner[None, :])[0]) ** (1.0 / d)
    limit = rate * density.cdf(grid) ** (1.0 / d)

    table = ContinuumTable(
        ns=[],
        max_rel_errors=[],
        mean_rel_errors=[],
        rate=float(rate),
        eval_grid=grid,
        meta={"seed": seed, "reps": reps, "d": d,
              "axes": [axis.name for axis in density.axes]},
    )
    for n in ns:
        rel = np.abs(mean_fields[n][: len(grid)] / limit - 1.0)
        table.ns.append(n)
        table.max_rel_errors.append(float(rel.max()))
        table.mean_rel_errors.append(float(rel.mean()))
        table.per_point[n] = rel
    return table


def _lower_hull(points: np.ndarray) -> np.ndarray:
    """Vertices of the lower convex envelope, points pre-sorted by x."""
    hull: list[np.ndarray] = []
    for p in points:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return np.asarray(hull)


def _defect_fraction(curve: np.ndarray, tolerance: float) -> tuple[float, np.ndarray]:
    order = np.lexsort((curve[:, 1], curve[:, 0]))
    sorted_curve = curve[order]
    hull = _lower_hull(sorted_curve)
    envelope = np.interp(sorted_curve[:, 0], hull[:, 0], hull[:, 1])
    gaps = sorted_curve[:, 1] - envelope
    return float(np.mean(gaps > tolerance)), sorted_curve


@dataclass
class LevelCurveReport:
    """Per-level convexity defects of the empirical depth level curves."""

    levels: list[dict]
    n: int
    seed: int | None
    tolerance: float

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "levels": [
                {k: v for k, v in row.items() if k != "curve"} for row in self.levels
            ],
        }


def level_curve_defects(
    points: np.ndarray,
    levels,
    seed: int | None = None,
    tolerance: float = LEVEL_CURVE_TOLERANCE,
) -> LevelCurveReport:
    """Convexity-defect scores of the level curves of a planar point cloud.

    The level curve at scaled depth ``a`` is the set of sample points whose
    chain depth equals round(a * sqrt(n)).  The defect score is the
    fraction of those points lying more than ``tolerance`` above their own
    lower convex envelope; a convex front scores near zero.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValidationError("the level-curve probe is planar (d=2) only")
    n = len(points)
    depths = longest_chain_depths(points)
    max_depth = int(depths.max())
    rows: list[dict] = []
    for a in levels:
        k = int(round(float(a) * np.sqrt(n)))
        if k < 1 or k > max_depth:
            rows.append(
                {"level": float(a), "front": k, "size": 0, "defect": None,
                 "skipped": "empty level set"}
            )
            continue
        curve = points[depths == k]
        if len(curve) < 3:
            rows.append(
                {"level": float(a), "front": k, "size": int(len(curve)),
                 "defect": None, "skipped": "level set too small for a hull"}
            )
            continue
        defect, sorted_curve = _defect_fraction(curve, tolerance)
        rows.append(
            {"level": float(a), "front": k, "size": int(len(curve)),
             "defect": defect, "skipped": None, "curve": sorted_curve}
        )
    return LevelCurveReport(levels=rows, n=n, seed=seed, tolerance=tolerance)


def quasiconcavity_probe(
    density: SeparableDensity,
    n: int,
    levels,
    seed: int = 0,
    tolerance: float = LEVEL_CURVE_TOLERANCE,
) -> LevelCurveReport:
    """Sample a planar density and score its level curves for convexity."""
    if density.d != 2:
        raise ValidationError("the quasiconcavity probe is planar (d=2) only")
    points = density.sample(n, seed)
    return level_curve_defects(points, levels, seed=seed, tolerance=tolerance)


def two_block_cloud(n: int, seed: int = 0) -> np.ndarray:
    """Planted non-convex cloud: two disjoint axis-aligned uniform blocks.

    Neither block dominates the other, so every front zigzags across the
    empty corner between them and its level curves are severely
    non-convex.
    """
    rng = np.random.default_rng(seed)
    half = n // 2
    block1 = rng.random((half, 2)) * [0.45, 0.45] + [0.0, 0.55]
    block2 = rng.random((n - half, 2)) * [0.45, 0.45] + [0.55, 0.0]
    return np.vstack([block1, block2])
