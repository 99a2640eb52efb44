"""Norms: L^p, power-weighted L^p with an A_p screen, Herz, Besov, Triebel.

All spatial quadrature is the plain Riemann sum h^d * sum over the grid.
Weights are restricted to |x|^a, the family whose Muckenhoupt ranges are
known in closed form; the value at the origin cell is replaced by the cell
average so negative exponents stay integrable.
"""

import math
from dataclasses import dataclass

import numpy as np

from .grid import forward_transform
from .multiplier import apply
from .symbols import BumpProfile, Symbol, radial_symbol


def lp_norm(f, p):
    """(sum |f|^p h^d)^(1/p) over the spatial grid."""
    if f.domain != "spatial":
        raise ValueError("lp_norm expects a spatial field")
    if not 1 <= p < np.inf:
        raise ValueError(f"p must lie in [1, inf), got {p}")
    g = f.grid
    return float(np.sum(np.abs(f.samples) ** p) ** (1.0 / p) * g.h ** (g.dim / p))


@dataclass(frozen=True)
class WeightSpec:
    """Power weight w(x) = |x|^a paired with the exponent p it serves."""

    a: float
    p: float

    def validate_for_dim(self, dim):
        if self.p > 1:
            if not -dim < self.a < dim * (self.p - 1):
                raise ValueError(
                    f"a={self.a} outside the A_p range (-{dim}, {dim * (self.p - 1)}) "
                    f"for p={self.p}"
                )
        elif self.p == 1:
            if not -dim < self.a <= 0:
                raise ValueError(f"a={self.a} outside the A_1 range (-{dim}, 0]")
        else:
            raise ValueError(f"p must be >= 1, got {self.p}")


def _square_mass(a, half_side, dim):
    """Integral of |x|^a over [-R, R]^dim."""
    if a <= -dim:
        raise ValueError(f"|x|^{a} is not integrable in dimension {dim}")
    if dim == 1:
        return 2.0 * half_side ** (a + 1) / (a + 1)
    # Split the square into eight wedges; each reduces to a 1-d integral.
    theta = np.linspace(0.0, np.pi / 4.0, 20001)
    integrand = np.cos(theta) ** (-(a + 2.0))
    return 8.0 * half_side ** (a + 2) / (a + 2) * float(np.trapezoid(integrand, theta))


_WEIGHT_CACHE = {}


def weight_samples(grid, a):
    """|x|^a on the grid with the origin cell replaced by its cell average."""
    key = (grid, a)
    hit = _WEIGHT_CACHE.get(key)
    if hit is None:
        if a == 0:
            hit = np.ones(grid.shape)
        else:
            r = grid.x_radius()
            with np.errstate(divide="ignore"):
                hit = np.where(r > 0, r, 1.0) ** a
            center = (grid.size // 2,) * grid.dim
            cell = _square_mass(a, grid.h / 2.0, grid.dim) / grid.h**grid.dim
            hit[center] = cell
        hit.setflags(write=False)
        _WEIGHT_CACHE[key] = hit
    return hit


def weighted_lp_norm(f, p, w):
    """(sum |f|^p w h^d)^(1/p) with the admissibility of w enforced."""
    if f.domain != "spatial":
        raise ValueError("weighted_lp_norm expects a spatial field")
    if w.p != p:
        raise ValueError(f"weight was declared for p={w.p}, norm asked for p={p}")
    w.validate_for_dim(f.grid.dim)
    if w.a == 0:
        return lp_norm(f, p)
    g = f.grid
    total = np.sum(np.abs(f.samples) ** p * weight_samples(g, w.a)) * g.h**g.dim
    return float(total ** (1.0 / p))


@dataclass(frozen=True)
class CubeFamily:
    """Axis-aligned cubes as (side, center) pairs with a quadrature budget."""

    cubes: tuple
    quad_points: int = 4096


def default_cube_family(half_width, dim, level=0):
    """Dyadic sides with centers on a half-side lattice including the origin.

    Centers sit at multiples of s/2 for each side s, so the geometry of the
    cubes relative to the origin is scale invariant; `level` refines the side
    list and the quadrature, which is how stability of the estimate is probed.
    Power-weight products depend only on the center-to-side ratio, so this
    family reaches the same sup at every scale.
    """
    sides = tuple(2.0**k for k in range(-3 - level, 4) if 2.0**k <= half_width)
    relative = [0.5 * j for j in range(-8, 9)]
    cubes = []
    for side in sides:
        offsets = [r * side for r in relative if abs(r * side) + side / 2.0 <= half_width]
        if dim == 1:
            cubes.extend((side, (float(c),)) for c in offsets)
        else:
            cubes.extend(
                (side, (float(cx), float(cy))) for cx in offsets for cy in offsets
            )
    return CubeFamily(tuple(cubes), quad_points=4096 * 2**level)


def _cube_midpoints(center, side, npts):
    lo = [c - side / 2.0 for c in center]
    return [l + (np.arange(npts) + 0.5) * (side / npts) for l in lo]


def ap_constant_estimate(w, family, dim=1):
    """Largest averaged Muckenhoupt product over the cube family.

    For p > 1 this is avg_Q(w) * avg_Q(w^(-1/(p-1)))^(p-1); for p = 1 it is
    avg_Q(w) / min_Q(w).  Cube averages use midpoint quadrature, which never
    evaluates the weight at the origin.
    """
    w.validate_for_dim(dim)
    if w.a == 0:
        return 1.0
    npts = family.quad_points if dim == 1 else max(64, int(math.isqrt(family.quad_points)))
    worst = 0.0
    for side, center in family.cubes:
        if len(center) != dim:
            raise ValueError("cube center dimension does not match")
        axes = _cube_midpoints(center, side, npts)
        if dim == 1:
            r = np.abs(axes[0])
        else:
            xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
            r = np.hypot(xx, yy)
        wvals = r**w.a
        if w.p > 1:
            product = wvals.mean() * (wvals ** (-1.0 / (w.p - 1))).mean() ** (w.p - 1)
        else:
            product = wvals.mean() / wvals.min()
        worst = max(worst, float(product))
    return worst


@dataclass(frozen=True)
class HerzParams:
    alpha: float
    p: float
    q: float

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("Herz exponents p, q must be >= 1")

    def validate_for_dim(self, dim):
        if not self.alpha > -dim / self.p:
            raise ValueError(f"alpha must exceed -d/p = {-dim / self.p}")


def herz_norm(f, params):
    """Ball term plus dyadic-annulus blocks weighted by 2^(l alpha q).

    Annuli 2^(l-1) < |x| <= 2^l are used up to the largest 2^l <= L.
    """
    if f.domain != "spatial":
        raise ValueError("herz_norm expects a spatial field")
    g = f.grid
    params.validate_for_dim(g.dim)
    r = g.x_radius()
    ell_max = int(np.floor(np.log2(g.half_width)))
    pieces = np.abs(f.samples) ** params.p * g.h**g.dim
    ball = float(np.sum(pieces[r <= 1.0]) ** (1.0 / params.p))
    blocks = 0.0
    for ell in range(1, ell_max + 1):
        mask = (r > 2.0 ** (ell - 1)) & (r <= 2.0**ell)
        block_norm = float(np.sum(pieces[mask]) ** (1.0 / params.p))
        blocks += 2.0 ** (ell * params.alpha * params.q) * block_norm**params.q
    return ball + blocks ** (1.0 / params.q)


@dataclass(eq=False)
class LPFamily:
    """Dyadic frequency partition built by telescoping one bump.

    base is 1 on |xi| <= 1 and 0 beyond |xi| >= 2; the annular piece is
    base(xi) - base(2 xi), so base + sum of its dyadic dilates telescopes to
    an exact partition of unity on |xi| <= 2^(ell_max - 1) and the annular
    symbol vanishes outside 1/2 <= |xi| <= 2.
    """

    base: Symbol
    annular: Symbol
    ell_max: int

    def level_symbol(self, ell):
        """Symbol of the ell-th block, xi -> annular(2^(-ell) xi)."""
        if not 1 <= ell <= self.ell_max:
            raise ValueError(f"level must lie in [1, {self.ell_max}]")
        return self.annular.dilated(2.0 ** (-ell))

    @property
    def valid_band(self):
        return 2.0 ** (self.ell_max - 1)


def build_lp_family(ell_max):
    """Construct the telescoping partition and verify it on a dense sample."""
    if ell_max < 1:
        raise ValueError("need at least one annular level")
    base = radial_symbol(BumpProfile(1.0, 2.0), 2.0, "cinf-compact", label="lp-base")
    annular = base - base.dilated(2.0)
    annular = Symbol(annular.fn, 2.0, "cinf-compact", label="lp-annular")
    family = LPFamily(base, annular, int(ell_max))
    r = np.linspace(0.0, family.valid_band, 4097)
    total = base.evaluate((r,)).real.copy()
    for ell in range(1, ell_max + 1):
        total += family.level_symbol(ell).evaluate((r,)).real
    residual = float(np.max(np.abs(total - 1.0)))
    if residual > 1e-12:
        raise RuntimeError(f"partition residual {residual} exceeds 1e-12")
    return family


def _band_check(f, family):
    spec = forward_transform(f)
    r = f.grid.xi_radius()
    outside = r > family.valid_band
    if outside.any():
        leak = float(np.max(np.abs(spec.samples[outside])))
        peak = float(np.max(np.abs(spec.samples)))
        if leak > 1e-9 * max(peak, 1e-300):
            raise ValueError(
                f"field has frequency content beyond the family band "
                f"{family.valid_band} (leak {leak:.2e})"
            )


def _block_fields(f, alpha, q, family):
    base_term = apply(family.base, f)
    blocks = [apply(family.level_symbol(ell), f) for ell in range(1, family.ell_max + 1)]
    weights = [2.0 ** (ell * alpha * q) for ell in range(1, family.ell_max + 1)]
    return base_term, blocks, weights


def besov_norm(f, alpha, p, q, family):
    """Base L^p term plus the weighted l^q sum of block L^p norms."""
    _band_check(f, family)
    base_term, blocks, weights = _block_fields(f, alpha, q, family)
    tail = sum(wt * lp_norm(blk, p) ** q for wt, blk in zip(weights, blocks))
    return lp_norm(base_term, p) + tail ** (1.0 / q)


def triebel_norm(f, alpha, p, q, family):
    """Base L^p term plus the L^p norm of the pointwise weighted l^q sum."""
    _band_check(f, family)
    base_term, blocks, weights = _block_fields(f, alpha, q, family)
    stack = sum(wt * np.abs(blk.samples) ** q for wt, blk in zip(weights, blocks))
    g = f.grid
    inner = float(np.sum(stack ** (p / q)) ** (1.0 / p) * g.h ** (g.dim / p))
    return lp_norm(base_term, p) + inner
