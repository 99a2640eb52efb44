"""Frequency-side symbols: ball multipliers, resolvents, cutoffs, bumps.

A Symbol is an evaluation rule on frequency vectors together with a declared
support radius and a smoothness annotation.  Rules act on tuples of per-axis
coordinate arrays so one symbol serves any grid dimension; sampled values are
cached per GridSpec because sweeps reuse the same symbol on one grid many
times.
"""

import math
from dataclasses import dataclass, field

import numpy as np

_SMOOTHNESS_RANK = {"cinf-compact": 2, "piecewise-smooth": 1, "bounded": 0}


def _radius2(coords):
    return sum(np.asarray(c, dtype=float) ** 2 for c in coords)


def _flat_exp(t):
    """exp(-1/t) for t > 0, identically 0 for t <= 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(s):
    """Monotone C-infinity step: 0 at s <= 0, 1 at s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    rise = _flat_exp(s)
    fall = _flat_exp(1.0 - s)
    return rise / (rise + fall)


@dataclass(frozen=True)
class BumpProfile:
    """Radial profile equal to 1 on |t| <= inner and 0 on |t| >= outer.

    The transition uses the standard exp(-1/t) smoothstep, so the profile is
    infinitely differentiable in exact arithmetic and takes values in [0, 1].
    """

    inner: float
    outer: float

    def __post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise ValueError(f"need 0 <= inner < outer, got {self.inner}, {self.outer}")

    def __call__(self, t):
        r = np.abs(np.asarray(t, dtype=float))
        width = self.outer - self.inner
        return np.where(
            r <= self.inner,
            1.0,
            np.where(r >= self.outer, 0.0, smoothstep((self.outer - r) / width)),
        )


@dataclass(eq=False)
class Symbol:
    """Complex-valued frequency symbol with declared support and smoothness.

    fn              : rule mapping a tuple of coordinate arrays to values
    support_radius  : values are identically 0 beyond this radius (inf allowed)
    smoothness      : "cinf-compact" | "piecewise-smooth" | "bounded"
    nonsmooth_radii : radii of origin-centered spheres where derivatives may
                      fail to exist (finite-difference screens avoid them)
    """

    fn: object
    support_radius: float = np.inf
    smoothness: str = "bounded"
    nonsmooth_radii: tuple = ()
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.smoothness not in _SMOOTHNESS_RANK:
            raise ValueError(f"unknown smoothness class {self.smoothness!r}")

    def evaluate(self, coords):
        """Evaluate on coordinate arrays, enforcing the support radius exactly."""
        vals = np.asarray(self.fn(coords), dtype=np.complex128)
        if np.isfinite(self.support_radius):
            vals = np.where(_radius2(coords) <= self.support_radius**2, vals, 0.0)
        return vals

    def sample(self, grid):
        """Values on the grid frequency lattice, cached per GridSpec."""
        hit = self._cache.get(grid)
        if hit is None:
            hit = np.broadcast_to(self.evaluate(grid.xi_mesh()), grid.shape).copy()
            hit.setflags(write=False)
            self._cache[grid] = hit
        return hit

    def _combine_smoothness(self, other):
        rank = min(_SMOOTHNESS_RANK[self.smoothness], _SMOOTHNESS_RANK[other.smoothness])
        return next(k for k, v in _SMOOTHNESS_RANK.items() if v == rank)

    def __mul__(self, other):
        if np.isscalar(other):
            return Symbol(
                lambda c, s=self, a=other: a * s.evaluate(c),
                self.support_radius,
                self.smoothness,
                self.nonsmooth_radii,
                label=f"({other})*{self.label}",
            )
        return Symbol(
            lambda c, s=self, o=other: s.evaluate(c) * o.evaluate(c),
            min(self.support_radius, other.support_radius),
            self._combine_smoothness(other),
            tuple(sorted(set(self.nonsmooth_radii) | set(other.nonsmooth_radii))),
            label=f"{self.label}*{other.label}",
        )

    __rmul__ = __mul__

    def __add__(self, other):
        return Symbol(
            lambda c, s=self, o=other: s.evaluate(c) + o.evaluate(c),
            max(self.support_radius, other.support_radius),
            self._combine_smoothness(other),
            tuple(sorted(set(self.nonsmooth_radii) | set(other.nonsmooth_radii))),
            label=f"{self.label}+{other.label}",
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def shifted(self, xi0):
        """Symbol xi -> value(xi - xi0); xi0 is a scalar (first axis) or vector."""
        vec = np.atleast_1d(np.asarray(xi0, dtype=float))
        support = self.support_radius
        if np.isfinite(support):
            support = support + float(np.linalg.norm(vec))
        def fn(coords, s=self, v=vec):
            comps = list(v) + [0.0] * (len(coords) - len(v))
            return s.evaluate(tuple(c - w for c, w in zip(coords, comps)))
        # Off-center spheres are not tracked; derivative screens apply to the
        # unshifted symbol.
        return Symbol(fn, support, self.smoothness, (), label=f"{self.label}@{xi0}")

    def dilated(self, factor):
        """Symbol xi -> value(factor * xi)."""
        if not factor > 0:
            raise ValueError("dilation factor must be positive")
        return Symbol(
            lambda c, s=self, a=factor: s.evaluate(tuple(a * ci for ci in c)),
            self.support_radius / factor,
            self.smoothness,
            tuple(r / factor for r in self.nonsmooth_radii),
            label=f"{self.label}(x{factor})",
        )


def scalar_symbol(value):
    """Constant symbol."""
    def fn(coords):
        return np.full(np.broadcast(*coords).shape, complex(value))
    return Symbol(fn, np.inf, "cinf-compact", label=f"scalar({value})")


def radial_symbol(profile, support_radius, smoothness, nonsmooth_radii=(), label=""):
    """Symbol depending on |xi| only."""
    return Symbol(
        lambda c: profile(np.sqrt(_radius2(c))),
        support_radius,
        smoothness,
        nonsmooth_radii,
        label=label,
    )


def ball_power_profile(delta):
    """Radial rule r -> (1 - r^2)_+^delta."""
    def profile(r):
        base = np.clip(1.0 - np.asarray(r, dtype=float) ** 2, 0.0, None)
        return base**delta
    return profile


def bochner_symbol(delta):
    """Ball multiplier symbol (1 - |xi|^2)_+^delta."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return radial_symbol(
        ball_power_profile(delta),
        support_radius=1.0,
        smoothness="piecewise-smooth",
        nonsmooth_radii=(1.0,),
        label=f"bochner(delta={delta})",
    )


def dist_to_unit_interval(z):
    """Distance from a complex number to the segment [0, 1]."""
    z = complex(z)
    dx = max(0.0, -z.real, z.real - 1.0)
    return math.hypot(dx, z.imag)


def resolvent_symbol(z, delta):
    """Symbol (z - (1 - |xi|^2)_+^delta)^(-1); z must stay off [0, 1].

    Its modulus is bounded by 1/dist(z, [0, 1]) because the base symbol's
    range is exactly [0, 1].
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    z = complex(z)
    if dist_to_unit_interval(z) <= 1e-12:
        raise ValueError(f"z={z} is within 1e-12 of the segment [0, 1] (pole)")
    base = ball_power_profile(delta)
    return radial_symbol(
        lambda r: 1.0 / (z - base(r)),
        support_radius=np.inf,
        smoothness="bounded",
        nonsmooth_radii=(1.0,),
        label=f"resolvent(z={z}, delta={delta})",
    )


def cutoff_pair(r0):
    """Inner/outer cutoffs (psi1, psi2) around the unit sphere.

    psi1 = 1 on |xi| <= 1 - r0 and 0 on |xi| >= 1 - r0/2; psi2 = 1 - psi1 on
    |xi| <= 1 + r0/2 and 0 beyond |xi| > 1 + r0, so psi1 + psi2 = 1 on the
    whole ball |xi| <= 1 + r0/2 and psi2 is supported on the annulus
    1 - r0 <= |xi| <= 1 + r0.
    """
    if not 0 < r0 < 0.5:
        raise ValueError(f"r0 must lie in (0, 1/2), got {r0}")
    inner = BumpProfile(1.0 - r0, 1.0 - r0 / 2.0)
    outer = BumpProfile(1.0 + r0 / 2.0, 1.0 + r0)
    psi1 = radial_symbol(inner, 1.0 - r0 / 2.0, "cinf-compact", label=f"cutoff1(r0={r0})")
    psi2 = radial_symbol(
        lambda r: (1.0 - inner(r)) * outer(r),
        1.0 + r0,
        "cinf-compact",
        label=f"cutoff2(r0={r0})",
    )
    return psi1, psi2


_UNIT_BUMP_MASS = {}


def _unit_bump_mass(dim):
    """Integral of exp(-1/(1-|s|^2)) over the unit ball in R^dim."""
    mass = _UNIT_BUMP_MASS.get(dim)
    if mass is None:
        s = np.linspace(0.0, 1.0, 2**20 + 1)
        vals = _flat_exp(1.0 - s**2)
        if dim == 1:
            mass = 2.0 * np.trapezoid(vals, s)
        elif dim == 2:
            mass = 2.0 * np.pi * np.trapezoid(vals * s, s)
        else:
            raise ValueError(f"unsupported dimension {dim}")
        _UNIT_BUMP_MASS[dim] = mass
    return mass


def bump_phi0(rho):
    """Smooth radial bump supported in |xi| <= rho, positive inside.

    Scaled so that the spatial side takes the value 1 at the origin, i.e.
    (2 pi)^(-d) integral = 1 in every supported dimension.
    """
    if not rho > 0:
        raise ValueError(f"radius must be positive, got {rho}")

    def fn(coords):
        dim = len(coords)
        scale = (2.0 * np.pi) ** dim / (rho**dim * _unit_bump_mass(dim))
        r2 = _radius2(coords) / rho**2
        return scale * _flat_exp(1.0 - r2)

    return Symbol(fn, rho, "cinf-compact", label=f"bump(rho={rho})")


def critical_delta(p, d):
    """Reference exponent (d |1/p - 1/2| - 1/2)_+ for the L^p window."""
    if not 1 <= p < np.inf:
        raise ValueError(f"p must lie in [1, inf), got {p}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return max(d * abs(1.0 / p - 0.5) - 0.5, 0.0)


@dataclass
class MikhlinReport:
    """Finite-difference screen of |xi|^k |grad^k m(xi)| over a refinement ladder.

    sups[level][k] holds the masked sup at each refinement level; growth[k]
    compares the finest level against the coarsest, and a symbol is flagged
    "unbounded-suspect" at order k when that growth exceeds the threshold.
    """

    kmax: int
    dim: int
    xi_max: float
    points: list
    sups: list
    growth: list
    flagged: list
    threshold: float

    @property
    def any_flagged(self):
        return any(self.flagged)


def _directional_gradients(tensors, spacing):
    out = []
    for t in tensors:
        if t.ndim == 1:
            out.append(np.gradient(t, spacing))
        else:
            for axis in range(t.ndim):
                out.append(np.gradient(t, spacing, axis=axis))
    return out


def mikhlin_check(m, kmax, dim=1, xi_max=4.0, base_points=256, refinements=None,
                  growth_threshold=10.0):
    """Numerical screen for boundedness of |xi|^k |grad^k m|, k <= kmax.

    Derivatives are central finite differences on [-xi_max, xi_max]^dim,
    evaluated on a ladder of dyadic refinements.  Points within max(2, k)
    cells of a declared non-smooth sphere are excluded so stencils never
    straddle it.  This is a report-only screen, not a proof.
    """
    if not 0 <= kmax <= 3:
        raise ValueError(f"kmax must lie in [0, 3], got {kmax}")
    if refinements is None:
        refinements = 8 if dim == 1 else 3
    points, sups = [], []
    for level in range(refinements + 1):
        n = base_points * 2**level + 1
        axis = np.linspace(-xi_max, xi_max, n)
        spacing = axis[1] - axis[0]
        coords = tuple(np.meshgrid(*([axis] * dim), indexing="ij", sparse=False))
        vals = m.evaluate(coords)
        radius = np.sqrt(_radius2(coords))
        frame = np.zeros(vals.shape, dtype=bool)
        level_sups = []
        tensors = [vals]
        for k in range(kmax + 1):
            if k > 0:
                tensors = _directional_gradients(tensors, spacing)
                sl = [slice(None)] * dim
                for axis_i in range(dim):
                    for edge in (slice(0, k), slice(-k, None)):
                        sl[axis_i] = edge
                        frame[tuple(sl)] = True
                        sl[axis_i] = slice(None)
            band = max(2, k) * spacing
            keep = ~frame
            for r_ns in m.nonsmooth_radii:
                keep &= np.abs(radius - r_ns) > band
            mag = np.sqrt(sum(np.abs(t) ** 2 for t in tensors))
            weighted = radius**k * mag
            level_sups.append(float(weighted[keep].max()) if keep.any() else 0.0)
        points.append(n)
        sups.append(level_sups)
    growth, flagged = [], []
    for k in range(kmax + 1):
        first, last = sups[0][k], sups[-1][k]
        if first < 1e-300 and last < 1e-300:
            g = 1.0
        elif first < 1e-300:
            g = np.inf
        else:
            g = last / first
        growth.append(g)
        flagged.append(bool(not np.isfinite(g) or g > growth_threshold))
    return MikhlinReport(kmax, dim, xi_max, points, sups, growth, flagged,
                         growth_threshold)
