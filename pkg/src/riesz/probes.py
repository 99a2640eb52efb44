"""Approximate-eigenfunction probes and resolvent-norm lower bounds.

A probe at frequency xi0 and scale N is the spatial field whose transform is
phi0(N(xi - xi0)): a bump of radius rho/N around xi0.  The defect ratio

    R = ||(lambda I - B) f_{N,xi0}|| / ||f_{N,xi0}||

measured across an N sweep exhibits lambda in [0, 1] as approximate point
spectrum; the same probes pushed through resolvent symbols give certified
lower bounds on resolvent norms over the complex plane.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Field, GridSpec, inverse_transform, snap_to_lattice
from .multiplier import apply
from .norms import WeightSpec, _square_mass, lp_norm, weighted_lp_norm
from .symbols import (
    BumpProfile,
    bochner_symbol,
    bump_phi0,
    dist_to_unit_interval,
    radial_symbol,
    resolvent_symbol,
    scalar_symbol,
)


def lambda_to_xi0(lam, delta):
    """First-axis frequency whose symbol value is lam.

    For lam in (0, 1] this inverts (1 - x^2)^delta = lam on the first axis;
    lam = 0 sits strictly outside the closed unit ball (x = 2) where the
    ball multiplier annihilates.  Off-spectrum controls extend the map with
    the nearest attainable point: x = 0 for lam > 1, x = 2 for lam < 0.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if lam > 1.0:
        return 0.0
    if lam <= 0.0:
        return 2.0
    return float(np.sqrt(max(1.0 - lam ** (1.0 / delta), 0.0)))


def probe_grid(n_max, rho, dim=1, spread_factor=16.0, cells_per_bump=8.0):
    """Grid sized for an N sweep: the spatial window holds spread_factor
    periods of the widest probe and the frequency spacing puts at least
    cells_per_bump cells across the narrowest bump radius rho/n_max."""
    half_width = max(
        spread_factor * n_max * max(1.0, rho) / rho,
        cells_per_bump * np.pi * n_max / rho,
    )
    size = 2 ** int(np.ceil(np.log2(8.0 * half_width / np.pi)))
    return GridSpec(dim, size, half_width)


def probe_field(xi0, n_scale, grid, rho=0.5, profile=None):
    """Spatial probe whose transform is profile(n_scale * (xi - xi0)).

    xi0 must sit on the frequency lattice (so modulation identities are
    exact) and the bump must span at least 4 frequency cells.
    """
    if n_scale < 1:
        raise ValueError(f"scale must be >= 1, got {n_scale}")
    snapped = snap_to_lattice(grid, xi0)
    request = np.atleast_1d(np.asarray(xi0, dtype=float))
    if np.max(np.abs(snapped[: request.size] - request)) > 1e-9 * grid.dxi:
        raise ValueError(
            f"xi0={xi0} is off the frequency lattice; nearest is {snapped}"
        )
    if rho / n_scale < 4.0 * grid.dxi - 1e-12:
        need = 4.0 * np.pi * n_scale / rho
        raise ValueError(
            f"bump radius {rho / n_scale:.3g} spans fewer than 4 cells "
            f"(dxi={grid.dxi:.3g}); use a grid with half-width >= {need:.4g}"
        )
    if profile is None:
        profile = bump_phi0(rho)
    spec = profile.dilated(n_scale).shifted(snapped)
    return inverse_transform(Field.frequency(grid, spec.sample(grid)))


@dataclass(frozen=True)
class ProbeSpec:
    """One approximate-eigenfunction experiment.

    lam is the requested symbol level; probes report the level actually
    achieved after snapping xi0 to the lattice.  weight_a switches the norm
    to the power-weighted one.
    """

    lam: float
    p: float
    delta: float
    rho: float = 0.5
    n_values: tuple = (8, 16, 32, 64, 128)
    weight_a: float = None

    def __post_init__(self):
        if not 1 <= self.p < np.inf:
            raise ValueError(f"p must lie in [1, inf), got {self.p}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.rho > 0:
            raise ValueError(f"bump radius must be positive, got {self.rho}")

    def localizer_radius(self):
        xi0 = lambda_to_xi0(self.lam, self.delta)
        return (1.0 - abs(xi0)) / 2.0

    def min_scale(self):
        """Smallest N keeping the bump inside the localizer plateau."""
        if not 0 < self.lam <= 1:
            return 1
        return int(np.ceil(self.rho / self.localizer_radius()))

    def default_grid(self, dim=1):
        return probe_grid(max(self.n_values), self.rho, dim=dim)

    def _norm(self, f):
        if self.weight_a is None:
            return lp_norm(f, self.p)
        return weighted_lp_norm(f, self.p, WeightSpec(self.weight_a, self.p))


def _achieved_level(spec, grid):
    """Snapped xi0 and the symbol level it actually attains."""
    xi0 = snap_to_lattice(grid, lambda_to_xi0(spec.lam, spec.delta))
    if 0 < spec.lam <= 1:
        level = float(np.clip(1.0 - float(np.dot(xi0, xi0)), 0.0, None) ** spec.delta)
    else:
        # Off-spectrum controls measure distance to the requested level.
        level = float(spec.lam)
    return xi0, level


def probe_ratio(spec, n_scale, grid=None, profile=None):
    """Defect ratio ||(lambda I - B) f_{N,xi0}|| / ||f_{N,xi0}||."""
    if grid is None:
        grid = spec.default_grid()
    if 0 < spec.lam <= 1 and spec.rho / n_scale > spec.localizer_radius() + 1e-12:
        raise ValueError(
            f"N={n_scale} puts the bump outside the localizer plateau; "
            f"need N >= {spec.min_scale()}"
        )
    xi0, level = _achieved_level(spec, grid)
    f = probe_field(xi0, n_scale, grid, rho=spec.rho, profile=profile)
    defect = level * f - apply(bochner_symbol(spec.delta), f)
    return spec._norm(defect) / spec._norm(f)


def localized_defect_ratio(spec, n_scale, grid=None):
    """Same ratio through the localized symbol (lambda - b) psi(. - xi0).

    psi is 1 on the plateau containing the probe support, so this equals the
    direct measurement and cross-validates the construction.
    """
    if grid is None:
        grid = spec.default_grid()
    if not 0 < spec.lam <= 1:
        raise ValueError("localized form needs lam in (0, 1]")
    xi0, level = _achieved_level(spec, grid)
    plateau = (1.0 - abs(xi0[0])) / 2.0
    localizer = radial_symbol(
        BumpProfile(plateau, 2.0 * plateau), 2.0 * plateau, "cinf-compact",
        label="localizer",
    ).shifted(xi0)
    m_loc = (scalar_symbol(level) - bochner_symbol(spec.delta)) * localizer
    f = probe_field(xi0, n_scale, grid, rho=spec.rho)
    return spec._norm(apply(m_loc, f)) / spec._norm(f)


def decay_rows(spec, grid=None, profile=None):
    """Probe table across the N sweep with the achieved level recorded."""
    if grid is None:
        grid = spec.default_grid()
    rows = []
    for n in spec.n_values:
        xi0, level = _achieved_level(spec, grid)
        rows.append(
            {
                "lambda": spec.lam,
                "lambda_achieved": level,
                "xi0": float(xi0[0]),
                "p": spec.p,
                "delta": spec.delta,
                "n": int(n),
                "ratio": probe_ratio(spec, n, grid, profile=profile),
            }
        )
    return rows


@dataclass(frozen=True)
class DecayCurve:
    rows: tuple
    slope: float


def decay_curve(spec, grid=None, profile=None):
    """Rows plus the least-squares slope of log ratio against log N."""
    if len(spec.n_values) < 4:
        raise ValueError("slope fit needs at least 4 sweep points")
    rows = decay_rows(spec, grid, profile=profile)
    ns = np.array([row["n"] for row in rows], dtype=float)
    ratios = np.array([row["ratio"] for row in rows], dtype=float)
    if np.any(ratios <= 0):
        slope = -np.inf
    else:
        slope = float(np.polyfit(np.log(ns), np.log(ratios), 1)[0])
    return DecayCurve(tuple(rows), slope)


def halving_factors(rows):
    """Successive ratios R(2N)/R(N) along a dyadic sweep."""
    ratios = [row["ratio"] for row in rows]
    return [b / a for a, b in zip(ratios, ratios[1:]) if a > 0]


_EPS0_CACHE = {}


def half_peak_radius(grid, rho):
    """Largest radius where the baseband probe keeps half its peak height."""
    key = (grid, rho)
    hit = _EPS0_CACHE.get(key)
    if hit is None:
        f = probe_field(0.0, 1, grid, rho=rho)
        if grid.dim == 1:
            profile = np.abs(f.samples[grid.size // 2 :])
            axis = grid.x_axis()[grid.size // 2 :]
        else:
            profile = np.abs(f.samples[grid.size // 2 :, grid.size // 2])
            axis = grid.x_axis()[grid.size // 2 :]
        half = profile[0] / 2.0
        below = np.nonzero(profile < half)[0]
        hit = float(axis[below[0] - 1]) if below.size and below[0] > 0 else float(axis[-1])
        _EPS0_CACHE[key] = hit
    return hit


def weighted_probe_report(spec, n_scale, grid=None):
    """Weighted defect ratio plus the bounding quantities of the estimate.

    Reports N^(-p/2), the tail term N^(-(d+1/2)p) w([-N, N]^d), the lower
    envelope N^(-dp) w([-eps0 N, eps0 N]^d), and the constant the measured
    ratio^p needs against term_half + term_tail / ||f||^p.
    """
    if spec.weight_a is None:
        raise ValueError("weighted probe needs a weight exponent")
    if grid is None:
        grid = spec.default_grid()
    d = grid.dim
    p = spec.p
    WeightSpec(spec.weight_a, p).validate_for_dim(d)
    xi0, level = _achieved_level(spec, grid)
    f = probe_field(xi0, n_scale, grid, rho=spec.rho)
    defect = level * f - apply(bochner_symbol(spec.delta), f)
    f_norm = spec._norm(f)
    ratio = spec._norm(defect) / f_norm
    n = float(n_scale)
    eps0 = half_peak_radius(grid, spec.rho)
    term_half = n ** (-p / 2.0)
    term_tail = n ** (-(d + 0.5) * p) * _square_mass(spec.weight_a, n, d)
    lower_env = n ** (-d * p) * _square_mass(spec.weight_a, eps0 * n, d)
    envelope = ratio**p / (term_half + term_tail / f_norm**p)
    return {
        "n": int(n_scale),
        "ratio": ratio,
        "term_half": term_half,
        "term_tail": term_tail,
        "lower_envelope": lower_env,
        "probe_norm_p": f_norm**p,
        "constant_envelope": envelope,
    }


def resolvent_norm_oracle(z, delta, points=200001, xi_hi=2.0):
    """Dense radial scan of sup 1/|z - b(xi)|, the exact bound at p = 2."""
    r = np.linspace(0.0, xi_hi, points)
    b = np.clip(1.0 - r**2, 0.0, None) ** delta
    return float(np.max(1.0 / np.abs(complex(z) - b)))


def resolvent_norm_grid_sup(z, delta, grid):
    """Sup of the resolvent symbol over the grid frequency lattice."""
    return float(np.max(np.abs(resolvent_symbol(z, delta).sample(grid))))


def probe_lower_bound(z, delta, p, grid, probes):
    """Best resolvent-norm lower bound from a family of probe fields."""
    res = resolvent_symbol(z, delta)
    best = 0.0
    for f, f_norm in probes:
        value = lp_norm(apply(res, f), p) / f_norm
        best = max(best, value)
    return best


def spectrum_map(z_values, p, delta, grid=None, n_values=(32, 64, 128, 256),
                 lam_extra=(0.25, 0.75), rho=0.5, pole_margin=1e-3):
    """Resolvent-norm lower bounds over a set of complex points.

    Points closer than pole_margin to [0, 1] are marked as poles and skipped.
    Probe levels follow each point's real part (clamped to [0, 1]) plus the
    fixed extras; the p = 2 column carries the dense symbol-scan oracle.
    """
    if grid is None:
        grid = probe_grid(max(n_values), rho)
    probe_cache = {}

    def probes_for(lam):
        xi0 = snap_to_lattice(grid, lambda_to_xi0(lam, delta))
        key = tuple(np.round(xi0 / grid.dxi).astype(int))
        if key not in probe_cache:
            fields = []
            for n in n_values:
                f = probe_field(xi0, n, grid, rho=rho)
                fields.append((f, lp_norm(f, p)))
            probe_cache[key] = fields
        return probe_cache[key]

    rows = []
    for z in z_values:
        z = complex(z)
        row = {"re_z": z.real, "im_z": z.imag}
        if dist_to_unit_interval(z) < pole_margin:
            row.update(pole=True, lower_bound=np.inf, oracle_p2=np.inf)
        else:
            lams = {min(max(z.real, 0.0), 1.0), *lam_extra}
            probes = [pair for lam in sorted(lams) for pair in probes_for(lam)]
            row.update(
                pole=False,
                lower_bound=probe_lower_bound(z, delta, p, grid, probes),
                oracle_p2=resolvent_norm_oracle(z, delta),
            )
        rows.append(row)
    return rows
