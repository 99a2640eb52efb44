"""Cutoff/Neumann decompositions of resolvent symbols with certified tails.

Two executable directions:

* forward: split the resolvent symbol (z - b)^(-1) into a smooth inner part
  m1, a finite Neumann section m21, a truncated tail kernel, and the constant
  far field z^(-1)(1 - psi1 - psi2).  On the support of psi2 the base symbol
  b = (1 - |xi|^2)_+^delta is at most (2 r0)^delta, so the discarded terms
  are dominated by the geometric series with ratio q = |z|^(-1) (2 r0)^delta
  and the truncation error carries a closed-form certificate.

* reverse: rebuild b * psi2 from powers of 1 - z0 (z0 - b)^(-1), whose
  modulus on supp psi2 is at most q/(1 - q) < 1; the tail certificate uses
  the measured grid sup of that contraction.

Both Decompositions store the certified tail bound next to the measured
sup-norm reconstruction error so callers can assert one against the other.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Field, GridSpec, inverse_transform
from .multiplier import Kernel, apply, convolve, kernel_of, schwartz_seminorm
from .symbols import (
    Symbol,
    ball_power_profile,
    bochner_symbol,
    cutoff_pair,
    dist_to_unit_interval,
    resolvent_symbol,
)


def choose_r0(z, delta):
    """Quarter of the admissible sup min(|z/2|^(1/delta), 1): a point strictly
    inside the interval (0, min(|z/2|^(1/delta), 1)/2) that keeps the Neumann
    ratio q = |z|^(-1) (2 r0)^delta at most 2^(-delta-1)."""
    z = complex(z)
    if dist_to_unit_interval(z) <= 1e-12:
        raise ValueError(f"z={z} lies on (or hugs) the segment [0, 1]")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return min(abs(z / 2.0) ** (1.0 / delta), 1.0) / 4.0


def contraction_ratio(z, delta, r0):
    """q = |z|^(-1) (2 r0)^delta, the geometric ratio of the Neumann series."""
    return (2.0 * r0) ** delta / abs(complex(z))


@dataclass(frozen=True)
class NeumannPlan:
    """Complete parameter set of one decomposition run."""

    z: complex
    delta: float
    r0: float
    n0: int
    truncation: int
    alpha0: int
    beta0: int
    direction: str
    grid: GridSpec

    def __post_init__(self):
        if self.direction not in ("forward", "reverse"):
            raise ValueError(f"direction must be forward or reverse, got {self.direction}")
        sup = min(abs(complex(self.z) / 2.0) ** (1.0 / self.delta), 1.0) / 2.0
        if not 0 < self.r0 < sup:
            raise ValueError(f"r0={self.r0} outside the admissible interval (0, {sup})")
        if not self.n0 > self.alpha0 / self.delta:
            raise ValueError(f"n0={self.n0} must exceed alpha0/delta={self.alpha0 / self.delta}")
        if self.truncation < self.n0 + 1:
            raise ValueError("truncation must reach past n0")
        if not contraction_ratio(self.z, self.delta, self.r0) < 1:
            raise ValueError("contraction ratio is not below 1")

    @property
    def q(self):
        return contraction_ratio(self.z, self.delta, self.r0)


def _forward_tail_certificate(z, q, truncation):
    # |z|^(-1) sum_{n > T} q^n for the discarded forward terms.
    return q ** (truncation + 1) / (1.0 - q) / abs(complex(z))


def _reverse_tail_certificate(z, ratio, truncation):
    # |z| sum_{n > T} ratio^n with the (measured) contraction value.
    return abs(complex(z)) * ratio ** (truncation + 1) / (1.0 - ratio)


def make_plan(z, delta, direction="forward", grid=None, alpha0=None, beta0=0,
              r0=None, n0=None, truncation=None, tail_tol=1e-10):
    """Fill in a NeumannPlan with the default policies.

    r0 comes from choose_r0, n0 is the smallest integer above alpha0/delta,
    and the truncation length is the shortest one whose certified tail drops
    below tail_tol (using the a-priori ratio q/(1-q) for the reverse
    direction, which dominates the measured one).
    """
    if grid is None:
        grid = GridSpec(1, 2048, 40.0)
    if alpha0 is None:
        alpha0 = grid.dim + 1
    if r0 is None:
        r0 = choose_r0(z, delta)
    if n0 is None:
        n0 = int(np.floor(alpha0 / delta)) + 1
    q = contraction_ratio(z, delta, r0)
    if truncation is None:
        ratio = q if direction == "forward" else q / (1.0 - q)
        scale = 1.0 / abs(complex(z)) if direction == "forward" else abs(complex(z))
        truncation = n0 + 1
        while scale * ratio ** (truncation + 1) / (1.0 - ratio) > tail_tol:
            truncation += 1
            if truncation > 100000:
                raise RuntimeError("tail tolerance unreachable")
    return NeumannPlan(complex(z), float(delta), float(r0), int(n0), int(truncation),
                       int(alpha0), int(beta0), direction, grid)


@dataclass(eq=False)
class Decomposition:
    """Built components of one direction plus its error certificates.

    reconstruction_error is the grid sup of |built - target| and is bounded
    by certified_tail plus rounding whenever the construction is sound.
    """

    plan: NeumannPlan
    psi1: Symbol
    psi2: Symbol
    smooth_part: Symbol
    series_symbol: Symbol
    far_symbol: Symbol
    tail_kernel: Kernel
    target: Symbol
    certified_tail: float
    reconstruction_error: float
    contraction_sup: float = None


def _series_symbol_forward(z, delta, n0, psi2):
    """m21 = z^(-1) sum_{n=0}^{n0} z^(-n) b^n psi2 as one evaluation rule."""
    base = ball_power_profile(delta)

    def fn(coords):
        r = np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords))
        b = base(r)
        acc = np.zeros_like(b, dtype=np.complex128)
        term = np.ones_like(b, dtype=np.complex128) / z
        for _ in range(n0 + 1):
            acc = acc + term
            term = term * b / z
        return acc * psi2.evaluate(coords)

    return Symbol(fn, psi2.support_radius, "piecewise-smooth", (1.0,),
                  label=f"neumann-section(n0={n0})")


def forward_decomposition(plan):
    """Split the resolvent symbol; certify what truncation discards.

    Components: m1 = (z - b)^(-1) psi1, the Neumann section m21, the kernel
    of the terms n0 < n <= T, and the far field z^(-1)(1 - psi1 - psi2).
    The sum reproduces the resolvent symbol up to the certified tail.
    """
    if plan.direction != "forward":
        raise ValueError("plan direction must be forward")
    z, delta, grid = plan.z, plan.delta, plan.grid
    psi1, psi2 = cutoff_pair(plan.r0)
    target = resolvent_symbol(z, delta)

    res_profile = ball_power_profile(delta)
    smooth_part = Symbol(
        lambda c: psi1.evaluate(c) / (z - res_profile(
            np.sqrt(sum(np.asarray(ci, dtype=float) ** 2 for ci in c)))),
        psi1.support_radius,
        "cinf-compact",
        label="resolvent*cutoff1",
    )
    series_symbol = _series_symbol_forward(z, delta, plan.n0, psi2)
    far_symbol = Symbol(
        lambda c: (1.0 - psi1.evaluate(c) - psi2.evaluate(c)) / z,
        np.inf,
        "cinf-compact",
        label="far-field",
    )

    tail = np.zeros(grid.shape, dtype=np.complex128)
    for n in range(plan.n0 + 1, plan.truncation + 1):
        k_n = kernel_of(bochner_symbol(n * delta) * psi2, grid)
        tail = tail + k_n.samples * z ** (-(n + 1))
    tail_kernel = Kernel(grid, tail, provenance=None)

    certified = _forward_tail_certificate(z, plan.q, plan.truncation)
    built = (smooth_part.sample(grid) + series_symbol.sample(grid)
             + tail_kernel.symbol_samples() + far_symbol.sample(grid))
    err = float(np.max(np.abs(built - target.sample(grid))))
    return Decomposition(plan, psi1, psi2, smooth_part, series_symbol, far_symbol,
                         tail_kernel, target, certified, err)


def apply_forward(dec, f):
    """Operator form of the forward composite acting on a spatial field.

    Uses powers of the ball multiplier on psi2-localized data for the
    Neumann section, the tail kernel as a convolution, and the identity for
    the far field, mirroring how the decomposition is proved bounded.
    """
    plan = dec.plan
    z = plan.z
    b_delta = bochner_symbol(plan.delta)
    g = apply(dec.psi2, f)
    acc = (1.0 / z) * g
    current = g
    for n in range(1, plan.n0 + 1):
        current = apply(b_delta, current)
        acc = acc + z ** (-(n + 1)) * current
    out = apply(dec.smooth_part, f) + acc + convolve(dec.tail_kernel, f)
    far = (1.0 / z) * (f - apply(dec.psi1, f) - apply(dec.psi2, f))
    return out + far


def reverse_decomposition(plan):
    """Rebuild b * psi2 from resolvent powers; certify the discarded tail.

    The contraction w = 1 - z0 (z0 - b)^(-1) satisfies |w| <= q/(1-q) on
    supp psi2; the certificate uses the measured grid sup of |w| there.
    """
    if plan.direction != "reverse":
        raise ValueError("plan direction must be reverse")
    z0, delta, grid = plan.z, plan.delta, plan.grid
    psi1, psi2 = cutoff_pair(plan.r0)
    base = ball_power_profile(delta)

    def w_fn(coords):
        r = np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords))
        b = base(r)
        return -b / (z0 - b)

    w_symbol = Symbol(w_fn, np.inf, "piecewise-smooth", (1.0,), label="contraction")

    psi2_grid = psi2.sample(grid)
    on_support = np.abs(psi2_grid) > 0
    w_grid = w_symbol.sample(grid)
    contraction_sup = float(np.max(np.abs(w_grid[on_support]))) if on_support.any() else 0.0

    def section_fn(coords):
        w = w_symbol.evaluate(coords)
        acc = np.zeros_like(w)
        term = np.ones_like(w)
        for _ in range(plan.n0):
            term = term * w
            acc = acc + term
        return -z0 * acc * psi2.evaluate(coords)

    series_symbol = Symbol(section_fn, psi2.support_radius, "piecewise-smooth", (1.0,),
                           label=f"reverse-section(n0={plan.n0})")

    tail = np.zeros(grid.shape, dtype=np.complex128)
    w_pow = w_grid**plan.n0
    for n in range(plan.n0 + 1, plan.truncation + 1):
        w_pow = w_pow * w_grid
        term_samples = -z0 * w_pow * psi2_grid
        tail = tail + inverse_transform(Field.frequency(grid, term_samples)).samples
    tail_kernel = Kernel(grid, tail, provenance=None)

    target = bochner_symbol(delta) * psi2
    certified = _reverse_tail_certificate(z0, contraction_sup, plan.truncation)
    built = series_symbol.sample(grid) + tail_kernel.symbol_samples()
    err = float(np.max(np.abs(built - target.sample(grid))))
    return Decomposition(plan, psi1, psi2, None, series_symbol, None, tail_kernel,
                         target, certified, err, contraction_sup=contraction_sup)


def apply_reverse(dec, f):
    """Operator form of the reverse composite: resolvent powers plus tail."""
    plan = dec.plan
    z0 = plan.z
    res = resolvent_symbol(z0, plan.delta)
    g = apply(dec.psi2, f)
    acc = None
    current = g
    for _ in range(plan.n0):
        current = current - z0 * apply(res, current)
        acc = current if acc is None else acc + current
    out = (-z0) * acc + convolve(dec.tail_kernel, f)
    return out


def kernel_sequence(plan, n):
    """Kernel of (1 - |xi|^2)_+^(n delta) psi2 and its seminorm."""
    if n < 1:
        raise ValueError(f"series index must be >= 1, got {n}")
    _, psi2 = cutoff_pair(plan.r0)
    k_n = kernel_of(bochner_symbol(n * plan.delta) * psi2, plan.grid)
    return k_n, schwartz_seminorm(k_n, plan.alpha0, plan.beta0)


def seminorm_table(plan, n_values):
    """Seminorm of the kernel sequence at each requested index."""
    return [(int(n), kernel_sequence(plan, n)[1]) for n in n_values]


def tail_term_seminorms(plan):
    """Per-term kernel seminorms for the truncated range n0 < n <= T.

    Forward terms are the ball-power kernels; reverse terms use powers of
    the contraction symbol.
    """
    grid = plan.grid
    _, psi2 = cutoff_pair(plan.r0)
    out = []
    if plan.direction == "forward":
        for n in range(plan.n0 + 1, plan.truncation + 1):
            k_n = kernel_of(bochner_symbol(n * plan.delta) * psi2, grid)
            out.append((n, schwartz_seminorm(k_n, plan.alpha0, plan.beta0)))
        return out
    base = ball_power_profile(plan.delta)
    psi2_grid = psi2.sample(grid)
    r = grid.xi_radius()
    w_grid = -base(r) / (plan.z - base(r))
    w_pow = w_grid**plan.n0
    for n in range(plan.n0 + 1, plan.truncation + 1):
        w_pow = w_pow * w_grid
        term = inverse_transform(Field.frequency(grid, w_pow * psi2_grid))
        k_n = Kernel(grid, term.samples)
        out.append((n, schwartz_seminorm(k_n, plan.alpha0, plan.beta0)))
    return out


def decay_slope(table):
    """Least-squares slope of log seminorm against the series index."""
    ns = np.array([row[0] for row in table], dtype=float)
    vals = np.array([row[1] for row in table], dtype=float)
    return float(np.polyfit(ns, np.log(vals), 1)[0])


def tail_kernel_bound(plan):
    """Upper bound sum_{n > T} n^alpha0 (2 r0)^(n delta) |z|^(-n).

    Summed term by term; once the term ratio q ((n+1)/n)^alpha0 drops below
    one it only decreases, so the geometric remainder estimate it gives is a
    true bound and summation stops when that remainder is below 1e-15.
    """
    q = plan.q
    if not q < 1:
        raise ValueError("contraction ratio must be below 1")
    total = 0.0
    n = plan.truncation + 1
    while True:
        term = n**plan.alpha0 * q**n
        total += term
        ratio = q * ((n + 1.0) / n) ** plan.alpha0
        if ratio < 1.0 and term * ratio / (1.0 - ratio) < 1e-15:
            return total
        n += 1
        if n > plan.truncation + 100000:
            raise RuntimeError("tail bound summation failed to converge")
