"""Sampled functions on centered grids and the discrete Fourier transform pair.

The transform convention is

    f_hat(xi) = integral f(x) exp(-i x.xi) dx,
    f(x)      = (2 pi)^(-d) integral f_hat(xi) exp(i x.xi) dxi,

realized as Riemann sums on a uniform grid over [-L, L)^d.  Spatial samples
sit at x_j = (j - M/2) h with h = 2L/M, frequency samples at
xi_k = (k - M/2) dxi with dxi = pi/L, so h * dxi = 2 pi / M and the two
lattices are exactly dual: the forward map is h^d times the centered DFT and
the round trip is exact to rounding.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform centered grid on [-L, L)^d with its dual frequency lattice.

    dim        : spatial dimension, 1 or 2
    size       : points per axis M, even
    half_width : spatial half-width L
    """

    dim: int
    size: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dim}")
        if self.size < 2 or self.size % 2 != 0:
            raise ValueError(f"points per axis must be even and >= 2, got {self.size}")
        if not self.half_width > 0:
            raise ValueError(f"half-width must be positive, got {self.half_width}")

    @property
    def h(self):
        """Spatial spacing 2L/M."""
        return 2.0 * self.half_width / self.size

    @property
    def dxi(self):
        """Frequency spacing pi/L."""
        return np.pi / self.half_width

    @property
    def xi_max(self):
        """Frequency half-width pi M / (2 L)."""
        return np.pi * self.size / (2.0 * self.half_width)

    @property
    def shape(self):
        return (self.size,) * self.dim

    def x_axis(self):
        return (np.arange(self.size) - self.size // 2) * self.h

    def xi_axis(self):
        return (np.arange(self.size) - self.size // 2) * self.dxi

    def x_mesh(self):
        """Per-axis spatial coordinate arrays, broadcastable to `shape`."""
        return tuple(np.meshgrid(*([self.x_axis()] * self.dim), indexing="ij", sparse=True))

    def xi_mesh(self):
        """Per-axis frequency coordinate arrays, broadcastable to `shape`."""
        return tuple(np.meshgrid(*([self.xi_axis()] * self.dim), indexing="ij", sparse=True))

    def x_radius(self):
        return np.sqrt(sum(np.broadcast_to(c * c, self.shape) for c in self.x_mesh()))

    def xi_radius(self):
        return np.sqrt(sum(np.broadcast_to(c * c, self.shape) for c in self.xi_mesh()))

    def covers_support(self, radius):
        """Whether a symbol supported in |xi| <= radius fits in the window."""
        return (not np.isfinite(radius)) or radius <= self.xi_max + 1e-12

    def suits_ball_symbols(self):
        """Window requirement for unit-ball symbols: xi_max >= 4."""
        return self.xi_max >= 4.0


@dataclass(frozen=True)
class Field:
    """Immutable complex samples of a function on one side of the transform.

    `domain` is "spatial" or "frequency"; samples have shape grid.shape and
    are indexed by lattice point in ascending coordinate order.
    """

    grid: GridSpec
    domain: str
    samples: np.ndarray

    def __post_init__(self):
        if self.domain not in ("spatial", "frequency"):
            raise ValueError(f"unknown domain tag {self.domain!r}")
        arr = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if arr.shape != self.grid.shape:
            raise ValueError(
                f"sample shape {arr.shape} does not match grid shape {self.grid.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @staticmethod
    def spatial(grid, samples):
        return Field(grid, "spatial", samples)

    @staticmethod
    def frequency(grid, samples):
        return Field(grid, "frequency", samples)

    def _check_compatible(self, other):
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")
        if self.domain != other.domain:
            raise ValueError("fields live on different domains")

    def __add__(self, other):
        self._check_compatible(other)
        return Field(self.grid, self.domain, self.samples + other.samples)

    def __sub__(self, other):
        self._check_compatible(other)
        return Field(self.grid, self.domain, self.samples - other.samples)

    def __mul__(self, scalar):
        return Field(self.grid, self.domain, self.samples * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, self.domain, -self.samples)


def forward_transform(f):
    """Riemann-sum Fourier transform of a spatial field.

    Equals h^d times the centered DFT of the samples, which approximates
    integral f(x) exp(-i x.xi) dx at every lattice frequency.
    """
    if f.domain != "spatial":
        raise ValueError("forward_transform expects a spatial field")
    g = f.grid
    spec = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.samples))) * g.h**g.dim
    return Field.frequency(g, spec)


def inverse_transform(big_f):
    """Inverse of forward_transform, carrying the (2 pi)^(-d) normalization."""
    if big_f.domain != "frequency":
        raise ValueError("inverse_transform expects a frequency field")
    g = big_f.grid
    # (2 pi)^(-d) dxi^d M^d collapses to h^(-d) because M h dxi = 2 pi.
    samp = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(big_f.samples))) / g.h**g.dim
    return Field.spatial(g, samp)


def _as_vector(xi0, dim):
    vec = np.atleast_1d(np.asarray(xi0, dtype=float))
    if vec.size == 1 and dim > 1:
        vec = np.concatenate([vec, np.zeros(dim - 1)])
    if vec.size != dim:
        raise ValueError(f"frequency vector has {vec.size} components, grid has {dim}")
    return vec


def modulate(f, xi0):
    """Multiply a spatial field by the plane wave exp(i x.xi0).

    When xi0 lies on the frequency lattice the spectrum shifts by a whole
    number of cells and the shift identity is exact; off-lattice xi0 is
    allowed but the shifted spectrum then straddles lattice cells.
    """
    if f.domain != "spatial":
        raise ValueError("modulate expects a spatial field")
    vec = _as_vector(xi0, f.grid.dim)
    phase = sum(c * v for c, v in zip(f.grid.x_mesh(), vec))
    return Field.spatial(f.grid, f.samples * np.exp(1j * phase))


def lattice_offset(grid, xi0):
    """Integer lattice cells corresponding to xi0, or None if off-lattice."""
    vec = _as_vector(xi0, grid.dim)
    cells = vec / grid.dxi
    rounded = np.rint(cells)
    if np.max(np.abs(cells - rounded)) > 1e-9:
        return None
    return tuple(int(k) for k in rounded)


def snap_to_lattice(grid, xi0):
    """Nearest frequency-lattice vector to xi0."""
    vec = _as_vector(xi0, grid.dim)
    return np.rint(vec / grid.dxi) * grid.dxi
