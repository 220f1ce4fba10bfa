"""Periodic-box discretization of R^N and the fractional Laplacian.

The box is ``[-L, L)^N`` sampled with ``n`` points per axis.  Transforms use
the unitary continuous convention

    u_hat(xi) = (2 pi)^(-N/2) * integral u(x) exp(-i x.xi) dx,

approximated on the grid by

    u_hat_k = (2 pi)^(-N/2) * h^N * sum_j u_j exp(-i xi_k . x_j).

With this normalization the discrete Parseval identity

    h^N * sum_j |u_j|^2 == dxi^N * sum_k |u_hat_k|^2,    dxi = pi / L,

holds exactly (up to round-off), so quadratures in physical space and in
frequency space agree.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

logger = logging.getLogger(__name__)

__all__ = [
    "Grid",
    "Field",
    "make_grid",
    "transform",
    "inverse_transform",
    "frac_laplacian",
    "apply_multiplier",
    "hs_norm_sq",
    "lp_norm",
    "quadrature",
    "inner",
    "translate",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-half_width, half_width)^dim``."""

    dim: int
    half_width: float
    points_per_dim: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = self.points_per_dim
        if int(n) != n or n < 16 or n % 2:
            raise ValueError(f"points_per_dim must be an even integer >= 16, got {n}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        object.__setattr__(self, "points_per_dim", int(n))
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_dim**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def dxi(self) -> float:
        """Frequency lattice step ``pi / L``."""
        return np.pi / self.half_width

    @cached_property
    def axis(self) -> np.ndarray:
        n, L = self.points_per_dim, self.half_width
        return -L + self.spacing * np.arange(n)

    @cached_property
    def freq_axis(self) -> np.ndarray:
        """Frequencies in FFT order; the Nyquist entry is ``-pi n / (2L)``."""
        n = self.points_per_dim
        k = np.fft.fftfreq(n, d=1.0 / n)
        return k * self.dxi

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords))

    @cached_property
    def _rfreqs(self) -> tuple[np.ndarray, ...]:
        # frequency components on the real-to-complex half spectrum
        full = self.freq_axis
        # last entry is the Nyquist index -n/2, kept at its lattice value
        half = full[: self.points_per_dim // 2 + 1]
        axes = [full] * (self.dim - 1) + [half]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def rfreq_norm(self) -> np.ndarray:
        """|xi| on the half spectrum used by the real transforms."""
        logger.debug(
            "grid %s: Nyquist index assigned |xi| = %.6g per axis",
            self, np.pi * self.points_per_dim / (2 * self.half_width),
        )
        return np.sqrt(sum(k**2 for k in self._rfreqs))

    def multiplier(self, power: float) -> np.ndarray:
        """|xi|^power on the half spectrum, power > 0."""
        if not power > 0:
            raise ValueError(f"multiplier power must be positive, got {power}")
        return self.rfreq_norm**power

    def descriptor(self) -> str:
        return f"{self.dim} {self.half_width!r} {self.points_per_dim}"


def make_grid(dim: int, half_width: float, points_per_dim: int) -> Grid:
    return Grid(dim, half_width, points_per_dim)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a :class:`Grid`.

    ``values`` has shape ``grid.shape``; ``values.ravel()`` is the
    lexicographic order used by the text file format.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        return cls(grid, func(*grid.coords))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other, self.grid))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other, self.grid))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other, self.grid))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _vals(obj, grid: Grid):
    if isinstance(obj, Field):
        if obj.grid != grid:
            raise ValueError("fields live on different grids")
        return obj.values
    return obj


def _arr(u) -> np.ndarray:
    return u.values if isinstance(u, Field) else np.asarray(u, dtype=float)


def _phase(grid: Grid) -> np.ndarray:
    # exp(-i xi_k * (-L)) per axis = (-1)^k, combined over axes
    n = grid.points_per_dim
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    out = np.ones(grid.shape)
    for ax in range(grid.dim):
        shape = [1] * grid.dim
        shape[ax] = n
        out = out * sign.reshape(shape)
    return out


def transform(u: Field) -> np.ndarray:
    """Full-spectrum samples of the unitary Fourier transform (FFT order)."""
    g = u.grid
    scale = g.cell_volume / (2 * np.pi) ** (g.dim / 2)
    return scale * _phase(g) * sfft.fftn(u.values)


def inverse_transform(u_hat: np.ndarray, grid: Grid) -> Field:
    scale = grid.cell_volume / (2 * np.pi) ** (grid.dim / 2)
    vals = sfft.ifftn(u_hat * _phase(grid) / scale)
    resid = np.max(np.abs(vals.imag)) if vals.size else 0.0
    if resid > 0:
        logger.debug("inverse_transform: discarded imaginary residue %.3e", resid)
    return Field(grid, vals.real)


def apply_multiplier(values: np.ndarray, grid: Grid, mult: np.ndarray) -> np.ndarray:
    """Apply a real, even Fourier multiplier given on the half spectrum.

    Real-to-complex transforms keep the output real by construction, so no
    imaginary residue has to be discarded.
    """
    return sfft.irfftn(sfft.rfftn(values) * mult, s=grid.shape)


def frac_laplacian(u: Field, s: float) -> Field:
    """(-Delta)^s u via the multiplier |xi|^(2s)."""
    if not 0 < s <= 1:
        raise ValueError(f"s must lie in (0, 1], got {s}")
    g = u.grid
    return Field(g, apply_multiplier(u.values, g, g.multiplier(2 * s)))


def quadrature(u) -> float:
    """Riemann sum h^N * sum(u)."""
    if isinstance(u, Field):
        return float(u.grid.cell_volume * np.sum(u.values))
    raise TypeError("quadrature expects a Field")


def inner(u: Field, v: Field) -> float:
    """L^2 pairing on the grid."""
    return float(u.grid.cell_volume * np.sum(u.values * _vals(v, u.grid)))


def lp_norm(u: Field, p: float) -> float:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float((u.grid.cell_volume * np.sum(np.abs(u.values) ** p)) ** (1.0 / p))


def hs_norm_sq(u: Field, s: float) -> float:
    """integral (|xi|^(2s) + 1) |u_hat|^2 dxi, evaluated in physical space."""
    lap = frac_laplacian(u, s).values
    return float(u.grid.cell_volume * np.sum(u.values * (lap + u.values)))


def translate(u: Field, shift) -> Field:
    """Exact spectral translate ``(shift * u)(x) = u(x - shift)`` on the torus."""
    g = u.grid
    shift = np.broadcast_to(np.asarray(shift, dtype=float), (g.dim,))
    phase = sum(k * a for k, a in zip(g._rfreqs, shift))
    return Field(g, sfft.irfftn(sfft.rfftn(u.values) * np.exp(-1j * phase), s=g.shape))
