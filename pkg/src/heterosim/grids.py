"""Uniform 1D grids, Gaussian kernels and discrete nonlocal convolution operators.

A nonlocal term ``int J(x - y) u(y) dy`` on a bounded interval is ill-posed
until one says how ``u`` extends beyond the domain.  Three extensions are
supported:

* ``OPEN``       -- zero extension: mass leaving the domain is lost,
* ``PERIODIC``   -- periodic wraparound of the node values,
* ``REFLECTING`` -- mirror about both endpoints, then periodic.

The integral is discretized once with the trapezoidal rule into a dense
matrix that is reused on every application; building the operator is cheap
relative to the number of times it is applied during time stepping.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "BoundaryCondition",
    "DiscreteConvolution",
    "GaussianKernel",
    "Grid1D",
    "ResolutionWarning",
    "build_convolution",
    "gaussian_eval",
]

# Gaussian tail mass beyond 8 sigma is < 1e-15; rows stay faithful either side.
TRUNCATION_RADIUS_SIGMAS = 8.0


class ResolutionWarning(UserWarning):
    """The kernel is too narrow for the grid spacing to resolve it well."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` nodes including both endpoints of ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max must exceed x_min, got [{self.x_min}, {self.x_max}]")
        if self.n < 3:
            raise ValueError(f"need at least 3 nodes, got n={self.n}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def nodes(self) -> np.ndarray:
        # linspace pins both endpoints exactly
        return np.linspace(self.x_min, self.x_max, self.n)


@dataclass(frozen=True)
class GaussianKernel:
    """Zero-mean Gaussian density with standard deviation ``sigma``."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def __call__(self, x):
        return gaussian_eval(x, self.sigma)


def gaussian_eval(x, sigma: float):
    """Evaluate the zero-mean Gaussian density with standard deviation ``sigma``.

    Even in ``x`` and integrates to one over the real line.  Accepts scalars
    or arrays.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=float)
    out = np.exp(-(x * x) / (2.0 * sigma * sigma)) / math.sqrt(2.0 * math.pi * sigma * sigma)
    return out if out.ndim else float(out)


class BoundaryCondition(Enum):
    """How a field is extended beyond the domain for nonlocal operators."""

    OPEN = "open"
    PERIODIC = "periodic"
    REFLECTING = "reflecting"


@dataclass(frozen=True)
class DiscreteConvolution:
    """Dense quadrature matrix realizing a nonlocal kernel under one boundary rule.

    Immutable after construction and safe to share between workers; ``apply``
    is a pure matrix-vector product.
    """

    matrix: np.ndarray
    grid: Grid1D
    bc: BoundaryCondition
    row_normalized: bool

    def apply(self, field: np.ndarray) -> np.ndarray:
        """Apply the operator to a field sampled on the grid nodes."""
        field = np.asarray(field, dtype=float)
        if field.shape[0] != self.grid.n:
            raise ValueError(
                f"field length {field.shape[0]} does not match grid with n={self.grid.n}"
            )
        return self.matrix @ field

    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)


def build_convolution(
    grid: Grid1D,
    kernel: GaussianKernel,
    bc: BoundaryCondition,
    normalize: bool | None = None,
) -> DiscreteConvolution:
    """Build the trapezoid discretization of ``int kernel(x_i - y) u~(y) dy``.

    ``u~`` is the extension of the field selected by ``bc``.  Kernel tails are
    truncated at 8 sigma.  With ``normalize`` every row is divided by its sum
    so constants are exact fixed points; this is only meaningful for the two
    mass-preserving extensions, so ``normalize=None`` resolves to True for
    PERIODIC/REFLECTING and False for OPEN, and asking to normalize an OPEN
    operator raises (it would contradict mass loss through the boundary).
    """
    if normalize is None:
        normalize = bc is not BoundaryCondition.OPEN
    if normalize and bc is BoundaryCondition.OPEN:
        raise ValueError("row normalization is not defined for open boundaries")

    n = grid.n
    dx = grid.spacing
    sigma = kernel.sigma
    if sigma < 2.0 * dx:
        warnings.warn(
            f"kernel sigma={sigma:g} is below twice the grid spacing {dx:g}; "
            "the discrete operator under-resolves the kernel",
            ResolutionWarning,
            stacklevel=2,
        )
    radius = TRUNCATION_RADIUS_SIGMAS * sigma

    if bc is BoundaryCondition.OPEN:
        # Trapezoid over [x_min, x_max] only: zero extension outside.
        x = grid.nodes
        diff = x[:, None] - x[None, :]
        weights = np.full(n, dx)
        weights[0] = weights[-1] = 0.5 * dx
        matrix = gaussian_eval(diff, sigma) * weights[None, :]
        matrix[np.abs(diff) > radius] = 0.0
        return DiscreteConvolution(matrix, grid, bc, False)

    # Periodic and reflecting extensions: accumulate uniformly weighted samples
    # of the extended field, offset by offset.  Every extended sample carries
    # weight dx (composite trapezoid on the whole line; the truncation ends
    # fall where the kernel is ~1e-15).
    matrix = np.zeros((n, n))
    k_max = int(math.ceil(radius / dx))
    idx = np.arange(n)
    period = 2 * n - 2  # reflecting extension repeats with this index period
    for d in range(-k_max, k_max + 1):
        weight = dx * gaussian_eval(d * dx, sigma)
        m = idx - d
        if bc is BoundaryCondition.PERIODIC:
            cols = m % n
        else:
            p = m % period
            cols = np.where(p < n, p, period - p)
        matrix[idx, cols] += weight

    if normalize:
        matrix /= matrix.sum(axis=1, keepdims=True)
    return DiscreteConvolution(matrix, grid, bc, normalize)
