"""Cubic lattice over a truncated cube, cell averages, and discrete derivatives.

The computational domain is the cube (-R, R)^d with homogeneous Dirichlet
data on its boundary.  Interior nodes are the lattice points x_j = j*h
(integer multi-index j) with |x_j^i| < R on every axis, so the origin is
always a node and the node set is symmetric about it.  Each node owns the
half-open cell

    Q_{x_j} = prod_i [x_j^i - h/2, x_j^i + h/2),

and a function is discretized by its cell averages ("cubic approximation").

Derivatives are the symmetric difference

    (sym_diff f)(x) = (f(x + h e_i) - f(x - h e_i)) / (2h),

with stencil reads outside the interior evaluating to exactly zero
(Dirichlet zero extension).  The default Laplacian is the composition
sym_diff o sym_diff per axis, i.e. a width-2h second difference; the
compact 3-point second difference is available behind `stencil="compact"`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

STENCILS = ("paper", "compact")


class SingularCellError(ValueError):
    """Adaptive cell quadrature failed to settle (likely non-integrable)."""

    def __init__(self, center, detail=""):
        self.center = tuple(float(c) for c in np.atleast_1d(center))
        msg = f"cell quadrature did not converge at node {self.center}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class Grid:
    """Uniform cubic lattice on (-R, R)^d with spacing h.

    Attributes
    ----------
    d : spatial dimension (1, 2 or 3)
    h : lattice spacing
    R : half-width of the computational cube
    j_max : largest integer j with j*h < R
    """

    d: int
    h: float
    R: float
    j_max: int

    @property
    def points_per_axis(self) -> int:
        return 2 * self.j_max + 1

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.d

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.d

    @cached_property
    def axis_coords(self) -> np.ndarray:
        """Node coordinates along one axis (shared by all axes)."""
        return np.arange(-self.j_max, self.j_max + 1) * self.h

    @cached_property
    def points(self) -> np.ndarray:
        """All node coordinates, shape (*grid.shape, d), row-major."""
        axes = np.meshgrid(*(self.axis_coords,) * self.d, indexing="ij")
        return np.stack(axes, axis=-1)

    @cached_property
    def radius_sq(self) -> np.ndarray:
        """|x_j|^2 per node, shape grid.shape."""
        return np.sum(self.points ** 2, axis=-1)

    def empty(self, dtype=complex) -> np.ndarray:
        return np.zeros(self.shape, dtype=dtype)

    def inner(self, u, v) -> complex:
        """Grid inner product h^d * sum(conj(u) * v)."""
        return self.h ** self.d * np.vdot(u, v)

    def norm(self, u) -> float:
        return math.sqrt(self.h ** self.d) * float(np.linalg.norm(u))

    def sample(self, f) -> np.ndarray:
        """Pointwise node samples of f (no cell averaging)."""
        return np.asarray(f(self.points.reshape(-1, self.d))).reshape(self.shape)


def build_grid(R: float, h: float, d: int) -> Grid:
    """Construct the interior lattice of (-R, R)^d with spacing h."""
    if d not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
    if not (h > 0 and R > 0):
        raise ValueError(f"need h > 0 and R > 0, got h={h}, R={R}")
    if h >= R:
        raise ValueError(f"spacing h={h} must be smaller than the half-width R={R}")
    # Largest j with j*h < R; the tiny relative shift keeps exact multiples
    # (e.g. R=1, h=0.5) on the open-cube side despite floating point.
    j_max = int(math.floor(R / h * (1.0 - 1e-12)))
    return Grid(d=d, h=float(h), R=float(R), j_max=j_max)


@dataclass
class WaveFunction:
    """Complex state on the grid interior with Dirichlet zero extension."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )

    @property
    def mass(self) -> float:
        """Discrete L2 mass h^d * sum |psi_j|^2."""
        return self.grid.h ** self.grid.d * float(np.sum(np.abs(self.values) ** 2))

    def norm(self) -> float:
        return self.grid.norm(self.values)

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.values.copy())


def shift(field: np.ndarray, axis: int, steps: int) -> np.ndarray:
    """field evaluated at x + steps*h*e_axis, zero outside the interior."""
    out = np.zeros_like(field)
    if steps == 0:
        out[...] = field
        return out
    n = field.shape[axis]
    if abs(steps) >= n:
        return out
    src = [slice(None)] * field.ndim
    dst = [slice(None)] * field.ndim
    if steps > 0:
        src[axis] = slice(steps, n)
        dst[axis] = slice(0, n - steps)
    else:
        src[axis] = slice(0, n + steps)
        dst[axis] = slice(-steps, n)
    out[tuple(dst)] = field[tuple(src)]
    return out


def sym_diff(grid: Grid, field: np.ndarray, axis: int) -> np.ndarray:
    """Symmetric difference (f(x+h e_axis) - f(x-h e_axis)) / (2h)."""
    if not 0 <= axis < grid.d:
        raise ValueError(f"axis {axis} out of range for d={grid.d}")
    return (shift(field, axis, 1) - shift(field, axis, -1)) / (2.0 * grid.h)


def discrete_laplacian(grid: Grid, field: np.ndarray, stencil: str = "paper") -> np.ndarray:
    """Discrete Laplacian, sum over axes of squared symmetric differences.

    stencil="paper" is the width-2h second difference
    [f(x+2h) - 2f(x) + f(x-2h)] / (4h^2) per axis, reading the *field*
    as zero outside the interior.  Away from the outermost node layer
    this equals the composition of two symmetric differences; on that
    layer the composition would truncate the intermediate derivative
    instead, losing a +f/(4h^2) term (the zero-extension form keeps the
    operator's negative part, -Lap = D*D + nonnegative wall diagonal).
    stencil="compact" is the usual 3-point [f(x+h) - 2f(x) + f(x-h)] / h^2.
    """
    if stencil not in STENCILS:
        raise ValueError(f"stencil must be one of {STENCILS}")
    out = np.zeros_like(field)
    if stencil == "paper":
        w = 1.0 / (4.0 * grid.h ** 2)
        for ax in range(grid.d):
            out += (shift(field, ax, 2) - 2.0 * field + shift(field, ax, -2)) * w
    else:
        w = 1.0 / grid.h ** 2
        for ax in range(grid.d):
            out += (shift(field, ax, 1) - 2.0 * field + shift(field, ax, -1)) * w
    return out


# ---------------------------------------------------------------------------
# cell averages

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


def _cell_quadrature(f, centers: np.ndarray, half: float) -> np.ndarray:
    """Tensor Gauss-Legendre cell averages of f on cubes centers +- half.

    centers has shape (N, d); returns shape (N,).  Exact for polynomials of
    degree <= 7 per axis.
    """
    d = centers.shape[1]
    total = np.zeros(len(centers), dtype=complex)
    for combo in itertools.product(range(len(_GAUSS_NODES)), repeat=d):
        offset = np.array([_GAUSS_NODES[c] for c in combo]) * half
        weight = np.prod([_GAUSS_WEIGHTS[c] for c in combo]) / 2.0 ** d
        total += weight * np.asarray(f(centers + offset), dtype=complex)
    return total


def _adaptive_cell_average(f, center: np.ndarray, h: float, rtol: float, max_levels: int):
    """Average of f over the cell at `center` by dyadic subdivision.

    Splits every subcell whose one-level refinement still moves its local
    estimate; stops when the global refinement increment is below rtol, or
    at the level cap provided the increments are still contracting (the
    remaining tail is then geometrically small).  A stagnating or growing
    refinement signals a non-integrable sample and raises.
    """
    d = len(center)
    centers = np.asarray(center, dtype=float)[None, :]
    half = h / 2.0
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))
    settled = 0.0 + 0.0j
    estimate = complex(_cell_quadrature(f, centers, half)[0]) * h ** d
    increments = []
    for _level in range(max_levels):
        # All active cells at one level share a size, so the level is one
        # batched quadrature.  A cell settles when its one-level refinement
        # moves it by less than the tolerance, locally or against the
        # running global estimate (keeps smooth far-field cells from
        # splitting forever).
        floor = rtol * max(abs(estimate), 1e-300)
        quarter = half / 2.0
        coarse = _cell_quadrature(f, centers, half) * (2 * half) ** d
        kids = (centers[:, None, :] + signs[None, :, :] * quarter).reshape(-1, d)
        fine = (_cell_quadrature(f, kids, quarter) * (2 * quarter) ** d)
        fine_sums = fine.reshape(len(centers), -1).sum(axis=1)
        keep = np.abs(fine_sums - coarse) > np.maximum(rtol * np.abs(fine_sums), floor)
        settled += complex(np.sum(fine_sums[~keep]))
        new_estimate = settled + complex(np.sum(fine_sums[keep]))
        increments.append(abs(new_estimate - estimate))
        estimate = new_estimate
        if not np.isfinite(abs(estimate)):
            raise SingularCellError(center, "estimate not finite")
        if not np.any(keep) or increments[-1] <= rtol * max(abs(estimate), 1e-300):
            return estimate / h ** d
        if len(increments) >= 2 and increments[-1] > 4.0 * increments[-2]:
            raise SingularCellError(center, "refinement increments growing")
        centers = kids.reshape(len(centers), -1, d)[keep].reshape(-1, d)
        half = quarter
    if len(increments) >= 2 and increments[-1] <= 0.9 * increments[-2]:
        return estimate / h ** d
    raise SingularCellError(center, f"no contraction after {max_levels} levels")


def cubic_average(f, grid: Grid, singular=None, rtol: float = 1e-10,
                  max_levels: int = 12) -> np.ndarray:
    """Cell averages (1/vol Q_{x_j}) * integral of f over Q_{x_j} per node.

    `f` maps an (N, d) array of points to N values.  `singular`, if given,
    maps the (N, d) node array to a boolean mask of cells that need
    adaptive subdivision (integrable point singularities such as 1/|x|).
    """
    flat = grid.points.reshape(-1, grid.d)
    values = _cell_quadrature(f, flat, grid.h / 2.0)
    if singular is not None:
        mask = np.asarray(singular(flat), dtype=bool)
        for idx in np.nonzero(mask)[0]:
            values[idx] = _adaptive_cell_average(f, flat[idx], grid.h, rtol, max_levels)
    if not np.all(np.isfinite(values)):
        bad = flat[np.nonzero(~np.isfinite(values))[0][0]]
        raise SingularCellError(bad, "non-finite cell average")
    out = values.reshape(grid.shape)
    if np.all(np.abs(out.imag) == 0.0):
        return out.real.copy()
    return out
