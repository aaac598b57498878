"""Discrete weighted Radon transform, angular restriction and backprojection.

Conventions fixed here so results are reproducible bit-for-bit on a given
grid: forward line/plane quadrature uses an equispaced step of half the
pixel spacing with bilinear (n=2) / trilinear (n=3) sampling of the image;
backprojection uses the trapezoid rule over the direction list with linear
interpolation in the offset variable.  No extrapolation beyond the stored
offset range: out-of-range lookups raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import (
    TWO_PI,
    AngularSet,
    fibonacci_sphere,
    theta,
    theta_perp,
    uniform_circle,
)


@dataclass(frozen=True)
class Grid:
    """Regular sampling geometry: world point of sample i is origin + i*spacing."""

    dims: tuple
    spacing: float
    origin: tuple

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError("grid spacing must be positive")
        if len(self.dims) != len(self.origin):
            raise ValueError("dims and origin must have the same length")
        if any(d < 8 for d in self.dims):
            raise ValueError("need at least 8 samples per axis")

    @classmethod
    def centered(cls, dims, spacing):
        """Grid whose sample centers are symmetric about the world origin."""
        if isinstance(dims, int):
            dims = (dims, dims)
        origin = tuple(-0.5 * (d - 1) * spacing for d in dims)
        return cls(tuple(dims), float(spacing), origin)

    @property
    def n(self):
        return len(self.dims)

    def axes(self):
        return [
            self.origin[k] + self.spacing * np.arange(self.dims[k])
            for k in range(self.n)
        ]

    def points(self):
        """All sample centers, shape dims + (n,)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def circumradius(self):
        corners = [
            (self.origin[k], self.origin[k] + self.spacing * (self.dims[k] - 1))
            for k in range(self.n)
        ]
        worst = 0.0
        for idx in range(2 ** self.n):
            pt = [corners[k][(idx >> k) & 1] for k in range(self.n)]
            worst = max(worst, float(np.linalg.norm(pt)))
        return worst


@dataclass
class Image:
    """Sampled function on a Grid; values real, or complex for symbol probes."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != tuple(self.grid.dims):
            raise ValueError(
                f"values shape {self.values.shape} != grid dims {self.grid.dims}"
            )

    @classmethod
    def zeros(cls, grid, dtype=float):
        return cls(grid, np.zeros(grid.dims, dtype=dtype))

    @property
    def n(self):
        return self.grid.n

    @property
    def spacing(self):
        return self.grid.spacing

    def support_radius(self):
        """Largest |x| over samples with nonzero value (0 for the zero image)."""
        mask = self.values != 0
        if not np.any(mask):
            return 0.0
        pts = self.grid.points()[mask]
        return float(np.max(np.linalg.norm(pts, axis=-1)))

    def norm2(self):
        """Discrete L2 norm including the cell measure."""
        return float(
            np.sqrt(np.sum(np.abs(self.values) ** 2) * self.spacing ** self.n)
        )


@dataclass(frozen=True)
class OffsetGrid:
    """Uniform offset samples s_k = start + k*spacing, k = 0..count-1."""

    count: int
    spacing: float
    start: float

    def __post_init__(self):
        if self.count < 2 or self.spacing <= 0:
            raise ValueError("offset grid needs count >= 2 and positive spacing")

    @classmethod
    def cover(cls, radius, spacing):
        """Symmetric grid containing [-radius, radius]."""
        half = int(math.ceil(radius / spacing)) + 1
        return cls(2 * half + 1, float(spacing), -half * float(spacing))

    @property
    def values(self):
        return self.start + self.spacing * np.arange(self.count)

    @property
    def stop(self):
        return self.start + self.spacing * (self.count - 1)


@dataclass
class Sinogram:
    """Sampled data g(omega, s) on direction x offset grid.

    directions holds unit row vectors; for n = 2 the angles are kept as well.
    Rows for directions outside angular_support are zero (None = full data).
    """

    directions: np.ndarray
    offsets: OffsetGrid
    values: np.ndarray
    angles: np.ndarray | None = None
    angular_support: AngularSet | None = None

    def __post_init__(self):
        self.directions = np.asarray(self.directions, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape != (self.directions.shape[0], self.offsets.count):
            raise ValueError("values must have shape (ndir, noffsets)")

    @property
    def n(self):
        return self.directions.shape[1]

    @property
    def ndir(self):
        return self.directions.shape[0]

    def direction_weights(self):
        """Quadrature weights for integration over S^(n-1).

        n = 2: periodic trapezoid weights from the angle list (plain trapezoid
        when the list covers only part of the circle); n = 3: equal weights
        4*pi/N for the Fibonacci point set.
        """
        if self.n == 3:
            return np.full(self.ndir, 4.0 * math.pi / self.ndir)
        phis = np.sort(self.angles % TWO_PI)
        order = np.argsort(self.angles % TWO_PI)
        gaps = np.diff(phis, append=phis[0] + TWO_PI)
        if np.max(gaps) <= 3.0 * np.median(gaps):
            w_sorted = 0.5 * (gaps + np.roll(gaps, 1))
        else:  # open arc of directions: trapezoid with half-weight ends
            inner = np.diff(phis)
            w_sorted = np.zeros_like(phis)
            w_sorted[:-1] += 0.5 * inner
            w_sorted[1:] += 0.5 * inner
        weights = np.empty_like(w_sorted)
        weights[order] = w_sorted
        return weights

    def copy(self):
        return replace(self, values=self.values.copy())


def _multilinear(values, grid, pts):
    """Bi-/trilinear sampling of a gridded array at world points, 0 outside."""
    frac = (pts - np.asarray(grid.origin)) / grid.spacing
    coords = np.moveaxis(frac, -1, 0)
    return map_coordinates(values, coords, order=1, mode="constant", cval=0.0)


def sample_image(img, pts):
    """Interpolate an Image at world points (bilinear / trilinear)."""
    return _multilinear(img.values, img.grid, pts)


def _make_directions(n, directions):
    """Normalize the directions argument to (angles, unit-vector rows)."""
    if isinstance(directions, (int, np.integer)):
        if n == 2:
            angles = uniform_circle(int(directions))
            return angles, theta(angles)
        pts, _ = fibonacci_sphere(int(directions))
        return None, pts
    directions = np.asarray(directions, dtype=float)
    if directions.ndim == 1:  # n = 2 angle list
        return directions.copy(), theta(directions)
    if directions.shape[1] != n:
        raise ValueError("direction vectors have wrong dimension")
    if n == 2:
        angles = np.mod(np.arctan2(directions[:, 1], directions[:, 0]), TWO_PI)
        return angles, directions
    return None, directions


def forward(img, mu, directions, offsets=None, *, require_positive_weight=False):
    """Weighted Radon transform of an image.

    Parameters
    ----------
    img : Image
        Compactly supported within its grid.
    mu : callable(omega, x) -> weight
        Smooth weight; omega is a unit vector, x an array of points (..., n).
    directions : int or array
        Direction count (uniform circle for n=2, Fibonacci points for n=3),
        or an explicit angle list (n=2) / unit-vector rows.
    offsets : OffsetGrid, optional
        Defaults to a symmetric grid with spacing = pixel spacing covering
        the grid circumradius.  Spacing must not exceed the pixel spacing
        and the range must cover the image support.
    require_positive_weight : bool
        When set, raise if mu evaluates nonpositive anywhere on the
        quadrature points.

    Returns
    -------
    Sinogram
    """
    n = img.n
    h = img.spacing
    angles, dirs = _make_directions(n, directions)
    if offsets is None:
        offsets = OffsetGrid.cover(img.grid.circumradius(), h)
    if offsets.spacing > h + 1e-12:
        raise ValueError("offset spacing must not exceed the image spacing")
    support = img.support_radius()
    if support > 0 and (offsets.start > -support - h or offsets.stop < support + h):
        raise ValueError("offset range does not cover the image support")

    step = 0.5 * h
    radius = img.grid.circumradius() + h
    m = int(math.ceil(radius / step))
    line_t = step * (np.arange(2 * m + 1) - m)  # symmetric quadrature nodes
    s_vals = offsets.values

    out = np.zeros((dirs.shape[0], offsets.count), dtype=img.values.dtype)
    if n == 2:
        measure = step
        for j in range(dirs.shape[0]):
            omega = dirs[j]
            perp = np.array([-omega[1], omega[0]])
            pts = s_vals[:, None, None] * omega + line_t[None, :, None] * perp
            vals = _bilinear(img.values, img.grid, pts)
            w = _weight_values(mu, omega, pts, vals.shape)
            if require_positive_weight and np.min(w) <= 0:
                raise ValueError("weight mu is nonpositive on a quadrature point")
            out[j] = (vals * w).sum(axis=1) * measure
    else:
        from .geometry import plane_basis

        measure = step * step
        for j in range(dirs.shape[0]):
            omega = dirs[j]
            e1, e2 = plane_basis(omega)
            uu = line_t[:, None, None]
            vv = line_t[None, :, None]
            plane = uu * e1 + vv * e2
            for k, s in enumerate(s_vals):
                pts = s * omega + plane
                vals = _trilinear(img.values, img.grid, pts)
                w = _weight_values(mu, omega, pts, vals.shape)
                if require_positive_weight and np.min(w) <= 0:
                    raise ValueError("weight mu is nonpositive on a quadrature point")
                out[j, k] = (vals * w).sum() * measure
    return Sinogram(
        directions=dirs, offsets=offsets, values=out, angles=angles,
        angular_support=None,
    )


def _weight_values(mu, omega, pts, shape):
    w = mu(omega, pts)
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        return np.broadcast_to(w, shape)
    return w


def restrict_hard(g, A):
    """Zero all direction rows outside the closed angular set A.

    Rows exactly on bd(A) are kept.  Idempotent.
    """
    if g.n != A.n:
        raise ValueError("dimension mismatch between sinogram and angular set")
    keep = np.array([A.contains(w) for w in g.directions])
    if g.angular_support is not None:
        for j in np.nonzero(keep)[0]:
            if not g.angular_support.contains(g.directions[j]):
                raise ValueError(
                    "existing angular support does not cover the requested set"
                )
    values = np.where(keep[:, None], g.values, 0.0)
    return replace(g, values=values, angular_support=A)


def restrict_smooth(g, window):
    """Multiply each direction row by the smooth cutoff window phi(omega)."""
    if g.n == 2:
        phi = window.values_for_angles(g.angles)
    else:
        phi = np.array([window.value(w) for w in g.directions])
    values = g.values * phi[:, None]
    support = g.angular_support if g.angular_support is not None else window.support
    return replace(g, values=values, angular_support=support)


def backproject(g, nu, grid):
    """Weighted backprojection of a sinogram onto a grid.

    Integrates g(omega, x . omega) nu(omega, x) over the direction list with
    trapezoid weights and linear interpolation in s.  Raises when some
    x . omega falls outside the stored offset range.
    """
    pts = grid.points()
    flat = pts.reshape(-1, grid.n)
    weights = g.direction_weights()
    s0 = g.offsets.start
    ds = g.offsets.spacing
    count = g.offsets.count
    acc = np.zeros(flat.shape[0], dtype=g.values.dtype)
    for j in range(g.ndir):
        omega = g.directions[j]
        s_star = flat @ omega
        u = (s_star - s0) / ds
        if np.min(u) < -1e-9 or np.max(u) > count - 1 + 1e-9:
            raise ValueError(
                "offset range does not cover the grid (no extrapolation)"
            )
        i0 = np.clip(np.floor(u).astype(np.int64), 0, count - 2)
        frac = u - i0
        row = g.values[j]
        interp = row[i0] * (1.0 - frac) + row[i0 + 1] * frac
        w = nu(omega, flat)
        acc += weights[j] * interp * np.asarray(w)
    return Image(grid, acc.reshape(grid.dims))


def reconstruct(source, mu, nu, filter_spec=None, cutoff=None, *,
                directions=360, offsets=None, grid=None):
    """Filtered-backprojection pipeline: forward -> cutoff -> filter -> backproject.

    Parameters
    ----------
    source : Image or Sinogram
        An image is transformed first; a sinogram is used as measured data.
    mu, nu : callable(omega, x)
        Forward and backprojection weights.
    filter_spec : FilterSpec or None
        None applies no filter (plain backprojection).
    cutoff : None, AngularSet (hard truncation) or CutoffWindow (smooth).
    grid : Grid, optional
        Output geometry; defaults to the input image grid.
    """
    from .filters import CutoffWindow, apply_filter

    if isinstance(source, Image):
        g = forward(source, mu, directions, offsets)
        if grid is None:
            grid = source.grid
    else:
        g = source
        if grid is None:
            raise ValueError("grid is required when reconstructing from a sinogram")
    if cutoff is not None:
        if isinstance(cutoff, AngularSet):
            g = restrict_hard(g, cutoff)
        elif isinstance(cutoff, CutoffWindow):
            g = restrict_smooth(g, cutoff)
        else:
            raise TypeError("cutoff must be an AngularSet or CutoffWindow")
    if filter_spec is not None:
        g = apply_filter(g, filter_spec)
    return backproject(g, nu, grid)
