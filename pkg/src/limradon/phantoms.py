"""Analytic test objects with known wavefront sets, and weight functions.

Primitives are ellipses/ellipsoids, convex polygons (n=2) and Gaussians.
Ellipses and Gaussians come with closed-form line integrals for the
constant-weight transform, used as the quadrature oracle in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, Direction, fibonacci_sphere, theta
from .microlocal import Covector
from .transform import Image


def _rot2(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Ellipse:
    """Solid ellipse (n=2) or axis-aligned ellipsoid (n=3) of constant density."""

    center: tuple
    semi_axes: tuple
    rotation: float = 0.0
    density: float = 1.0

    def __post_init__(self):
        if any(a <= 0 for a in self.semi_axes):
            raise ValueError("semi-axes must be positive")
        if len(self.center) != len(self.semi_axes):
            raise ValueError("center and semi_axes must agree in dimension")
        if len(self.center) == 3 and self.rotation != 0.0:
            raise ValueError("rotation is only supported for n = 2 ellipses")

    @property
    def n(self):
        return len(self.center)

    def evaluate(self, pts):
        q = np.asarray(pts, dtype=float) - np.asarray(self.center)
        if self.n == 2 and self.rotation != 0.0:
            q = q @ _rot2(self.rotation)  # world -> body frame
        r2 = np.sum((q / np.asarray(self.semi_axes)) ** 2, axis=-1)
        return np.where(r2 <= 1.0, self.density, 0.0)


@dataclass(frozen=True)
class ConvexPolygon:
    """Solid convex polygon of constant density (n = 2 only)."""

    vertices: tuple
    density: float = 1.0

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[0] < 3 or verts.shape[1] != 2:
            raise ValueError("need at least 3 planar vertices")
        area = 0.0
        m = verts.shape[0]
        for i in range(m):
            a, b = verts[i], verts[(i + 1) % m]
            area += a[0] * b[1] - b[0] * a[1]
        if area < 0:
            verts = verts[::-1]
            area = -area
        if area < 1e-14:
            raise ValueError("degenerate polygon")
        for i in range(m):
            a = verts[i]
            b = verts[(i + 1) % m]
            c = verts[(i + 2) % m]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            if cross < -1e-12:
                raise ValueError("polygon is not convex")
        object.__setattr__(self, "vertices", tuple(map(tuple, verts)))

    @property
    def n(self):
        return 2

    def vertex_array(self):
        return np.asarray(self.vertices, dtype=float)

    def evaluate(self, pts):
        pts = np.asarray(pts, dtype=float)
        verts = self.vertex_array()
        m = verts.shape[0]
        inside = np.ones(pts.shape[:-1], dtype=bool)
        for i in range(m):
            a = verts[i]
            b = verts[(i + 1) % m]
            edge = b - a
            rel = pts - a
            cross = edge[0] * rel[..., 1] - edge[1] * rel[..., 0]
            inside &= cross >= -1e-12
        return np.where(inside, self.density, 0.0)

    def edge_normals(self):
        """Outward unit normals, one per CCW edge."""
        verts = self.vertex_array()
        m = verts.shape[0]
        normals = []
        for i in range(m):
            e = verts[(i + 1) % m] - verts[i]
            nrm = np.array([e[1], -e[0]])
            normals.append(nrm / np.linalg.norm(nrm))
        return normals


@dataclass(frozen=True)
class Gaussian:
    """amplitude * exp(-(x-c)^T Sigma^-1 (x-c) / 2); smooth, empty wavefront."""

    center: tuple
    covariance: tuple
    amplitude: float = 1.0

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        n = len(self.center)
        if cov.shape != (n, n):
            raise ValueError("covariance must be n x n")
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")
        if np.any(np.linalg.eigvalsh(cov) <= 0):
            raise ValueError("covariance must be positive definite")
        object.__setattr__(self, "covariance", tuple(map(tuple, cov)))

    @property
    def n(self):
        return len(self.center)

    def cov_array(self):
        return np.asarray(self.covariance, dtype=float)

    def evaluate(self, pts):
        q = np.asarray(pts, dtype=float) - np.asarray(self.center)
        prec = np.linalg.inv(self.cov_array())
        quad = np.einsum("...i,ij,...j->...", q, prec, q)
        return self.amplitude * np.exp(-0.5 * quad)


@dataclass(frozen=True)
class Phantom:
    primitives: tuple

    def __post_init__(self):
        if not self.primitives:
            raise ValueError("phantom needs at least one primitive")
        dims = {p.n for p in self.primitives}
        if len(dims) != 1:
            raise ValueError("mixed-dimension primitives")
        object.__setattr__(self, "primitives", tuple(self.primitives))

    @property
    def n(self):
        return self.primitives[0].n

    def evaluate(self, pts):
        total = np.zeros(np.asarray(pts).shape[:-1])
        for p in self.primitives:
            total = total + p.evaluate(pts)
        return total


def disk(center=(0.0, 0.0), radius=1.0, density=1.0):
    return Phantom((Ellipse(tuple(center), (radius, radius), 0.0, density),))


def rasterize(phantom, grid, antialias=False):
    """Sample the phantom at pixel centers (optionally 4x supersampled)."""
    pts = grid.points()
    if not antialias:
        return Image(grid, phantom.evaluate(pts))
    q = 0.25 * grid.spacing
    acc = np.zeros(grid.dims)
    if grid.n == 2:
        shifts = [(-q, -q), (-q, q), (q, -q), (q, q)]
    else:
        shifts = [
            (sx, sy, sz) for sx in (-q, q) for sy in (-q, q) for sz in (-q, q)
        ]
    for shift in shifts:
        acc += phantom.evaluate(pts + np.asarray(shift))
    return Image(grid, acc / len(shifts))


@dataclass(frozen=True)
class WeightField:
    """Positive smooth weight w(omega, x) from a small closed-form family.

    Families: "constant" (value,), "exponential" (rate,) for
    exp(rate * omega.x), "polynomial" (offset, quadratic, modulation) for
    offset + quadratic*|x|^2 + modulation*(omega.x), and "inverse" wrapping
    another field.  Calling convention: w(omega, x) with omega a unit vector
    and x an array of points (..., n); 2*pi-periodic in the n=2 angle by
    construction.
    """

    family: str
    params: tuple = ()
    smoothness: str = "C-infinity"

    @classmethod
    def constant(cls, value=1.0):
        if value <= 0:
            raise ValueError("constant weight must be positive")
        return cls("constant", (float(value),))

    @classmethod
    def exponential(cls, rate):
        return cls("exponential", (float(rate),))

    @classmethod
    def polynomial(cls, offset, quadratic=0.0, modulation=0.0):
        if offset <= 0 or quadratic < 0:
            raise ValueError("polynomial weight needs offset > 0, quadratic >= 0")
        if modulation != 0.0 and modulation**2 >= 4.0 * offset * quadratic:
            raise ValueError(
                "polynomial weight not positive: need modulation^2 < 4*offset*quadratic"
            )
        return cls("polynomial", (float(offset), float(quadratic), float(modulation)))

    @classmethod
    def inverse(cls, other):
        return cls("inverse", (other,))

    def __call__(self, omega, x):
        omega = omega.coords if isinstance(omega, Direction) else np.asarray(omega)
        x = np.asarray(x, dtype=float)
        if self.family == "constant":
            return np.full(x.shape[:-1], self.params[0])
        if self.family == "exponential":
            return np.exp(self.params[0] * (x @ omega))
        if self.family == "polynomial":
            c0, c1, c2 = self.params
            return c0 + c1 * np.sum(x * x, axis=-1) + c2 * (x @ omega)
        if self.family == "inverse":
            return 1.0 / self.params[0](omega, x)
        raise ValueError(f"unknown weight family {self.family!r}")

    def min_on_box(self, lo, hi, samples=64, ndir=64):
        """Minimum over a sample grid of the box [lo, hi]^n x directions."""
        n = len(lo)
        axes = [np.linspace(lo[k], hi[k], samples) for k in range(n)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        if n == 2:
            dirs = theta(np.linspace(0.0, TWO_PI, ndir, endpoint=False))
        else:
            dirs, _ = fibonacci_sphere(ndir)
        worst = math.inf
        for d in dirs:
            worst = min(worst, float(np.min(self(d, pts))))
        return worst


def analytic_wavefront(phantom, samples_per_boundary=64, corner_step_deg=5.0):
    """Boundary samples with outward conormals, both signs per sample.

    Ellipse boundaries are sampled uniformly in parameter, polygon edges
    proportionally to length, and polygon corners carry the cone of normals
    between the adjacent edge normals discretized at corner_step_deg.
    Gaussians are smooth and contribute nothing.
    """
    if samples_per_boundary < 4:
        raise ValueError("need at least 4 samples per boundary")
    covs = []
    solid = [p for p in phantom.primitives if not isinstance(p, Gaussian)]
    if not solid:
        raise ValueError("phantom has no primitive with a boundary")
    for prim in solid:
        if isinstance(prim, Ellipse):
            covs.extend(_ellipse_wavefront(prim, samples_per_boundary))
        elif isinstance(prim, ConvexPolygon):
            covs.extend(
                _polygon_wavefront(prim, samples_per_boundary, corner_step_deg)
            )
        else:
            raise ValueError(f"unsupported primitive {type(prim).__name__}")
    return covs


def _both_signs(x, normal):
    return [Covector(x, normal, 1.0), Covector(x, -normal, 1.0)]


def _ellipse_wavefront(ell, count):
    out = []
    center = np.asarray(ell.center, dtype=float)
    axes = np.asarray(ell.semi_axes, dtype=float)
    if ell.n == 2:
        rot = _rot2(ell.rotation)
        for t in np.linspace(0.0, TWO_PI, count, endpoint=False):
            body = np.array([axes[0] * math.cos(t), axes[1] * math.sin(t)])
            x = center + rot @ body
            nrm = rot @ np.array([math.cos(t) / axes[0], math.sin(t) / axes[1]])
            nrm /= np.linalg.norm(nrm)
            out.extend(_both_signs(x, nrm))
    else:
        pts, _ = fibonacci_sphere(count)
        for u in pts:
            x = center + axes * u
            nrm = u / axes
            nrm /= np.linalg.norm(nrm)
            out.extend(_both_signs(x, nrm))
    return out


def _polygon_wavefront(poly, count, corner_step_deg):
    out = []
    verts = poly.vertex_array()
    m = verts.shape[0]
    normals = poly.edge_normals()
    lengths = [np.linalg.norm(verts[(i + 1) % m] - verts[i]) for i in range(m)]
    total = sum(lengths)
    for i in range(m):
        a = verts[i]
        b = verts[(i + 1) % m]
        k = max(2, int(round(count * lengths[i] / total)))
        for t in np.linspace(0.0, 1.0, k, endpoint=False)[1:]:
            out.extend(_both_signs(a + t * (b - a), normals[i]))
    step = math.radians(corner_step_deg)
    for i in range(m):
        v = verts[i]
        n_prev = normals[(i - 1) % m]
        n_next = normals[i]
        a0 = math.atan2(n_prev[1], n_prev[0])
        a1 = math.atan2(n_next[1], n_next[0])
        span = (a1 - a0) % TWO_PI  # convex corner: span in (0, pi)
        k = max(2, int(math.ceil(span / step)) + 1)
        for t in np.linspace(0.0, span, k):
            out.extend(_both_signs(v, theta(a0 + t)))
    return out


def tangency_covectors(phantom, direction):
    """Boundary covectors whose conormal line is exactly +-direction.

    For each solid primitive, returns the boundary points where the outward
    normal is parallel to the given direction (for polygons: the vertices
    whose normal cone contains it), with both covector signs.  These are the
    generators of straight-line artifacts when direction lies on bd(A).
    """
    w = direction.coords if isinstance(direction, Direction) else np.asarray(direction)
    out = []
    for prim in phantom.primitives:
        if isinstance(prim, Ellipse):
            center = np.asarray(prim.center, dtype=float)
            axes = np.asarray(prim.semi_axes, dtype=float)
            if prim.n == 2:
                rot = _rot2(prim.rotation)
                for sign in (1.0, -1.0):
                    m_ = rot.T @ (sign * w)
                    t = math.atan2(axes[1] * m_[1], axes[0] * m_[0])
                    body = np.array(
                        [axes[0] * math.cos(t), axes[1] * math.sin(t)]
                    )
                    x = center + rot @ body
                    out.extend(_both_signs(x, sign * w))
            else:
                for sign in (1.0, -1.0):
                    u = axes * (sign * w)
                    u /= np.linalg.norm(u)
                    x = center + axes * u
                    out.extend(_both_signs(x, sign * w))
        elif isinstance(prim, ConvexPolygon):
            verts = prim.vertex_array()
            normals = prim.edge_normals()
            m = verts.shape[0]
            for i in range(m):
                n_prev = normals[(i - 1) % m]
                n_next = normals[i]
                a0 = math.atan2(n_prev[1], n_prev[0])
                span = (math.atan2(n_next[1], n_next[0]) - a0) % TWO_PI
                for sign in (1.0, -1.0):
                    ang = (math.atan2(sign * w[1], sign * w[0]) - a0) % TWO_PI
                    if ang <= span + 1e-12:
                        out.extend(_both_signs(verts[i], sign * w))
                edge_mid = 0.5 * (verts[i] + verts[(i + 1) % m])
                for sign in (1.0, -1.0):
                    if np.linalg.norm(n_next - sign * w) < 1e-12:
                        out.extend(_both_signs(edge_mid, sign * w))
    # a +-pair of tangency points yields duplicate covectors; drop them
    unique = []
    for c in out:
        if not any(
            np.linalg.norm(c.x - u.x) < 1e-12
            and np.linalg.norm(c.direction - u.direction) < 1e-12
            for u in unique
        ):
            unique.append(c)
    return unique


def exact_sinogram_constant_weight(phantom, direction, s):
    """Closed-form line integrals for mu = 1 (n = 2; ellipses and Gaussians).

    The quadrature oracle for the forward transform: chord-length formula
    for ellipses, 1-D marginal for Gaussians.  Vectorized over s.
    """
    if phantom.n != 2:
        raise ValueError("exact sinogram is only available in n = 2")
    if isinstance(direction, Direction):
        phi = direction.angle
    else:
        phi = float(direction)
    s = np.asarray(s, dtype=float)
    th = theta(phi)
    total = np.zeros(s.shape)
    for prim in phantom.primitives:
        if isinstance(prim, Ellipse):
            a, b = prim.semi_axes
            psi = phi - prim.rotation
            alpha2 = (a * math.cos(psi)) ** 2 + (b * math.sin(psi)) ** 2
            sp = s - float(np.asarray(prim.center) @ th)
            inside = alpha2 - sp**2
            total = total + np.where(
                inside > 0.0,
                2.0 * prim.density * a * b * np.sqrt(np.maximum(inside, 0.0)) / alpha2,
                0.0,
            )
        elif isinstance(prim, Gaussian):
            cov = prim.cov_array()
            var = float(th @ cov @ th)
            sp = s - float(np.asarray(prim.center) @ th)
            total = total + (
                prim.amplitude
                * math.sqrt(TWO_PI * np.linalg.det(cov) / var)
                * np.exp(-0.5 * sp**2 / var)
            )
        else:
            raise ValueError(
                f"no closed-form sinogram for {type(prim).__name__}"
            )
    return total if total.shape else float(total)
