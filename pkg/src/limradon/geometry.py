"""Directions, hyperplanes, angular sets and covector primitives on S^(n-1).

Supports n = 2 (arcs on the circle) and n = 3 (geodesic caps on the sphere).
All types are immutable after construction and all operations are pure, so
everything here is safe for concurrent read access.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

UNIT_NORM_TOL = 1e-12
# Tolerance used to classify a direction as lying on the boundary of an
# angular set.  Exact for endpoints/rims constructed from the stored
# representation; configurable per set.
ANGLE_TOL = 1e-9

TWO_PI = 2.0 * math.pi


def theta(phi):
    """Unit vector (cos phi, sin phi) on S^1.  Vectorized over phi."""
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def theta_perp(phi):
    """Unit vector (-sin phi, cos phi) perpendicular to theta(phi)."""
    phi = np.asarray(phi, dtype=float)
    return np.stack([-np.sin(phi), np.cos(phi)], axis=-1)


def project_onto_plane(x, omega):
    """Orthogonal projection of x onto the hyperplane through 0 normal to omega.

    Parameters
    ----------
    x : array, shape (..., n)
    omega : array, shape (n,), unit vector

    Returns
    -------
    array, shape (..., n)
        x - (x . omega) omega.  Total function; same result for -omega.
    """
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    return x - np.tensordot(x, omega, axes=(-1, -1))[..., None] * omega


def _as_unit(coords, tol=UNIT_NORM_TOL):
    coords = np.asarray(coords, dtype=float)
    nrm = float(np.linalg.norm(coords))
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"direction must be a unit vector, got norm {nrm!r}")
    return coords


@dataclass(frozen=True, eq=False)
class Direction:
    """A point of S^(n-1), stored as a unit vector (plus its angle for n=2)."""

    coords: np.ndarray

    def __post_init__(self):
        coords = _as_unit(self.coords)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if coords.shape == (2,):
            phi = math.atan2(coords[1], coords[0]) % TWO_PI
            object.__setattr__(self, "_angle", phi)

    @classmethod
    def from_angle(cls, phi):
        d = cls(theta(float(phi)))
        object.__setattr__(d, "_angle", float(phi) % TWO_PI)
        return d

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def angle(self):
        """Canonical angle in [0, 2*pi).  Only defined for n = 2."""
        if self.n != 2:
            raise AttributeError("angle is only defined for n = 2 directions")
        return self._angle

    def perp(self):
        """theta_perp at this direction's angle (n = 2 only)."""
        return theta_perp(self.angle)

    def __neg__(self):
        return Direction(-self.coords)

    def __repr__(self):
        return f"Direction({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True)
class Hyperplane:
    """H(omega, s) = {x : x . omega = s}.

    (omega, s) and (-omega, -s) describe the same point set but are kept
    distinct: with a nonconstant weight the two parameterizations carry
    different data.
    """

    omega: Direction
    s: float

    def contains(self, x, tol=1e-10):
        x = np.asarray(x, dtype=float)
        return abs(float(x @ self.omega.coords) - self.s) <= tol

    def point(self):
        """The foot point s * omega."""
        return self.s * self.omega.coords


def uniform_circle(count):
    """Angles 2*pi*j/count, j = 0..count-1."""
    if count < 1:
        raise ValueError("need at least one direction")
    return TWO_PI * np.arange(count) / count


def fibonacci_sphere(count):
    """Quasi-uniform points on S^2 with equal quadrature weights.

    Returns
    -------
    points : array, shape (count, 3)
    weights : array, shape (count,), each 4*pi/count
    """
    if count < 1:
        raise ValueError("need at least one direction")
    idx = np.arange(count, dtype=float) + 0.5
    polar = np.arccos(1.0 - 2.0 * idx / count)
    azim = TWO_PI * idx / ((1.0 + math.sqrt(5.0)) / 2.0)
    pts = np.stack(
        [np.sin(polar) * np.cos(azim), np.sin(polar) * np.sin(azim), np.cos(polar)],
        axis=1,
    )
    return pts, np.full(count, 4.0 * math.pi / count)


def plane_basis(omega):
    """An orthonormal basis (e1, e2) of H(omega, 0) for omega in S^2."""
    omega = np.asarray(omega, dtype=float)
    helper = np.array([0.0, 0.0, 1.0])
    if abs(omega @ helper) > 0.9:
        helper = np.array([1.0, 0.0, 0.0])
    e1 = helper - (helper @ omega) * omega
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(omega, e1)
    return e1, e2


def _merge_arcs(arcs, tol):
    """Canonicalize a union of closed arcs: starts in [0, 2pi), disjoint, sorted.

    Input arcs are (a, b) with b > a; wrap-around is expressed by b > 2*pi.
    Returns (arcs array (m, 2), full flag).
    """
    items = []
    for a, b in arcs:
        a = float(a)
        b = float(b)
        length = b - a
        if length <= 0.0:
            raise ValueError(f"arc [{a}, {b}] has nonpositive length")
        if length >= TWO_PI - tol:
            return np.zeros((0, 2)), True
        a0 = a % TWO_PI
        items.append((a0, a0 + length))
    items.sort()
    merged = [list(items[0])]
    for a, b in items[1:]:
        if a <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    # wrap: last arc may reach past 2*pi into the first one
    if len(merged) > 1 and merged[-1][1] >= merged[0][0] + TWO_PI - tol:
        merged[0][0] = merged[-1][0] - TWO_PI
        merged[0][1] = max(merged[0][1], merged[-1][1] - TWO_PI)
        merged.pop()
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= TWO_PI - tol:
        return np.zeros((0, 2)), True
    # renormalize starts into [0, 2pi), keep sorted
    out = sorted((a % TWO_PI, a % TWO_PI + (b - a)) for a, b in merged)
    return np.asarray(out, dtype=float), False


@dataclass(frozen=True, eq=False)
class AngularSet:
    """A closed subset of S^(n-1) with nonempty interior.

    n = 2: finite union of closed arcs; n = 3: finite union of closed
    geodesic caps {omega : omega . c >= cos(rho)}.  Restricting to arcs and
    caps keeps boundary and conormal queries exactly computable.
    """

    n: int
    arcs: np.ndarray | None = None           # (m, 2), canonical
    cap_centers: np.ndarray | None = None    # (m, 3), unit rows
    cap_radii: np.ndarray | None = None      # (m,), in (0, pi)
    full: bool = False
    tol: float = ANGLE_TOL

    @classmethod
    def from_arcs(cls, arcs, tol=ANGLE_TOL):
        merged, full = _merge_arcs(arcs, tol)
        if full:
            return cls(n=2, full=True, tol=tol)
        merged.setflags(write=False)
        return cls(n=2, arcs=merged, tol=tol)

    @classmethod
    def from_caps(cls, caps, tol=ANGLE_TOL):
        centers = []
        radii = []
        for center, rho in caps:
            rho = float(rho)
            if not 0.0 < rho < math.pi:
                raise ValueError(f"cap radius must be in (0, pi), got {rho}")
            centers.append(_as_unit(center))
            radii.append(rho)
        centers = np.asarray(centers)
        radii = np.asarray(radii)
        centers.setflags(write=False)
        radii.setflags(write=False)
        return cls(n=3, cap_centers=centers, cap_radii=radii, tol=tol)

    @classmethod
    def full_sphere(cls, n=2):
        return cls(n=n, full=True)

    # -- queries ---------------------------------------------------------

    def membership(self, omega):
        """Classify omega as 'interior', 'boundary' or 'exterior'.

        Exact for the stored arc/cap representation (up to self.tol).
        """
        if self.full:
            return "interior"
        if self.n == 2:
            phi = omega.angle if isinstance(omega, Direction) else float(omega) % TWO_PI
            best = "exterior"
            for a, b in self.arcs:
                for shift in (0.0, TWO_PI):
                    p = phi + shift
                    if a - self.tol <= p <= b + self.tol:
                        if p <= a + self.tol or p >= b - self.tol:
                            if best == "exterior":
                                best = "boundary"
                        else:
                            return "interior"
            return best
        coords = omega.coords if isinstance(omega, Direction) else _as_unit(omega)
        dots = self.cap_centers @ coords
        ang = np.arccos(np.clip(dots, -1.0, 1.0))
        if np.any(ang < self.cap_radii - self.tol):
            return "interior"
        if np.any(np.abs(ang - self.cap_radii) <= self.tol):
            return "boundary"
        return "exterior"

    def contains(self, omega):
        return self.membership(omega) != "exterior"

    def geodesic_depth(self, omega):
        """Geodesic distance from omega to the complement of the set (0 outside).

        For overlapping cap unions this is the per-cap maximum, a lower bound
        on the true depth; exact for arcs and disjoint caps.
        """
        if self.full:
            return math.pi
        if self.n == 2:
            phi = omega.angle if isinstance(omega, Direction) else float(omega) % TWO_PI
            depth = 0.0
            for a, b in self.arcs:
                for shift in (0.0, TWO_PI):
                    p = phi + shift
                    if a <= p <= b:
                        depth = max(depth, min(p - a, b - p))
            return depth
        coords = omega.coords if isinstance(omega, Direction) else _as_unit(omega)
        ang = np.arccos(np.clip(self.cap_centers @ coords, -1.0, 1.0))
        return float(max(0.0, np.max(self.cap_radii - ang)))

    def reflected(self):
        """The antipodal set (-1)A."""
        if self.full:
            return self
        if self.n == 2:
            return AngularSet.from_arcs(
                [(a + math.pi, b + math.pi) for a, b in self.arcs], tol=self.tol
            )
        return AngularSet.from_caps(
            list(zip(-self.cap_centers, self.cap_radii)), tol=self.tol
        )

    def is_symmetric(self):
        """True when A = (-1)A for the canonical representation."""
        if self.full:
            return True
        refl = self.reflected()
        if self.n == 2:
            if refl.arcs.shape != self.arcs.shape:
                return False
            return bool(np.allclose(refl.arcs, self.arcs, atol=10 * self.tol))
        if refl.cap_radii.shape != self.cap_radii.shape:
            return False
        # caps have no canonical order; match each center/radius pair
        used = set()
        for c, r in zip(refl.cap_centers, refl.cap_radii):
            hit = None
            for j, (c2, r2) in enumerate(zip(self.cap_centers, self.cap_radii)):
                if j in used:
                    continue
                if abs(r - r2) <= 10 * self.tol and np.linalg.norm(c - c2) <= 1e-8:
                    hit = j
                    break
            if hit is None:
                return False
            used.add(hit)
        return True

    def intersects(self, other):
        """True when the two closed sets share at least one point."""
        if self.full or other.full:
            return True
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        if self.n == 2:
            for a1, b1 in self.arcs:
                for a2, b2 in other.arcs:
                    for shift in (-TWO_PI, 0.0, TWO_PI):
                        if max(a1, a2 + shift) <= min(b1, b2 + shift) + self.tol:
                            return True
            return False
        for c1, r1 in zip(self.cap_centers, self.cap_radii):
            for c2, r2 in zip(other.cap_centers, other.cap_radii):
                gap = math.acos(float(np.clip(c1 @ c2, -1.0, 1.0)))
                if gap <= r1 + r2 + self.tol:
                    return True
        return False

    def min_width(self):
        """Smallest arc length / cap diameter; pi for the full set."""
        if self.full:
            return math.pi
        if self.n == 2:
            return float(np.min(self.arcs[:, 1] - self.arcs[:, 0]))
        return float(np.min(2.0 * self.cap_radii))

    # -- boundary --------------------------------------------------------

    def boundary_angles(self):
        """Arc endpoints in [0, 2pi) (n = 2 only).  Empty for the full circle."""
        if self.n != 2:
            raise ValueError("boundary_angles is only defined for n = 2")
        if self.full:
            return np.zeros(0)
        return np.sort(self.arcs.ravel() % TWO_PI)

    def boundary_directions(self, rim_count=24):
        """Finitely many directions on bd(A).

        n = 2: the arc endpoints.  n = 3: rim_count samples per cap rim that
        lie on the boundary of the union, plus all rim/rim corner points.
        """
        if self.full:
            return []
        if self.n == 2:
            return [Direction.from_angle(a) for a in self.boundary_angles()]
        out = []
        for c, rho in zip(self.cap_centers, self.cap_radii):
            e1, e2 = plane_basis(c)
            for t in np.linspace(0.0, TWO_PI, rim_count, endpoint=False):
                w = math.cos(rho) * c + math.sin(rho) * (
                    math.cos(t) * e1 + math.sin(t) * e2
                )
                w /= np.linalg.norm(w)
                if self.membership(w) == "boundary":
                    out.append(Direction(w))
        for i in range(len(self.cap_radii)):
            for j in range(i + 1, len(self.cap_radii)):
                for w in cap_rim_intersections(
                    self.cap_centers[i], self.cap_radii[i],
                    self.cap_centers[j], self.cap_radii[j],
                ):
                    if self.membership(w) == "boundary":
                        out.append(Direction(w))
        return out

    # -- serialization ---------------------------------------------------

    def to_config_string(self):
        if self.full:
            return "full"
        if self.n == 2:
            body = ",".join(f"[{a:.17g},{b:.17g}]" for a, b in self.arcs)
            return f"arcs=[{body}]"
        body = ",".join(
            f"[{c[0]:.17g},{c[1]:.17g},{c[2]:.17g},{r:.17g}]"
            for c, r in zip(self.cap_centers, self.cap_radii)
        )
        return f"caps=[{body}]"

    @classmethod
    def from_config_string(cls, text, n=2):
        text = text.strip().replace(" ", "")
        if text == "full":
            return cls.full_sphere(n)
        if text.startswith("arcs="):
            rows = _parse_number_rows(text[len("arcs="):], 2)
            return cls.from_arcs(rows)
        if text.startswith("caps="):
            rows = _parse_number_rows(text[len("caps="):], 4)
            return cls.from_caps([(row[:3], row[3]) for row in rows])
        raise ValueError(f"cannot parse angular set from {text!r}")

    def __repr__(self):
        return f"AngularSet({self.to_config_string()})"


def _parse_number_rows(text, width):
    if not (text.startswith("[[") and text.endswith("]]")):
        raise ValueError(f"expected [[...],...], got {text!r}")
    rows = []
    for chunk in text[2:-2].split("],["):
        vals = [float(v) for v in chunk.split(",")]
        if len(vals) != width:
            raise ValueError(f"expected {width} numbers per entry, got {chunk!r}")
        rows.append(vals)
    return rows


def cap_rim_intersections(c1, r1, c2, r2):
    """Intersection points of two cap rims on S^2 (0, 1 or 2 points)."""
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    d = float(c1 @ c2)
    if abs(abs(d) - 1.0) < 1e-12:
        return []
    k1, k2 = math.cos(r1), math.cos(r2)
    det = 1.0 - d * d
    a = (k1 - d * k2) / det
    b = (k2 - d * k1) / det
    base = a * c1 + b * c2
    rest = 1.0 - float(base @ base)
    if rest < -1e-12:
        return []
    cross = np.cross(c1, c2)
    cross_norm = np.linalg.norm(cross)
    pts = []
    if rest <= 1e-12:
        pts.append(base / np.linalg.norm(base))
    else:
        t = math.sqrt(rest) / cross_norm
        for sign in (1.0, -1.0):
            w = base + sign * t * cross
            pts.append(w / np.linalg.norm(w))
    return pts


@dataclass(frozen=True)
class ConormalFiber:
    """Directions y with (omega, y domega) in WF(chi_A), up to positive scale.

    n = 2: the scalar fiber signs (+1, -1).  n = 3 smooth rim point: the two
    unit normals +-y of the rim inside T_omega(S^2).  Corner of two rims: a
    fan over the whole fiber plane, flagged full_fiber.
    """

    directions: tuple
    full_fiber: bool = False


def boundary_conormals(A, omega, fan_step_deg=5.0):
    """Conormal fiber of bd(A) at a boundary direction omega.

    Raises ValueError when omega is not on bd(A).
    """
    if not isinstance(omega, Direction):
        omega = Direction(omega)
    if A.membership(omega) != "boundary":
        raise ValueError("omega is not a boundary point of the angular set")
    if A.n == 2:
        return ConormalFiber(directions=(1.0, -1.0))
    coords = omega.coords
    ang = np.arccos(np.clip(A.cap_centers @ coords, -1.0, 1.0))
    on_rim = np.nonzero(np.abs(ang - A.cap_radii) <= A.tol)[0]
    normals = []
    for i in on_rim:
        y = project_onto_plane(A.cap_centers[i], coords)
        nrm = np.linalg.norm(y)
        if nrm < 1e-12:
            continue
        y = y / nrm
        if not any(np.linalg.norm(y - u) < 1e-9 or np.linalg.norm(y + u) < 1e-9
                   for u in normals):
            normals.append(y)
    if len(normals) > 1:
        e1, e2 = plane_basis(coords)
        step = math.radians(fan_step_deg)
        count = max(1, int(round(TWO_PI / step)))
        fan = tuple(
            math.cos(t) * e1 + math.sin(t) * e2
            for t in np.arange(count) * (TWO_PI / count)
        )
        return ConormalFiber(directions=fan, full_fiber=True)
    if not normals:
        raise ValueError("degenerate rim geometry at omega")
    y = normals[0]
    return ConormalFiber(directions=(y, -y))
