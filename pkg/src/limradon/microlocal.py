"""Sampled wavefront-set calculus for the limited-data Radon pipeline.

A finite list of covector samples stands in for the (conic, continuous)
wavefront set; membership and equality are decided within explicit base
point / angle tolerances.  Two independent pipelines are provided for the
singularities of a hard-cutoff reconstruction: the direct union of visible
samples and straight-line artifacts, and the composition of the canonical
relation with the product wavefront bound.  Their agreement is an
executable consistency oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import filters as _filters
from .geometry import (
    AngularSet,
    Direction,
    boundary_conormals,
    project_onto_plane,
)

TWO_PI = 2.0 * math.pi
DEFAULT_TOL_X = 0.05
DEFAULT_TOL_DEG = 5.0


@dataclass(frozen=True, eq=False)
class Covector:
    """(x, xi) with xi = magnitude * direction, magnitude > 0, |direction| = 1."""

    x: np.ndarray
    direction: np.ndarray
    magnitude: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        d = np.asarray(self.direction, dtype=float)
        nrm = float(np.linalg.norm(d))
        if not math.isfinite(nrm) or abs(nrm - 1.0) > 1e-9:
            raise ValueError("covector direction must be a unit vector")
        if self.magnitude <= 0:
            raise ValueError("covector magnitude must be positive")
        x.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "direction", d)

    @classmethod
    def from_xi(cls, x, xi):
        xi = np.asarray(xi, dtype=float)
        mag = float(np.linalg.norm(xi))
        if mag == 0:
            raise ValueError("zero codirection")
        return cls(np.asarray(x, dtype=float), xi / mag, mag)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def xi(self):
        return self.magnitude * self.direction


@dataclass(frozen=True, eq=False)
class DataCovector:
    """(omega, s; eta_omega domega + eta_s ds) over the data space.

    eta_omega is the dphi coefficient (scalar) for n = 2 and a vector in
    H(omega, 0) for n = 3.  eta_s = 0 covectors are allowed: they make up
    the wavefront set of the hard angular cutoff.
    """

    omega: Direction
    s: float
    eta_omega: object
    eta_s: float

    def __post_init__(self):
        if self.omega.n == 2:
            eo = float(self.eta_omega)
            size = abs(eo)
        else:
            eo = np.asarray(self.eta_omega, dtype=float)
            if abs(float(eo @ self.omega.coords)) > 1e-9 * max(
                1.0, float(np.linalg.norm(eo))
            ):
                raise ValueError("eta_omega must be tangent to the sphere at omega")
            eo.setflags(write=False)
            size = float(np.linalg.norm(eo))
        object.__setattr__(self, "eta_omega", eo)
        if size == 0.0 and self.eta_s == 0.0:
            raise ValueError("data covector cannot vanish")

    @property
    def n(self):
        return self.omega.n

    def eta_omega_vec(self):
        """The domega component as a vector in H(omega, 0)."""
        if self.n == 2:
            return self.eta_omega * self.omega.perp()
        return np.asarray(self.eta_omega)

    @classmethod
    def from_fiber_vec(cls, omega, s, vec, eta_s):
        """Build from a fiber vector in H(omega, 0) (scalar chart for n=2)."""
        if omega.n == 2:
            return cls(omega, float(s), float(np.asarray(vec) @ omega.perp()),
                       float(eta_s))
        return cls(omega, float(s), np.asarray(vec, dtype=float), float(eta_s))


@dataclass
class WavefrontSet:
    """Finite covector sample list with matching tolerances."""

    covectors: list = field(default_factory=list)
    tol_x: float = DEFAULT_TOL_X
    tol_deg: float = DEFAULT_TOL_DEG
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.covectors)

    def __iter__(self):
        return iter(self.covectors)

    @property
    def n(self):
        return self.covectors[0].n if self.covectors else 0

    def positions(self):
        if not self.covectors:
            return np.zeros((0, 0))
        return np.stack([c.x for c in self.covectors])

    def codirections(self):
        if not self.covectors:
            return np.zeros((0, 0))
        return np.stack([c.direction for c in self.covectors])

    def union(self, other):
        return WavefrontSet(
            list(self.covectors) + list(other.covectors),
            tol_x=self.tol_x, tol_deg=self.tol_deg,
        )

    def covers(self, other):
        """True when every sample of `other` has a match in self."""
        return len(uncovered(other, self, self.tol_x, self.tol_deg)) == 0

    def set_equal(self, other):
        return self.covers(other) and other.covers(self)


@dataclass
class DataWavefrontSet:
    samples: list = field(default_factory=list)
    tol_x: float = DEFAULT_TOL_X
    tol_deg: float = DEFAULT_TOL_DEG
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def union(self, other):
        return DataWavefrontSet(
            list(self.samples) + list(other.samples),
            tol_x=self.tol_x, tol_deg=self.tol_deg,
        )


def uncovered(subset, superset, tol_x, tol_deg):
    """Indices of samples in `subset` with no (tol_x, tol_deg) match in `superset`."""
    if len(subset) == 0:
        return []
    if len(superset) == 0:
        return list(range(len(subset)))
    px = subset.positions()
    pd = subset.codirections()
    qx = superset.positions()
    qd = superset.codirections()
    cos_tol = math.cos(math.radians(tol_deg))
    missing = []
    for i in range(px.shape[0]):
        dist = np.linalg.norm(qx - px[i], axis=1)
        close = dist <= tol_x
        if not np.any(close):
            missing.append(i)
            continue
        dots = qd[close] @ pd[i]
        if not np.any(dots >= cos_tol - 1e-12):
            missing.append(i)
    return missing


# ---------------------------------------------------------------------------
# canonical relation of the hyperplane transform
# ---------------------------------------------------------------------------

def lift_covector(cov):
    """The two data-side preimages of an image covector.

    For (x, xi) with unit direction w = xi/|xi| these are
    (w, x.w, |xi| [-pi_w(x) domega + ds]) and its antipodal partner at -w
    with eta_s = -|xi|.
    """
    w = cov.direction
    mag = cov.magnitude
    s = float(cov.x @ w)
    z = project_onto_plane(cov.x, w)
    lam0 = DataCovector.from_fiber_vec(Direction(w), s, -mag * z, mag)
    lam1 = DataCovector.from_fiber_vec(Direction(-w), -s, mag * z, -mag)
    return lam0, lam1


def data_wavefront(wf):
    """Compose the canonical relation with an image-side wavefront sample set."""
    if len(wf) == 0:
        raise ValueError("empty wavefront set")
    samples = []
    for cov in wf:
        samples.extend(lift_covector(cov))
    return DataWavefrontSet(samples, tol_x=wf.tol_x, tol_deg=wf.tol_deg)


def image_wavefront(dwf):
    """Compose the transposed canonical relation with a data-side sample set.

    Samples with eta_s = 0 compose to the empty set; they are dropped and
    counted in diagnostics["dropped_zero_ds"].
    """
    covs = []
    dropped = 0
    for dc in dwf:
        if dc.eta_s == 0.0:
            dropped += 1
            continue
        w = dc.omega.coords
        z = -dc.eta_omega_vec() / dc.eta_s
        x = dc.s * w + z
        covs.append(Covector.from_xi(x, dc.eta_s * w))
    return WavefrontSet(
        covs, tol_x=dwf.tol_x, tol_deg=dwf.tol_deg,
        diagnostics={"dropped_zero_ds": dropped},
    )


def cutoff_wavefront(A, s_samples, rim_count=24, fan_step_deg=5.0,
                     tol_x=DEFAULT_TOL_X, tol_deg=DEFAULT_TOL_DEG):
    """Wavefront samples of the hard cutoff indicator on the data cylinder.

    All samples sit over bd(A) with eta_s = 0 and fiber directions from the
    boundary conormals; empty for the full sphere.
    """
    samples = []
    full_fiber_hits = 0
    if not A.full:
        s_samples = np.atleast_1d(np.asarray(s_samples, dtype=float))
        for omega in A.boundary_directions(rim_count=rim_count):
            fiber = boundary_conormals(A, omega, fan_step_deg=fan_step_deg)
            if fiber.full_fiber:
                full_fiber_hits += 1
            for y in fiber.directions:
                for s in s_samples:
                    if A.n == 2:
                        samples.append(DataCovector(omega, float(s), float(y), 0.0))
                    else:
                        samples.append(DataCovector(omega, float(s), y, 0.0))
    return DataWavefrontSet(
        samples, tol_x=tol_x, tol_deg=tol_deg,
        diagnostics={"full_fiber_boundary_points": full_fiber_hits},
    )


def product_wavefront(A, W, t_samples=None, fan_step_deg=5.0):
    """Upper bound for the wavefront of the hard cutoff times data, as samples.

    Three parts: W restricted to omega in A; the cutoff wavefront itself;
    and, at matched base points over bd(A), the sums of a W covector with
    the cutoff fiber, sampled over the nonzero spreading parameter t.
    Raises when the non-cancellation condition fails for a W sample with
    eta_s = 0.
    """
    if t_samples is None:
        t_samples = default_t_samples()
    t_samples = np.asarray(t_samples, dtype=float)
    t_samples = t_samples[t_samples != 0.0]

    for dc in W:
        if dc.eta_s == 0.0 and A.membership(dc.omega) == "boundary":
            fiber = boundary_conormals(A, dc.omega, fan_step_deg=fan_step_deg)
            vec = -np.asarray(dc.eta_omega_vec())
            bad = fiber.full_fiber
            for y in fiber.directions:
                yv = y * dc.omega.perp() if dc.n == 2 else np.asarray(y)
                cosang = float(vec @ yv) / max(np.linalg.norm(vec), 1e-300)
                bad = bad or cosang > 1.0 - 1e-9
            if bad:
                raise ValueError(
                    "non-cancellation condition violated at "
                    f"omega={dc.omega!r}, s={dc.s!r}: the negated fiber "
                    "direction lies in the cutoff wavefront"
                )

    part1 = [dc for dc in W if A.contains(dc.omega)]

    s_vals = sorted({float(dc.s) for dc in W}) or [0.0]
    part2 = cutoff_wavefront(A, s_vals, fan_step_deg=fan_step_deg,
                             tol_x=W.tol_x, tol_deg=W.tol_deg)

    part3 = []
    for dc in W:
        if dc.eta_s == 0.0 or A.membership(dc.omega) != "boundary":
            continue
        alpha = dc.eta_s
        z = -dc.eta_omega_vec() / alpha
        fiber = boundary_conormals(A, dc.omega, fan_step_deg=fan_step_deg)
        for y in _fiber_vectors(fiber, dc.omega):
            for t in t_samples:
                part3.append(
                    DataCovector.from_fiber_vec(
                        dc.omega, dc.s, -alpha * (z + t * y), alpha
                    )
                )
    return DataWavefrontSet(
        part1 + list(part2) + part3,
        tol_x=W.tol_x, tol_deg=W.tol_deg,
        diagnostics={
            "restricted": len(part1),
            "cutoff": len(part2),
            "sums": len(part3),
        },
    )


def _fiber_vectors(fiber, omega):
    """Conormal fiber directions as vectors in H(omega, 0), one per +- pair."""
    vecs = []
    for y in fiber.directions:
        yv = y * omega.perp() if omega.n == 2 else np.asarray(y)
        if not any(np.linalg.norm(yv + u) < 1e-9 for u in vecs):
            vecs.append(yv)
    return vecs


def default_t_samples(extent=1.5, count=40):
    """Symmetric nonzero spreading parameters covering [-extent, extent]."""
    half = np.linspace(extent / count, extent, count)
    return np.concatenate([-half[::-1], half])


# ---------------------------------------------------------------------------
# visible singularities and straight-line artifacts
# ---------------------------------------------------------------------------

def visible_set(wf, A, open_interior=False):
    """Samples whose codirection line meets A (its interior when flagged).

    A covector (x, xi) belongs to the visible cone when xi = alpha*omega for
    some omega in A and alpha != 0, i.e. when either of +-xi/|xi| lies in A.
    """
    want = ("interior",) if open_interior else ("interior", "boundary")
    kept = [
        cov for cov in wf
        if A.membership(Direction(cov.direction)) in want
        or A.membership(Direction(-cov.direction)) in want
    ]
    return WavefrontSet(kept, tol_x=wf.tol_x, tol_deg=wf.tol_deg)


@dataclass(frozen=True, eq=False)
class ArtifactLine:
    """Straight-line (or full-hyperplane) artifact generated at bd(A).

    Every artifact point x' satisfies x'.codirection = x.codirection: the
    spread stays inside the hyperplane H(codirection, x.codirection).
    """

    generator: Covector
    codirection: np.ndarray
    spread: np.ndarray | None
    full_hyperplane: bool = False

    @property
    def offset(self):
        return float(self.generator.x @ self.codirection)

    def points(self, t_samples):
        t = np.asarray(t_samples, dtype=float)
        t = t[t != 0.0]
        if self.full_hyperplane:
            raise ValueError("full-hyperplane artifacts have no single spread line")
        return self.generator.x + t[:, None] * self.spread

    def distance(self, pts):
        """Distance from points to the carrying hyperplane H(omega, offset)."""
        pts = np.asarray(pts, dtype=float)
        return np.abs(pts @ self.codirection - self.offset)


def _artifact_events(wf, A, fan_step_deg):
    """(covector, boundary direction, list of fiber vectors, full flag) tuples."""
    events = []
    for cov in wf:
        for sign in (1.0, -1.0):
            w = sign * cov.direction
            try:
                omega = Direction(w)
            except ValueError:
                continue
            if A.membership(omega) != "boundary":
                continue
            fiber = boundary_conormals(A, omega, fan_step_deg=fan_step_deg)
            events.append((cov, omega, _fiber_vectors(fiber, omega),
                           fiber.full_fiber))
    return events


def predict_artifacts(wf, A, fan_step_deg=5.0):
    """Artifact lines from wavefront samples with codirections on bd(A).

    One deduplicated line per (geometric line, carrying hyperplane): a
    +-covector pair at the same point generates the same line.
    """
    lines = []
    seen = set()
    for cov, omega, vecs, full in _artifact_events(wf, A, fan_step_deg):
        w = omega.coords
        s = float(cov.x @ w)
        wkey = _axis_key(w)
        skey = round(s * _axis_sign(w), 9)
        if full:
            key = (wkey, skey, "full")
            if key not in seen:
                seen.add(key)
                lines.append(ArtifactLine(cov, w, None, True))
            continue
        for y in vecs:
            # a geometric line is its spread axis plus its foot point
            foot = cov.x - float(cov.x @ y) * y
            key = (wkey, skey, _axis_key(y), _point_key(foot))
            if key not in seen:
                seen.add(key)
                lines.append(ArtifactLine(cov, w, y, False))
    return lines


def _axis_sign(v):
    for comp in v:
        if abs(comp) > 1e-12:
            return math.copysign(1.0, comp)
    return 1.0


def _axis_key(v, digits=9):
    sign = _axis_sign(v)
    return tuple(round(sign * comp, digits) for comp in v)


def _point_key(x, digits=9):
    return tuple(round(float(comp), digits) for comp in x)


class OracleMismatch(AssertionError):
    """The direct visible/artifact union disagrees with the composed pipeline."""

    def __init__(self, missing_direct, missing_composed):
        self.missing_direct = missing_direct
        self.missing_composed = missing_composed
        super().__init__(
            f"{len(missing_composed)} direct samples missing from the composed "
            f"set, {len(missing_direct)} composed samples missing from the "
            "direct set"
        )


def wavefront_upper_bound(wf, A, t_samples=None, fan_step_deg=5.0,
                          check_oracle=True):
    """Upper bound for the singularities of the hard-cutoff reconstruction.

    Returns visible_set(wf, A) united with the sampled artifact covectors.
    When check_oracle is set, the same set is computed independently by
    composing the transposed canonical relation with the product wavefront
    bound, and a mismatch raises OracleMismatch.
    """
    if t_samples is None:
        t_samples = default_t_samples()
    t_samples = np.asarray(t_samples, dtype=float)
    t_samples = t_samples[t_samples != 0.0]

    direct = visible_set(wf, A)
    art = []
    for cov, omega, vecs, _full in _artifact_events(wf, A, fan_step_deg):
        for y in vecs:
            for t in t_samples:
                art.append(Covector(cov.x + t * y, cov.direction, cov.magnitude))
    direct = direct.union(WavefrontSet(art, tol_x=wf.tol_x, tol_deg=wf.tol_deg))
    direct.diagnostics["visible"] = len(direct) - len(art)
    direct.diagnostics["artifact_samples"] = len(art)

    if check_oracle:
        composed = image_wavefront(
            product_wavefront(A, data_wavefront(wf), t_samples,
                              fan_step_deg=fan_step_deg)
        )
        missing_direct = uncovered(composed, direct, wf.tol_x, wf.tol_deg)
        missing_composed = uncovered(direct, composed, wf.tol_x, wf.tol_deg)
        if missing_direct or missing_composed:
            raise OracleMismatch(
                [composed.covectors[i] for i in missing_direct],
                [direct.covectors[i] for i in missing_composed],
            )
        direct.diagnostics["oracle_samples"] = len(composed)
        direct.diagnostics["oracle_dropped_zero_ds"] = (
            composed.diagnostics["dropped_zero_ds"]
        )
    return direct


# ---------------------------------------------------------------------------
# symbol of the smoothed reconstruction operator, and ellipticity
# ---------------------------------------------------------------------------

def _window_value(window, omega):
    if window is None:
        return 1.0
    if isinstance(window, AngularSet):
        return 1.0 if window.contains(omega) else 0.0
    return window.value(omega)


def reconstruction_symbol(x, xi, mu, nu, filter_spec, window=None):
    """Top-order symbol of the (smoothly cut off) reconstruction operator.

    (2 pi)^(n-1) / |xi|^(n-1) * [ phi(w) p(lam0) nu(w,x) mu(w,x)
    + phi(-w) p(lam1) nu(-w,x) mu(-w,x) ] with w = xi/|xi| and lam0, lam1
    the two data-side preimages of (x, xi).  window = None means full data
    (phi identically 1); an AngularSet gives the hard indicator.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    mag = float(np.linalg.norm(xi))
    if mag == 0:
        raise ValueError("xi must be nonzero")
    cov = Covector.from_xi(x, xi)
    lam0, lam1 = lift_covector(cov)
    n = x.shape[0]
    w = cov.direction
    phi0 = _window_value(window, Direction(w))
    phi1 = _window_value(window, Direction(-w))
    term0 = term1 = 0.0
    if phi0 != 0.0:
        term0 = (
            phi0
            * _filters.symbol_on_data_covector(filter_spec, lam0)
            * float(nu(w, x)) * float(mu(w, x))
        )
    if phi1 != 0.0:
        term1 = (
            phi1
            * _filters.symbol_on_data_covector(filter_spec, lam1)
            * float(nu(-w, x)) * float(mu(-w, x))
        )
    return (TWO_PI ** (n - 1)) / (mag ** (n - 1)) * (term0 + term1)


@dataclass
class EllipticityReport:
    elliptic: bool
    condition: str                  # "i" | "ii" | "none"
    symbol_elliptic_on_data: bool
    min_abs_filter_symbol: float
    margin: float | None = None     # min |sigma|*|xi|^(n-1) over V_int(A)
    witness: object = None          # covector where the bracket vanishes
    symmetric_support: bool | None = None
    notes: str = ""


def _sample_directions_in(A, count, interior_only=False):
    """Direction samples inside A (n = 2 arcs or n = 3 caps)."""
    out = []
    if A.full:
        if A.n == 2:
            from .geometry import uniform_circle

            return [Direction.from_angle(p) for p in uniform_circle(count)]
        from .geometry import fibonacci_sphere

        pts, _ = fibonacci_sphere(count)
        return [Direction(p) for p in pts]
    if A.n == 2:
        for a, b in A.arcs:
            width = b - a
            margin = 1e-6 * width if interior_only else 0.0
            for p in np.linspace(a + margin, b - margin, count):
                out.append(Direction.from_angle(p % TWO_PI))
        return out
    from .geometry import fibonacci_sphere

    pts, _ = fibonacci_sphere(max(count * 8, 64))
    want = ("interior",) if interior_only else ("interior", "boundary")
    out = [Direction(p) for p in pts if A.membership(p) in want]
    for c, rho in zip(A.cap_centers, A.cap_radii):
        out.append(Direction(np.asarray(c)))
    return out


def check_ellipticity(mu, nu, filter_spec, region, *, z_max=1.5, n_omega=40,
                      n_z=7, n_s=5, x_extent=0.8, n_x=3, im_tol=1e-9):
    """Decide ellipticity of the reconstruction operator on the visible cone.

    Checks that the filter symbol is nonvanishing on the restricted data
    covectors over A, then tests the non-symmetry condition (A disjoint from
    (-1)A) and the sign-constancy condition (symbol real of one sign there).
    If either holds, reports the sampled ellipticity margin of the full
    reconstruction symbol over the interior visible cone; otherwise returns
    a witness covector where the two-preimage sum cancels.
    """
    window = None
    if isinstance(region, AngularSet):
        A = region
    else:
        A = region.support
        window = region

    lo = tuple([-x_extent] * A.n)
    hi = tuple([x_extent] * A.n)
    for w8 in (mu, nu):
        if hasattr(w8, "min_on_box"):
            if w8.min_on_box(lo, hi, samples=16, ndir=16) <= 0.0:
                raise ValueError("weights must be strictly positive")

    # sample the restricted data covectors over A
    omegas = _sample_directions_in(A, n_omega)
    s_vals = np.linspace(-1.5, 1.5, n_s)
    z_vals = np.linspace(-z_max, z_max, n_z)
    sym_vals = []
    sym_points = []
    for om in omegas:
        for s in s_vals:
            for z in z_vals:
                for alpha in (1.0, -1.0):
                    if om.n == 2:
                        dc = DataCovector(om, float(s), -alpha * float(z), alpha)
                    else:
                        e1, _ = _plane_basis_cached(om)
                        dc = DataCovector(om, float(s), -alpha * z * e1, alpha)
                    sym_vals.append(_filters.symbol_on_data_covector(filter_spec, dc))
                    sym_points.append(dc)
    sym_vals = np.asarray(sym_vals)
    min_abs = float(np.min(np.abs(sym_vals)))
    scale = max(1.0, float(np.max(np.abs(sym_vals))))
    symbol_elliptic = min_abs > 1e-12 * scale

    cond_i = not A.intersects(A.reflected())
    real_symbol = float(np.max(np.abs(sym_vals.imag))) < im_tol
    re = sym_vals.real
    cond_ii = symbol_elliptic and real_symbol and (np.all(re > 0) or np.all(re < 0))

    report = EllipticityReport(
        elliptic=False,
        condition="none",
        symbol_elliptic_on_data=symbol_elliptic,
        min_abs_filter_symbol=min_abs,
        symmetric_support=A.is_symmetric(),
    )
    if not symbol_elliptic:
        worst = int(np.argmin(np.abs(sym_vals)))
        report.witness = sym_points[worst]
        report.notes = "filter symbol vanishes on the restricted data covectors"
        return report

    probe_axes = np.linspace(-x_extent, x_extent, n_x)
    if A.n == 2:
        xs = np.stack(np.meshgrid(probe_axes, probe_axes, indexing="ij"),
                      axis=-1).reshape(-1, 2)
    else:
        xs = np.stack(
            np.meshgrid(probe_axes, probe_axes, probe_axes, indexing="ij"),
            axis=-1,
        ).reshape(-1, 3)

    if cond_i or cond_ii:
        interior = _sample_directions_in(A, n_omega, interior_only=True)
        margin = math.inf
        for om in interior:
            for x in xs:
                sig = reconstruction_symbol(x, om.coords, mu, nu, filter_spec,
                                            window if window else A)
                margin = min(margin, abs(sig))
        report.elliptic = True
        report.condition = "i" if cond_i else "ii"
        report.margin = margin
        return report

    # find a cancellation witness on the visible cone
    worst_val = math.inf
    worst_cov = None
    for om in _sample_directions_in(A, n_omega):
        for x in xs:
            sig = reconstruction_symbol(x, om.coords, mu, nu, filter_spec,
                                        window if window else A)
            if abs(sig) < worst_val:
                worst_val = abs(sig)
                worst_cov = Covector(np.asarray(x, dtype=float), om.coords, 1.0)
    report.witness = worst_cov
    report.notes = (
        f"two-preimage sum reaches |sigma| = {worst_val:.3e} on the visible cone"
    )
    return report


_BASIS_CACHE = {}


def _plane_basis_cached(om):
    key = tuple(np.round(om.coords, 12))
    if key not in _BASIS_CACHE:
        from .geometry import plane_basis

        _BASIS_CACHE[key] = plane_basis(om.coords)
    return _BASIS_CACHE[key]
