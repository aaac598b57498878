"""Structure-tensor extraction of singularities from 2-D images, and metrics.

The detector reports edge/line positions with the codirection (gradient
axis) of the underlying singularity; codirections are compared modulo sign
since a real image does not distinguish +-xi.  It cannot separate two
singularities crossing at one pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from .microlocal import Covector, WavefrontSet


@dataclass(frozen=True)
class DetectorConfig:
    """Structure-tensor detector parameters (all scales in pixels)."""

    sigma_g: float = 1.5
    sigma_t: float = 3.0
    threshold: float = 0.1
    nms_radius: float = 2.0

    def __post_init__(self):
        if not self.sigma_g < self.sigma_t:
            raise ValueError("need sigma_g < sigma_t")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        if self.nms_radius <= 0:
            raise ValueError("nms_radius must be positive")


def response_field(img, cfg):
    """Principal structure-tensor eigenvalue and orientation per pixel.

    Returns (response, orientation) arrays; orientation is the gradient-axis
    angle in [0, pi).
    """
    if img.n != 2:
        raise ValueError("detector supports n = 2 images only")
    vals = np.real(np.asarray(img.values, dtype=complex)).astype(float)
    smooth = gaussian_filter(vals, cfg.sigma_g, mode="nearest")
    gx, gy = np.gradient(smooth, img.spacing)
    jxx = gaussian_filter(gx * gx, cfg.sigma_t, mode="nearest")
    jyy = gaussian_filter(gy * gy, cfg.sigma_t, mode="nearest")
    jxy = gaussian_filter(gx * gy, cfg.sigma_t, mode="nearest")
    half_trace = 0.5 * (jxx + jyy)
    disc = np.sqrt(np.maximum(0.25 * (jxx - jyy) ** 2 + jxy**2, 0.0))
    response = half_trace + disc
    orientation = np.mod(0.5 * np.arctan2(2.0 * jxy, jxx - jyy), math.pi)
    return response, orientation


def detect(img, cfg=DetectorConfig()):
    """Extract covector samples from an image.

    Keeps pixels whose response is at least threshold * max and is a local
    maximum along the principal axis at distance nms_radius; each detection
    carries the pixel's world position, the unit gradient axis and the
    response as magnitude.  A constant image yields the empty set.
    """
    response, orientation = response_field(img, cfg)
    peak = float(np.max(response))
    tol_x = 2.0 * img.spacing
    if not math.isfinite(peak) or peak <= 0.0:
        return WavefrontSet([], tol_x=tol_x)
    mask = response >= cfg.threshold * peak
    ii, jj = np.nonzero(mask)
    ux = np.cos(orientation[ii, jj])
    uy = np.sin(orientation[ii, jj])
    r = cfg.nms_radius
    ahead = _sample_pixels(response, ii + r * ux, jj + r * uy)
    behind = _sample_pixels(response, ii - r * ux, jj - r * uy)
    here = response[ii, jj]
    keep = (here >= ahead - 1e-12) & (here >= behind - 1e-12)
    origin = np.asarray(img.grid.origin)
    covs = []
    for k in np.nonzero(keep)[0]:
        x = origin + img.spacing * np.array([ii[k], jj[k]], dtype=float)
        covs.append(Covector(x, np.array([ux[k], uy[k]]), float(here[k])))
    return WavefrontSet(covs, tol_x=tol_x)


def _sample_pixels(arr, fi, fj):
    return map_coordinates(arr, np.stack([fi, fj]), order=1, mode="nearest")


def sample_response(img, cfg, points):
    """Structure-tensor response interpolated at world points (m, 2)."""
    response, _ = response_field(img, cfg)
    pts = np.asarray(points, dtype=float)
    frac = (pts - np.asarray(img.grid.origin)) / img.spacing
    return map_coordinates(response, frac.T, order=1, mode="nearest")


@dataclass
class DetectionReport:
    detected: WavefrontSet
    true_positive_rate: float
    spurious_rate: float
    mean_angular_error_deg: float
    matches: list = field(default_factory=list)   # (detected idx, reference idx)


def _axial_dedupe(covs):
    """Collapse +-codirection twins at identical points to one sample."""
    out = []
    for c in covs:
        dup = False
        for u in out:
            if np.linalg.norm(c.x - u.x) < 1e-9 and (
                np.linalg.norm(c.direction - u.direction) < 1e-9
                or np.linalg.norm(c.direction + u.direction) < 1e-9
            ):
                dup = True
                break
        if not dup:
            out.append(c)
    return out


def axial_angle_deg(d1, d2):
    """Angle in degrees between two codirection axes (sign ignored), in [0, 90]."""
    dot = abs(float(np.dot(d1, d2)))
    return math.degrees(math.acos(min(1.0, dot)))


def match(detected, reference, tol_x=None, tol_deg=None):
    """Greedy one-to-one nearest matching between two covector sample sets.

    Covectors match when base points are within tol_x and codirection axes
    within tol_deg.  Reports reference coverage (true positive rate), the
    fraction of unexplained detections (spurious rate) and the mean axial
    angular error over matches.
    """
    tol_x = reference.tol_x if tol_x is None else tol_x
    tol_deg = reference.tol_deg if tol_deg is None else tol_deg
    det = _axial_dedupe(detected.covectors)
    ref = _axial_dedupe(reference.covectors)
    if not ref or not det:
        return DetectionReport(
            detected=detected,
            true_positive_rate=0.0,
            spurious_rate=0.0 if not det else 1.0,
            mean_angular_error_deg=0.0,
        )
    pairs = []
    for i, c in enumerate(det):
        for j, r in enumerate(ref):
            dist = float(np.linalg.norm(c.x - r.x))
            if dist > tol_x:
                continue
            ang = axial_angle_deg(c.direction, r.direction)
            if ang > tol_deg:
                continue
            pairs.append((dist / max(tol_x, 1e-300) + ang / max(tol_deg, 1e-300),
                          i, j, ang))
    pairs.sort()
    used_det = set()
    used_ref = set()
    matches = []
    errors = []
    for _, i, j, ang in pairs:
        if i in used_det or j in used_ref:
            continue
        used_det.add(i)
        used_ref.add(j)
        matches.append((i, j))
        errors.append(ang)
    tp = len(used_ref) / len(ref)
    spurious = (len(det) - len(used_det)) / len(det)
    mean_err = float(np.mean(errors)) if errors else 0.0
    return DetectionReport(
        detected=detected,
        true_positive_rate=tp,
        spurious_rate=spurious,
        mean_angular_error_deg=mean_err,
        matches=matches,
    )


@dataclass(frozen=True)
class EnergySplit:
    in_band: float
    out_band: float

    @property
    def total(self):
        return self.in_band + self.out_band

    @property
    def in_band_fraction(self):
        return self.in_band / self.total if self.total > 0 else 0.0


def artifact_energy(img_limited, img_reference, lines, band_px=2.0, sigma_g=1.5):
    """Split the high-pass residual energy by distance to predicted lines.

    residual = (limited - reference); high-pass subtracts a Gaussian blur at
    4 * sigma_g.  in_band sums the squared residual within band_px pixels of
    any predicted artifact line, out_band the remainder.
    """
    if img_limited.grid != img_reference.grid:
        raise ValueError("images must share a grid")
    residual = np.real(img_limited.values - img_reference.values).astype(float)
    highpass = residual - gaussian_filter(residual, 4.0 * sigma_g, mode="nearest")
    energy = highpass**2 * img_limited.spacing ** img_limited.n
    if not lines:
        return EnergySplit(0.0, float(np.sum(energy)))
    pts = img_limited.grid.points().reshape(-1, img_limited.n)
    dist = np.full(pts.shape[0], np.inf)
    for line in lines:
        dist = np.minimum(dist, line.distance(pts))
    in_mask = (dist <= band_px * img_limited.spacing).reshape(img_limited.values.shape)
    in_band = float(np.sum(energy[in_mask]))
    out_band = float(np.sum(energy[~in_mask]))
    return EnergySplit(in_band, out_band)
