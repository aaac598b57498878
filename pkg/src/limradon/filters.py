"""Fourier-multiplier filters in the offset variable and smooth angular cutoffs.

A filter is described by its symbol p(omega, s, alpha) where alpha is the
ds-frequency under the convention alpha_k = 2*pi*k/(N*ds) on a padded grid
of length N.  Predefined filters depend on alpha only; symbols with genuine
s-dependence are applied with a frozen-coefficient windowed FFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.fft import next_fast_len

from .geometry import AngularSet, Direction, theta

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FilterSpec:
    """A pseudodifferential filter acting per direction row in the offset.

    func(alpha, s, omega) evaluates the symbol; alpha may be an array, s a
    frozen scalar and omega the row's unit direction (ignored by the
    predefined filters).  order is the homogeneity degree of the predefined
    symbols.
    """

    name: str
    order: float
    func: object
    s_dependent: bool = False
    omega_dependent: bool = False
    homogeneous: bool = True

    def symbol(self, alpha, s=0.0, omega=None):
        return np.asarray(self.func(np.asarray(alpha, dtype=float), s, omega))

    @classmethod
    def fbp(cls, n=2):
        """Exact-inversion filter: 0.5 * (2*pi)^(1-n) * |alpha|^(n-1)."""
        scale = 0.5 * (TWO_PI) ** (1 - n)
        return cls("fbp", float(n - 1), lambda a, s, w: scale * np.abs(a) ** (n - 1))

    @classmethod
    def lam(cls, n=2):
        """Lambda (local) filter: 0.5 * (2*pi)^(1-n) * |alpha|^n."""
        scale = 0.5 * (TWO_PI) ** (1 - n)
        return cls("lambda", float(n), lambda a, s, w: scale * np.abs(a) ** n)

    @classmethod
    def derivative(cls):
        """d/ds, symbol i*alpha."""
        return cls("dds", 1.0, lambda a, s, w: 1j * a)

    @classmethod
    def identity(cls):
        return cls("identity", 0.0, lambda a, s, w: np.ones_like(a))

    @classmethod
    def multiplier(cls, name, func, order=0.0, s_dependent=False,
                   omega_dependent=False, homogeneous=False):
        """Custom symbol from a callable(alpha, s, omega)."""
        return cls(name, float(order), func, s_dependent, omega_dependent,
                   homogeneous)


def symbol_on_data_covector(filter_spec, dc):
    """Evaluate the filter symbol at a data covector (omega, s, eta)."""
    val = filter_spec.symbol(dc.eta_s, s=dc.s, omega=dc.omega.coords)
    return complex(val)


def _taper_row_ends(values, taper):
    if taper <= 0:
        return values
    ramp = np.arange(1, taper + 1) / float(taper + 1)
    out = values.copy()
    out[..., :taper] *= ramp
    out[..., -taper:] *= ramp[::-1]
    return out


def apply_filter(g, filter_spec, *, pad_factor=2, taper=8):
    """Apply a Fourier-multiplier filter to every direction row of a sinogram.

    Rows are zero-padded to at least pad_factor * N (rounded to an FFT-fast
    length) to suppress circular wrap, with a short linear taper of the row
    ends; frequencies are alpha_k = 2*pi*k/(N_pad * ds).  Real rows stay real
    whenever the symbol is Hermitian (p(-a) = conj(p(a))).
    """
    ds = g.offsets.spacing
    noff = g.offsets.count
    npad = next_fast_len(max(int(pad_factor * noff), noff))
    alpha = TWO_PI * np.fft.fftfreq(npad, d=ds)

    rows = _taper_row_ends(np.asarray(g.values), min(taper, noff // 4))
    if filter_spec.s_dependent:
        out = np.stack([
            _filter_row_frozen(rows[j], g, filter_spec, j, npad, alpha)
            for j in range(g.ndir)
        ])
    elif filter_spec.omega_dependent:
        out = np.empty(rows.shape, dtype=complex)
        for j in range(g.ndir):
            mult = filter_spec.symbol(alpha, s=0.0, omega=g.directions[j])
            out[j] = _multiply_row(rows[j], mult, npad, noff)
    else:
        mult = filter_spec.symbol(alpha, s=0.0, omega=None)
        spec = np.fft.fft(rows, n=npad, axis=1)
        out = np.fft.ifft(spec * mult, axis=1)[:, :noff]
    if not np.iscomplexobj(g.values):
        hermitian = np.allclose(
            filter_spec.symbol(-alpha), np.conj(filter_spec.symbol(alpha)),
            atol=1e-13 * max(1.0, float(np.max(np.abs(filter_spec.symbol(alpha))))),
        ) if not (filter_spec.s_dependent or filter_spec.omega_dependent) else False
        if hermitian:
            out = out.real
    return replace(g, values=out)


def _multiply_row(row, mult, npad, noff):
    return np.fft.ifft(np.fft.fft(row, n=npad) * mult)[:noff]


def _filter_row_frozen(row, g, filter_spec, j, npad, alpha):
    """Kohn-Nirenberg style frozen-coefficient filtering for s-dependent symbols.

    The row is split into half-overlapping Hann windows and the symbol is
    frozen at each window center; the windowed pieces overlap-add back with
    pointwise normalization by the window sum.
    """
    noff = row.shape[0]
    length = min(noff, 64)
    if length % 2:
        length -= 1
    hop = length // 2
    win = 0.5 - 0.5 * np.cos(TWO_PI * np.arange(length) / length)  # periodic Hann
    chunk_pad = next_fast_len(2 * length)
    chunk_alpha = TWO_PI * np.fft.fftfreq(chunk_pad, d=g.offsets.spacing)
    out = np.zeros(noff, dtype=complex)
    norm = np.zeros(noff)
    omega = g.directions[j]
    start = 0
    while start < noff:
        stop = min(start + length, noff)
        w = win[: stop - start]
        piece = row[start:stop] * w
        s_center = g.offsets.start + g.offsets.spacing * (start + (stop - start) / 2.0)
        mult = filter_spec.symbol(chunk_alpha, s=s_center, omega=omega)
        filtered = np.fft.ifft(np.fft.fft(piece, n=chunk_pad) * mult)[: stop - start]
        out[start:stop] += filtered
        norm[start:stop] += w
        start += hop
    norm[norm == 0] = 1.0
    return out / norm


def _bump_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, strictly increasing between."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        fa = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        fb = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return fa / (fa + fb)


@dataclass(frozen=True)
class CutoffWindow:
    """Smooth angular window supported in a closed angular set.

    Ramps from 0 on bd(A) to 1 at geodesic depth tau inside A; profile
    "cos" is the C^1 raised cosine, "bump" the C-infinity step used when the
    smooth-cutoff theory is exercised exactly.
    """

    support: AngularSet
    tau: float
    profile: str = "cos"
    even: bool = False

    def _profile(self, u):
        if self.profile == "cos":
            return 0.5 * (1.0 - np.cos(math.pi * np.clip(u, 0.0, 1.0)))
        return _bump_step(np.clip(u, 0.0, 1.0))

    def value(self, omega):
        """phi(omega) in [0, 1] for a single direction."""
        if not isinstance(omega, Direction):
            omega = Direction(np.asarray(omega, dtype=float))
        val = float(self._profile(self.support.geodesic_depth(omega) / self.tau))
        if self.even:
            val = 0.5 * (
                val + float(self._profile(self.support.geodesic_depth(-omega) / self.tau))
            )
        return val

    def values_for_angles(self, phis):
        """Vectorized evaluation for n = 2 angle arrays."""
        phis = np.asarray(phis, dtype=float)
        depth = np.array(
            [self.support.geodesic_depth(p) for p in phis.ravel()]
        ).reshape(phis.shape)
        vals = self._profile(depth / self.tau)
        if self.even:
            depth2 = np.array(
                [self.support.geodesic_depth(p + math.pi) for p in phis.ravel()]
            ).reshape(phis.shape)
            vals = 0.5 * (vals + self._profile(depth2 / self.tau))
        return vals

    def __call__(self, arg):
        if isinstance(arg, Direction):
            return self.value(arg)
        arr = np.asarray(arg, dtype=float)
        if arr.ndim == 0:
            return float(self.values_for_angles(arr))
        if arr.ndim == 1 and arr.shape[0] == 3:
            return self.value(arr)
        return self.values_for_angles(arr)


def make_window(A, tau, profile="cos", even=False):
    """Build a CutoffWindow after validating tau and the parity request."""
    if profile not in ("cos", "bump"):
        raise ValueError(f"unknown window profile {profile!r}")
    tau = float(tau)
    if tau <= 0:
        raise ValueError("transition width tau must be positive")
    if not A.full and tau >= 0.5 * A.min_width():
        raise ValueError(
            "transition width must be below half the smallest arc/cap width"
        )
    if even and not A.is_symmetric():
        raise ValueError("even window requires a symmetric angular set")
    return CutoffWindow(support=A, tau=tau, profile=profile, even=even)
