"""Portable float grid files for images and sinograms.

One ASCII header line, then the row-major samples as 64-bit little-endian
floats (complex data stores interleaved real/imaginary pairs):

    PFG <n> <dims...> <spacing per axis...> <origin...> <real|complex>
    PFG sino <n> <ndir> <noffsets> <ds> <s0> <real|complex> <support string>

Sinogram direction lists are regenerated from the count: uniform angles
2*pi*j/ndir for n = 2 and the Fibonacci point set for n = 3.  The support
string is the angular set's config serialization or "full".
"""

from __future__ import annotations

import numpy as np

from .geometry import AngularSet, fibonacci_sphere, theta, uniform_circle
from .transform import Grid, Image, OffsetGrid, Sinogram


def _write_array(handle, values):
    if np.iscomplexobj(values):
        arr = np.empty(values.shape + (2,), dtype="<f8")
        arr[..., 0] = values.real
        arr[..., 1] = values.imag
    else:
        arr = np.asarray(values, dtype="<f8")
    handle.write(arr.tobytes(order="C"))


def _read_array(handle, shape, is_complex):
    count = int(np.prod(shape)) * (2 if is_complex else 1)
    raw = np.frombuffer(handle.read(count * 8), dtype="<f8", count=count)
    if is_complex:
        raw = raw.reshape(-1, 2)
        return (raw[:, 0] + 1j * raw[:, 1]).reshape(shape)
    return raw.reshape(shape).copy()


def write_image(path, img):
    n = img.n
    parts = (
        ["PFG", str(n)]
        + [str(d) for d in img.grid.dims]
        + [f"{img.spacing:.17g}"] * n
        + [f"{o:.17g}" for o in img.grid.origin]
        + ["complex" if np.iscomplexobj(img.values) else "real"]
    )
    with open(path, "wb") as handle:
        handle.write((" ".join(parts) + "\n").encode("ascii"))
        _write_array(handle, img.values)


def write_sinogram(path, g):
    support = (
        "full" if g.angular_support is None
        else g.angular_support.to_config_string()
    )
    parts = [
        "PFG", "sino", str(g.n), str(g.ndir), str(g.offsets.count),
        f"{g.offsets.spacing:.17g}", f"{g.offsets.start:.17g}",
        "complex" if np.iscomplexobj(g.values) else "real",
        support,
    ]
    with open(path, "wb") as handle:
        handle.write((" ".join(parts) + "\n").encode("ascii"))
        _write_array(handle, g.values)


def read(path):
    """Read a PFG file; returns an Image or a Sinogram."""
    with open(path, "rb") as handle:
        header = handle.readline().decode("ascii").strip().split()
        if not header or header[0] != "PFG":
            raise ValueError(f"{path}: not a PFG file")
        if header[1] == "sino":
            n = int(header[2])
            ndir = int(header[3])
            noff = int(header[4])
            ds = float(header[5])
            s0 = float(header[6])
            is_complex = header[7] == "complex"
            support_str = " ".join(header[8:])
            values = _read_array(handle, (ndir, noff), is_complex)
            if n == 2:
                angles = uniform_circle(ndir)
                dirs = theta(angles)
            else:
                angles = None
                dirs, _ = fibonacci_sphere(ndir)
            support = (
                None if support_str == "full"
                else AngularSet.from_config_string(support_str, n=n)
            )
            return Sinogram(
                directions=dirs,
                offsets=OffsetGrid(noff, ds, s0),
                values=values,
                angles=angles,
                angular_support=support,
            )
        n = int(header[1])
        dims = tuple(int(v) for v in header[2:2 + n])
        spacings = [float(v) for v in header[2 + n:2 + 2 * n]]
        if any(abs(sp - spacings[0]) > 1e-12 for sp in spacings):
            raise ValueError(f"{path}: anisotropic spacing is not supported")
        origin = tuple(float(v) for v in header[2 + 2 * n:2 + 3 * n])
        is_complex = header[2 + 3 * n] == "complex"
        values = _read_array(handle, dims, is_complex)
        return Image(Grid(dims, spacings[0], origin), values)
