"""Image container, Fourier transforms, coded-aperture PSF synthesis, blur
simulation, natural-image power-spectrum priors, and thin-lens blur geometry.

Conventions used throughout the package:

* images are grayscale, row-major ``float64`` arrays with values in [0, 1];
* spectra are unnormalized forward DFTs with the DC bin at index (0, 0);
* a blur scale ``s`` is a signed integer whose magnitude is the kernel side
  length and whose sign selects the side of the focal plane (``|s| = 1`` is
  the sharp delta kernel, so ``s = 0`` is meaningless);
* kernels for ``s < 0`` are the 180-degree rotations of the kernels for
  ``|s|``, mirroring how a defocus PSF flips across the focal plane.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

GRID_N = 7  # aperture mask resolution (N x N binary cells)


class ApertureError(ValueError):
    """Raised for invalid patterns, kernels, or geometry inputs."""


@dataclass(frozen=True)
class Image:
    """Grayscale image with intensities clamped to [0, 1].

    The pixel buffer is made read-only on construction so instances can be
    shared freely across threads.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ApertureError(f"image must be 2-D and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ApertureError("image contains non-finite values")
        arr = np.clip(arr, 0.0, 1.0)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class AperturePattern:
    """7x7 binary aperture mask; the chromosome of the pattern search."""

    grid: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=bool)
        if g.shape != (GRID_N, GRID_N):
            raise ApertureError(f"pattern grid must be {GRID_N}x{GRID_N}, got {g.shape}")
        if not g.any():
            raise ApertureError("pattern must have at least one open cell")
        g = g.copy()
        g.flags.writeable = False
        object.__setattr__(self, "grid", g)

    @property
    def n(self) -> int:
        """Number of open cells (the mask throughput)."""
        return int(self.grid.sum())

    @property
    def bits(self) -> tuple:
        """Row-major tuple of 49 booleans."""
        return tuple(bool(b) for b in self.grid.ravel())

    def rot180(self) -> "AperturePattern":
        return AperturePattern(self.grid[::-1, ::-1])

    def is_symmetric(self) -> bool:
        """True if the mask equals its own 180-degree rotation."""
        return bool(np.array_equal(self.grid, self.grid[::-1, ::-1]))

    @classmethod
    def from_bits(cls, bits) -> "AperturePattern":
        b = np.asarray(list(bits), dtype=bool)
        if b.size != GRID_N * GRID_N:
            raise ApertureError(f"expected {GRID_N * GRID_N} bits, got {b.size}")
        return cls(b.reshape(GRID_N, GRID_N))


@dataclass(frozen=True)
class Psf:
    """Normalized non-negative blur kernel at a signed blur scale."""

    kernel: np.ndarray
    scale: int

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=np.float64)
        if self.scale == 0:
            raise ApertureError("blur scale 0 is undefined")
        side = abs(int(self.scale))
        if k.shape != (side, side):
            raise ApertureError(f"kernel side must be |scale| = {side}, got {k.shape}")
        if np.any(k < 0) or not np.all(np.isfinite(k)):
            raise ApertureError("kernel entries must be finite and non-negative")
        total = k.sum()
        if total <= 0:
            raise ApertureError("kernel must have positive mass")
        k = k / total
        k.flags.writeable = False
        object.__setattr__(self, "kernel", k)

    @property
    def side(self) -> int:
        return abs(int(self.scale))

    @property
    def center(self) -> int:
        """0-based index of the center cell along each axis."""
        return (self.side - 1) // 2


@dataclass(frozen=True)
class NaturalImagePrior:
    """Expected power spectrum A of natural images at a working size."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.ndim != 2:
            raise ApertureError("prior must be a 2-D matrix")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ApertureError("prior entries must be finite and positive")
        if a[0, 0] < a.max():
            raise ApertureError("prior DC bin must be the largest entry")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    @property
    def shape(self) -> tuple:
        return self.a.shape


@dataclass(frozen=True)
class ThinLensConfig:
    """Thin-lens geometry; distances in mm, pixel pitch in micrometers."""

    focal_length_mm: float
    focus_distance_mm: float
    aperture_diameter_mm: float
    pixel_pitch_um: float = 5.1

    def __post_init__(self):
        if not (self.focus_distance_mm > self.focal_length_mm > 0):
            raise ApertureError("need focus distance > focal length > 0")
        if self.aperture_diameter_mm <= 0 or self.pixel_pitch_um <= 0:
            raise ApertureError("aperture diameter and pixel pitch must be positive")


def dft(image: Image, pad_w: int, pad_h: int) -> np.ndarray:
    """Unnormalized 2-D DFT of an image zero-padded to (pad_h, pad_w).

    The DC bin sits at index (0, 0), so a constant image of value c maps to
    a single bin of value ``c * pad_w * pad_h``.
    """
    if pad_w < 1 or pad_h < 1:
        raise ApertureError("pad dimensions must be at least 1")
    if pad_h < image.height or pad_w < image.width:
        raise ApertureError(
            f"pad dims ({pad_h}x{pad_w}) smaller than image ({image.height}x{image.width})"
        )
    return np.fft.fft2(image.data, s=(pad_h, pad_w))


def idft(spectrum: np.ndarray, width: int | None = None, height: int | None = None) -> np.ndarray:
    """Inverse DFT; returns the real part, cropped to (height, width) if given."""
    out = np.fft.ifft2(spectrum).real
    if height is not None or width is not None:
        out = out[: height or out.shape[0], : width or out.shape[1]]
    return out


def _overlap_matrix(target: int, source: int) -> np.ndarray:
    """1-D area-overlap weights mapping `source` cells onto `target` cells.

    Row u holds, for every source cell i, the length of the intersection of
    [u, u+1] with the source cell's image [i*t/s, (i+1)*t/s] on the target
    axis. Rows of the full 2-D tensor product then integrate the source
    grid exactly, so resampling is exact whenever target is a multiple of
    source.
    """
    ratio = target / source
    w = np.zeros((target, source))
    for u in range(target):
        for i in range(source):
            lo = max(u, i * ratio)
            hi = min(u + 1.0, (i + 1) * ratio)
            if hi > lo:
                w[u, i] = hi - lo
    return w


def psf_from_pattern(pattern: AperturePattern, s: int) -> Psf:
    """Resample the aperture mask into the |s| x |s| defocus kernel.

    Uses area-weighted box resampling of the open-cell indicator, then
    renormalizes to unit sum. Negative scales return the 180-degree rotated
    kernel, matching the PSF flip across the focal plane.
    """
    if s == 0:
        raise ApertureError("blur scale 0 is undefined")
    side = abs(int(s))
    w = _overlap_matrix(side, GRID_N)
    kernel = w @ pattern.grid.astype(np.float64) @ w.T
    if s < 0:
        kernel = kernel[::-1, ::-1]
    return Psf(kernel, int(s))


def blur(image: Image, psf: Psf, sigma: float, rng: np.random.Generator | None = None) -> Image:
    """Convolve with a PSF (edge-replicate boundary), add Gaussian noise.

    The kernel center is its ``(side-1)//2`` cell, so output pixel (y, x)
    is sum_{i,j} k[i,j] * f[y-i+c, x-j+c] with out-of-range coordinates
    clamped to the border. Output is clamped to [0, 1].
    """
    side = psf.side
    if side > image.height or side > image.width:
        raise ApertureError(f"psf side {side} exceeds image dims {image.data.shape}")
    if side == 1:
        out = image.data.copy()
    else:
        c = psf.center
        padded = np.pad(image.data, ((side - 1 - c, c), (side - 1 - c, c)), mode="edge")
        out = signal.convolve(padded, psf.kernel, mode="valid")
    if sigma > 0:
        if rng is None:
            rng = np.random.default_rng()
        out = out + rng.normal(0.0, sigma, out.shape)
    return Image(np.clip(out, 0.0, 1.0))


def estimate_prior(corpus, pad_w: int, pad_h: int) -> NaturalImagePrior:
    """Empirical expected power spectrum: mean |DFT|^2 over the corpus.

    Each image is zero-padded to the working size before transforming; the
    result is floored at 1e-12 so downstream noise-to-signal ratios stay
    finite.
    """
    corpus = list(corpus)
    if not corpus:
        raise ApertureError("prior corpus is empty")
    acc = np.zeros((pad_h, pad_w))
    for img in corpus:
        acc += np.abs(dft(img, pad_w, pad_h)) ** 2
    acc /= len(corpus)
    return NaturalImagePrior(np.maximum(acc, 1e-12))


def blur_size(lens: ThinLensConfig, u_mm: float) -> tuple[float, int]:
    """Thin-lens blur diameter in pixels for an object at distance u.

    Returns ``(diameter_px, side)`` where side is +1 for objects in front
    of the focal plane (closer than the focus distance), -1 behind it, and
    0 exactly in focus. The diameter is D_a * |v - v0| / v0 converted from
    mm to pixels by the pixel pitch.
    """
    f = lens.focal_length_mm
    if u_mm <= f:
        raise ApertureError(f"object distance {u_mm} must exceed focal length {f}")
    v = f * u_mm / (u_mm - f)
    v0 = f * lens.focus_distance_mm / (lens.focus_distance_mm - f)
    diff = v - v0
    diameter_mm = lens.aperture_diameter_mm * abs(diff) / v0
    diameter_px = diameter_mm / (lens.pixel_pitch_um * 1e-3)
    side = 0 if diff == 0 else (1 if diff > 0 else -1)
    return diameter_px, side


# ---------------------------------------------------------------------------
# Stock patterns
# ---------------------------------------------------------------------------

def pinhole_pattern() -> AperturePattern:
    """Single open cell at the mask center."""
    g = np.zeros((GRID_N, GRID_N), dtype=bool)
    g[GRID_N // 2, GRID_N // 2] = True
    return AperturePattern(g)


def open_pattern() -> AperturePattern:
    """Fully open mask (all 49 cells)."""
    return AperturePattern(np.ones((GRID_N, GRID_N), dtype=bool))


def conventional_pattern(n: int) -> AperturePattern:
    """Centrally symmetric disk-like mask with exactly n open cells.

    Cells are added nearest-first from the mask center; off-center cells
    are always added together with their 180-degree partners so the result
    is symmetric (the center cell is used only when n is odd). This is the
    circular-aperture stand-in used when comparing a coded mask against a
    conventional one of equal throughput.
    """
    if not 1 <= n <= GRID_N * GRID_N:
        raise ApertureError(f"open-cell count {n} out of range [1, {GRID_N * GRID_N}]")
    c = GRID_N // 2
    units = []  # (distance, row, col, cells)
    for r in range(GRID_N):
        for col in range(GRID_N):
            pr, pc = GRID_N - 1 - r, GRID_N - 1 - col
            if (r, col) == (c, c):
                units.append((0.0, r, col, [(r, col)]))
            elif (r, col) < (pr, pc):
                d = float(np.hypot(r - c, col - c))
                units.append((d, r, col, [(r, col), (pr, pc)]))
    units.sort()
    g = np.zeros((GRID_N, GRID_N), dtype=bool)
    remaining = n
    want_center = n % 2 == 1
    for _, _, _, cells in units:
        if len(cells) == 1:
            if want_center:
                g[cells[0]] = True
                remaining -= 1
            continue
        if remaining >= 2:
            for cell in cells:
                g[cell] = True
            remaining -= 2
        if remaining == 0:
            break
    return AperturePattern(g)


def default_coded_pattern() -> AperturePattern:
    """The asymmetric coded mask shipped with the tool.

    Produced by the bundled NSGA-II search (``aperture-forge search``) at
    the default imaging configuration and selected from the final front by
    maximum flip distance; frozen here so downstream pipelines and tests
    have a stable pattern to refer to.
    """
    rows = (
        "1100110",
        "0000000",
        "1000011",
        "1000001",
        "0000011",
        "0110000",
        "1100110",
    )
    g = np.array([[ch == "1" for ch in row] for row in rows], dtype=bool)
    return AperturePattern(g)
