"""Bundled synthetic test scenes and the corpus behind the default priors.

The package ships no photographs; instead a fixed-seed procedural corpus of
natural-looking patches (1/f-style texture plus piecewise-constant shapes)
backs the default power-spectrum priors and the desk-scale experiments.
Everything here is deterministic for a given seed.
"""

from functools import lru_cache

import numpy as np

from .imaging import Image, NaturalImagePrior, estimate_prior

CORPUS_SEED = 20931
CORPUS_SIZE = 96
CORPUS_COUNT = 20


def _fractal_texture(size: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """Random-phase field with ~1/f^beta amplitude spectrum, scaled to [0,1]."""
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.fftfreq(size)[None, :]
    radius = np.hypot(fy, fx)
    amp = np.where(radius > 0, 1.0 / np.maximum(radius, 1e-9) ** beta, 0.0)
    phase = np.fft.fft2(rng.standard_normal((size, size)))
    field = np.fft.ifft2(amp * phase).real
    lo, hi = field.min(), field.max()
    if hi - lo < 1e-12:
        return np.zeros_like(field)
    return (field - lo) / (hi - lo)


def _add_shapes(img: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Overlay random rotated ellipses and axis-aligned rectangles."""
    size = img.shape[0]
    yy, xx = np.mgrid[0:size, 0:size]
    out = img.copy()
    for _ in range(rng.integers(4, 8)):
        level = rng.uniform(0.08, 0.92)
        cy, cx = rng.uniform(0.1, 0.9, 2) * size
        if rng.random() < 0.5:
            ay, ax = rng.uniform(0.07, 0.28, 2) * size
            th = rng.uniform(0.0, np.pi)
            u = (xx - cx) * np.cos(th) + (yy - cy) * np.sin(th)
            v = -(xx - cx) * np.sin(th) + (yy - cy) * np.cos(th)
            mask = (u / ax) ** 2 + (v / ay) ** 2 <= 1.0
        else:
            hy, hx = rng.uniform(0.05, 0.22, 2) * size
            mask = (np.abs(yy - cy) <= hy) & (np.abs(xx - cx) <= hx)
        alpha = rng.uniform(0.75, 1.0)
        out[mask] = (1 - alpha) * out[mask] + alpha * level
    return out


def _make_patch(size: int, rng: np.random.Generator) -> Image:
    """Piecewise-smooth scene: sparse crisp edges over smooth shading with a
    little 1/f texture, mimicking natural gradient statistics (sharp images
    have sparse strong gradients, which the quality measures rely on)."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    gdir = rng.uniform(0.0, 2.0 * np.pi)
    img = (0.45 + 0.25 * (np.cos(gdir) * xx + np.sin(gdir) * yy)
           + 0.1 * np.sin(2.0 * np.pi * (0.7 * xx + 0.4 * yy) + rng.uniform(0.0, 6.0)))
    img = _add_shapes(img, rng)
    tex_amp = rng.uniform(0.02, 0.06)
    img = img + tex_amp * (_fractal_texture(size, 1.3, rng) - 0.5)
    return Image(np.clip(0.04 + 0.92 * img, 0.0, 1.0))


def bundled_patches(count: int = CORPUS_COUNT, size: int = CORPUS_SIZE,
                    seed: int = CORPUS_SEED) -> list:
    """The fixed corpus of natural-looking patches used across the package."""
    rng = np.random.default_rng(seed)
    return [_make_patch(size, rng) for _ in range(count)]


def _center_crop(img: Image, h: int, w: int) -> Image:
    y0 = (img.height - h) // 2
    x0 = (img.width - w) // 2
    return Image(img.data[y0:y0 + h, x0:x0 + w])


@lru_cache(maxsize=16)
def corpus_prior(pad_h: int, pad_w: int) -> NaturalImagePrior:
    """Empirical power-spectrum prior of the bundled corpus at a working size.

    Patches larger than the working size are center-cropped first so the
    zero-padding precondition of the estimator holds.
    """
    patches = bundled_patches()
    h = min(pad_h, CORPUS_SIZE)
    w = min(pad_w, CORPUS_SIZE)
    images = [_center_crop(p, h, w) for p in patches]
    return estimate_prior(images, pad_w, pad_h)


def two_region_scene(size: int = 64, split: float = 0.5, low: float = 0.25,
                     high: float = 0.75, seed: int = 7) -> tuple[Image, np.ndarray]:
    """Sharp scene with an intensity edge splitting it into two regions.

    Returns the image and an int mask (0 = left region, 1 = right region).
    Each side carries its own texture around a distinct mean intensity, so
    the intensity edge lines up with the intended depth edge.
    """
    rng = np.random.default_rng(seed)
    edge = int(round(size * split))
    img = np.empty((size, size))
    img[:, :edge] = low
    img[:, edge:] = high
    img += 0.15 * (_fractal_texture(size, 1.2, rng) - 0.5)
    labels = np.zeros((size, size), dtype=np.int32)
    labels[:, edge:] = 1
    return Image(np.clip(img, 0.0, 1.0)), labels
