"""No-reference quality measures and the fixed-weight aggregate used to
decide which blur kernel produced an observed image.

The aggregate combines four measures that react to blur, noise, or ringing:

* normalized gradient sparsity (l1/l2 of the gradients) -- rises with both
  blur and noise, so lower is better;
* heavy-tailed gradient prior sum |grad f|^0.8 -- rises under wrong-kernel
  deblurring;
* sharpness index -- log-probability that random-phase surrogates of the
  image have smaller total variation, so higher means more phase coherence;
* pyramid ringing -- gradient energy present in the deblurred image but
  absent from the blurred observation, accumulated over a dyadic pyramid.

The published aggregate weights are frozen constants; retraining them is
out of scope.
"""

import zlib
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .imaging import ApertureError, Image

W_NORM_SPARSITY = -12.65
W_SHARPNESS = 0.073
W_SPARSITY = -0.289
W_PYR_RING = -9.86

SURROGATE_COUNT = 30
SHARPNESS_CLAMP = 300.0
RING_LEVELS = 3
RING_ALPHA = 1.5

_SI_SEED_SALT = 0x5EED_AF01


@dataclass(frozen=True)
class QualityReport:
    """The four component measures and their weighted aggregate."""

    norm_sparsity: float
    sparsity_prior: float
    sharpness_index: float
    pyramid_ring: float
    aggregate: float


def _gradients(data: np.ndarray):
    if data.shape[0] < 2 or data.shape[1] < 2:
        raise ApertureError("image must be at least 2x2 for gradient measures")
    return np.diff(data, axis=1), np.diff(data, axis=0)


def norm_sparsity(img: Image) -> float:
    """l1/l2 ratio of the concatenated forward-difference gradients.

    Zero-gradient (constant) images map to 0 by convention.
    """
    gx, gy = _gradients(img.data)
    g = np.concatenate([gx.ravel(), gy.ravel()])
    l2 = np.linalg.norm(g)
    if l2 == 0.0:
        return 0.0
    return float(np.abs(g).sum() / l2)


def sparsity_prior(img: Image) -> float:
    """Heavy-tailed gradient prior: sum of |grad f|^0.8 over both axes."""
    gx, gy = _gradients(img.data)
    return float(np.abs(gx).ravel().__pow__(0.8).sum()
                 + np.abs(gy).ravel().__pow__(0.8).sum())


def _total_variation(data: np.ndarray) -> float:
    gx, gy = _gradients(data)
    return float(np.abs(gx).sum() + np.abs(gy).sum())


def sharpness_index(img: Image, surrogates: int = SURROGATE_COUNT) -> float:
    """Phase-coherence sharpness: -log10 of the upper Gaussian tail of the
    image's total variation against random-phase surrogates.

    The surrogates share the image's power spectrum but have uniformly
    random phases, so mu and sigma estimate the TV distribution of
    phase-incoherent signals; a coherent (sharp) image sits far below mu.
    The RNG is seeded from the image content, so the measure is a pure
    function of its arguments. Result is clamped to [0, 300].
    """
    if surrogates < 2:
        raise ApertureError("need at least 2 surrogates to estimate mu and sigma")
    if img.height < 8 or img.width < 8:
        raise ApertureError("sharpness index needs at least an 8x8 image")
    seed = zlib.crc32(img.data.tobytes()) ^ _SI_SEED_SALT
    rng = np.random.default_rng(seed)
    amplitude = np.abs(np.fft.fft2(img.data))
    tvs = np.empty(surrogates)
    for i in range(surrogates):
        spec = np.fft.fft2(rng.standard_normal(img.data.shape))
        mag = np.abs(spec)
        phase = np.where(mag > 0, spec / np.where(mag > 0, mag, 1.0), 1.0)
        tvs[i] = _total_variation(np.fft.ifft2(amplitude * phase).real)
    mu = tvs.mean()
    sigma = tvs.std()
    x = (mu - _total_variation(img.data)) / max(sigma, 1e-12)
    si = -log_ndtr(-x) / np.log(10.0)  # upper tail Q(x) = ndtr(-x)
    return float(np.clip(si, 0.0, SHARPNESS_CLAMP))


def _grad_magnitude(data: np.ndarray) -> np.ndarray:
    gx, gy = _gradients(data)
    return np.hypot(gx[:-1, :], gy[:, :-1])


def _halve(data: np.ndarray) -> np.ndarray:
    h, w = (data.shape[0] // 2) * 2, (data.shape[1] // 2) * 2
    d = data[:h, :w]
    return 0.25 * (d[0::2, 0::2] + d[0::2, 1::2] + d[1::2, 0::2] + d[1::2, 1::2])


def pyramid_ring(blurred: Image, deblurred: Image, levels: int = RING_LEVELS,
                 alpha: float = RING_ALPHA) -> float:
    """Ringing estimate: gradient magnitude the deblurred image shows in
    excess of alpha times the blurred observation's, summed over a dyadic
    pyramid.

    Genuine structure appears in both gradient maps and is suppressed by
    the alpha margin; oscillatory deconvolution artifacts have no
    counterpart in the observation and survive. Identical inputs give 0.
    """
    if blurred.data.shape != deblurred.data.shape:
        raise ApertureError("blurred and deblurred images must share dimensions")
    b, d = blurred.data, deblurred.data
    total = 0.0
    for level in range(levels):
        if min(b.shape) < 3:
            break
        excess = _grad_magnitude(d) - alpha * _grad_magnitude(b)
        total += float(np.mean(np.maximum(excess, 0.0)))
        b, d = _halve(b), _halve(d)
    return total


def aggregate_quality(blurred: Image, deblurred: Image) -> QualityReport:
    """All four measures of the deblurred image plus their weighted sum.

    Higher aggregate means better quality; across candidate kernels the
    maximum marks the kernel that most plausibly produced the observation.
    """
    ns = norm_sparsity(deblurred)
    sp = sparsity_prior(deblurred)
    si = sharpness_index(deblurred)
    pr = pyramid_ring(blurred, deblurred)
    agg = (W_NORM_SPARSITY * ns + W_SHARPNESS * si
           + W_SPARSITY * sp + W_PYR_RING * pr)
    return QualityReport(norm_sparsity=ns, sparsity_prior=sp,
                         sharpness_index=si, pyramid_ring=pr, aggregate=agg)
