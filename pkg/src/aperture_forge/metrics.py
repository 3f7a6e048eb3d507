"""Wiener deconvolution and the aperture-evaluation functionals.

A pattern is judged by two expected-error measures over a range of blur
scales, both expressed in photoelectrons so masks of different throughput
compare fairly:

* ``R`` — expected deblurring error when the correct kernel is used
  (lower is better);
* ``D`` — expected extra error from deblurring with a wrong kernel
  (higher is better: wrong scales should look obviously wrong);
* ``D_r`` — D between a kernel and its own 180-degree rotation, which is
  nonzero only for asymmetric masks and measures how well the two sides of
  the focal plane can be told apart.

Kernels are embedded in a fixed 64x64 working spectrum with their center
cell at the DFT origin, so kernel differences register phase as well as
magnitude and a symmetric kernel has an exactly real spectrum.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .imaging import AperturePattern, ApertureError, NaturalImagePrior, Psf, psf_from_pattern
from .radiometry import ImagingConfig, photons_per_hole
from . import scenes

WORKING_SIZE = 64
DEFAULT_SCALES = tuple(range(1, 11))


@dataclass(frozen=True)
class NsrMatrix:
    """Per-frequency expected noise-to-signal power ratio |C|^2."""

    c_sq: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c_sq, dtype=np.float64)
        if c.ndim != 2:
            raise ApertureError("NSR matrix must be 2-D")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ApertureError("NSR entries must be finite and non-negative")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "c_sq", c)

    @property
    def shape(self) -> tuple:
        return self.c_sq.shape


@dataclass(frozen=True)
class PatternScores:
    """Worst-case aggregate scores of one mask over a scale set."""

    r_max: float      # max over scales of the correct-kernel error R
    d_min: float      # min over ordered scale pairs of the wrong-kernel distance D
    d_r_min: float    # min over scales >= 2 of the flip distance D_r


def kernel_spectrum(psf: Psf, size: int = WORKING_SIZE, shape=None) -> np.ndarray:
    """DFT of a kernel embedded at the working size, center cell at (0, 0).

    The cyclic embedding keeps kernels of every scale aligned on a common
    origin, so spectra of different scales (and of flipped kernels) differ
    only by genuine shape and phase, not by placement. ``shape`` overrides
    ``size`` for non-square working domains.
    """
    if shape is None:
        shape = (size, size)
    side = psf.side
    if side > shape[0] or side > shape[1]:
        raise ApertureError(f"kernel side {side} exceeds working size {shape}")
    buf = np.zeros(shape)
    buf[:side, :side] = psf.kernel
    buf = np.roll(buf, (-psf.center, -psf.center), axis=(0, 1))
    return np.fft.fft2(buf)


@lru_cache(maxsize=1)
def metric_prior() -> NaturalImagePrior:
    """Mean-one single-hole prior shape at the metric working size.

    The empirical corpus prior fixes only the relative spectral shape; its
    absolute scale is normalized away (mean 1) and the photoelectron gain
    enters the functionals analytically through J_n^2.
    """
    raw = scenes.corpus_prior(WORKING_SIZE, WORKING_SIZE).a
    return NaturalImagePrior(raw / raw.mean())


def nsr(cfg: ImagingConfig, n: int, prior_a1: NaturalImagePrior) -> NsrMatrix:
    """Photoelectron-form NSR: (sigma_r^2 + n J) / ((n J)^2 A_1)."""
    if n < 1:
        raise ApertureError("open-hole count must be >= 1")
    j_n = n * photons_per_hole(cfg)
    c_sq = (cfg.read_noise_e ** 2 + j_n) / (j_n ** 2 * prior_a1.a)
    return NsrMatrix(c_sq)


def nsr_from_sigma(sigma: float, prior: NaturalImagePrior, floor: float = 1e-8) -> NsrMatrix:
    """Intensity-domain NSR for additive noise of standard deviation sigma.

    With an unnormalized DFT the expected noise power per bin is H*W*sigma^2,
    so |C|^2 = H*W*sigma^2 / A. The floor keeps Wiener division defined for
    noiseless inputs.
    """
    h, w = prior.shape
    c_sq = np.maximum(h * w * sigma ** 2 / prior.a, floor)
    return NsrMatrix(c_sq)


def wiener_deblur(f_spec: np.ndarray, k_spec: np.ndarray, c: NsrMatrix) -> np.ndarray:
    """Per-bin Wiener deconvolution conj(K) F / (|K|^2 + |C|^2)."""
    if f_spec.shape != k_spec.shape or f_spec.shape != c.shape:
        raise ApertureError(
            f"spectrum shapes differ: {f_spec.shape}, {k_spec.shape}, {c.shape}")
    return np.conj(k_spec) * f_spec / (np.abs(k_spec) ** 2 + c.c_sq)


def deblur_error_R(k_spec: np.ndarray, cfg: ImagingConfig, n: int,
                   prior_a1: NaturalImagePrior) -> float:
    """Normalized expected deblurring error with the correct kernel.

    R = (1/n^2) * sum_xi (sigma_r^2 + J_n) / (|K|^2 + (sigma_r^2 + J_n)/(J_n^2 A_1)).
    """
    j_n = n * photons_per_hole(cfg)
    sigma_sq = cfg.read_noise_e ** 2 + j_n
    c_sq = sigma_sq / (j_n ** 2 * prior_a1.a)
    r_n = np.sum(sigma_sq / (np.abs(k_spec) ** 2 + c_sq))
    return float(r_n) / n ** 2


def kernel_distance_D(k2_spec: np.ndarray, k1_spec: np.ndarray, cfg: ImagingConfig,
                      n: int, prior_a1: NaturalImagePrior) -> float:
    """Normalized expected extra error from deblurring with kernel K_2 an
    image blurred by K_1.

    D = (1/n^2) * sum_xi J_n^2 A_1 |K_2|^2 / (|K_2|^2 + |C_n|^2)^2 * |K_2 - K_1|^2.

    The kernel difference is complex, so spectral and phase mismatches both
    contribute; weighting depends on the deblurring kernel K_2 only, which
    makes D deliberately order-sensitive.
    """
    if k2_spec.shape != k1_spec.shape:
        raise ApertureError(f"spectrum shapes differ: {k2_spec.shape} vs {k1_spec.shape}")
    j_n = n * photons_per_hole(cfg)
    a_photon = j_n ** 2 * prior_a1.a
    c_sq = (cfg.read_noise_e ** 2 + j_n) / a_photon
    k2_sq = np.abs(k2_spec) ** 2
    weight = a_photon * k2_sq / (k2_sq + c_sq) ** 2
    d_n = np.sum(weight * np.abs(k2_spec - k1_spec) ** 2)
    return float(d_n) / n ** 2


def _flip_spectrum(psf: Psf, size: int) -> np.ndarray:
    return kernel_spectrum(Psf(psf.kernel[::-1, ::-1], psf.scale), size)


def score_pattern(pattern: AperturePattern, scales=DEFAULT_SCALES,
                  cfg: ImagingConfig | None = None,
                  prior_a1: NaturalImagePrior | None = None,
                  size: int = WORKING_SIZE) -> PatternScores:
    """Worst-case scores of one mask over a scale set.

    r_max is the largest R over the scales, d_min the smallest D over all
    ordered pairs of distinct scales, and d_r_min the smallest flip
    distance over scales >= 2 (the 1x1 sharp kernel is trivially symmetric,
    so it carries no side-of-focus information and is excluded).
    """
    scales = tuple(int(s) for s in scales)
    if not scales or len(set(scales)) != len(scales) or any(s < 1 for s in scales):
        raise ApertureError("scale set must be distinct positive integers")
    if cfg is None:
        cfg = ImagingConfig()
    if prior_a1 is None:
        prior_a1 = metric_prior()
    n = pattern.n
    psfs = {s: psf_from_pattern(pattern, s) for s in scales}
    specs = {s: kernel_spectrum(psfs[s], size) for s in scales}

    r_max = max(deblur_error_R(specs[s], cfg, n, prior_a1) for s in scales)
    if len(scales) > 1:
        d_min = min(
            kernel_distance_D(specs[s2], specs[s1], cfg, n, prior_a1)
            for s2 in scales for s1 in scales if s1 != s2
        )
    else:
        d_min = 0.0
    flip_scales = [s for s in scales if s > 1]
    if flip_scales:
        d_r_min = min(
            kernel_distance_D(specs[s], _flip_spectrum(psfs[s], size), cfg, n, prior_a1)
            for s in flip_scales
        )
    else:
        d_r_min = 0.0
    return PatternScores(r_max=r_max, d_min=d_min, d_r_min=d_r_min)
