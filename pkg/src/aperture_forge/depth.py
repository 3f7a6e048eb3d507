"""Blur-scale estimation and coherent depth labeling.

The pipeline: deblur a patch with every kernel in a bank, score each result
with the no-reference quality aggregate, and keep the two most plausible
scales per patch with softmax probabilities. Sliding the patch over the
image yields a raw per-pixel probability volume, which an 8-connected MRF
(data term = smoothed negative log probabilities, pairwise term =
intensity-weighted absolute scale difference) turns into a clean depth map
via alpha-expansion graph cuts.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import ApertureError, AperturePattern, Image, Psf, psf_from_pattern
from .metrics import NsrMatrix, kernel_spectrum, nsr_from_sigma
from .quality import aggregate_quality
from .deconv import edgetaper
from .maxflow import max_flow
from ._parallel import parallel_map
from . import scenes

MIN_PATCH = 32
MAX_SWEEPS = 10
_NEIGHBOR_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))  # 8-connectivity, one arc per pair


@dataclass(frozen=True)
class MrfParams:
    """Smoothing weights of the depth MRF."""

    lambda0: float = 1000.0
    sigma_lambda: float = 0.006
    gauss_std: float = 0.1
    prob_floor: float = 1e-6

    def __post_init__(self):
        for name in ("lambda0", "sigma_lambda", "gauss_std", "prob_floor"):
            if getattr(self, name) <= 0:
                raise ApertureError(f"{name} must be positive")


class KernelBank:
    """Signed-scale to PSF map used for estimation and restoration."""

    def __init__(self, entries: dict):
        if not entries:
            raise ApertureError("kernel bank is empty")
        cleaned = {}
        for s, psf in entries.items():
            s = int(s)
            if s == 0:
                raise ApertureError("blur scale 0 is undefined")
            if psf.scale != s:
                raise ApertureError(f"bank entry {s} holds a psf of scale {psf.scale}")
            cleaned[s] = psf
        self.entries = cleaned

    @classmethod
    def from_pattern(cls, pattern: AperturePattern, scales) -> "KernelBank":
        return cls({int(s): psf_from_pattern(pattern, int(s)) for s in scales})

    @property
    def scales(self) -> tuple:
        """Scales in estimation preference order: small |s| first, + before -."""
        return tuple(sorted(self.entries, key=lambda s: (abs(s), 0 if s > 0 else 1)))

    @property
    def max_side(self) -> int:
        return max(psf.side for psf in self.entries.values())


@dataclass(frozen=True)
class DepthVolume:
    """Per-pixel blur-scale probabilities; at most two nonzero per pixel."""

    probs: np.ndarray        # (H, W, S)
    legend: tuple            # scale index -> signed scale

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 3 or p.shape[2] != len(self.legend):
            raise ApertureError("volume must be H x W x S with S matching the legend")
        if np.any(p < 0) or np.any(p > 1):
            raise ApertureError("probabilities must lie in [0, 1]")
        nonzero = (p > 0).sum(axis=2)
        if np.any(nonzero > 2):
            raise ApertureError("at most two nonzero probabilities per pixel")
        sums = p.sum(axis=2)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ApertureError("per-pixel probabilities must sum to 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "legend", tuple(int(s) for s in self.legend))


@dataclass(frozen=True)
class DepthMap:
    """Coherent per-pixel scale labeling with its index -> scale legend."""

    labels: np.ndarray
    legend: tuple

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int32)
        if lab.ndim != 2:
            raise ApertureError("labels must be 2-D")
        if lab.min() < 0 or lab.max() >= len(self.legend):
            raise ApertureError("label outside legend range")
        lab.flags.writeable = False
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "legend", tuple(int(s) for s in self.legend))

    def scale_image(self) -> np.ndarray:
        """Signed blur scale per pixel."""
        return np.asarray(self.legend, dtype=np.int32)[self.labels]


def bank_working_nsr(bank: KernelBank, patch: int, sigma: float) -> NsrMatrix:
    """NSR at the padded working size used by patch-scale estimation."""
    size = patch + 2 * bank.max_side
    return nsr_from_sigma(sigma, scenes.corpus_prior(size, size))


_MIN_QUALITY_SIZE = 16


def _candidate_qualities(patch_data: np.ndarray, bank: KernelBank, c: NsrMatrix):
    """Quality aggregate of the Wiener deblur for every bank kernel.

    All kernels share one padded working domain (pad = largest kernel side)
    so their restorations are directly comparable; quality is evaluated on
    a trimmed interior (at least 16x16) where boundary effects are mildest.
    """
    pad = bank.max_side
    h, w = patch_data.shape
    work_shape = (h + 2 * pad, w + 2 * pad)
    if c.shape != work_shape:
        raise ApertureError(
            f"NSR shape {c.shape} does not match working size {work_shape}; "
            "build it with bank_working_nsr")
    padded = np.pad(patch_data, pad, mode="edge")
    trim = min(pad, (min(h, w) - _MIN_QUALITY_SIZE) // 2)
    trim = max(trim, 0)
    view = (slice(trim, h - trim), slice(trim, w - trim))
    observed = Image(patch_data[view])
    qualities = {}
    for s in bank.scales:
        psf = bank.entries[s]
        k_spec = kernel_spectrum(psf, shape=work_shape)
        tapered = edgetaper(padded, k_spec, pad)
        rec = np.fft.ifft2(np.conj(k_spec) * np.fft.fft2(tapered)
                           / (np.abs(k_spec) ** 2 + c.c_sq)).real
        rec = np.clip(rec[pad:pad + h, pad:pad + w], 0.0, 1.0)
        qualities[s] = aggregate_quality(observed, Image(rec[view])).aggregate
    return qualities


def estimate_patch_scale(patch: Image, bank: KernelBank, c: NsrMatrix):
    """Two most plausible blur scales of a patch with their probabilities.

    The patch is deblurred with every bank kernel and scored by the quality
    aggregate; the top two scales get probabilities proportional to
    exp(q / T) (T = interquartile range of all scores, floored), normalized
    to sum to one. Ties resolve toward the smaller magnitude, positive
    scale. A singleton bank returns probability one.
    """
    if patch.height < MIN_PATCH or patch.width < MIN_PATCH:
        raise ApertureError(f"patch must be at least {MIN_PATCH}x{MIN_PATCH}")
    if bank.max_side > min(patch.height, patch.width):
        raise ApertureError("largest bank kernel exceeds the patch")
    qualities = _candidate_qualities(patch.data, bank, c)
    order = sorted(bank.scales, key=lambda s: (-qualities[s], abs(s), 0 if s > 0 else 1))
    if len(order) == 1:
        return [(order[0], 1.0)]
    q1, q2 = qualities[order[0]], qualities[order[1]]
    values = np.array(sorted(qualities.values()))
    iqr = float(np.percentile(values, 75) - np.percentile(values, 25))
    temp = max(iqr, 1e-6)
    p1 = 1.0 / (1.0 + math.exp((q2 - q1) / temp))
    return [(order[0], p1), (order[1], 1.0 - p1)]


def _window_starts(extent: int, patch: int, stride: int):
    starts = list(range(0, extent - patch + 1, stride))
    if starts[-1] != extent - patch:
        starts.append(extent - patch)
    return starts


def raw_depth_volume(img: Image, bank: KernelBank, c: NsrMatrix,
                     patch: int = 48, stride: int = 8) -> DepthVolume:
    """Sliding-window scale estimation over the whole image.

    Each window's top-2 estimate is assigned to the pixels whose nearest
    window center it is (border pixels use the nearest valid window), so
    the volume has exactly the per-pixel top-2 structure.
    """
    if patch > img.height or patch > img.width:
        raise ApertureError("patch larger than image")
    if stride < 1:
        raise ApertureError("stride must be >= 1")
    ys = _window_starts(img.height, patch, stride)
    xs = _window_starts(img.width, patch, stride)
    windows = [(y, x) for y in ys for x in xs]

    def run(pos):
        y, x = pos
        return estimate_patch_scale(Image(img.data[y:y + patch, x:x + patch]), bank, c)

    results = parallel_map(run, windows)

    legend = bank.scales
    index_of = {s: i for i, s in enumerate(legend)}
    probs = np.zeros((img.height, img.width, len(legend)))
    centers_y = np.asarray(ys) + patch // 2
    centers_x = np.asarray(xs) + patch // 2
    row_win = np.abs(np.arange(img.height)[:, None] - centers_y[None, :]).argmin(axis=1)
    col_win = np.abs(np.arange(img.width)[:, None] - centers_x[None, :]).argmin(axis=1)
    grid = np.array([[results[iy * len(xs) + ix] for ix in range(len(xs))]
                     for iy in range(len(ys))], dtype=object)
    for y in range(img.height):
        for x in range(img.width):
            for scale, p in grid[row_win[y], col_win[x]]:
                probs[y, x, index_of[scale]] = p
    return DepthVolume(probs, legend)


def data_term(volume: DepthVolume, params: MrfParams | None = None) -> np.ndarray:
    """Negative log of the scale-axis-smoothed per-pixel probabilities.

    The per-pixel probability vector is convolved along the scale axis with
    a renormalized discrete Gaussian (std in scale-index units, truncated
    at 3 sigma, reflected at the ends so mass is conserved), floored, and
    logged.
    """
    params = params or MrfParams()
    radius = max(1, int(math.ceil(3.0 * params.gauss_std)))
    offsets = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (offsets / params.gauss_std) ** 2)
    kernel /= kernel.sum()
    smoothed = ndimage.convolve1d(volume.probs, kernel, axis=2, mode="reflect")
    return -np.log(np.maximum(smoothed, params.prob_floor))


def smoothness_lambda(g_p, g_q, params: MrfParams | None = None):
    """Edge weight lambda0 * exp(-(g_p - g_q)^2 / sigma_lambda^2).

    Broadcasts over arrays; equal intensities give the full lambda0 and
    strong intensity edges suppress the smoothness coupling entirely.
    """
    params = params or MrfParams()
    diff_sq = (np.asarray(g_p, dtype=np.float64) - np.asarray(g_q, dtype=np.float64)) ** 2
    with np.errstate(under="ignore"):
        return params.lambda0 * np.exp(-diff_sq / params.sigma_lambda ** 2)


def _edge_weights(img_data: np.ndarray, params: MrfParams):
    """(p_indices, q_indices, lambda) per neighbor offset, flattened."""
    h, w = img_data.shape
    idx = np.arange(h * w).reshape(h, w)
    all_p, all_q, all_lam = [], [], []
    for dy, dx in _NEIGHBOR_OFFSETS:
        ys = slice(0, h - dy)
        xs = slice(0, w - dx) if dx >= 0 else slice(-dx, w)
        ys2 = slice(dy, h)
        xs2 = slice(dx, w) if dx >= 0 else slice(0, w + dx)
        p = idx[ys, xs].ravel()
        q = idx[ys2, xs2].ravel()
        lam = smoothness_lambda(img_data[ys, xs].ravel(), img_data[ys2, xs2].ravel(), params)
        all_p.append(p)
        all_q.append(q)
        all_lam.append(lam)
    return (np.concatenate(all_p).astype(np.int32),
            np.concatenate(all_q).astype(np.int32),
            np.concatenate(all_lam))


def mrf_energy(labels: np.ndarray, data: np.ndarray, img: Image,
               params: MrfParams | None = None, scales=None) -> float:
    """Total labeling energy: data term plus weighted |scale_p - scale_q|."""
    params = params or MrfParams()
    h, w, s_count = data.shape
    scales = np.asarray(range(s_count) if scales is None else scales, dtype=np.float64)
    flat_labels = labels.ravel()
    unary = data.reshape(-1, s_count)[np.arange(flat_labels.size), flat_labels].sum()
    p_idx, q_idx, lam = _edge_weights(img.data, params)
    v = np.abs(scales[flat_labels[p_idx]] - scales[flat_labels[q_idx]])
    return float(unary + (lam * v).sum())


def _preference_order(scales) -> np.ndarray:
    return np.asarray(sorted(range(len(scales)),
                             key=lambda i: (abs(scales[i]), 0 if scales[i] > 0 else 1)),
                      dtype=np.int64)


def solve_mrf(data: np.ndarray, img: Image, params: MrfParams | None = None,
              scales=None) -> DepthMap:
    """Approximate MAP labeling by alpha-expansion graph cuts.

    Starts from the per-pixel data-term argmin (ties broken toward the
    smaller-magnitude, positive scale) and sweeps expansion moves over all
    labels until no move reduces the energy, up to 10 sweeps. The pairwise
    metric |scale_p - scale_q| satisfies the triangle inequality, so every
    binary subproblem is submodular and solved exactly by max-flow.
    """
    params = params or MrfParams()
    if data.ndim != 3:
        raise ApertureError("data term must be H x W x S")
    if not np.all(np.isfinite(data)):
        raise ApertureError("data term contains non-finite values")
    h, w, s_count = data.shape
    if img.data.shape != (h, w):
        raise ApertureError("image and data term dimensions differ")
    if scales is None:
        scales = tuple(range(s_count))
    scales = tuple(int(s) for s in scales)
    if len(scales) != s_count:
        raise ApertureError("legend length must match the data term's scale axis")
    scale_vals = np.asarray(scales, dtype=np.float64)

    pref = _preference_order(scales)
    flat_data = data.reshape(-1, s_count)
    labels = pref[np.argmin(flat_data[:, pref], axis=1)]

    if s_count == 1:
        return DepthMap(labels.reshape(h, w).astype(np.int32), scales)

    p_idx, q_idx, lam = _edge_weights(img.data, params)
    energy = _labeling_energy(labels, flat_data, p_idx, q_idx, lam, scale_vals)

    n = h * w
    for _ in range(MAX_SWEEPS):
        improved = False
        for alpha in pref:
            new_labels = _expand(alpha, labels, flat_data, p_idx, q_idx, lam, scale_vals, n)
            new_energy = _labeling_energy(new_labels, flat_data, p_idx, q_idx, lam, scale_vals)
            if new_energy < energy - 1e-9:
                labels, energy = new_labels, new_energy
                improved = True
        if not improved:
            break
    return DepthMap(labels.reshape(h, w).astype(np.int32), scales)


def _labeling_energy(labels, flat_data, p_idx, q_idx, lam, scale_vals) -> float:
    unary = flat_data[np.arange(labels.size), labels].sum()
    v = np.abs(scale_vals[labels[p_idx]] - scale_vals[labels[q_idx]])
    return float(unary + (lam * v).sum())


def _expand(alpha, labels, flat_data, p_idx, q_idx, lam, scale_vals, n):
    """One alpha-expansion move; x_p = 1 means pixel p switches to alpha."""
    theta0 = flat_data[np.arange(n), labels]
    theta1 = flat_data[:, alpha].copy()

    f_p = scale_vals[labels[p_idx]]
    f_q = scale_vals[labels[q_idx]]
    a_cost = lam * np.abs(f_p - f_q)                    # keep, keep
    b_cost = lam * np.abs(f_p - scale_vals[alpha])      # keep, switch
    c_cost = lam * np.abs(scale_vals[alpha] - f_q)      # switch, keep
    # d_cost (switch, switch) is zero for a metric V with V(a, a) = 0.

    # Kolmogorov-Zabih reduction: E = A + (C-A) x_p + (D-C) x_q
    #                                 + (B+C-A-D)(1-x_p) x_q
    np.add.at(theta1, p_idx, c_cost - a_cost)
    np.add.at(theta1, q_idx, -c_cost)
    edge_cap = b_cost + c_cost - a_cost

    base = np.minimum(theta0, theta1)
    cap_source = theta1 - base
    cap_sink = theta0 - base
    _, source_side = max_flow(cap_source, cap_sink, p_idx, q_idx,
                              edge_cap, np.zeros_like(edge_cap))
    new_labels = labels.copy()
    new_labels[~source_side] = alpha
    return new_labels
