"""Photon and read-noise model linking aperture throughput, scene
illumination, and sensor parameters to the noise variance of a capture.

All signal quantities are photoelectrons. The per-hole signal of a binary
mask scales linearly with the number of open cells, so the photon-noise
variance of an n-hole capture is n times the single-hole signal J.
"""

from dataclasses import dataclass

from .imaging import ApertureError, GRID_N


@dataclass(frozen=True)
class ImagingConfig:
    """Scene illumination and sensor parameters of a capture.

    Defaults are typical consumer-photography desk values: 0.5 quantum
    efficiency, 0.5 scene reflectivity, 10 ms exposure, 5.1 um pixels,
    f/18, 300 lux office lighting, and 4 e- read noise.
    """

    quantum_efficiency: float = 0.5
    reflectivity: float = 0.5
    exposure_s: float = 0.01
    pixel_pitch_um: float = 5.1
    f_number: float = 18.0
    illumination_lux: float = 300.0
    read_noise_e: float = 4.0

    def __post_init__(self):
        for name in ("quantum_efficiency", "reflectivity", "exposure_s",
                     "pixel_pitch_um", "f_number", "illumination_lux",
                     "read_noise_e"):
            if getattr(self, name) <= 0:
                raise ApertureError(f"{name} must be strictly positive")
        if self.quantum_efficiency > 1 or self.reflectivity > 1:
            raise ApertureError("quantum efficiency and reflectivity are fractions <= 1")


@dataclass(frozen=True)
class NoiseBudget:
    """Single-hole signal J and total noise variance for an n-hole mask."""

    j: float
    sigma_n_sq: float

    def __post_init__(self):
        if self.j <= 0 or self.sigma_n_sq < 0:
            raise ApertureError("invalid noise budget")


def photons_per_hole(cfg: ImagingConfig) -> float:
    """Average photoelectrons per pixel collected through a single open cell.

    J = 1e15 * (1/F#^2) * R * I * q * Delta^2 * t with the pixel pitch
    Delta in meters.
    """
    delta_m = cfg.pixel_pitch_um * 1e-6
    return (1e15 / cfg.f_number ** 2 * cfg.reflectivity * cfg.illumination_lux
            * cfg.quantum_efficiency * delta_m ** 2 * cfg.exposure_s)


def noise_variance(cfg: ImagingConfig, n: int) -> float:
    """Total noise variance sigma_r^2 + n*J in electrons^2 for n open cells."""
    if not 1 <= n <= GRID_N * GRID_N:
        raise ApertureError(f"open-cell count {n} out of range [1, {GRID_N * GRID_N}]")
    return cfg.read_noise_e ** 2 + n * photons_per_hole(cfg)


def noise_budget(cfg: ImagingConfig, n: int) -> NoiseBudget:
    return NoiseBudget(photons_per_hole(cfg), noise_variance(cfg, n))


_CONFIG_KEYS = {
    "q": "quantum_efficiency",
    "reflectivity": "reflectivity",
    "exposure_s": "exposure_s",
    "pixel_um": "pixel_pitch_um",
    "f_number": "f_number",
    "lux": "illumination_lux",
    "read_noise_e": "read_noise_e",
}


def parse_imaging_config(text: str) -> ImagingConfig:
    """Parse ``key=value`` lines (keys: q, reflectivity, exposure_s,
    pixel_um, f_number, lux, read_noise_e); missing keys keep defaults."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ApertureError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ApertureError(f"config line {lineno}: unknown key {key!r}")
        try:
            kwargs[_CONFIG_KEYS[key]] = float(value)
        except ValueError as exc:
            raise ApertureError(f"config line {lineno}: bad number {value!r}") from exc
    return ImagingConfig(**kwargs)


def load_imaging_config(path) -> ImagingConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_imaging_config(fh.read())
