"""File formats: PGM images (P2/P5, 8- or 16-bit), aperture pattern files,
PSF bank directories, and power-spectrum prior files.

PGM is the image format of record because it is uncompressed: byte-exact
reproducibility of outputs does not then depend on a compression library.
Intensities map linearly between [0, 1] and the integer range.
"""

import re
from pathlib import Path

import numpy as np

from .imaging import ApertureError, AperturePattern, GRID_N, Image, NaturalImagePrior, Psf
from .depth import KernelBank

_PSF_NAME = re.compile(r"^psf_(-?\d+)\.txt$")


# ---------------------------------------------------------------------------
# PGM
# ---------------------------------------------------------------------------

def _read_pgm_tokens(blob: bytes, count: int):
    """First `count` whitespace/comment-separated header tokens and the
    offset one byte past the last one."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(blob):
            raise ApertureError("truncated PGM header")
        ch = blob[pos:pos + 1]
        if ch == b"#":
            eol = blob.find(b"\n", pos)
            pos = len(blob) if eol < 0 else eol + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(blob) and not blob[end:end + 1].isspace() and blob[end:end + 1] != b"#":
                end += 1
            tokens.append(blob[pos:end])
            pos = end
    return tokens, pos


def read_pgm(path) -> Image:
    """Load a P2 (ASCII) or P5 (binary) PGM as intensities in [0, 1]."""
    blob = Path(path).read_bytes()
    (magic,), pos = _read_pgm_tokens(blob, 1)
    if magic not in (b"P2", b"P5"):
        raise ApertureError(f"{path}: not a PGM file (magic {magic!r})")
    tokens, pos = _read_pgm_tokens(blob, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise ApertureError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ApertureError(f"{path}: invalid PGM dimensions or maxval")
    if magic == b"P2":
        values = blob[pos:].split()
        if len(values) < width * height:
            raise ApertureError(f"{path}: truncated P2 data")
        data = np.array([int(v) for v in values[: width * height]], dtype=np.float64)
    else:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = width * height * dtype.itemsize
        raw = blob[pos:pos + need]
        if len(raw) < need:
            raise ApertureError(f"{path}: truncated P5 data")
        data = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    if data.max(initial=0) > maxval:
        raise ApertureError(f"{path}: sample exceeds maxval")
    return Image(data.reshape(height, width) / maxval)


def write_pgm(path, img: Image, maxval: int = 65535) -> None:
    """Write a binary (P5) PGM; 16-bit by default for intensity fidelity."""
    if not 0 < maxval < 65536:
        raise ApertureError(f"maxval {maxval} out of range")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    quantized = np.rint(img.data * maxval).astype(dtype)
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + quantized.tobytes())


# ---------------------------------------------------------------------------
# Aperture pattern files
# ---------------------------------------------------------------------------

def parse_pattern(text: str) -> AperturePattern:
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line)
    if len(rows) != GRID_N:
        raise ApertureError(f"pattern file must have {GRID_N} grid lines, found {len(rows)}")
    grid = np.zeros((GRID_N, GRID_N), dtype=bool)
    for r, line in enumerate(rows):
        if len(line) != GRID_N or any(ch not in "01" for ch in line):
            raise ApertureError(f"pattern line {r + 1} must be {GRID_N} chars of 0/1: {line!r}")
        grid[r] = [ch == "1" for ch in line]
    return AperturePattern(grid)


def read_pattern(path) -> AperturePattern:
    return parse_pattern(Path(path).read_text(encoding="utf-8"))


def format_pattern(pattern: AperturePattern) -> str:
    return "\n".join("".join("1" if b else "0" for b in row) for row in pattern.grid) + "\n"


def write_pattern(path, pattern: AperturePattern, comment: str | None = None) -> None:
    text = format_pattern(pattern)
    if comment:
        text = "".join(f"# {line}\n" for line in comment.splitlines()) + text
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Matrix-style text files (PSF entries and priors)
# ---------------------------------------------------------------------------

def _read_matrix(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ApertureError(f"{path}: empty matrix file")
    try:
        h, w = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ApertureError(f"{path}: first line must be '<h> <w>'") from exc
    if len(lines) - 1 < h:
        raise ApertureError(f"{path}: expected {h} rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:1 + h]:
        vals = [float(t) for t in ln.split()]
        if len(vals) != w:
            raise ApertureError(f"{path}: row has {len(vals)} values, expected {w}")
        rows.append(vals)
    return np.array(rows, dtype=np.float64)


def _write_matrix(path, mat: np.ndarray) -> None:
    lines = [f"{mat.shape[0]} {mat.shape[1]}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in mat]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_psf(path, scale: int) -> Psf:
    """Load one PSF entry; renormalizes to unit sum, rejects negatives."""
    kernel = _read_matrix(path)
    if np.any(kernel < 0):
        raise ApertureError(f"{path}: PSF entries must be non-negative")
    side = abs(int(scale))
    if kernel.shape != (side, side):
        raise ApertureError(f"{path}: kernel is {kernel.shape}, scale {scale} needs "
                            f"({side}, {side})")
    return Psf(kernel, int(scale))


def read_psf_bank(directory) -> KernelBank:
    """Load a directory of ``psf_<s>.txt`` files into a kernel bank."""
    directory = Path(directory)
    entries = {}
    for child in sorted(directory.iterdir()):
        match = _PSF_NAME.match(child.name)
        if match:
            s = int(match.group(1))
            entries[s] = read_psf(child, s)
    if not entries:
        raise ApertureError(f"{directory}: no psf_<s>.txt files found")
    return KernelBank(entries)


def write_psf_bank(directory, bank: KernelBank) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for s, psf in bank.entries.items():
        _write_matrix(directory / f"psf_{s}.txt", psf.kernel)


def read_prior(path) -> NaturalImagePrior:
    return NaturalImagePrior(_read_matrix(path))


def write_prior(path, prior: NaturalImagePrior) -> None:
    _write_matrix(path, prior.a)
