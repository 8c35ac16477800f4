"""Procedural generation of labeled synthetic lesion images.

Each sample is a skin-like background with one elliptical lesion blob whose
border irregularity and interior contrast statistically encode the diagnosis
(malignant lesions are more irregular and higher-contrast, scaled by
``signal_strength``). Seven kinds of visual artifacts can be planted on top;
four of them (dark corner, gel border, ruler, patch) render on background
pixels only, while hair, gel bubbles and ink are allowed to overlap the
lesion.

All geometry is drawn from the uniform ranges in ``ARTIFACT_GEOMETRY`` and
``LESION_GEOMETRY`` below (also documented in the README), using the
deterministic counter-based streams from :mod:`lesiontrap.rng`, so a sample
is a pure function of (seed, diagnosis, artifact set, image size, signal
strength).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .rng import Rng, mix64


class ArtifactKind(enum.IntEnum):
    DARK_CORNER = 0
    HAIR = 1
    GEL_BORDER = 2
    GEL_BUBBLE = 3
    RULER = 4
    INK = 5
    PATCH = 6

    @property
    def overlaps_lesion(self) -> bool:
        """Hair, gel bubbles and ink may cover the lesion; the rest may not."""
        return self in (ArtifactKind.HAIR, ArtifactKind.GEL_BUBBLE, ArtifactKind.INK)


N_ARTIFACTS = 7

BENIGN = "benign"
MALIGNANT = "malignant"

# stream tags so the independent random decisions never share a counter
_TAG_LESION = 0x11
_TAG_FLAGS = 0x22
_TAG_INJECT = 0x33
_TAG_LABELS = 0x44

# Lesion morphology parameter ranges. Malignant samples add the *_shift
# ranges scaled by signal_strength on top of the shared base ranges.
LESION_GEOMETRY = {
    "center_frac": (0.42, 0.58),        # lesion center, fraction of image side
    "radius_frac": (0.18, 0.30),        # base radius, fraction of image side
    "axis_ratio": (0.78, 1.00),         # ellipse minor/major ratio
    "edge_softness_px": 1.2,            # anti-aliased rim width
    "irregularity_base": (0.03, 0.10),  # total harmonic amplitude, benign
    "irregularity_shift": (0.09, 0.17),  # extra amplitude, malignant, x signal
    "contrast_base": (0.28, 0.46),      # darkening of lesion vs skin, benign
    "contrast_shift": (0.20, 0.34),     # extra darkening, malignant, x signal
    "harmonics": (2, 7),                # sine harmonics in the border profile
    "texture_amp": 0.16,                # mottle amplitude factor inside lesion
}

# Artifact rendering parameter ranges (uniform unless noted).
ARTIFACT_GEOMETRY = {
    "dark_corner": {
        "aperture_frac": (0.48, 0.62),   # bright-circle radius / image side
        "falloff_frac": (0.05, 0.12),    # transition width / image side
        "floor": (0.04, 0.22),           # brightness multiplier in corners
    },
    "hair": {
        "count": (4, 10),
        "length_frac": (0.55, 1.10),
        "bow_frac": (-0.25, 0.25),       # Bezier control offset / length
        "width_px": (0.7, 1.3),
        "opacity": (0.75, 0.95),
    },
    "gel_border": {
        "depth_frac": (0.07, 0.20),      # how far the arc dips into the image
        "radius_frac": (0.55, 1.10),
        "band_px": (1.8, 3.6),
        "opacity": (0.40, 0.65),
    },
    "gel_bubble": {
        "count": (3, 8),
        "radius_px": (2.0, 5.0),
        "ring_px": 1.0,
        "ring_opacity": (0.55, 0.85),
        "fill_opacity": 0.18,
    },
    "ruler": {
        "offset_frac": (0.08, 0.22),     # band distance from the chosen edge
        "tick_spacing_px": (3, 6),
        "tick_len_px": (3, 6),
        "opacity": (0.80, 0.95),
    },
    "ink": {
        "radius_frac": (0.07, 0.13),
        "irregularity": 0.30,
        "opacity": (0.70, 0.90),
    },
    "patch": {
        "edge_dist_frac": (0.02, 0.08),  # center distance from the edge
        "radius_frac": (0.14, 0.24),
        "opacity": (0.88, 1.00),
    },
}

_PATCH_PALETTE = (
    (0.91, 0.62, 0.58),  # pink adhesive
    (0.55, 0.70, 0.92),  # blue
    (0.95, 0.87, 0.45),  # yellow
    (0.86, 0.78, 0.60),  # beige tape
)


class DuplicateArtifactError(ValueError):
    """inject_artifact was called for a kind whose flag is already set."""


@dataclass
class Sample:
    """One synthetic dermoscopy-like image with its ground truth."""

    image: np.ndarray            # (H, W, 3) float64 in [0, 1]
    mask: np.ndarray             # (H, W) bool, True = lesion foreground
    diagnosis: str               # "benign" | "malignant"
    artifacts: tuple             # 7 bools indexed by ArtifactKind
    id: str
    seed: int

    @property
    def label(self) -> int:
        return 1 if self.diagnosis == MALIGNANT else 0

    def artifact_kinds(self) -> tuple:
        return tuple(ArtifactKind(k) for k in range(N_ARTIFACTS) if self.artifacts[k])


@dataclass
class GenConfig:
    n_samples: int
    image_size: int = 64
    class_balance: float = 0.5
    artifact_prevalence: tuple = (0.3,) * N_ARTIFACTS
    base_seed: int = 0
    signal_strength: float = 1.0

    def validate(self) -> None:
        if self.n_samples <= 0:
            raise ValueError("n_samples must be positive")
        if self.image_size < 16:
            raise ValueError("image_size must be >= 16")
        if not 0.0 <= self.class_balance <= 1.0:
            raise ValueError("class_balance must lie in [0, 1]")
        if len(self.artifact_prevalence) != N_ARTIFACTS:
            raise ValueError(f"need {N_ARTIFACTS} prevalence values")
        if any(not 0.0 <= p <= 1.0 for p in self.artifact_prevalence):
            raise ValueError("artifact prevalences must lie in [0, 1]")
        if not 0.0 < self.signal_strength <= 1.0:
            raise ValueError("signal_strength must lie in (0, 1]")


def _pixel_grid(size: int):
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    return xs, ys


def _smooth_noise(rng: Rng, size: int, cells: int, amplitude: float) -> np.ndarray:
    """Low-frequency noise: a coarse uniform grid upsampled bilinearly."""
    coarse = rng.uniform_block((cells + 1, cells + 1), -amplitude, amplitude)
    # bilinear upsample to size x size
    t = np.linspace(0.0, cells, size)
    i0 = np.minimum(t.astype(np.int64), cells - 1)
    f = t - i0
    a = coarse[np.ix_(i0, i0)]
    b = coarse[np.ix_(i0, i0 + 1)]
    c = coarse[np.ix_(i0 + 1, i0)]
    d = coarse[np.ix_(i0 + 1, i0 + 1)]
    fy = f[:, None]
    fx = f[None, :]
    return (a * (1 - fy) * (1 - fx) + b * (1 - fy) * fx
            + c * fy * (1 - fx) + d * fy * fx)


def _blob_profile(rng: Rng, irregularity: float, n_harmonics: tuple):
    """Random radial profile r(theta)/r0 = 1 + sum_j a_j sin(j theta + phi_j).

    The amplitudes sum to ``irregularity`` so the radial deviation is bounded
    by it.
    """
    lo, hi = n_harmonics
    orders = np.arange(lo, hi + 1)
    weights = rng.uniform_block(len(orders), 0.2, 1.0)
    amps = irregularity * weights / weights.sum()
    phases = rng.uniform_block(len(orders), 0.0, 2.0 * math.pi)

    def profile(theta: np.ndarray) -> np.ndarray:
        out = np.ones_like(theta)
        for j, a, p in zip(orders, amps, phases):
            out = out + a * np.sin(j * theta + p)
        return out

    return profile


def gen_lesion(seed: int, diagnosis: str, image_size: int = 64,
               signal_strength: float = 1.0, id: str | None = None) -> Sample:
    """Generate one clean (artifact-free) lesion sample.

    Pure function of its arguments; calling twice gives bit-identical output.
    """
    if diagnosis not in (BENIGN, MALIGNANT):
        raise ValueError(f"unknown diagnosis {diagnosis!r}")
    geom = LESION_GEOMETRY
    rng = Rng(mix64(seed, _TAG_LESION))
    size = image_size
    xs, ys = _pixel_grid(size)

    # skin background: warm base color + gentle shading + fine grain
    base_r = rng.uniform(0.76, 0.88)
    base_g = base_r - rng.uniform(0.10, 0.17)
    base_b = base_g - rng.uniform(0.05, 0.12)
    skin = np.empty((size, size, 3))
    shading = _smooth_noise(rng, size, 4, 0.030)
    grain = rng.uniform_block((size, size), -0.012, 0.012)
    for ch, base in enumerate((base_r, base_g, base_b)):
        skin[:, :, ch] = base + shading + grain

    # lesion morphology parameters, diagnosis-conditional
    malignant = diagnosis == MALIGNANT
    irr = rng.uniform(*geom["irregularity_base"])
    irr_shift = rng.uniform(*geom["irregularity_shift"])
    contrast = rng.uniform(*geom["contrast_base"])
    contrast_shift = rng.uniform(*geom["contrast_shift"])
    if malignant:
        irr += signal_strength * irr_shift
        contrast += signal_strength * contrast_shift

    cx = rng.uniform(*geom["center_frac"]) * size
    cy = rng.uniform(*geom["center_frac"]) * size
    r0 = rng.uniform(*geom["radius_frac"]) * size
    q = rng.uniform(*geom["axis_ratio"])
    tilt = rng.uniform(0.0, math.pi)
    profile = _blob_profile(rng, irr, geom["harmonics"])

    ct, st = math.cos(tilt), math.sin(tilt)
    u = (xs - cx) * ct + (ys - cy) * st
    v = -(xs - cx) * st + (ys - cy) * ct
    dist = np.sqrt((u / q) ** 2 + v**2)
    theta = np.arctan2(v, u / q)
    radius = r0 * profile(theta)
    mask = dist <= radius

    # lesion appearance: brown darkening + mottled texture
    lesion = np.empty_like(skin)
    channel_drop = (0.50, 0.72, 0.80)  # red darkens least: brownish tint
    mottle = _smooth_noise(rng, size, 8, 1.0)
    mottle += rng.uniform_block((size, size), -0.35, 0.35)
    tex = geom["texture_amp"] * contrast * mottle
    for ch in range(3):
        lesion[:, :, ch] = skin[:, :, ch] * (1.0 - contrast * channel_drop[ch]) + tex

    alpha = np.clip((radius - dist) / geom["edge_softness_px"] + 0.5, 0.0, 1.0)
    image = skin * (1.0 - alpha[:, :, None]) + lesion * alpha[:, :, None]
    image = np.clip(image, 0.0, 1.0)

    return Sample(
        image=image,
        mask=mask,
        diagnosis=diagnosis,
        artifacts=(False,) * N_ARTIFACTS,
        id=id if id is not None else f"lesion-{seed & 0xFFFFFFFFFFFFFFFF:016x}",
        seed=seed,
    )


# ---------------------------------------------------------------------------
# artifact rendering
# ---------------------------------------------------------------------------

def _composite(image: np.ndarray, color, alpha: np.ndarray) -> np.ndarray:
    out = image * (1.0 - alpha[:, :, None]) + np.asarray(color) * alpha[:, :, None]
    return np.clip(out, 0.0, 1.0)


def _render_dark_corner(rng: Rng, size: int):
    g = ARTIFACT_GEOMETRY["dark_corner"]
    xs, ys = _pixel_grid(size)
    aperture = rng.uniform(*g["aperture_frac"]) * size
    falloff = rng.uniform(*g["falloff_frac"]) * size
    floor = rng.uniform(*g["floor"])
    d = np.sqrt((xs - size / 2) ** 2 + (ys - size / 2) ** 2)
    t = np.clip((d - aperture) / falloff, 0.0, 1.0)
    return 1.0 - (1.0 - floor) * t  # multiplicative brightness field


def _stroke_alpha(size: int, pts: np.ndarray, width: float) -> np.ndarray:
    """Anti-aliased alpha of a polyline given densely sampled points."""
    xs, ys = _pixel_grid(size)
    pix = np.stack([xs.ravel(), ys.ravel()], axis=1)
    d2 = ((pix[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    d = np.sqrt(d2.min(axis=1)).reshape(size, size)
    return np.clip(width / 2 + 0.7 - d, 0.0, 1.0)


def _render_hair(rng: Rng, size: int):
    g = ARTIFACT_GEOMETRY["hair"]
    lo, hi = g["count"]
    n = lo + rng.randint(hi - lo + 1)
    alpha = np.zeros((size, size))
    color = np.array([0.10, 0.07, 0.05]) + rng.uniform(0.0, 0.06)
    for _ in range(n):
        x0, y0 = rng.uniform(0, size), rng.uniform(0, size)
        ang = rng.uniform(0.0, 2.0 * math.pi)
        length = rng.uniform(*g["length_frac"]) * size
        x2 = x0 + length * math.cos(ang)
        y2 = y0 + length * math.sin(ang)
        bow = rng.uniform(*g["bow_frac"]) * length
        mx, my = (x0 + x2) / 2, (y0 + y2) / 2
        x1 = mx - bow * math.sin(ang)
        y1 = my + bow * math.cos(ang)
        t = np.linspace(0.0, 1.0, 96)[:, None]
        ctrl = np.array([[x0, y0], [x1, y1], [x2, y2]])
        pts = ((1 - t) ** 2 * ctrl[0] + 2 * (1 - t) * t * ctrl[1] + t**2 * ctrl[2])
        width = rng.uniform(*g["width_px"])
        opacity = rng.uniform(*g["opacity"])
        alpha = np.maximum(alpha, opacity * _stroke_alpha(size, pts, width))
    return color, alpha


_EDGE_NORMALS = ((0.0, -1.0), (0.0, 1.0), (-1.0, 0.0), (1.0, 0.0))  # top/bottom/left/right


def _point_on_edge(rng: Rng, size: int, edge: int, along_range=(0.15, 0.85)):
    a = rng.uniform(*along_range) * size
    if edge == 0:
        return a, 0.0
    if edge == 1:
        return a, float(size - 1)
    if edge == 2:
        return 0.0, a
    return float(size - 1), a


def _render_gel_border(rng: Rng, size: int):
    g = ARTIFACT_GEOMETRY["gel_border"]
    edge = rng.randint(4)
    ex, ey = _point_on_edge(rng, size, edge)
    nx, ny = _EDGE_NORMALS[edge]
    radius = rng.uniform(*g["radius_frac"]) * size
    depth = rng.uniform(*g["depth_frac"]) * size
    cx = ex + nx * (radius - depth)
    cy = ey + ny * (radius - depth)
    band = rng.uniform(*g["band_px"])
    opacity = rng.uniform(*g["opacity"])
    xs, ys = _pixel_grid(size)
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    alpha = opacity * np.clip(band - np.abs(d - radius), 0.0, 1.0)
    return (0.95, 0.97, 0.99), alpha


def _render_gel_bubble(rng: Rng, size: int):
    g = ARTIFACT_GEOMETRY["gel_bubble"]
    lo, hi = g["count"]
    n = lo + rng.randint(hi - lo + 1)
    xs, ys = _pixel_grid(size)
    alpha = np.zeros((size, size))
    for _ in range(n):
        cx = rng.uniform(0.1, 0.9) * size
        cy = rng.uniform(0.1, 0.9) * size
        r = rng.uniform(*g["radius_px"])
        ring_op = rng.uniform(*g["ring_opacity"])
        d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
        ring = ring_op * np.clip(g["ring_px"] - np.abs(d - r), 0.0, 1.0)
        fill = g["fill_opacity"] * (d < r)
        alpha = np.maximum(alpha, np.maximum(ring, fill))
    return (0.97, 0.98, 1.0), alpha


def _render_ruler(rng: Rng, size: int):
    g = ARTIFACT_GEOMETRY["ruler"]
    edge = rng.randint(4)
    offset = rng.uniform(*g["offset_frac"]) * size
    spacing = g["tick_spacing_px"][0] + rng.randint(
        g["tick_spacing_px"][1] - g["tick_spacing_px"][0] + 1)
    tick_len = g["tick_len_px"][0] + rng.randint(
        g["tick_len_px"][1] - g["tick_len_px"][0] + 1)
    opacity = rng.uniform(*g["opacity"])
    phase = rng.randint(spacing)
    alpha = np.zeros((size, size))
    idx = np.arange(size)
    ticks = (idx + phase) % spacing == 0
    long_every = 5
    if edge in (0, 1):  # horizontal band, vertical ticks
        row = int(offset) if edge == 0 else size - 1 - int(offset)
        for k, col in enumerate(np.nonzero(ticks)[0]):
            ln = tick_len + 2 if (k % long_every == 0) else tick_len
            if edge == 0:
                alpha[row : min(size, row + ln), col] = opacity
            else:
                alpha[max(0, row - ln) : row + 1, col] = opacity
        alpha[row, :] = np.maximum(alpha[row, :], 0.5 * opacity)
    else:  # vertical band, horizontal ticks
        col = int(offset) if edge == 2 else size - 1 - int(offset)
        for k, row in enumerate(np.nonzero(ticks)[0]):
            ln = tick_len + 2 if (k % long_every == 0) else tick_len
            if edge == 2:
                alpha[row, col : min(size, col + ln)] = opacity
            else:
                alpha[row, max(0, col - ln) : col + 1] = opacity
        alpha[:, col] = np.maximum(alpha[:, col], 0.5 * opacity)
    return (0.13, 0.13, 0.17), alpha


def _render_ink(rng: Rng, size: int):
    g = ARTIFACT_GEOMETRY["ink"]
    cx = rng.uniform(0.15, 0.85) * size
    cy = rng.uniform(0.15, 0.85) * size
    r0 = rng.uniform(*g["radius_frac"]) * size
    opacity = rng.uniform(*g["opacity"])
    profile = _blob_profile(rng, g["irregularity"], (2, 5))
    xs, ys = _pixel_grid(size)
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    theta = np.arctan2(ys - cy, xs - cx)
    radius = r0 * profile(theta)
    alpha = opacity * np.clip((radius - d) / 1.2 + 0.5, 0.0, 1.0)
    return (0.30, 0.10, 0.42), alpha


def _render_patch(rng: Rng, size: int):
    g = ARTIFACT_GEOMETRY["patch"]
    edge = rng.randint(4)
    ex, ey = _point_on_edge(rng, size, edge, along_range=(0.2, 0.8))
    nx, ny = _EDGE_NORMALS[edge]
    dist = rng.uniform(*g["edge_dist_frac"]) * size
    cx = ex - nx * dist
    cy = ey - ny * dist
    r = rng.uniform(*g["radius_frac"]) * size
    opacity = rng.uniform(*g["opacity"])
    color = _PATCH_PALETTE[rng.randint(len(_PATCH_PALETTE))]
    xs, ys = _pixel_grid(size)
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    alpha = opacity * np.clip(r - d + 0.5, 0.0, 1.0)
    return color, alpha


def artifact_seed(sample_seed: int, kind: ArtifactKind) -> int:
    """Canonical injection seed used by gen_dataset; enables regeneration."""
    return mix64(sample_seed, _TAG_INJECT, int(kind))


def inject_artifact(sample: Sample, kind: ArtifactKind, seed: int) -> Sample:
    """Render one artifact onto a copy of the sample and set its flag.

    Background-only kinds never change pixels under the lesion mask; mask and
    diagnosis are untouched. The image stays clamped to [0, 1].
    """
    kind = ArtifactKind(kind)
    if sample.artifacts[kind]:
        raise DuplicateArtifactError(f"artifact {kind.name} already present")
    size = sample.image.shape[0]
    rng = Rng(mix64(seed, _TAG_INJECT, int(kind)))

    if kind == ArtifactKind.DARK_CORNER:
        brightness = _render_dark_corner(rng, size)
        image = sample.image.copy()
        bg = ~sample.mask
        image[bg] = image[bg] * brightness[bg, None]
        image = np.clip(image, 0.0, 1.0)
    else:
        renderer = {
            ArtifactKind.HAIR: _render_hair,
            ArtifactKind.GEL_BORDER: _render_gel_border,
            ArtifactKind.GEL_BUBBLE: _render_gel_bubble,
            ArtifactKind.RULER: _render_ruler,
            ArtifactKind.INK: _render_ink,
            ArtifactKind.PATCH: _render_patch,
        }[kind]
        color, alpha = renderer(rng, size)
        if not kind.overlaps_lesion:
            alpha = alpha * ~sample.mask
        image = _composite(sample.image, color, alpha)

    flags = list(sample.artifacts)
    flags[kind] = True
    return replace(sample, image=image, artifacts=tuple(flags))


# ---------------------------------------------------------------------------
# dataset assembly
# ---------------------------------------------------------------------------

def sample_seed_for(base_seed: int, index: int) -> int:
    """Per-sample seed: base_seed XOR index (decorrelated by the stream mix)."""
    return (base_seed ^ index) & 0xFFFFFFFFFFFFFFFF


def gen_dataset(config: GenConfig) -> list:
    """Generate n_samples lesions with independently planted artifacts.

    Malignant count is round(class_balance * n); artifact k is injected with
    probability artifact_prevalence[k] independently of the label, so flags
    are uncorrelated with diagnosis in expectation.
    """
    config.validate()
    n = config.n_samples
    n_mal = round(config.class_balance * n)
    labels = [MALIGNANT] * n_mal + [BENIGN] * (n - n_mal)
    Rng(mix64(config.base_seed, _TAG_LABELS)).shuffle(labels)

    out = []
    for i in range(n):
        seed = sample_seed_for(config.base_seed, i)
        s = gen_lesion(seed, labels[i], config.image_size,
                       config.signal_strength, id=f"s{i:06d}")
        flag_rng = Rng(mix64(seed, _TAG_FLAGS))
        draws = [flag_rng.random() for _ in range(N_ARTIFACTS)]
        for kind in ArtifactKind:
            if draws[kind] < config.artifact_prevalence[kind]:
                s = inject_artifact(s, kind, artifact_seed(seed, kind))
        out.append(s)
    return out


def regenerate_sample(sample: Sample, image_size: int,
                      signal_strength: float) -> Sample:
    """Rebuild a sample from its (seed, diagnosis, artifact set) alone."""
    s = gen_lesion(sample.seed, sample.diagnosis, image_size,
                   signal_strength, id=sample.id)
    for kind in sample.artifact_kinds():
        s = inject_artifact(s, kind, artifact_seed(sample.seed, kind))
    return s
