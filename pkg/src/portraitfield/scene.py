"""Procedural portrait scenes with exact ground-truth control tracks.

A 2D parametric face (layered anti-aliased ellipses) driven by pose, a
small set of named expression components and gaze, rendered by a fixed
camera over a static background. Because the generator knows the exact
geometry it also serves as the measurement oracle: region masks, true pupil
centers, and a degree-scale gaze error for rendered images.

Frame pixels are a pure deterministic function of (spec, pose, expression,
gaze, hidden state); trajectories are seeded sums of sinusoids, so a
(spec, T) pair regenerates an identical dataset.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .audio import AudioTrack
from .config import AUDIO_FEATURE_DIM
from .containers import read_tensor, write_tensor
from .errors import ContractError, DatasetError, ValidationError

EXPRESSION_NAMES = (
    "jaw_open",
    "smile",
    "brow_raise",
    "blink",
    "mouth_wide",
    "brow_tilt",
    "cheek_puff",
    "chin_length",
)

DEFAULT_EXPR_AMPLITUDE = (0.9, 0.7, 0.8, 0.6, 0.5, 0.5, 0.3, 0.3)

AUDIO_SIGNAL_CHANNEL = 3  # carries the smoothed jaw-open signal
AUDIO_ECHO_CHANNEL = 4  # half-amplitude copy


def default_palette() -> dict[str, tuple[float, float, float]]:
    return {
        "bg_top": (0.18, 0.22, 0.30),
        "bg_bottom": (0.08, 0.10, 0.16),
        "skin": (0.87, 0.68, 0.55),
        "shirt": (0.25, 0.35, 0.55),
        "sclera": (0.96, 0.96, 0.94),
        "pupil": (0.06, 0.05, 0.07),
        "brow": (0.25, 0.16, 0.10),
        "mouth": (0.55, 0.16, 0.16),
        "nose": (0.78, 0.56, 0.44),
    }


@dataclass
class SceneSpec:
    height: int = 64
    width: int = 64
    n_exp: int = 8
    seed: int = 0
    palette: dict = field(default_factory=default_palette)
    yaw_range: float = 0.35  # rad
    pitch_range: float = 0.25
    roll_range: float = 0.18
    translation_range: float = 1.0  # unit translations map to 8% of the frame
    gaze_range: float = 0.45  # rad
    expr_amplitude: tuple = DEFAULT_EXPR_AMPLITUDE
    hidden_motion: float = 1.0  # untracked torso sway / brightness drift scale
    head_scale: float = 1.0
    supersample: int = 4
    background: str = "gradient"

    def __post_init__(self):
        if self.n_exp < 1 or self.n_exp > len(EXPRESSION_NAMES):
            raise ValidationError(f"n_exp must be in [1, {len(EXPRESSION_NAMES)}]")
        if self.head_scale <= 0:
            raise ValidationError("head_scale must be positive (degenerate head)")
        if self.height < 16 or self.width < 16:
            raise ValidationError("resolution must be at least 16x16")
        if self.supersample < 1:
            raise ValidationError("supersample must be >= 1")
        amp = tuple(self.expr_amplitude)[: self.n_exp]
        if len(amp) < self.n_exp:
            amp = amp + (0.0,) * (self.n_exp - len(amp))
        object.__setattr__(self, "expr_amplitude", amp)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["expr_amplitude"] = list(self.expr_amplitude)
        return d

    @staticmethod
    def from_dict(d: dict) -> "SceneSpec":
        d = dict(d)
        if "expr_amplitude" in d:
            d["expr_amplitude"] = tuple(d["expr_amplitude"])
        return SceneSpec(**d)


# geometry ----------------------------------------------------------------


@dataclass
class FaceGeometry:
    """Everything in full-resolution pixel coordinates."""

    head_center: tuple[float, float]
    head_radii: tuple[float, float]
    roll: float
    scale: float
    eye_centers: np.ndarray  # (2, 2) at the given gaze-independent anchor
    eye_radii: tuple[float, float]
    pupil_centers: np.ndarray  # (2, 2) including gaze offset
    pupil_radius: float
    gaze_gain: tuple[float, float]  # px per radian, head frame
    mouth_center: tuple[float, float]
    mouth_radii: tuple[float, float]
    brow_centers: np.ndarray
    brow_radii: tuple[float, float]
    brow_tilt: float
    nose_center: tuple[float, float]
    nose_radii: tuple[float, float]


def _expr(expr: np.ndarray, idx: int) -> float:
    return float(expr[idx]) if idx < expr.shape[0] else 0.0


def _rot(points: np.ndarray, roll: float, center: tuple[float, float]) -> np.ndarray:
    ct, st = np.cos(roll), np.sin(roll)
    rel = points - np.asarray(center)
    return np.stack(
        [center[0] + rel[:, 0] * ct - rel[:, 1] * st, center[1] + rel[:, 0] * st + rel[:, 1] * ct],
        axis=1,
    )


def face_geometry(spec: SceneSpec, pose, expr, gaze) -> FaceGeometry:
    pose = np.asarray(pose, dtype=np.float64).reshape(-1)
    expr = np.asarray(expr, dtype=np.float64).reshape(-1)
    gaze = np.asarray(gaze, dtype=np.float64).reshape(-1)
    h, w = spec.height, spec.width
    yaw, pitch, roll = pose[0], pose[1], pose[2]
    dx = pose[3] * 0.08 * w
    dy = pose[4] * 0.08 * h
    scale = (1.0 + 0.06 * pose[5]) * spec.head_scale

    cx, cy = w / 2.0 + dx, h * 0.45 + dy
    rx = 0.30 * w * scale * (1.0 - 0.10 * abs(np.sin(yaw))) * (1.0 + 0.04 * _expr(expr, 6))
    ry = 0.38 * h * scale * (1.0 + 0.04 * _expr(expr, 7))

    fx = 0.55 * np.sin(yaw) * rx
    fy = 0.55 * np.sin(pitch) * ry

    eye_u = 0.40 * rx
    eye_v = -0.16 * ry + fy * 0.55
    eye_centers = np.array(
        [[cx - eye_u + fx * 0.55, cy + eye_v], [cx + eye_u + fx * 0.55, cy + eye_v]]
    )
    blink = _expr(expr, 3)
    eye_rx = 0.20 * rx
    eye_ry = 0.14 * ry * max(1.0 - 0.85 * blink, 0.08)
    pupil_r = 0.085 * rx
    gain_u = (eye_rx - pupil_r) / max(spec.gaze_range, 1e-6) * 0.95
    gain_v = (0.14 * ry - pupil_r) / max(spec.gaze_range, 1e-6) * 0.95
    pupil_off = np.array([gaze[0] * gain_u, gaze[1] * gain_v])
    pupil_centers = eye_centers + pupil_off

    brow_raise = _expr(expr, 2)
    brow_tilt = 0.25 * _expr(expr, 5)
    brow_v = -0.34 * ry - 0.08 * ry * brow_raise + fy * 0.60
    brow_centers = np.array(
        [[cx - eye_u + fx * 0.60, cy + brow_v], [cx + eye_u + fx * 0.60, cy + brow_v]]
    )

    jaw = _expr(expr, 0)
    smile = _expr(expr, 1)
    wide = _expr(expr, 4)
    mouth_center = (cx + fx * 0.75, cy + 0.45 * ry + fy * 0.70 + 0.04 * ry * jaw)
    mouth_rx = 0.17 * rx * (1.0 + 0.30 * smile + 0.25 * wide)
    mouth_ry = ry * (0.020 + 0.105 * jaw)

    nose_center = (cx + fx * 0.85, cy + 0.10 * ry + fy * 0.85)
    nose_radii = (0.06 * rx, 0.10 * ry)

    # rotate all anchors by roll around the head center
    pts = np.vstack([eye_centers, pupil_centers, brow_centers, [mouth_center], [nose_center]])
    pts = _rot(pts, roll, (cx, cy))
    return FaceGeometry(
        head_center=(cx, cy),
        head_radii=(rx, ry),
        roll=float(roll),
        scale=float(scale),
        eye_centers=pts[0:2],
        eye_radii=(eye_rx, eye_ry),
        pupil_centers=pts[2:4],
        pupil_radius=float(pupil_r),
        gaze_gain=(float(gain_u), float(gain_v)),
        mouth_center=(float(pts[6, 0]), float(pts[6, 1])),
        mouth_radii=(float(mouth_rx), float(mouth_ry)),
        brow_centers=pts[4:6],
        brow_radii=(0.16 * rx, 0.030 * ry),
        brow_tilt=float(brow_tilt),
        nose_center=(float(pts[7, 0]), float(pts[7, 1])),
        nose_radii=nose_radii,
    )


# rasterization -------------------------------------------------------------


def _paint_ellipse(img, xx, yy, center, radii, roll, color, shade=0.0):
    a = max(radii[0], 1e-6)
    b = max(radii[1], 1e-6)
    ct, st = np.cos(roll), np.sin(roll)
    u = (xx - center[0]) * ct + (yy - center[1]) * st
    v = -(xx - center[0]) * st + (yy - center[1]) * ct
    el = (u / a) ** 2 + (v / b) ** 2
    m = el <= 1.0
    if not m.any():
        return
    col = np.asarray(color, dtype=np.float32)
    if shade:
        img[m] = col * (1.0 - shade * el[m, None]).astype(np.float32)
    else:
        img[m] = col


def render_scene_frame(spec: SceneSpec, pose, expr, gaze, hidden=(0.0, 0.0)) -> np.ndarray:
    """(H, W, 3) float32 in [0, 1]; deterministic in all arguments."""
    ss = spec.supersample
    h, w = spec.height, spec.width
    pal = spec.palette
    geo = face_geometry(spec, pose, expr, gaze)
    sway, bright = float(hidden[0]), float(hidden[1])

    ys = (np.arange(h * ss, dtype=np.float64) + 0.5) / ss
    xs = (np.arange(w * ss, dtype=np.float64) + 0.5) / ss
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    img = np.empty((h * ss, w * ss, 3), dtype=np.float32)

    if spec.background == "flat":
        img[:] = np.asarray(pal["bg_top"], dtype=np.float32)
    else:
        top = np.asarray(pal["bg_top"], dtype=np.float32)
        bot = np.asarray(pal["bg_bottom"], dtype=np.float32)
        t = (yy[:, :1] / h).astype(np.float32)
        img[:] = top * (1.0 - t[..., None]) + bot * t[..., None]

    dx = np.asarray(pose, dtype=np.float64)[3] * 0.08 * w
    torso_cx = w / 2.0 + 0.30 * dx + sway * 0.012 * w * spec.hidden_motion
    _paint_ellipse(img, xx, yy, (torso_cx, h * 1.08), (0.44 * w, 0.34 * h), 0.0, pal["shirt"], shade=0.25)

    _paint_ellipse(img, xx, yy, geo.head_center, geo.head_radii, geo.roll, pal["skin"], shade=0.16)
    _paint_ellipse(img, xx, yy, geo.nose_center, geo.nose_radii, geo.roll, pal["nose"], shade=0.3)
    for k in range(2):
        tilt = geo.brow_tilt if k == 0 else -geo.brow_tilt
        _paint_ellipse(img, xx, yy, geo.brow_centers[k], geo.brow_radii, geo.roll + tilt, pal["brow"])
    for k in range(2):
        _paint_ellipse(img, xx, yy, geo.eye_centers[k], geo.eye_radii, geo.roll, pal["sclera"])
    eye_open = geo.eye_radii[1] > geo.pupil_radius * 0.55
    if eye_open:
        for k in range(2):
            _paint_ellipse(img, xx, yy, geo.pupil_centers[k], (geo.pupil_radius, geo.pupil_radius), 0.0, pal["pupil"])
    _paint_ellipse(img, xx, yy, geo.mouth_center, geo.mouth_radii, geo.roll, pal["mouth"], shade=0.2)

    out = img.reshape(h, ss, w, ss, 3).mean(axis=(1, 3))
    if bright:
        out = out * np.float32(1.0 + 0.02 * bright * spec.hidden_motion)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


# region masks and the gaze oracle ------------------------------------------


def _box_mask(spec: SceneSpec, centers, half_w, half_h) -> np.ndarray:
    m = np.zeros((spec.height, spec.width), dtype=bool)
    for cx, cy in np.atleast_2d(centers):
        x0 = max(int(np.floor(cx - half_w)), 0)
        x1 = min(int(np.ceil(cx + half_w)) + 1, spec.width)
        y0 = max(int(np.floor(cy - half_h)), 0)
        y1 = min(int(np.ceil(cy + half_h)) + 1, spec.height)
        m[y0:y1, x0:x1] = True
    return m


def eye_region_mask(spec: SceneSpec, pose, expr) -> np.ndarray:
    """Union of bounding boxes around both eyes (any gaze), given pose/expr."""
    geo = face_geometry(spec, pose, expr, (0.0, 0.0))
    pad = 1.5
    half_w = geo.eye_radii[0] + pad
    half_h = max(geo.eye_radii[1], 0.14 * geo.head_radii[1]) + pad
    return _box_mask(spec, geo.eye_centers, half_w, half_h)


def mouth_region_mask(spec: SceneSpec, pose, expr=None) -> np.ndarray:
    """Bounding box around the mouth at full jaw opening for this pose."""
    e = np.zeros(spec.n_exp, dtype=np.float64)
    e[0] = spec.expr_amplitude[0] if spec.n_exp >= 1 else 1.0
    if expr is not None:
        expr = np.asarray(expr, dtype=np.float64)
        e[1:] = expr[1 : spec.n_exp]
    geo = face_geometry(spec, pose, e, (0.0, 0.0))
    pad = 1.5
    return _box_mask(spec, [geo.mouth_center], geo.mouth_radii[0] + pad, geo.mouth_radii[1] + pad)


def background_mask(spec: SceneSpec) -> np.ndarray:
    """Pixels no foreground shape can reach for any in-range pose."""
    h, w = spec.height, spec.width
    yy, xx = np.meshgrid(np.arange(h) + 0.5, np.arange(w) + 0.5, indexing="ij")
    reach_t = 0.08 * max(h, w) * spec.translation_range
    scale_max = (1.0 + 0.06) * spec.head_scale
    r_head = 1.30 * max(0.30 * w, 0.38 * h) * scale_max + reach_t
    cx, cy = w / 2.0, h * 0.45
    head = (xx - cx) ** 2 + (yy - cy) ** 2 <= r_head**2
    torso = (yy >= h * 1.08 - 0.34 * h - 2.0) & (np.abs(xx - w / 2.0) <= 0.44 * w + reach_t + 2.0)
    return ~(head | torso)


def true_pupil_centers(spec: SceneSpec, pose, expr, gaze) -> np.ndarray:
    return face_geometry(spec, pose, expr, gaze).pupil_centers


def estimate_pupils(image: np.ndarray, spec: SceneSpec, pose, expr) -> np.ndarray | None:
    """Darkness-centroid pupil detection inside the per-pose eye boxes.

    Returns (2, 2) centers or None when the pupils are not visible enough
    (e.g. during a blink).
    """
    geo = face_geometry(spec, pose, expr, (0.0, 0.0))
    lum = image.mean(axis=2)
    h, w = lum.shape
    yy, xx = np.meshgrid(np.arange(h) + 0.5, np.arange(w) + 0.5, indexing="ij")
    centers = []
    pad = 1.5
    for cx, cy in geo.eye_centers:
        x0 = max(int(cx - geo.eye_radii[0] - pad), 0)
        x1 = min(int(np.ceil(cx + geo.eye_radii[0] + pad)) + 1, w)
        y0 = max(int(cy - max(geo.eye_radii[1], 0.14 * geo.head_radii[1]) - pad), 0)
        y1 = min(int(np.ceil(cy + max(geo.eye_radii[1], 0.14 * geo.head_radii[1]) + pad)) + 1, h)
        if x1 <= x0 or y1 <= y0:
            return None
        box = lum[y0:y1, x0:x1]
        dark = np.clip(0.50 - box, 0.0, None) ** 2
        mass = dark.sum()
        if mass < 1e-4:
            return None
        cx_est = (dark * xx[y0:y1, x0:x1]).sum() / mass
        cy_est = (dark * yy[y0:y1, x0:x1]).sum() / mass
        centers.append((cx_est, cy_est))
    return np.asarray(centers)


def gaze_from_image(image: np.ndarray, spec: SceneSpec, pose, expr) -> np.ndarray | None:
    """Recover (yaw, pitch) in radians from detected pupil offsets."""
    detected = estimate_pupils(image, spec, pose, expr)
    if detected is None:
        return None
    geo = face_geometry(spec, pose, expr, (0.0, 0.0))
    off = detected - geo.eye_centers
    ct, st = np.cos(geo.roll), np.sin(geo.roll)
    u = off[:, 0] * ct + off[:, 1] * st
    v = -off[:, 0] * st + off[:, 1] * ct
    return np.array([u.mean() / geo.gaze_gain[0], v.mean() / geo.gaze_gain[1]])


def gaze_error_degrees(image: np.ndarray, spec: SceneSpec, pose, expr, true_gaze) -> float | None:
    est = gaze_from_image(image, spec, pose, expr)
    if est is None:
        return None
    d = est - np.asarray(true_gaze, dtype=np.float64).reshape(-1)
    return float(np.degrees(np.sqrt((d**2).sum())))


# trajectories and dataset ----------------------------------------------------


def _smooth_signals(rng: np.random.Generator, t: int, n: int, min_cycles=0.6, max_cycles=3.0) -> np.ndarray:
    """(n, t) smooth signals in [-1, 1]: normalized sums of 3 sinusoids."""
    k = 3
    amp = rng.uniform(0.4, 1.0, size=(n, k))
    cycles = rng.uniform(min_cycles, max_cycles, size=(n, k))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(n, k))
    ts = np.arange(t) / max(t - 1, 1)
    sig = np.einsum("nk,nkt->nt", amp, np.sin(2.0 * np.pi * cycles[..., None] * ts + phase[..., None]))
    return (sig / np.abs(amp).sum(axis=1, keepdims=True)).astype(np.float64)


@dataclass
class SceneDataset:
    spec: SceneSpec
    frames: np.ndarray  # (T, H, W, 3) float32 in [0, 1]
    poses: np.ndarray  # (T, 6)
    exprs: np.ndarray  # (T, n_exp)
    gazes: np.ndarray  # (T, 2)
    hidden: np.ndarray  # (T, 2) untracked sway/brightness state
    held_out: list[int]
    audio: AudioTrack | None = None

    def __post_init__(self):
        t = self.frames.shape[0]
        if not (t == len(self.poses) == len(self.exprs) == len(self.gazes)):
            raise ValidationError("track lengths disagree with the frame count")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def train_indices(self) -> list[int]:
        held = set(self.held_out)
        return [i for i in range(self.n_frames) if i not in held]

    def target_chw(self, i: int) -> np.ndarray:
        return np.ascontiguousarray(self.frames[i].transpose(2, 0, 1))

    def mean_train_frame(self) -> np.ndarray:
        return self.frames[self.train_indices].mean(axis=0)


def _interior_split(signals_by_dim: np.ndarray, t: int) -> list[int]:
    """Every 10th frame, excluding frames that carry a per-dim range extreme.

    Keeps every held-out parameter strictly inside the training range.
    """
    extremes = set()
    for row in signals_by_dim:
        extremes.add(int(np.argmin(row)))
        extremes.add(int(np.argmax(row)))
    return [i for i in range(t) if i % 10 == 9 and i not in extremes]


def generate_scene(spec: SceneSpec, t: int) -> SceneDataset:
    """Render a T-frame scene with smooth seeded parameter trajectories."""
    if t < 2:
        raise ValidationError("a scene needs at least 2 frames")
    rng = np.random.default_rng(spec.seed)
    pose_sig = _smooth_signals(rng, t, 6)
    expr_sig = _smooth_signals(rng, t, spec.n_exp, min_cycles=1.0, max_cycles=4.0)
    gaze_sig = _smooth_signals(rng, t, 2, min_cycles=1.0, max_cycles=5.0)
    hidden_sig = _smooth_signals(rng, t, 2)

    pose_scale = np.array(
        [
            spec.yaw_range,
            spec.pitch_range,
            spec.roll_range,
            spec.translation_range,
            spec.translation_range,
            spec.translation_range,
        ]
    )
    poses = (pose_sig.T * pose_scale).astype(np.float32)
    amp = np.asarray(spec.expr_amplitude[: spec.n_exp])
    exprs = ((expr_sig.T * 0.5 + 0.5) * amp).astype(np.float32)  # expressions in [0, amp]
    gazes = (gaze_sig.T * spec.gaze_range).astype(np.float32)
    hidden = hidden_sig.T.astype(np.float32)

    frames = np.empty((t, spec.height, spec.width, 3), dtype=np.float32)
    for i in range(t):
        frames[i] = render_scene_frame(spec, poses[i], exprs[i], gazes[i], hidden[i])

    all_sig = np.concatenate([poses.T, exprs.T, gazes.T], axis=0)
    held = _interior_split(all_sig, t)
    ds = SceneDataset(spec, frames, poses, exprs, gazes, hidden, held)
    _assert_split_interior(ds)
    return ds


def _assert_split_interior(ds: SceneDataset) -> None:
    tr = ds.train_indices
    for arr in (ds.poses, ds.exprs, ds.gazes):
        lo = arr[tr].min(axis=0)
        hi = arr[tr].max(axis=0)
        if ds.held_out:
            h = arr[ds.held_out]
            if (h < lo - 1e-6).any() or (h > hi + 1e-6).any():
                raise ValidationError("held-out parameters leave the training range")


def synth_audio_track(ds: SceneDataset) -> AudioTrack:
    """Acoustic feature track coupled to the jaw-open component.

    One designated channel carries the (lightly smoothed) jaw signal, an
    echo channel a half-amplitude copy; the rest is seeded smooth noise, so
    the track carries exactly the mouth information.
    """
    if ds.spec.n_exp < 1 or ds.spec.expr_amplitude[0] <= 0.0:
        raise ContractError("scene has no active jaw-open component to couple audio to")
    t = ds.n_frames
    jaw = ds.exprs[:, 0].astype(np.float64)
    amp = max(jaw.max() - jaw.min(), 1e-6)
    norm_jaw = (jaw - jaw.min()) / amp * 2.0 - 1.0
    kern = np.array([0.25, 0.5, 0.25])
    smooth = np.convolve(np.pad(norm_jaw, 1, mode="edge"), kern, mode="valid")

    rng = np.random.default_rng(ds.spec.seed + 7919)
    feats = 0.3 * _smooth_signals(rng, t, AUDIO_FEATURE_DIM).T
    feats[:, AUDIO_SIGNAL_CHANNEL] = smooth
    feats[:, AUDIO_ECHO_CHANNEL] = 0.5 * smooth
    track = AudioTrack(feats.astype(np.float32))
    corr = np.corrcoef(jaw, track.features[:, AUDIO_SIGNAL_CHANNEL])[0, 1]
    if not corr > 0.99:
        raise ContractError(f"audio-jaw coupling too weak (corr={corr:.4f})")
    return track


# persistence ----------------------------------------------------------------


def save_dataset(ds: SceneDataset, path) -> None:
    """frames/%06d.png + tracks.jsonl + spec.json (+ audio.bin)."""
    root = Path(path)
    (root / "frames").mkdir(parents=True, exist_ok=True)
    for i in range(ds.n_frames):
        arr = np.clip(np.rint(ds.frames[i] * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(arr).save(root / "frames" / f"{i:06d}.png")
    with open(root / "tracks.jsonl", "w") as fh:
        for i in range(ds.n_frames):
            rec = {
                "frame": i,
                "pose": [float(v) for v in ds.poses[i]],
                "expression": [float(v) for v in ds.exprs[i]],
                "gaze": [float(v) for v in ds.gazes[i]],
            }
            fh.write(json.dumps(rec) + "\n")
    meta = {
        "format": 1,
        "spec": ds.spec.to_dict(),
        "held_out": list(ds.held_out),
        "hidden": [[float(a), float(b)] for a, b in ds.hidden],
    }
    (root / "spec.json").write_text(json.dumps(meta, indent=1))
    if ds.audio is not None:
        write_tensor(root / "audio.bin", ds.audio.features)


def load_dataset(path) -> SceneDataset:
    root = Path(path)
    spec_path = root / "spec.json"
    if not spec_path.exists():
        raise DatasetError(f"missing {spec_path}")
    try:
        meta = json.loads(spec_path.read_text())
        spec = SceneSpec.from_dict(meta["spec"])
        held = [int(i) for i in meta["held_out"]]
        hidden = np.asarray(meta.get("hidden", []), dtype=np.float32)
    except (ValueError, KeyError, TypeError) as e:
        raise DatasetError(f"corrupt {spec_path}: {e}") from e

    tracks_path = root / "tracks.jsonl"
    if not tracks_path.exists():
        raise DatasetError(f"missing {tracks_path}")
    poses, exprs, gazes = [], [], []
    with open(tracks_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                poses.append(rec["pose"])
                exprs.append(rec["expression"])
                gazes.append(rec["gaze"])
            except (ValueError, KeyError) as e:
                raise DatasetError(f"corrupt {tracks_path} at line {lineno}: {e}") from e
    t = len(poses)
    frames = np.empty((t, spec.height, spec.width, 3), dtype=np.float32)
    for i in range(t):
        fp = root / "frames" / f"{i:06d}.png"
        if not fp.exists():
            raise DatasetError(f"missing frame file {fp}")
        try:
            with Image.open(fp) as im:
                arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
        except OSError as e:
            raise DatasetError(f"corrupt frame file {fp}: {e}") from e
        if arr.shape != (spec.height, spec.width, 3):
            raise DatasetError(f"frame file {fp} has shape {arr.shape}")
        frames[i] = arr
    if hidden.size == 0:
        hidden = np.zeros((t, 2), dtype=np.float32)
    audio = None
    audio_path = root / "audio.bin"
    if audio_path.exists():
        audio = AudioTrack(read_tensor(audio_path))
    return SceneDataset(
        spec,
        frames,
        np.asarray(poses, dtype=np.float32),
        np.asarray(exprs, dtype=np.float32),
        np.asarray(gazes, dtype=np.float32),
        hidden,
        held,
        audio,
    )
