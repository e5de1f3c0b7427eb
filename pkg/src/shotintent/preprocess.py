"""Raw pose sequences to fixed-width numeric feature series.

The feature set is x,y for the 14 left/right body joints used by all
classifiers: shoulder, elbow, wrist, hip, knee, ankle, heel. Depth (z) is
ingested upstream but dropped here. Feature order is fixed for
serialization stability: joints in the order above, left before right,
x before y.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import PoseSequence, ShotLabel
from .errors import (
    AllMissingFeature,
    DegenerateTorso,
    ExceedsTarget,
    TooShort,
)

# (joint, mediapipe-style landmark index) with left listed before right
SELECTED_JOINTS = (
    ("left_shoulder", 11),
    ("right_shoulder", 12),
    ("left_elbow", 13),
    ("right_elbow", 14),
    ("left_wrist", 15),
    ("right_wrist", 16),
    ("left_hip", 23),
    ("right_hip", 24),
    ("left_knee", 25),
    ("right_knee", 26),
    ("left_ankle", 27),
    ("right_ankle", 28),
    ("left_heel", 29),
    ("right_heel", 30),
)

FEATURE_NAMES = tuple(
    f"{joint}_{axis}" for joint, _ in SELECTED_JOINTS for axis in ("x", "y")
)

N_FEATURES = len(FEATURE_NAMES)  # 28

_FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

DEFAULT_DROP = 10
DEFAULT_CAP = 50
DEFAULT_V_MIN = 0.5


def feature_index(name: str) -> int:
    return _FEATURE_INDEX[name]


@dataclass
class FeatureSeries:
    """T x F matrix of joint coordinates plus carried clip metadata."""

    values: np.ndarray
    feature_names: tuple[str, ...]
    clip_id: str = ""
    folder_id: str = ""
    label: ShotLabel | None = None
    over_number: int | None = None

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]


@dataclass
class PaddedSeries:
    """Zero-padded feature matrix with its valid (unpadded) length."""

    values: np.ndarray
    valid_length: int
    feature_names: tuple[str, ...]
    clip_id: str = ""
    folder_id: str = ""
    label: ShotLabel | None = None
    over_number: int | None = None


def select_joints(seq: PoseSequence) -> FeatureSeries:
    """Extract x,y for the 14 selected joints; z and all other landmarks dropped."""
    T = len(seq.frames)
    values = np.empty((T, N_FEATURES), dtype=np.float64)
    for t, frame in enumerate(seq.frames):
        col = 0
        for _, lm_index in SELECTED_JOINTS:
            x, y, _z, _v = frame.landmarks[lm_index]
            values[t, col] = x
            values[t, col + 1] = y
            col += 2
    return FeatureSeries(
        values=values,
        feature_names=FEATURE_NAMES,
        clip_id=seq.clip_id,
        folder_id=seq.folder_id,
        label=seq.label,
        over_number=seq.over_number,
    )


def joint_visibilities(seq: PoseSequence) -> np.ndarray:
    """T x F visibility matrix aligned with select_joints output.

    Each joint's visibility covers both of its coordinate columns.
    """
    T = len(seq.frames)
    vis = np.empty((T, N_FEATURES), dtype=np.float64)
    for t, frame in enumerate(seq.frames):
        col = 0
        for _, lm_index in SELECTED_JOINTS:
            v = frame.landmarks[lm_index][3]
            vis[t, col] = v
            vis[t, col + 1] = v
            col += 2
    return vis


def impute_missing(
    series: FeatureSeries, visibilities: np.ndarray, v_min: float = DEFAULT_V_MIN
) -> FeatureSeries:
    """Replace low-visibility entries by per-feature linear interpolation in time.

    Leading and trailing gaps take the nearest valid value.
    """
    values = series.values
    if visibilities.shape != values.shape:
        raise ValueError(
            f"visibility shape {visibilities.shape} != series shape {values.shape}"
        )
    valid = visibilities >= v_min
    if valid.all():
        return series

    out = values.copy()
    T = values.shape[0]
    t_axis = np.arange(T, dtype=np.float64)
    for f in range(values.shape[1]):
        col_valid = valid[:, f]
        if not col_valid.any():
            raise AllMissingFeature(
                f"{series.clip_id}: feature {series.feature_names[f]!r} "
                "invisible in every frame"
            )
        if col_valid.all():
            continue
        # np.interp clamps to edge values, which fills leading/trailing gaps
        out[~col_valid, f] = np.interp(
            t_axis[~col_valid], t_axis[col_valid], values[col_valid, f]
        )
    return replace(series, values=out)


def normalize(series: FeatureSeries) -> FeatureSeries:
    """Center each frame on the mid-hip and scale by the clip-median torso length.

    Removes camera translation and framing scale; invariant under global
    translation and uniform scaling of the input coordinates.
    """
    v = series.values
    names = series.feature_names
    lhx, lhy = _FEATURE_INDEX["left_hip_x"], _FEATURE_INDEX["left_hip_y"]
    rhx, rhy = _FEATURE_INDEX["right_hip_x"], _FEATURE_INDEX["right_hip_y"]
    lsx, lsy = _FEATURE_INDEX["left_shoulder_x"], _FEATURE_INDEX["left_shoulder_y"]
    rsx, rsy = _FEATURE_INDEX["right_shoulder_x"], _FEATURE_INDEX["right_shoulder_y"]
    if names != FEATURE_NAMES:
        raise ValueError("normalize requires the standard joint feature set")

    mid_hip_x = 0.5 * (v[:, lhx] + v[:, rhx])
    mid_hip_y = 0.5 * (v[:, lhy] + v[:, rhy])
    mid_sho_x = 0.5 * (v[:, lsx] + v[:, rsx])
    mid_sho_y = 0.5 * (v[:, lsy] + v[:, rsy])
    torso = np.hypot(mid_sho_x - mid_hip_x, mid_sho_y - mid_hip_y)
    scale = float(np.median(torso))
    if scale < 1e-6:
        raise DegenerateTorso(
            f"{series.clip_id}: median torso length {scale} below 1e-6"
        )

    out = np.empty_like(v)
    out[:, 0::2] = (v[:, 0::2] - mid_hip_x[:, None]) / scale
    out[:, 1::2] = (v[:, 1::2] - mid_hip_y[:, None]) / scale
    return replace(series, values=out)


def trim_cap(
    series: FeatureSeries, drop: int = DEFAULT_DROP, cap: int = DEFAULT_CAP
) -> FeatureSeries:
    """Remove the first ``drop`` steps, then truncate to at most ``cap`` steps."""
    T = series.n_steps
    if T <= drop:
        raise TooShort(f"{series.clip_id}: {T} steps, need more than {drop}")
    return replace(series, values=series.values[drop : drop + cap].copy())


def pad_mask(series: FeatureSeries, target: int) -> PaddedSeries:
    """Zero-pad to ``target`` rows, recording the valid length."""
    T = series.n_steps
    if T > target:
        raise ExceedsTarget(f"{series.clip_id}: {T} steps exceed target {target}")
    values = np.zeros((target, series.values.shape[1]), dtype=np.float64)
    values[:T] = series.values
    return PaddedSeries(
        values=values,
        valid_length=T,
        feature_names=series.feature_names,
        clip_id=series.clip_id,
        folder_id=series.folder_id,
        label=series.label,
        over_number=series.over_number,
    )


def unpad(padded: PaddedSeries) -> FeatureSeries:
    """Drop padding rows; inverse of pad_mask."""
    return FeatureSeries(
        values=padded.values[: padded.valid_length].copy(),
        feature_names=padded.feature_names,
        clip_id=padded.clip_id,
        folder_id=padded.folder_id,
        label=padded.label,
        over_number=padded.over_number,
    )


def preprocess_sequence(
    seq: PoseSequence,
    drop: int = DEFAULT_DROP,
    cap: int = DEFAULT_CAP,
    v_min: float = DEFAULT_V_MIN,
    pad_to: int | None = None,
) -> PaddedSeries:
    """Full pipeline: select -> impute -> normalize -> trim_cap -> pad."""
    series = select_joints(seq)
    series = impute_missing(series, joint_visibilities(seq), v_min=v_min)
    series = normalize(series)
    series = trim_cap(series, drop=drop, cap=cap)
    return pad_mask(series, cap if pad_to is None else pad_to)
