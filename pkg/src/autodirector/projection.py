"""Rectified virtual-camera views from equirectangular sources.

Angle conventions: yaw is 0 at the horizontal image center and grows to
the right; pitch is 0 on the horizon and grows upward (top edge = +pi/2).
Pixel coordinates are continuous with the origin at the top-left corner,
so pixel (i, j) has its center at (j + 0.5, i + 0.5). Virtual cameras are
yaw-then-pitch rotated pinholes with no roll.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .model import BoundingBox, FrameGeometry, RenderingInstruction, crop_rect

FOV_MIN = 0.05
FOV_MAX = 2.8


@dataclass(frozen=True)
class EquirectGeometry:
    """Pixel size and angular coverage of an equirectangular source.

    Full-sphere sources (h_span = 2*pi) must be twice as wide as tall;
    partial panoramas cover h_span radians horizontally and a
    proportional vertical span (same radians per pixel on both axes).
    """

    width: int
    height: int
    h_span: float = 2 * math.pi

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("equirect dimensions must be positive")
        if not 0 < self.h_span <= 2 * math.pi:
            raise ValueError(f"horizontal span must lie in (0, 2*pi], got {self.h_span}")
        if math.isclose(self.h_span, 2 * math.pi) and self.width != 2 * self.height:
            raise ValueError(
                "full-sphere equirect must have width = 2 * height,"
                f" got {self.width}x{self.height}"
            )

    @property
    def v_span(self):
        return self.h_span * self.height / self.width


@dataclass(frozen=True)
class VirtualCamera:
    """Rectified pinhole view: yaw/pitch orientation, FOV, output size."""

    yaw: float
    pitch: float
    fov_h: float
    width: int
    height: int

    def __post_init__(self):
        if not 0 < self.fov_h < math.pi:
            raise ValueError(f"horizontal FOV must lie in (0, pi), got {self.fov_h}")
        if abs(self.pitch) > math.pi / 2:
            raise ValueError(f"pitch must lie in [-pi/2, pi/2], got {self.pitch}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("output size must be positive")


def pixel_to_angles(u, v, eq: EquirectGeometry):
    """Continuous source pixel -> (yaw, pitch)."""
    yaw = (np.asarray(u, dtype=float) / eq.width - 0.5) * eq.h_span
    pitch = (0.5 - np.asarray(v, dtype=float) / eq.height) * eq.v_span
    return yaw, pitch


def angles_to_pixel(yaw, pitch, eq: EquirectGeometry):
    """(yaw, pitch) -> continuous source pixel; inverse of pixel_to_angles."""
    u = (np.asarray(yaw, dtype=float) / eq.h_span + 0.5) * eq.width
    v = (0.5 - np.asarray(pitch, dtype=float) / eq.v_span) * eq.height
    return u, v


def bbox_to_fov(box: BoundingBox, eq: EquirectGeometry, zoom_factor: float = 1.0) -> float:
    """Horizontal FOV covering the box width, divided by the zoom factor."""
    if zoom_factor <= 0:
        raise ValueError(f"zoom factor must be positive, got {zoom_factor}")
    fov = (box.w / eq.width) * eq.h_span / zoom_factor
    return float(min(max(fov, FOV_MIN), FOV_MAX))


def _rotation(cam: VirtualCamera) -> np.ndarray:
    cy, sy = math.cos(cam.yaw), math.sin(cam.yaw)
    cp, sp = math.cos(cam.pitch), math.sin(cam.pitch)
    r_yaw = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    r_pitch = np.array([[1, 0, 0], [0, cp, sp], [0, -sp, cp]])
    return r_yaw @ r_pitch


def camera_ray(u, v, cam: VirtualCamera) -> np.ndarray:
    """Unit world-space ray through continuous output pixel (u, v).

    World frame: +z forward at yaw=pitch=0, +x to the right, +y up.
    """
    focal = (cam.width / 2) / math.tan(cam.fov_h / 2)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    x = (u - cam.width / 2) / focal
    y = -(v - cam.height / 2) / focal
    z = np.ones_like(x)
    dirs = np.stack([x, y, z], axis=-1)
    dirs = dirs @ _rotation(cam).T
    return dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)


def ray_to_angles(dirs: np.ndarray):
    dirs = np.asarray(dirs, dtype=float)
    yaw = np.arctan2(dirs[..., 0], dirs[..., 2])
    pitch = np.arcsin(np.clip(dirs[..., 1], -1.0, 1.0))
    return yaw, pitch


def instruction_to_camera(
    instr: RenderingInstruction, eq: EquirectGeometry, out_size: tuple[int, int]
) -> VirtualCamera:
    """Virtual camera realizing an instruction on an equirect stream.

    The view centers on the instruction's pixel; the FOV is the full
    horizontal coverage divided by the zoom, clamped to the usable range.
    """
    yaw, pitch = pixel_to_angles(instr.cx, instr.cy, eq)
    fov = min(max(eq.h_span / instr.zoom, FOV_MIN), FOV_MAX)
    pitch = float(np.clip(pitch, -math.pi / 2, math.pi / 2))
    return VirtualCamera(float(yaw), pitch, fov, out_size[0], out_size[1])


def remap(
    src: np.ndarray,
    cam: VirtualCamera,
    eq: EquirectGeometry | None = None,
    method: str = "bilinear",
) -> np.ndarray:
    """Resample an equirect image into the camera's rectified view.

    Wraps horizontally at the +-pi seam and clamps vertically. `method`
    is "bilinear" or "nearest" (bit-exact tests use the latter).
    """
    src = np.asarray(src)
    if src.ndim == 2:
        src = src[:, :, None]
    h, w = src.shape[:2]
    if eq is None:
        eq = EquirectGeometry(w, h)
    elif (eq.width, eq.height) != (w, h):
        raise DataError(
            f"source size {w}x{h} does not match equirect geometry"
            f" {eq.width}x{eq.height}"
        )
    cols = np.arange(cam.width) + 0.5
    rows = np.arange(cam.height) + 0.5
    uu, vv = np.meshgrid(cols, rows)
    dirs = camera_ray(uu, vv, cam)
    yaw, pitch = ray_to_angles(dirs)
    us, vs = angles_to_pixel(yaw, pitch, eq)
    gx = us - 0.5
    gy = np.clip(vs - 0.5, 0.0, h - 1.0)
    if method == "nearest":
        xi = np.mod(np.rint(gx).astype(int), w)
        yi = np.clip(np.rint(gy).astype(int), 0, h - 1)
        out = src[yi, xi]
    elif method == "bilinear":
        x0 = np.floor(gx).astype(int)
        fx = (gx - x0)[..., None]
        x0 = np.mod(x0, w)
        x1 = np.mod(x0 + 1, w)
        y0 = np.floor(gy).astype(int)
        fy = (gy - y0)[..., None]
        y1 = np.minimum(y0 + 1, h - 1)
        top = src[y0, x0] * (1 - fx) + src[y0, x1] * fx
        bottom = src[y1, x0] * (1 - fx) + src[y1, x1] * fx
        out = top * (1 - fy) + bottom * fy
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    if np.issubdtype(src.dtype, np.integer):
        out = np.rint(out).clip(0, 255).astype(src.dtype)
    return out if out.shape[-1] > 1 else out[..., 0]


def crop_image(
    img: np.ndarray, instr: RenderingInstruction, geom: FrameGeometry
) -> np.ndarray:
    """Flat-lens path: extract the crop rectangle pixel-exactly."""
    h, w = img.shape[:2]
    if (w, h) != (geom.width, geom.height):
        raise DataError(
            f"image size {w}x{h} does not match stream geometry"
            f" {geom.width}x{geom.height}"
        )
    x, y, cw, ch = crop_rect(instr, geom)
    x0 = int(round(x))
    y0 = int(round(y))
    x1 = min(x0 + max(1, int(round(cw))), w)
    y1 = min(y0 + max(1, int(round(ch))), h)
    return img[y0:y1, x0:x1].copy()
