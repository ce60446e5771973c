"""First-person renderer: per-column raycast, flat shading, plus a top-down debug view.

Projection is cylindrical: columns are uniform in viewing angle, so a point at
relative bearing b maps to column W * (0.5 + b / fov) at every bearing; rows use
a pinhole vertical focal length. All raster math is float64 numpy with no RNG,
so identical inputs produce identical pixel buffers.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .world import (
    AGENT_RADIUS,
    ArenaSpec,
    EpisodeState,
    ObjectKind,
    ObjectSpec,
    SPHERE_KINDS,
    ZONE_KINDS,
    Obb,
    obb_for,
    ramp_height_at,
    tunnel_slabs,
)

DEFAULT_PALETTE: dict[str, tuple[int, int, int]] = {
    "sky": (150, 200, 235),
    "ground": (120, 120, 114),
    "fence": (255, 255, 255),
    "wall": (132, 132, 132),
    "tunnel": (132, 132, 132),
    "death_zone": (205, 40, 40),
    "hot_zone": (235, 140, 40),
    "yellow_goal": (235, 205, 50),
    "green_goal": (70, 190, 70),
    "red_goal": (215, 45, 45),
    "ramp": (150, 80, 200),
    "platform": (70, 100, 220),
    "pushable_block": (198, 198, 198),
}

FENCE_HEIGHT = 1.0
_SIDE_SHADE = 0.82


class CameraError(ValueError):
    pass


@dataclass(frozen=True)
class CameraModel:
    eye_height: float = AGENT_RADIUS
    horizontal_fov: float = 60.0
    width: int = 512
    height: int = 512

    def validate(self) -> None:
        if self.width < 16 or self.height < 16:
            raise CameraError("camera resolution below 16x16")
        if not 20.0 < self.horizontal_fov < 120.0:
            raise CameraError("horizontal fov outside (20, 120) degrees")
        if self.eye_height <= 0:
            raise CameraError("eye height not positive")


DEFAULT_CAMERA = CameraModel()


@dataclass(eq=False)
class ImageObservation:
    pixels: np.ndarray  # (H, W, 3) uint8
    step_rendered_at: int
    blackout: bool = False


def resolve_palette(spec: ArenaSpec) -> dict[str, tuple[int, int, int]]:
    palette = dict(DEFAULT_PALETTE)
    for key, hex_color in spec.palette_overrides:
        palette[key] = _hex_rgb(hex_color)
    return palette


def _hex_rgb(value: str) -> tuple[int, int, int]:
    return int(value[1:3], 16), int(value[3:5], 16), int(value[5:7], 16)


def _object_color(obj: ObjectSpec, palette: dict[str, tuple[int, int, int]]) -> tuple[int, int, int]:
    if obj.color is not None:
        return _hex_rgb(obj.color)
    key = {
        ObjectKind.YELLOW_GOAL: "yellow_goal",
        ObjectKind.GREEN_GOAL: "green_goal",
        ObjectKind.RED_GOAL: "red_goal",
        ObjectKind.DEATH_ZONE: "death_zone",
        ObjectKind.HOT_ZONE: "hot_zone",
        ObjectKind.WALL: "wall",
        ObjectKind.RAMP: "ramp",
        ObjectKind.PLATFORM: "platform",
        ObjectKind.PUSHABLE_BLOCK: "pushable_block",
        ObjectKind.TUNNEL: "tunnel",
    }[obj.kind]
    return palette[key]


def project_bearing_to_column(bearing_deg: float, cam: CameraModel) -> float:
    """Column (fractional pixels) for a relative bearing; the calibration contract."""
    return cam.width * (0.5 + bearing_deg / cam.horizontal_fov)


def render(state: EpisodeState, spec: ArenaSpec, cam: CameraModel = DEFAULT_CAMERA) -> ImageObservation:
    """Render the agent's first-person view at the current step."""
    cam.validate()
    if spec.in_blackout(state.step):
        black = np.zeros((cam.height, cam.width, 3), dtype=np.uint8)
        return ImageObservation(pixels=black, step_rendered_at=state.step, blackout=True)

    palette = resolve_palette(spec)
    W, H = cam.width, cam.height
    eye_z = state.agent_pos[2] + cam.eye_height
    ex, ey = state.agent_pos[0], state.agent_pos[1]
    heading = state.agent_heading
    fov = cam.horizontal_fov
    vfov = fov * H / W
    focal = (H / 2.0) / math.tan(math.radians(vfov) / 2.0)

    cols = np.arange(W, dtype=np.float64)
    bearings = np.radians(heading + fov * ((cols + 0.5) / W - 0.5))
    dir_x = np.sin(bearings)
    dir_y = np.cos(bearings)

    img = np.empty((H, W, 3), dtype=np.float64)
    img[:, :] = palette["sky"]
    zbuf = np.full((H, W), np.inf, dtype=np.float64)
    half = H / 2.0
    rows = np.arange(H, dtype=np.float64) + 0.5
    below = rows > half
    denom = rows - half

    # ground plane with zone colouring
    if below.any():
        d_floor = np.full(H, np.inf)
        d_floor[below] = eye_z * focal / denom[below]
        img[below, :] = palette["ground"]
        zbuf[below, :] = d_floor[below, None]
        hit_x = ex + d_floor[below, None] * dir_x[None, :]
        hit_y = ey + d_floor[below, None] * dir_y[None, :]
        for obj in spec.objects:
            if obj.kind not in ZONE_KINDS:
                continue
            inside = _inside_mask(obb_for(obj), hit_x, hit_y)
            if inside.any():
                color = _object_color(obj, palette)
                sub = img[below, :]
                sub[inside] = color
                img[below, :] = sub

    # walkable tops seen from above (platform tops read as blue paths)
    for idx, obj in enumerate(spec.objects):
        if obj.kind is not ObjectKind.PLATFORM or obj.top_height >= eye_z:
            continue
        drop = eye_z - obj.top_height
        visible_rows = denom > 0
        d_top = np.full(H, np.inf)
        d_top[visible_rows] = drop * focal / denom[visible_rows]
        with np.errstate(invalid="ignore"):  # inf distance above the horizon
            hx = ex + d_top[:, None] * dir_x[None, :]
            hy = ey + d_top[:, None] * dir_y[None, :]
            mask = _inside_mask(obb_for(obj, state.object_states[idx].position), hx, hy)
        mask &= d_top[:, None] < zbuf
        if mask.any():
            img[mask] = _object_color(obj, palette)
            zbuf[mask] = np.broadcast_to(d_top[:, None], zbuf.shape)[mask]

    row_idx = np.arange(H, dtype=np.float64)[:, None] + 0.5
    opaque, transparent = _collect_prisms(state, spec, palette)
    for prism in opaque:
        _draw_prism(img, zbuf, prism, ex, ey, eye_z, dir_x, dir_y, focal, half, row_idx, blend=None)

    # spheres, far to near, so closer discs overwrite
    spheres = []
    for idx, obj in enumerate(spec.objects):
        if obj.kind in SPHERE_KINDS and not state.object_states[idx].collected:
            spheres.append((idx, obj))
    spheres.sort(key=lambda pair: -math.hypot(
        state.object_states[pair[0]].position[0] - ex,
        state.object_states[pair[0]].position[1] - ey,
    ))
    for idx, obj in spheres:
        _draw_sphere(
            img, zbuf, obj, state.object_states[idx].position,
            ex, ey, eye_z, heading, cam, focal, half, palette,
        )

    # transparent walls tint whatever they stand in front of
    transparent.sort(key=lambda p: -math.hypot(p.box.cx - ex, p.box.cy - ey))
    for prism in transparent:
        _draw_prism(img, zbuf, prism, ex, ey, eye_z, dir_x, dir_y, focal, half, row_idx, blend=0.35)

    pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return ImageObservation(pixels=pixels, step_rendered_at=state.step, blackout=False)


@dataclass
class _Prism:
    box: Obb
    base: float
    top: float
    color: tuple[int, int, int]
    ramp: ObjectSpec | None = None  # set when the top follows a ramp incline


def _collect_prisms(
    state: EpisodeState, spec: ArenaSpec, palette: dict[str, tuple[int, int, int]]
) -> tuple[list[_Prism], list[_Prism]]:
    opaque: list[_Prism] = []
    transparent: list[_Prism] = []
    for idx, obj in enumerate(spec.objects):
        pos = state.object_states[idx].position
        color = _object_color(obj, palette)
        if obj.kind in (ObjectKind.WALL, ObjectKind.PLATFORM, ObjectKind.PUSHABLE_BLOCK):
            prism = _Prism(obb_for(obj, pos), obj.base_height, obj.top_height, color)
            (transparent if obj.transparent else opaque).append(prism)
        elif obj.kind is ObjectKind.TUNNEL:
            for slab in tunnel_slabs(obj, pos):
                opaque.append(_Prism(slab, obj.base_height, obj.top_height, color))
        elif obj.kind is ObjectKind.RAMP:
            opaque.append(_Prism(obb_for(obj, pos), 0.0, obj.size[2], color, ramp=obj))
    # perimeter fence: four white boxes flush with the play area
    w, h = spec.size
    fence = palette["fence"]
    t = 0.3
    for cx, cy, sx, sy in (
        (w / 2.0, -t / 2.0, w + 2 * t, t),
        (w / 2.0, h + t / 2.0, w + 2 * t, t),
        (-t / 2.0, h / 2.0, t, h + 2 * t),
        (w + t / 2.0, h / 2.0, t, h + 2 * t),
    ):
        box = Obb(cx=cx, cy=cy, hx=sx / 2.0, hy=sy / 2.0, axis_x=(1.0, 0.0), axis_y=(0.0, 1.0))
        opaque.append(_Prism(box, 0.0, FENCE_HEIGHT, fence))
    return opaque, transparent


def _inside_mask(box: Obb, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    dx = xs - box.cx
    dy = ys - box.cy
    lx = dx * box.axis_x[0] + dy * box.axis_x[1]
    ly = dx * box.axis_y[0] + dy * box.axis_y[1]
    return (np.abs(lx) <= box.hx) & (np.abs(ly) <= box.hy)


def _ray_box_hits(
    box: Obb, ex: float, ey: float, dir_x: np.ndarray, dir_y: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Entry distance, validity, hit shading, local-y of the hit per column."""
    ox = ex - box.cx
    oy = ey - box.cy
    o_l = np.array([ox * box.axis_x[0] + oy * box.axis_x[1], ox * box.axis_y[0] + oy * box.axis_y[1]])
    d_lx = dir_x * box.axis_x[0] + dir_y * box.axis_x[1]
    d_ly = dir_x * box.axis_y[0] + dir_y * box.axis_y[1]
    halves = (box.hx, box.hy)
    t_near = np.full(dir_x.shape, -np.inf)
    t_far = np.full(dir_x.shape, np.inf)
    near_axis = np.zeros(dir_x.shape, dtype=np.int8)
    for axis, d_l in enumerate((d_lx, d_ly)):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-halves[axis] - o_l[axis]) / d_l
            t2 = (halves[axis] - o_l[axis]) / d_l
        lo = np.fmin(t1, t2)
        hi = np.fmax(t1, t2)
        parallel = np.abs(d_l) < 1e-12
        inside = np.abs(o_l[axis]) <= halves[axis]
        lo = np.where(parallel, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(parallel, np.where(inside, np.inf, -np.inf), hi)
        update = lo > t_near
        near_axis = np.where(update, axis, near_axis)
        t_near = np.fmax(t_near, lo)
        t_far = np.fmin(t_far, hi)
    valid = (t_near <= t_far) & (t_near > 1e-6)
    shade = np.where(near_axis == 0, _SIDE_SHADE, 1.0)
    hit_ly = o_l[1] + t_near * d_ly
    return t_near, valid, shade, hit_ly


def _draw_prism(
    img: np.ndarray,
    zbuf: np.ndarray,
    prism: _Prism,
    ex: float,
    ey: float,
    eye_z: float,
    dir_x: np.ndarray,
    dir_y: np.ndarray,
    focal: float,
    half: float,
    row_idx: np.ndarray,
    blend: float | None,
) -> None:
    t, valid, shade, hit_ly = _ray_box_hits(prism.box, ex, ey, dir_x, dir_y)
    if not valid.any():
        return
    t = np.where(valid, t, np.inf)
    top = prism.top
    if prism.ramp is not None:
        frac = np.clip((hit_ly + prism.box.hy) / (2.0 * prism.box.hy), 0.0, 1.0)
        top = prism.base + frac * prism.ramp.size[2]
    top_rows = half - (top - eye_z) * focal / t
    base_rows = half - (prism.base - eye_z) * focal / t
    span = (row_idx >= top_rows[None, :]) & (row_idx <= base_rows[None, :]) & valid[None, :]
    color = np.array(prism.color, dtype=np.float64)
    if blend is None:
        mask = span & (t[None, :] < zbuf)
        if not mask.any():
            return
        shaded = color[None, :] * shade[:, None]  # (W, 3)
        img[mask] = np.broadcast_to(shaded[None, :, :], img.shape)[mask]
        zbuf[mask] = np.broadcast_to(t[None, :], zbuf.shape)[mask]
    else:
        mask = span & (t[None, :] < zbuf)
        if not mask.any():
            return
        img[mask] = (1.0 - blend) * img[mask] + blend * color[None, :]


def _draw_sphere(
    img: np.ndarray,
    zbuf: np.ndarray,
    obj: ObjectSpec,
    position: tuple[float, float, float],
    ex: float,
    ey: float,
    eye_z: float,
    heading: float,
    cam: CameraModel,
    focal: float,
    half: float,
    palette: dict[str, tuple[int, int, int]],
) -> None:
    rx, ry = position[0] - ex, position[1] - ey
    d_h = math.hypot(rx, ry)
    if d_h < 0.05:
        return
    bearing = (math.degrees(math.atan2(rx, ry)) - heading + 180.0) % 360.0 - 180.0
    if abs(bearing) > cam.horizontal_fov / 2.0 + 30.0:
        return
    col_c = project_bearing_to_column(bearing, cam)
    row_c = half - (position[2] - eye_z) * focal / d_h
    r_px = obj.radius * focal / d_h
    if r_px < 0.5:
        r_px = 0.5
    H, W = img.shape[0], img.shape[1]
    c0 = max(0, int(math.floor(col_c - r_px)))
    c1 = min(W, int(math.ceil(col_c + r_px)) + 1)
    r0 = max(0, int(math.floor(row_c - r_px)))
    r1 = min(H, int(math.ceil(row_c + r_px)) + 1)
    if c0 >= c1 or r0 >= r1:
        return
    cc = np.arange(c0, c1, dtype=np.float64) + 0.5
    rr = np.arange(r0, r1, dtype=np.float64)[:, None] + 0.5
    disc = (cc[None, :] - col_c) ** 2 + (rr - row_c) ** 2 <= r_px * r_px
    visible = disc & (d_h < zbuf[r0:r1, c0:c1])
    if not visible.any():
        return
    img[r0:r1, c0:c1][visible] = _object_color(obj, palette)
    zbuf[r0:r1, c0:c1][visible] = d_h


# --- encoding ---------------------------------------------------------------


def encode_png(obs: ImageObservation) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(obs.pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("RGB"))


# --- top-down debug view -----------------------------------------------------


def render_topdown(state: EpisodeState, spec: ArenaSpec, size_px: int = 256) -> ImageObservation:
    """Orthographic overhead view (privileged debug aid; ignores blackouts).

    World +y points up in the image; the agent is the white triangle.
    """
    palette = resolve_palette(spec)
    w, h = spec.size
    scale = size_px / max(w, h)

    def to_px(x: float, y: float) -> tuple[float, float]:
        return x * scale, size_px - y * scale

    im = Image.new("RGB", (size_px, size_px), palette["ground"])
    draw = ImageDraw.Draw(im)

    order = {k: i for i, k in enumerate(
        [ObjectKind.HOT_ZONE, ObjectKind.DEATH_ZONE, ObjectKind.RAMP, ObjectKind.PLATFORM,
         ObjectKind.TUNNEL, ObjectKind.WALL, ObjectKind.PUSHABLE_BLOCK,
         ObjectKind.YELLOW_GOAL, ObjectKind.GREEN_GOAL, ObjectKind.RED_GOAL]
    )}
    indexed = sorted(range(len(spec.objects)), key=lambda i: order[spec.objects[i].kind])
    for idx in indexed:
        obj = spec.objects[idx]
        ostate = state.object_states[idx]
        color = _object_color(obj, palette)
        if obj.kind in SPHERE_KINDS:
            if ostate.collected:
                continue
            x, y = ostate.position[0], ostate.position[1]
            r = obj.radius * scale
            px, py = to_px(x, y)
            draw.ellipse([px - r, py - r, px + r, py + r], fill=color)
        elif obj.kind is ObjectKind.TUNNEL:
            for slab in tunnel_slabs(obj, ostate.position):
                draw.polygon([to_px(cx, cy) for cx, cy in slab.corners()], fill=color)
        else:
            box = obb_for(obj, ostate.position)
            draw.polygon([to_px(cx, cy) for cx, cy in box.corners()], fill=color)

    draw.rectangle([0, 0, size_px - 1, size_px - 1], outline=palette["fence"], width=2)

    ax, ay, _ = state.agent_pos
    from .world import heading_direction

    dx, dy = heading_direction(state.agent_heading)
    tip = to_px(ax + dx * 1.2, ay + dy * 1.2)
    left = to_px(ax - dx * 0.6 - dy * 0.5, ay - dy * 0.6 + dx * 0.5)
    right = to_px(ax - dx * 0.6 + dy * 0.5, ay - dy * 0.6 - dx * 0.5)
    draw.polygon([tip, left, right], fill=(255, 255, 255))

    return ImageObservation(
        pixels=np.asarray(im, dtype=np.uint8).copy(),
        step_rendered_at=state.step,
        blackout=False,
    )
