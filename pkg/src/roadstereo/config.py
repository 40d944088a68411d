"""Flat ``key = value`` configuration handling.

The on-disk format is UTF-8 text, one ``key = value`` pair per line,
``#`` starting a comment, keys namespaced with dots::

    # matcher settings
    matcher.sigma0 = 1.5
    matcher.d_max = 30
    scene.defects = 140,90,12,-2.0; 220,170,9,1.5

Command-line ``--set key=value`` overrides always win over file values,
which win over the built-in defaults (mirroring the reference parameter
choices: sigma0 1.5, sigma1 5.5, delta_r 1, lambda0 10,
delta_psi pi/1.8e6, psi_init 0, d_max 30, delta_t 30).
"""

import math
from dataclasses import dataclass, field

from .matching import MatcherParams
from .roadmodel import RollOptions
from .synthetic import Defect, SceneSpec

_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}

DEFAULTS = {
    "matcher.window_radius": "3",
    "matcher.d_max": "30",
    "matcher.sigma0": "1.5",
    "matcher.sigma1": "5.5",
    "matcher.delta_r": "1",
    "matcher.agg_radius": "5",
    "perspective.window": "11",
    "perspective.max_shift": "64",
    "perspective.response_threshold": "20",
    "roll.lambda0": "10",
    "roll.delta_psi": repr(math.pi / 1.8e6),
    "roll.max_iters": "100",
    "roll.psi_init": "0",
    "transform.delta_t": "30",
    "transform.trim_3sigma": "false",
    "output.format": "pfm",
    "run.workers": "1",
    "run.timing": "false",
    "mask.path": "",
    "scene.width": "320",
    "scene.height": "240",
    "scene.f": "350",
    "scene.u_o": "",
    "scene.v_o": "",
    "scene.t_c": "0.2",
    "scene.beta": "1.6",
    "scene.theta": "1.9",
    "scene.psi": "0",
    "scene.n_x": "1",
    "scene.texture_seed": "1",
    "scene.noise_sigma": "0",
    "scene.defects": "",
}


def parse_config_text(text, source="<config>"):
    """Parse the key=value format into a flat str->str mapping."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config_file(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_config_text(f.read(), source=str(path))


def _parse_defects(text):
    defects = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 4:
            raise ValueError(
                f"defect {chunk!r} must be 'center_u,center_v,radius,offset'"
            )
        cu, cv, radius, off = (float(p) for p in parts)
        defects.append(Defect(center=(cu, cv), radius=radius, depth_offset=off))
    return tuple(defects)


@dataclass
class PipelineConfig:
    """Parsed configuration for every CLI command."""

    matcher: MatcherParams
    roll: RollOptions
    window: int
    max_shift: int
    response_threshold: float
    delta_t: float
    trim_3sigma: bool
    output_format: str
    workers: int
    timing: bool
    mask_path: str
    scene: SceneSpec
    raw: dict = field(default_factory=dict)


def build_config(file_values=None, overrides=None):
    """Merge defaults, file values and overrides into a PipelineConfig."""
    merged = dict(DEFAULTS)
    for layer in (file_values or {}), (overrides or {}):
        for key, value in layer.items():
            if key not in DEFAULTS:
                raise ValueError(f"unknown configuration key {key!r}")
            merged[key] = value

    def fget(key):
        return float(merged[key])

    def iget(key):
        return int(float(merged[key]))

    def bget(key):
        v = merged[key].lower()
        if v not in _BOOL:
            raise ValueError(f"{key}: expected a boolean, got {merged[key]!r}")
        return _BOOL[v]

    matcher = MatcherParams(
        window_radius=iget("matcher.window_radius"),
        d_max=iget("matcher.d_max"),
        sigma0=fget("matcher.sigma0"),
        sigma1=fget("matcher.sigma1"),
        delta_r=fget("matcher.delta_r"),
        agg_radius=iget("matcher.agg_radius"),
    )
    roll = RollOptions(
        lambda0=fget("roll.lambda0"),
        delta_psi=fget("roll.delta_psi"),
        max_iters=iget("roll.max_iters"),
        psi_init=fget("roll.psi_init"),
    )
    scene = SceneSpec(
        width=iget("scene.width"),
        height=iget("scene.height"),
        f=fget("scene.f"),
        u_o=fget("scene.u_o") if merged["scene.u_o"] else None,
        v_o=fget("scene.v_o") if merged["scene.v_o"] else None,
        t_c=fget("scene.t_c"),
        beta=fget("scene.beta"),
        theta=fget("scene.theta"),
        psi=fget("scene.psi"),
        n_x=fget("scene.n_x"),
        texture_seed=iget("scene.texture_seed"),
        noise_sigma=fget("scene.noise_sigma"),
        defects=_parse_defects(merged["scene.defects"]),
    )
    fmt = merged["output.format"]
    if fmt not in ("png16", "pfm", "csv"):
        raise ValueError(f"output.format must be png16, pfm or csv, got {fmt!r}")
    return PipelineConfig(
        matcher=matcher,
        roll=roll,
        window=iget("perspective.window"),
        max_shift=iget("perspective.max_shift"),
        response_threshold=fget("perspective.response_threshold"),
        delta_t=fget("transform.delta_t"),
        trim_3sigma=bget("transform.trim_3sigma"),
        output_format=fmt,
        workers=max(1, iget("run.workers")),
        timing=bget("run.timing"),
        mask_path=merged["mask.path"],
        scene=scene,
        raw=merged,
    )
