"""Sampled compact sets: dilated arcs, circle constraints, radial curves,
and labeled unions of them.

A SampledComponent is a point grid inside the open unit disc with an
optional complex target per point and a fit weight. CompoundCompactum
bundles components and records the true minimum pairwise distance between
them, recomputed on construction. Grid suprema certify grid suprema only;
every report carries densities so refinement studies are reproducible.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .geometry import DiscAutomorphism, UnitCircleArc, apply_automorphism

KINDS = ("DilatedArc", "DiscBoundary", "RadialCurve", "ParamUnion")


class OverlapWarning(UserWarning):
    """Two components sit closer than 1e-6; fatal only where the assembled
    targets require disjointness."""


@dataclass
class SampledComponent:
    kind: str
    points: np.ndarray
    target: Optional[np.ndarray] = None
    weight: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown component kind {self.kind!r}")
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim != 1 or pts.size == 0:
            raise ConfigError("points must be a nonempty 1-d array")
        if not np.all(np.isfinite(pts.view(float))):
            raise ConfigError("points must be finite")
        if np.max(np.abs(pts)) >= 1.0:
            raise ConfigError("all sample moduli must be < 1")
        self.points = pts
        if self.target is not None:
            tgt = np.asarray(self.target, dtype=complex)
            if tgt.shape != pts.shape:
                raise ConfigError("target length must equal points length")
            self.target = tgt
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise ConfigError("weight must be positive and finite")

    def with_target(self, values) -> "SampledComponent":
        return SampledComponent(self.kind, self.points.copy(), np.asarray(values, dtype=complex),
                                self.weight, dict(self.params))


@dataclass
class CompoundCompactum:
    components: list
    separation: float = math.inf

    def max_modulus(self) -> float:
        return max(float(np.max(np.abs(c.points))) for c in self.components)

    @property
    def total_samples(self) -> int:
        return sum(len(c.points) for c in self.components)


def _min_distance(x: np.ndarray, y: np.ndarray) -> float:
    best = math.inf
    step = 1024
    for i in range(0, len(x), step):
        d = np.abs(x[i:i + step, None] - y[None, :])
        best = min(best, float(d.min()))
    return best


def union(*components: SampledComponent) -> CompoundCompactum:
    """Bundle components; separation is the exact min pairwise grid distance."""
    if not components:
        raise ConfigError("union needs at least one component")
    comps = list(components)
    sep = math.inf
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            sep = min(sep, _min_distance(comps[i].points, comps[j].points))
    if sep < 1e-6:
        warnings.warn(f"components overlap (separation {sep:.3e})", OverlapWarning)
    return CompoundCompactum(comps, sep)


def sample_dilated_arc(arc: UnitCircleArc, r: float, density: int,
                       center: complex = 0j) -> SampledComponent:
    """density equally spaced samples of {center + r(e^{it} - center)},
    endpoints included; center=0 is the plain dilated arc."""
    if not (0 < r < 1):
        raise ConfigError(f"need 0 < r < 1, got {r}")
    if density < 2:
        raise ConfigError("density must be >= 2")
    t = np.linspace(arc.alpha, arc.beta, density)
    pts = center + r * (np.exp(1j * t) - center)
    return SampledComponent("DilatedArc", pts, None, 1.0,
                            {"alpha": arc.alpha, "beta": arc.beta, "r": r,
                             "density": density,
                             "center": [complex(center).real, complex(center).imag]})


def sample_disc_constraint(r: float, density: int, center: complex = 0j) -> SampledComponent:
    """Zero-target samples on the circle center + r(T - center). Sampling the
    boundary is enough: a polynomial's max modulus over the enclosed disc is
    attained there."""
    if not (0 < r < 1):
        raise ConfigError(f"need 0 < r < 1, got {r}")
    if density < 2:
        raise ConfigError("density must be >= 2")
    t = 2.0 * math.pi * np.arange(density) / density
    pts = center + r * (np.exp(1j * t) - center)
    return SampledComponent("DiscBoundary", pts, np.zeros(density, dtype=complex), 1.0,
                            {"r": r, "density": density,
                             "center": [complex(center).real, complex(center).imag]})


def sample_radial_curve(phi: DiscAutomorphism, zeta: complex, r_from: float,
                        r_to: float, density: int) -> SampledComponent:
    """Images phi(r zeta) for density equally spaced r in [r_from, r_to]."""
    if not (0 <= r_from < r_to < 1):
        raise ConfigError(f"need 0 <= r_from < r_to < 1, got [{r_from}, {r_to}]")
    if density < 2:
        raise ConfigError("density must be >= 2")
    params = np.linspace(r_from, r_to, density)
    pts = apply_automorphism(phi, params * zeta)
    return SampledComponent("RadialCurve", pts, None, 1.0,
                            {"a": [phi.a.real, phi.a.imag], "theta": phi.theta,
                             "zeta": [complex(zeta).real, complex(zeta).imag],
                             "r_from": r_from, "r_to": r_to, "density": density})


def sup_distance(component: SampledComponent, f) -> float:
    """max over the grid of |f(point) - target|. f may be vectorized or scalar."""
    if component.target is None:
        raise ConfigError("component has no target")
    pts = component.points
    try:
        vals = np.asarray(f(pts), dtype=complex)
        if vals.shape != pts.shape:
            raise TypeError
    except TypeError:
        vals = np.array([f(p) for p in pts], dtype=complex)
    return float(np.max(np.abs(vals - component.target)))


# serialization: points are omitted when the uniform-grid params regenerate
# them exactly; explicit targets and ParamUnion points are always stored

_REGENERABLE = {"DilatedArc", "DiscBoundary", "RadialCurve"}


def _c2pair(z: complex):
    return [z.real, z.imag]


def _pairs(arr: np.ndarray):
    return [[z.real, z.imag] for z in arr]


def _from_pairs(pairs):
    return np.array([complex(p[0], p[1]) for p in pairs], dtype=complex)


def component_to_dict(c: SampledComponent) -> dict:
    d = {"kind": c.kind, "params": c.params, "weight": c.weight}
    if not (c.kind in _REGENERABLE and not c.params.get("custom")):
        d["points"] = _pairs(c.points)
    if c.target is not None:
        d["target"] = _pairs(c.target)
    return d


def component_from_dict(d: dict) -> SampledComponent:
    kind = d["kind"]
    params = d.get("params", {})
    if "points" in d:
        pts = _from_pairs(d["points"])
    elif kind == "DilatedArc":
        arc = UnitCircleArc(params["alpha"], params["beta"])
        pts = sample_dilated_arc(arc, params["r"], params["density"],
                                 complex(*params.get("center", [0, 0]))).points
    elif kind == "DiscBoundary":
        pts = sample_disc_constraint(params["r"], params["density"],
                                     complex(*params.get("center", [0, 0]))).points
    elif kind == "RadialCurve":
        phi = DiscAutomorphism(complex(*params["a"]), params["theta"])
        pts = sample_radial_curve(phi, complex(*params["zeta"]), params["r_from"],
                                  params["r_to"], params["density"]).points
    else:
        raise ConfigError(f"cannot regenerate points for kind {kind!r}")
    tgt = _from_pairs(d["target"]) if "target" in d else None
    return SampledComponent(kind, pts, tgt, d.get("weight", 1.0), params)


def compactum_to_json(cc: CompoundCompactum) -> str:
    doc = {"components": [component_to_dict(c) for c in cc.components]}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def compactum_from_json(text: str) -> CompoundCompactum:
    doc = json.loads(text)
    comps = [component_from_dict(d) for d in doc["components"]]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OverlapWarning)
        return union(*comps)
