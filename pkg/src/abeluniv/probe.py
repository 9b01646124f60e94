"""Universality probes for built or composed functions.

Three jobs live here: measuring how close the dilates f_r come to targets
on circle arcs (the density meter the whole package is about), wrapping
functions in left/right compositions without losing evaluability, and
continuing local inverse branches of an outer map g along paths so that a
target h on an arc can be replaced by a lifted h0 with g(h0) close to h.

Everything is grid-based and reported as measured numbers; a scan is
evidence about finitely many radii and targets, never a certification of
density.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import CertificateFailure, ConfigError, InvariantViolation
from .geometry import DiscAutomorphism, UnitCircleArc, apply_automorphism
from .polyfit import ComplexPolynomial, derivative, evaluate


# composition trees

class FunctionExpr:
    """Immutable composition tree; callable on scalars and arrays."""

    def __call__(self, z):
        arr = np.asarray(z, dtype=complex)
        scalar = arr.ndim == 0
        vals = self._eval(np.atleast_1d(arr))
        return vals[0].item() if scalar else vals

    def _eval(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def label(self) -> str:
        raise NotImplementedError


class PolyExpr(FunctionExpr):
    def __init__(self, poly: ComplexPolynomial):
        self.poly = poly

    def _eval(self, z):
        return np.asarray(evaluate(self.poly, z))

    @property
    def label(self):
        return f"poly(degree={self.poly.degree})"


class ExpNode(FunctionExpr):
    def __init__(self, inner: FunctionExpr):
        self.inner = inner

    def _eval(self, z):
        return np.exp(self.inner._eval(z))

    @property
    def label(self):
        return f"exp({self.inner.label})"


class ReciprocalNode(FunctionExpr):
    """1/f, only evaluable where the recorded min-modulus certificate keeps
    holding: every evaluation grid is re-checked against the 1e-6 floor."""

    FLOOR = 1e-6

    def __init__(self, inner: FunctionExpr, certified_min: float, grid_size: int):
        self.inner = inner
        self.certified_min = certified_min
        self.grid_size = grid_size

    def _eval(self, z):
        vals = self.inner._eval(z)
        dip = float(np.min(np.abs(vals)))
        if dip <= self.FLOOR:
            raise CertificateFailure(
                f"reciprocal argument dips to {dip:.3e} <= {self.FLOOR} on the "
                "evaluation grid")
        return 1.0 / vals

    @property
    def label(self):
        return f"reciprocal({self.inner.label})"


class PolyOfNode(FunctionExpr):
    def __init__(self, outer: ComplexPolynomial, inner: FunctionExpr):
        self.outer = outer
        self.inner = inner

    def _eval(self, z):
        return np.asarray(evaluate(self.outer, self.inner._eval(z)))

    @property
    def label(self):
        return f"poly(degree={self.outer.degree})o({self.inner.label})"


class PreComposeNode(FunctionExpr):
    """f composed with a disc automorphism on the right: z is moved first."""

    def __init__(self, inner: FunctionExpr, phi: DiscAutomorphism):
        self.inner = inner
        self.phi = phi

    def _eval(self, z):
        return self.inner._eval(np.asarray(apply_automorphism(self.phi, z)))

    @property
    def label(self):
        return (f"({self.inner.label})oPhi[a={self.phi.a!r},"
                f"theta={self.phi.theta!r}]")


def as_expr(f) -> FunctionExpr:
    if isinstance(f, FunctionExpr):
        return f
    if isinstance(f, ComplexPolynomial):
        return PolyExpr(f)
    if isinstance(f, (int, float, complex)):
        return PolyExpr(ComplexPolynomial([complex(f)]))
    raise ConfigError(f"cannot interpret {type(f).__name__} as a function")


def compose_left(g, f, probe_grid=None) -> FunctionExpr:
    """exp(f), 1/f, or P(f). The reciprocal wrapper demands a probe grid on
    which |f| stays above the 1e-6 floor; the measured minimum is recorded
    in the node as its certificate."""
    expr = as_expr(f)
    if isinstance(g, ComplexPolynomial):
        return PolyOfNode(g, expr)
    if isinstance(g, str):
        name = g.lower()
        if name == "exp":
            return ExpNode(expr)
        if name == "reciprocal":
            if probe_grid is None:
                raise ConfigError("reciprocal composition needs a probe grid "
                                  "for its min-modulus certificate")
            grid = np.asarray(probe_grid, dtype=complex).ravel()
            if grid.size == 0:
                raise ConfigError("empty probe grid")
            vals = expr(grid)
            m = float(np.min(np.abs(vals)))
            if m <= ReciprocalNode.FLOOR:
                raise CertificateFailure(
                    f"min modulus {m:.3e} on the probe grid is not above "
                    f"{ReciprocalNode.FLOOR}; reciprocal refused")
            return ReciprocalNode(expr, m, grid.size)
    raise ConfigError(f"unknown left composition {g!r}")


def compose_right(f, phi: DiscAutomorphism) -> FunctionExpr:
    return PreComposeNode(as_expr(f), phi)


# dilate distance and scans

def _target_values(target, zeta: np.ndarray) -> np.ndarray:
    if isinstance(target, ComplexPolynomial):
        return np.asarray(evaluate(target, zeta))
    if isinstance(target, FunctionExpr):
        return target(zeta)
    if callable(target):
        try:
            v = np.asarray(target(zeta), dtype=complex)
            if v.shape == zeta.shape:
                return v
        except (TypeError, ValueError):
            pass
        return np.array([complex(target(z)) for z in zeta])
    return np.full(zeta.shape, complex(target))


def dilate_distance(f, arc: UnitCircleArc, target, r: float,
                    density: int = 256) -> float:
    """Grid sup of |f(r zeta) - target(zeta)| over the sampled arc."""
    if not (0 < r < 1):
        raise ConfigError(f"dilation radius {r} outside (0, 1)")
    if density < 2:
        raise ConfigError("need at least two sample points")
    expr = as_expr(f)
    t = np.linspace(arc.alpha, arc.beta, density)
    zeta = np.exp(1j * t)
    fv = expr(r * zeta)
    tv = _target_values(target, zeta)
    return float(np.max(np.abs(fv - tv)))


@dataclass
class DilateReport:
    """Per (target, arc): sup errors over the scanned stage radii, plus the
    argmin stage."""

    rows: List[dict] = field(default_factory=list)
    best: List[dict] = field(default_factory=list)

    @staticmethod
    def from_rows(rows: List[dict]) -> "DilateReport":
        best = {}
        for row in rows:
            key = (row["target_id"], row["arc_id"])
            if key not in best or row["sup_error"] < best[key]["best_error"]:
                best[key] = {"target_id": key[0], "arc_id": key[1],
                             "best_n": row["n"], "best_error": row["sup_error"]}
        return DilateReport(rows, [best[k] for k in sorted(best)])

    def errors_for(self, target_id: int, arc_id: int) -> List[float]:
        return [r["sup_error"] for r in self.rows
                if r["target_id"] == target_id and r["arc_id"] == arc_id]

    def best_for(self, target_id: int, arc_id: int) -> dict:
        for b in self.best:
            if b["target_id"] == target_id and b["arc_id"] == arc_id:
                return b
        raise ConfigError(f"no scan entry for pair ({target_id}, {arc_id})")


def universality_scan(f, targets: Sequence, arcs: Sequence[UnitCircleArc],
                      rho, N: int, density: int = 256) -> DilateReport:
    """Full dilate-distance matrix over stages 1..N for every
    (target, arc) pair."""
    r = rho.r if hasattr(rho, "r") else tuple(float(x) for x in rho)
    if N < 1:
        raise ConfigError("need at least one stage to scan")
    if len(r) < N + 1:
        raise ConfigError(f"radii schedule too short: need {N + 1} entries")
    expr = as_expr(f)
    rows = []
    for ti, target in enumerate(targets):
        for ai, arc in enumerate(arcs):
            for n in range(1, N + 1):
                d = dilate_distance(expr, arc, target, r[n], density)
                rows.append({"target_id": ti, "arc_id": ai, "n": n,
                             "r": r[n], "sup_error": d})
    return DilateReport.from_rows(rows)


def radial_value_coverage(f, zeta: complex, rho, N: int,
                          targets, eps: float) -> float:
    """Fraction of the target grid within eps of some dilate value
    f(r_n zeta), n = 0..N."""
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise ConfigError("zeta must lie on the unit circle")
    if eps <= 0:
        raise ConfigError("eps must be positive")
    r = rho.r if hasattr(rho, "r") else tuple(float(x) for x in rho)
    if len(r) < N + 1:
        raise ConfigError(f"radii schedule too short: need {N + 1} entries")
    expr = as_expr(f)
    vals = expr(np.array([rr * zeta for rr in r[:N + 1]], dtype=complex))
    grid = np.asarray(targets, dtype=complex).ravel()
    if grid.size == 0:
        raise ConfigError("empty target grid")
    dist = np.min(np.abs(grid[:, None] - vals[None, :]), axis=1)
    return float(np.mean(dist <= eps))


# inverse-branch continuation

@dataclass(frozen=True)
class LiftStatus:
    kind: str            # "complete" | "critical-point" | "diverged"
    index: int = -1      # sample index where continuation stopped

    @property
    def complete(self) -> bool:
        return self.kind == "complete"


@dataclass
class LiftResult:
    t: np.ndarray        # arc-length fractions in [0, 1]
    values: np.ndarray   # branch samples h0(t_j)
    targets: np.ndarray  # path values the samples were solved against
    max_defect: float
    status: LiftStatus

    @property
    def endpoint(self) -> complex:
        return complex(self.values[-1])


class _Stuck(Exception):
    pass


class _Blown(Exception):
    pass


def _as_inverse_pair(g) -> Tuple[Callable, Callable, str]:
    if isinstance(g, str) and g.lower() == "exp":
        return cmath.exp, cmath.exp, "exp"
    if isinstance(g, (list, tuple)):
        g = ComplexPolynomial(g)
    if isinstance(g, ComplexPolynomial):
        der = derivative(g)
        return (lambda z: evaluate(g, z), lambda z: evaluate(der, z),
                f"poly(degree={g.degree})")
    raise ConfigError(f"cannot continue inverse branches of {type(g).__name__}")


def _damped_newton(gf, dg, h0: complex, w: complex, tol: float,
                   iters: int = 40) -> Tuple[complex, float, bool]:
    h = h0
    res = abs(gf(h) - w)
    for _ in range(iters):
        if res <= tol:
            return h, res, True
        d = dg(h)
        if abs(d) < 1e-14:
            return h, res, False
        step = (gf(h) - w) / d
        lam = 1.0
        while lam >= 1.0 / 64:
            cand = h - lam * step
            rc = abs(gf(cand) - w)
            if rc < res:
                h, res = cand, rc
                break
            lam *= 0.5
        else:
            return h, res, False
    return h, res, res <= tol


def _advance(gf, dg, h: complex, w_cur: complex, w_next: complex,
             tol: float) -> Tuple[bool, complex]:
    """One predictor-corrector step; rejects when the derivative is too
    small, the corrector fails, the step leaves the predictor's locality,
    or the midpoint of the linear interpolant falls off the path."""
    d = dg(h)
    if abs(d) < 1e-8:
        return False, h
    h_pred = h + (w_next - w_cur) / d
    if not (math.isfinite(h_pred.real) and math.isfinite(h_pred.imag)):
        return False, h
    h_new, _, ok = _damped_newton(gf, dg, h_pred, w_next, tol)
    if not ok:
        return False, h
    if abs(h_new - h_pred) > 0.5 * abs(h_pred - h) + tol:
        return False, h
    mid_defect = abs(gf(0.5 * (h + h_new)) - 0.5 * (w_cur + w_next))
    if mid_defect > 3.0 * tol:
        # linear resampling between samples must stay a small multiple of
        # tol off the path, so the step size is capped by curvature
        return False, h
    return True, h_new


def _march_segment(gf, dg, h: complex, w_a: complex, w_b: complex,
                   tol: float, min_step: float, record) -> complex:
    length = abs(w_b - w_a)
    if length == 0:
        return h
    direction = (w_b - w_a) / length
    pos = 0.0
    init = length / 64.0
    step = init
    while pos < length * (1 - 1e-15):
        d = min(step, length - pos)
        w_cur = w_a + direction * pos
        w_next = w_a + direction * (pos + d)
        ok, h_new = _advance(gf, dg, h, w_cur, w_next, tol)
        if ok:
            h = h_new
            pos += d
            record(pos / length, h, w_next)
            if abs(h) > 1e6:
                raise _Blown()
            step = min(step * 2.0, init)
        else:
            if step <= min_step:
                raise _Stuck()
            step = max(step * 0.5, min_step)
    return h


def lift_path(g, path: Sequence[complex], start: complex, tol: float) -> LiftResult:
    """Continue the branch h of g^{-1} with g(start) = path[0] along the
    polyline. Stops with a critical-point status when no acceptable step
    above the minimum (1e-6 of the path length) exists, and with a
    diverged status when |h| passes 1e6."""
    gf, dg, _ = _as_inverse_pair(g)
    pts = [complex(p) for p in path]
    if len(pts) < 2:
        raise ConfigError("path needs at least two points")
    if tol <= 0:
        raise ConfigError("tolerance must be positive")
    start = complex(start)
    d0 = abs(gf(start) - pts[0])
    if d0 > tol:
        raise ConfigError(
            f"start is not a branch point: |g(start) - path[0]| = {d0:.3e} > {tol}")
    lengths = [abs(b - a) for a, b in zip(pts, pts[1:])]
    total = sum(lengths)
    ts, hs, ws = [0.0], [start], [pts[0]]
    status = LiftStatus("complete")
    if total > 0:
        min_step = 1e-6 * total
        h = start
        done = 0.0
        for (a, b), seg in zip(zip(pts, pts[1:]), lengths):
            def record(frac, hh, ww, _done=done, _seg=seg):
                ts.append((_done + frac * _seg) / total)
                hs.append(hh)
                ws.append(ww)
            try:
                h = _march_segment(gf, dg, h, a, b, tol, min_step, record)
            except _Stuck:
                status = LiftStatus("critical-point", len(hs) - 1)
                break
            except _Blown:
                status = LiftStatus("diverged", len(hs) - 1)
                break
            done += seg
    t = np.asarray(ts)
    values = np.asarray(hs, dtype=complex)
    targets = np.asarray(ws, dtype=complex)
    defect = float(np.max(np.abs(np.array([gf(h) for h in hs]) - targets)))
    return LiftResult(t, values, targets, defect, status)


def branch_obstructions(g) -> np.ndarray:
    """Values of g at the zeros of g'; for exp, the single omitted value 0.
    Lift node targets must keep clear of these."""
    if isinstance(g, str) and g.lower() == "exp":
        return np.array([0j])
    if isinstance(g, (list, tuple)):
        g = ComplexPolynomial(g)
    if not isinstance(g, ComplexPolynomial):
        raise ConfigError(f"no obstruction table for {type(g).__name__}")
    der = derivative(g)
    roots = polynomial_roots(der.coeffs)
    if roots.size == 0:
        return np.array([], dtype=complex)
    return np.asarray(evaluate(g, roots))


def polynomial_roots(coeffs) -> np.ndarray:
    """All complex roots via the companion matrix of the monic normalization."""
    c = np.asarray(coeffs, dtype=complex)
    nz = np.nonzero(np.abs(c) > 0)[0]
    if nz.size == 0 or nz.max() == 0:
        return np.array([], dtype=complex)
    c = c[:nz.max() + 1]
    if len(c) - 1 > 64:
        raise ConfigError("root search capped at degree 64")
    monic = c / c[-1]
    n = len(monic) - 1
    A = np.zeros((n, n), dtype=complex)
    if n > 1:
        A[1:, :-1] = np.eye(n - 1)
    A[:, -1] = -monic[:-1]
    return np.linalg.eigvals(A)


@dataclass
class LiftedTarget:
    """Piecewise branch target h0 on an arc: interpolate between the stored
    angle grid samples."""

    angles: np.ndarray
    values: np.ndarray
    node_angles: np.ndarray
    node_targets: np.ndarray

    def __call__(self, zeta):
        arr = np.asarray(zeta, dtype=complex)
        scalar = arr.ndim == 0
        t = np.mod(np.angle(np.atleast_1d(arr)), 2 * math.pi)
        lo = float(np.min(self.angles))
        t = np.where(t < lo - 1e-12, t + 2 * math.pi, t)
        re = np.interp(t, self.angles, self.values.real)
        im = np.interp(t, self.angles, self.values.imag)
        out = re + 1j * im
        return out[0].item() if scalar else out


def _pick_node(center: complex, eps: float, obstructions: np.ndarray,
               prev: Optional[complex]) -> complex:
    if prev is not None and abs(center - prev) <= eps / 4:
        return prev
    scales = [0.0, eps / 8, eps / 16]
    for scale in scales:
        if scale == 0.0:
            cands = [center]
        else:
            cands = [center + scale * cmath.exp(1j * k * math.pi / 4)
                     for k in range(8)]
        for w in cands:
            if obstructions.size and float(np.min(np.abs(obstructions - w))) <= 1e-8:
                continue
            return w
    raise ConfigError("cannot place a lift node clear of the critical values; "
                      "the outer map is degenerate near the target")


def liftable_target(g, arc: UnitCircleArc, h, eps: float,
                    n_nodes: int) -> Tuple[LiftedTarget, float]:
    """Replace h on the arc by a lifted target h0 with measured sup defect
    |g(h0) - h| < eps.

    Nodes are refined until consecutive h-values sit within eps/4, each
    node target is nudged off the branch obstructions of g inside an eps/8
    disc, and the branch is continued along the node polyline at tolerance
    eps/8. The defect is measured on a dense angle grid; if it is not
    under eps the node count is doubled and the whole construction retried.
    """
    if n_nodes < 2:
        raise ConfigError("need at least two nodes")
    if eps <= 0:
        raise ConfigError("eps must be positive")
    gf, _, _ = _as_inverse_pair(g)
    obstructions = branch_obstructions(g)

    def h_of(angles):
        return _target_values(h, np.exp(1j * angles))

    k = n_nodes
    last_err = None
    for _ in range(3):
        angles = np.linspace(arc.alpha, arc.beta, k)
        hv = h_of(angles)
        while k < (n_nodes << 16):
            gaps = np.abs(np.diff(hv))
            if gaps.size == 0 or float(np.max(gaps)) <= eps / 4:
                break
            k = 2 * k - 1
            angles = np.linspace(arc.alpha, arc.beta, k)
            hv = h_of(angles)
        else:
            raise ConfigError("target oscillates too fast for node refinement")

        nodes = []
        prev = None
        for c in hv:
            w = _pick_node(complex(c), eps, obstructions, prev)
            nodes.append(w)
            prev = w
        tol = eps / 8
        start = _branch_start(g, gf, nodes[0], tol)
        res = lift_path(g, nodes, start, tol)
        if not res.status.complete:
            last_err = f"lift stopped ({res.status.kind} at {res.status.index})"
            k = 2 * k - 1
            continue

        # map dense angles to polyline arc length, then into the lift samples
        seg = np.abs(np.diff(np.asarray(nodes, dtype=complex)))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        total = cum[-1]
        dense = np.union1d(np.linspace(arc.alpha, arc.beta,
                                       max(257, 4 * (k - 1) + 1)), angles)
        pos = np.interp(dense, angles, cum)
        frac = pos / total if total > 0 else np.zeros_like(pos)
        h0_re = np.interp(frac, res.t, res.values.real)
        h0_im = np.interp(frac, res.t, res.values.imag)
        h0 = h0_re + 1j * h0_im
        defect = float(np.max(np.abs(
            np.array([gf(v) for v in h0]) - _target_values(h, np.exp(1j * dense)))))
        if defect < eps:
            lifted = LiftedTarget(dense, h0, angles, np.asarray(nodes, dtype=complex))
            return lifted, defect
        last_err = f"measured defect {defect:.3e} >= eps"
        k = 2 * k - 1
    raise InvariantViolation(f"lifted target out of tolerance after retries: {last_err}")


def _branch_start(g, gf, w0: complex, tol: float) -> complex:
    if isinstance(g, str) and g.lower() == "exp":
        return cmath.log(w0)
    poly = ComplexPolynomial(g) if isinstance(g, (list, tuple)) else g
    shifted = list(poly.coeffs)
    shifted[0] = shifted[0] - w0
    roots = polynomial_roots(shifted)
    if roots.size == 0:
        raise ConfigError("outer polynomial is constant; nothing to lift")
    roots = sorted(roots, key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    h, _, ok = _damped_newton(gf, _as_inverse_pair(g)[1], complex(roots[0]), w0, tol)
    return h if ok else complex(roots[0])


# report emitters

def _config_comment(config: dict) -> str:
    return "# config " + json.dumps(config, sort_keys=True, separators=(",", ":"))


def dilate_report_to_csv(report: DilateReport, config: dict) -> str:
    lines = [_config_comment(config), "target_id,arc_id,n,r_n,sup_error"]
    for row in report.rows:
        lines.append(f"{row['target_id']},{row['arc_id']},{row['n']},"
                     f"{row['r']!r},{row['sup_error']!r}")
    return "\n".join(lines) + "\n"


def dilate_report_to_json(report: DilateReport, config: dict) -> str:
    payload = {"config": config, "rows": report.rows, "best": report.best}
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def lift_result_to_csv(result: LiftResult, config: dict) -> str:
    lines = [_config_comment(config), "j,t,h_re,h_im,target_re,target_im"]
    for j in range(len(result.t)):
        # force plain floats; numpy scalars repr as np.float64(...) otherwise
        lines.append(f"{j},{float(result.t[j])!r},{float(result.values[j].real)!r},"
                     f"{float(result.values[j].imag)!r},{float(result.targets[j].real)!r},"
                     f"{float(result.targets[j].imag)!r}")
    return "\n".join(lines) + "\n"


def lift_result_to_json(result: LiftResult, config: dict) -> str:
    payload = {
        "config": config,
        "status": {"kind": result.status.kind, "index": result.status.index},
        "max_defect": result.max_defect,
        "endpoint": [result.values[-1].real, result.values[-1].imag],
        "samples": [[result.t[j], result.values[j].real, result.values[j].imag]
                    for j in range(len(result.t))],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
