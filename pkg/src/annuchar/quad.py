"""Quadrature over origin-centered circles.

Everything here integrates real-valued, 2*pi-periodic samplers ``g(theta)``
(vectorized over numpy arrays of angles).  Three entry points:

* :func:`periodic_integrate` -- full-circle integral.  Smooth integrands go
  through the spectrally convergent periodic trapezoid with node doubling;
  integrable singularities (known angles, or detected as non-finite samples)
  switch to piecewise integration with exponentially graded meshes toward
  each singular angle.
* :func:`arc_integrate` -- integral over a union of arcs, refined trapezoid
  with Richardson extrapolation per piece, graded toward singular endpoints.
* :func:`classify_circle` -- partition a circle into arcs by |f| vs 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .funcdsl import FunctionModel

__all__ = [
    "TWO_PI",
    "QuadConfig",
    "QuadratureResult",
    "SingularSampleError",
    "ArcLabel",
    "Arc",
    "ArcPartition",
    "periodic_integrate",
    "arc_integrate",
    "classify_circle",
]

TWO_PI = 2.0 * math.pi

Sampler = Callable[[np.ndarray], np.ndarray]


class SingularSampleError(Exception):
    """An arc integrand was non-finite at an angle that was not declared."""

    def __init__(self, angle: float):
        super().__init__(f"singular sample at angle {angle!r}")
        self.angle = angle


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and caps shared by all circle quadratures."""

    tol: float = 1e-10
    max_nodes: int = 1 << 20
    unit_tol: float = 1e-9
    singularity_padding: float = 1e-4

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        q, r = divmod(self.max_nodes, 64)
        if r != 0 or q < 1 or (q & (q - 1)) != 0:
            raise ValueError("max_nodes must be 64 * 2**k")
        if self.unit_tol <= 0 or self.singularity_padding <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_CONFIG = QuadConfig()


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    nodes: int
    near_singular: bool
    converged: bool = True

    def scaled(self, c: float) -> "QuadratureResult":
        return QuadratureResult(
            self.value * c,
            self.error_estimate * abs(c),
            self.nodes,
            self.near_singular,
            self.converged,
        )


def _combine(results: Sequence[QuadratureResult]) -> QuadratureResult:
    if not results:
        return QuadratureResult(0.0, 0.0, 0, False, True)
    return QuadratureResult(
        value=float(sum(r.value for r in results)),
        error_estimate=float(sum(r.error_estimate for r in results)),
        nodes=sum(r.nodes for r in results),
        near_singular=any(r.near_singular for r in results),
        converged=all(r.converged for r in results),
    )


# ---------------------------------------------------------------------------
# Line-segment engines
# ---------------------------------------------------------------------------


def _romberg_line(
    g: Sampler,
    a: float,
    b: float,
    tol: float,
    max_doublings: int = 14,
    allow_singular: bool = False,
) -> QuadratureResult:
    """Refined trapezoid with Richardson extrapolation on [a, b]."""
    if b <= a:
        return QuadratureResult(0.0, 0.0, 0, False, True)
    width = b - a
    n = 8
    x = np.linspace(a, b, n + 1)
    y = np.asarray(g(x), dtype=float)
    near = False
    if not np.isfinite(y).all():
        if not allow_singular:
            raise SingularSampleError(float(x[~np.isfinite(y)][0]))
        near = True
        y = np.where(np.isfinite(y), y, 0.0)
    h = width / n
    t = h * (0.5 * (y[0] + y[-1]) + y[1:-1].sum())
    rows = [[t]]
    nodes = n + 1
    value, err = t, abs(t)
    for level in range(1, max_doublings + 1):
        mids = a + (np.arange(n) + 0.5) * h
        ym = np.asarray(g(mids), dtype=float)
        if not np.isfinite(ym).all():
            if not allow_singular:
                raise SingularSampleError(float(mids[~np.isfinite(ym)][0]))
            near = True
            ym = np.where(np.isfinite(ym), ym, 0.0)
        nodes += n
        n *= 2
        h *= 0.5
        t = 0.5 * t + h * ym.sum()
        row = [t]
        prev = rows[-1]
        factor = 4.0
        for k in range(len(prev)):
            row.append(row[k] + (row[k] - prev[k]) / (factor - 1.0))
            factor *= 4.0
        rows.append(row)
        value = row[-1]
        err = abs(row[-1] - prev[-1])
        if err <= tol * max(1.0, abs(value)):
            return QuadratureResult(float(value), float(err), nodes, near, True)
    return QuadratureResult(float(value), float(err), nodes, near, False)


def _graded_from_edge(
    g: Sampler,
    edge: float,
    direction: int,
    width: float,
    tol: float,
) -> QuadratureResult:
    """Integral over the segment of given width starting at ``edge`` and
    extending in ``direction`` (+1/-1), with an integrable singularity
    allowed at the edge itself.

    Substituting distance u = e**s turns a log singularity into a smooth,
    exponentially decaying integrand in s; the truncated mass below u_min is
    far under double precision for log-type singularities.
    """
    if width <= 0:
        return QuadratureResult(0.0, 0.0, 0, False, True)
    u_min = max(1e-14, 1e-16 * width)
    s_lo, s_hi = math.log(u_min), math.log(width)

    def h(s: np.ndarray) -> np.ndarray:
        u = np.exp(s)
        vals = np.asarray(g(edge + direction * u), dtype=float)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        return vals * u

    res = _romberg_line(h, s_lo, s_hi, tol, allow_singular=True)
    res.near_singular = True
    return res


def _split_segment(
    g: Sampler,
    a: float,
    b: float,
    tol: float,
    singular_left: bool,
    singular_right: bool,
) -> QuadratureResult:
    if b - a <= 1e-15:
        return QuadratureResult(0.0, 0.0, 0, singular_left or singular_right, True)
    if singular_left and singular_right:
        mid = 0.5 * (a + b)
        return _combine(
            [
                _graded_from_edge(g, a, +1, mid - a, tol),
                _graded_from_edge(g, b, -1, b - mid, tol),
            ]
        )
    if singular_left:
        return _graded_from_edge(g, a, +1, b - a, tol)
    if singular_right:
        return _graded_from_edge(g, b, -1, b - a, tol)
    return _romberg_line(g, a, b, tol)


# ---------------------------------------------------------------------------
# Full-circle integration
# ---------------------------------------------------------------------------


def _merge_angles(angles: Iterable[float], merge_tol: float) -> list:
    out: list = []
    for ang in sorted(float(a) % TWO_PI for a in angles):
        if out and ang - out[-1] <= merge_tol:
            continue
        out.append(ang)
    if len(out) > 1 and (out[0] + TWO_PI) - out[-1] <= merge_tol:
        out.pop()
    return out


def _integrate_with_singularities(
    g: Sampler, angles: Sequence[float], cfg: QuadConfig
) -> QuadratureResult:
    """Full-circle integral split at singular angles, graded on both sides."""
    pts = _merge_angles(angles, min(cfg.singularity_padding, 1e-9))
    pieces = []
    for k, lo in enumerate(pts):
        hi = pts[k + 1] if k + 1 < len(pts) else pts[0] + TWO_PI
        pieces.append(_split_segment(g, lo, hi, cfg.tol, True, True))
    total = _combine(pieces)
    total.near_singular = True
    return total


def periodic_integrate(
    g: Sampler,
    cfg: Optional[QuadConfig] = None,
    singular_angles: Sequence[float] = (),
) -> QuadratureResult:
    """Integral of g over [0, 2*pi).

    ``singular_angles`` declares angles where g has an integrable
    singularity; non-finite samples are detected and handled the same way.
    Non-convergence (node cap hit with error above 10*tol) comes back as a
    flagged result rather than an exception.
    """
    cfg = cfg or DEFAULT_CONFIG
    if singular_angles:
        return _integrate_with_singularities(g, singular_angles, cfg)

    n = 64
    theta = TWO_PI * np.arange(n) / n
    vals = np.asarray(g(theta), dtype=float)
    finite = np.isfinite(vals)
    if not finite.all():
        return _integrate_with_singularities(g, theta[~finite], cfg)
    fsum = float(vals.sum())
    prev = None
    while True:
        value = (TWO_PI / n) * fsum
        if prev is not None:
            err = abs(value - prev)
            if err <= cfg.tol * max(1.0, abs(value)):
                return QuadratureResult(value, err, n, False, True)
            if 2 * n > cfg.max_nodes:
                ok = err <= 10.0 * cfg.tol * max(1.0, abs(value))
                return QuadratureResult(value, err, n, False, ok)
        elif 2 * n > cfg.max_nodes:
            return QuadratureResult(value, abs(value), n, False, False)
        mids = TWO_PI * (2 * np.arange(n) + 1) / (2 * n)
        new = np.asarray(g(mids), dtype=float)
        finite = np.isfinite(new)
        if not finite.all():
            return _integrate_with_singularities(g, mids[~finite], cfg)
        fsum += float(new.sum())
        prev = value
        n *= 2


def arc_integrate(
    g: Sampler,
    arcs: Sequence,
    cfg: Optional[QuadConfig] = None,
    singular_angles: Sequence[float] = (),
) -> QuadratureResult:
    """Sum of integrals of g over disjoint arcs [(start, end), ...].

    Arcs are split at declared singular angles; pieces whose endpoint is
    singular use the graded mesh.  An undeclared non-finite sample raises
    :class:`SingularSampleError`.
    """
    cfg = cfg or DEFAULT_CONFIG
    sing = sorted(float(a) % TWO_PI for a in singular_angles)
    edge_tol = 1e-12
    pieces = []
    for start, end in arcs:
        start, end = float(start), float(end)
        if end <= start + 1e-15:
            continue
        # singular angles falling inside this arc, unwrapped into [start, end]
        inside = []
        for s in sing:
            for shift in (-TWO_PI, 0.0, TWO_PI):
                t = s + shift
                if start - edge_tol <= t <= end + edge_tol:
                    inside.append(min(max(t, start), end))
        inside = sorted(set(inside))
        bounds = [start] + [t for t in inside if start + edge_tol < t < end - edge_tol] + [end]
        flags = [any(abs(bnd - t) <= edge_tol for t in inside) for bnd in bounds]
        for k in range(len(bounds) - 1):
            pieces.append(
                _split_segment(g, bounds[k], bounds[k + 1], cfg.tol, flags[k], flags[k + 1])
            )
    return _combine(pieces)


# ---------------------------------------------------------------------------
# Arc classification by |f| against 1
# ---------------------------------------------------------------------------


class ArcLabel(Enum):
    PLUS = 1
    ZERO = 0
    MINUS = -1


@dataclass(frozen=True)
class Arc:
    start: float
    end: float
    label: ArcLabel

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class ArcPartition:
    """Disjoint sorted arcs covering [0, 2*pi) labelled by |f| vs 1."""

    radius: float
    arcs: tuple

    def select(self, label: ArcLabel) -> list:
        return [(a.start, a.end) for a in self.arcs if a.label is label]

    @property
    def total_length(self) -> float:
        return float(sum(a.length for a in self.arcs))


_CLASSIFY_SAMPLES = 4096
_BOUNDARY_TOL = 1e-12


def _labels_at(f: FunctionModel, t: float, theta: np.ndarray, unit_tol: float) -> np.ndarray:
    z = t * np.exp(1j * theta)
    with np.errstate(all="ignore"):
        h = np.abs(f.eval_array(z)) - 1.0
    h = np.where(np.isnan(h), np.inf, h)
    lab = np.where(np.abs(h) < unit_tol, 0, np.where(h > 0, 1, -1))
    return lab.astype(int)


def _h_at(f: FunctionModel, t: float, theta: np.ndarray) -> np.ndarray:
    z = t * np.exp(1j * theta)
    with np.errstate(all="ignore"):
        h = np.abs(f.eval_array(z)) - 1.0
    return np.where(np.isnan(h), np.inf, h)


def classify_circle(
    f: FunctionModel, t: float, cfg: Optional[QuadConfig] = None
) -> ArcPartition:
    """Partition the circle |z| = t into arcs where |f| > 1, = 1, < 1.

    Samples 4096 angles; runs of at least two near-unit samples become ZERO
    arcs (isolated crossings are absorbed); boundaries between runs are
    bisected to 1e-12 in angle.  Non-finite samples (poles) count as PLUS.
    """
    cfg = cfg or DEFAULT_CONFIG
    n = _CLASSIFY_SAMPLES
    theta = TWO_PI * np.arange(n) / n
    labels = _labels_at(f, t, theta, cfg.unit_tol)

    # Absorb isolated ZERO samples into the preceding run's label.
    zero_idx = np.flatnonzero(labels == 0)
    for i in zero_idx:
        if labels[(i - 1) % n] != 0 and labels[(i + 1) % n] != 0:
            labels[i] = labels[(i - 1) % n]

    changes = np.flatnonzero(labels != np.roll(labels, 1))
    if changes.size == 0:
        label = ArcLabel(int(labels[0]))
        return ArcPartition(t, (Arc(0.0, TWO_PI, label),))

    spacing = TWO_PI / n
    # Transition k lies between samples changes[k]-1 and changes[k].
    lo = theta[(changes - 1) % n]
    hi = lo + spacing
    left_lab = labels[(changes - 1) % n]
    right_lab = labels[changes]
    sign_type = (left_lab != 0) & (right_lab != 0)

    for _ in range(34):
        mid = 0.5 * (lo + hi)
        h = _h_at(f, t, mid)
        in_band = np.abs(h) < cfg.unit_tol
        mid_sign = np.where(h > 0, 1, -1)
        # "belongs to the left run" predicate per transition type
        if sign_type.all():
            belongs_left = mid_sign == left_lab
        else:
            belongs_left = np.where(
                sign_type,
                mid_sign == left_lab,
                np.where(left_lab == 0, in_band, ~in_band & (mid_sign == left_lab)),
            )
        lo = np.where(belongs_left, mid, lo)
        hi = np.where(belongs_left, hi, mid)

    boundaries = (0.5 * (lo + hi)) % TWO_PI
    order = np.argsort(boundaries)
    boundaries = boundaries[order]
    right_lab = right_lab[order]

    arcs = []
    if boundaries[0] > 0.0:
        # the run containing angle 0 wraps: emit its tail first, head last
        wrap_label = ArcLabel(int(right_lab[-1]))
        arcs.append(Arc(0.0, float(boundaries[0]), wrap_label))
    for k in range(len(boundaries)):
        start = float(boundaries[k])
        end = float(boundaries[k + 1]) if k + 1 < len(boundaries) else TWO_PI
        if end > start:
            arcs.append(Arc(start, end, ArcLabel(int(right_lab[k]))))
    return ArcPartition(t, tuple(arcs))
