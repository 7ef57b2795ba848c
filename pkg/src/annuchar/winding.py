"""Winding indices along circles and argument-principle counting.

The central quantity is the circle index: (1/pi) times the integral of
Im(f'/f dz) around |z| = t, which is twice the winding number of f over the
circle and picks up half-weight contributions from zeros/poles lying exactly
on it.  Factored rational models are counted exactly; expression models go
through quadrature with an integrality check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import oracle
from .funcdsl import FunctionModel, RationalFunction
from .quad import QuadConfig, QuadratureResult, periodic_integrate

__all__ = [
    "IntegralityError",
    "OnCircleSingularityError",
    "UnsupportedCountError",
    "BoundaryRootError",
    "CountingData",
    "exact_circle_index",
    "shifted_exact_index",
    "circle_index_quadrature",
    "circle_index",
    "count_a_points",
    "locate_jump_radii",
    "argument_principle_residuals",
]


class IntegralityError(Exception):
    """Quadrature index strayed too far from an integer."""

    def __init__(self, raw: float):
        super().__init__(f"index quadrature gave {raw!r}, not close to an integer")
        self.raw = raw


class OnCircleSingularityError(Exception):
    """A zero or pole sits on (or hugs) the integration circle."""


class UnsupportedCountError(Exception):
    """Requested count needs data a black-box expression cannot provide."""


class BoundaryRootError(Exception):
    """A root or pole lies on a measurement circle."""


@dataclass
class CountingData:
    """Counts of a-points/poles in an annulus, multiplicities included."""

    inner: float
    outer: float
    zeros_interior: int
    poles_interior: int
    zeros_on_unit_circle: int
    poles_on_unit_circle: int
    exact: bool


def _on_circle_tol(t: float) -> float:
    return 1e-12 * max(1.0, t)


def exact_circle_index(factors: Sequence, t: float) -> int:
    """Index from a factor list: 2*(multiplicity sum strictly inside) plus
    the plain multiplicity sum for roots on the circle (half-weight rule)."""
    tol = _on_circle_tol(t)
    total = 0
    for b, m in factors:
        d = abs(b) - t
        if abs(d) <= tol:
            total += m
        elif d < 0:
            total += 2 * m
    return total


def shifted_exact_index(f: RationalFunction, a: complex, t: float) -> int:
    """Exact index of f - a: a-points become simple zeros, poles carry over."""
    if a == 0:
        return exact_circle_index(f.factors, t)
    roots = oracle.solve_a_points(f, a)
    factors = [(z, 1) for z in roots] + [(b, m) for b, m in f.factors if m < 0]
    return exact_circle_index(factors, t)


def circle_index_quadrature(
    f: FunctionModel, t: float, cfg: Optional[QuadConfig] = None
) -> Tuple[float, QuadratureResult]:
    """Raw (un-rounded) index by periodic quadrature of Im(f'/f dz)/pi."""

    def g(theta: np.ndarray) -> np.ndarray:
        z = t * np.exp(1j * theta)
        return (z * f.log_deriv_array(z)).real

    res = periodic_integrate(g, cfg)
    return res.value / math.pi, res


def _quad_index_int(f: FunctionModel, t: float, cfg: Optional[QuadConfig]) -> int:
    raw, res = circle_index_quadrature(f, t, cfg)
    k = round(raw)
    # Rounding to an integer only needs ~1e-2 accuracy, so a result flagged
    # as non-convergent at the configured tolerance is still usable as long
    # as its error estimate cannot move the rounding.
    if abs(raw - k) > 0.05 or res.error_estimate / math.pi > 0.02:
        raise IntegralityError(raw)
    return int(k)


def circle_index(
    f: FunctionModel,
    t: float,
    cfg: Optional[QuadConfig] = None,
    force_quadrature: bool = False,
) -> int:
    """Index of f along |z| = t.

    Rational models route to the exact factor count (which also handles
    on-circle roots); expressions are integrated.  An expression with a
    root hugging the circle falls back to the midpoint of the indices at
    t*(1 +/- 1e-6), mirroring the on-circle half-weight rule.
    """
    if t <= 0:
        raise ValueError("radius must be positive")
    if isinstance(f, RationalFunction) and not force_quadrature:
        return exact_circle_index(f.factors, t)
    try:
        return _quad_index_int(f, t, cfg)
    except IntegralityError:
        eps = 1e-6 * t
        try:
            lo = _quad_index_int(f, t - eps, cfg)
            hi = _quad_index_int(f, t + eps, cfg)
        except IntegralityError as exc:
            raise OnCircleSingularityError(
                f"cannot resolve the index at t = {t!r}: {exc}"
            ) from exc
        if (hi - lo) % 2:
            raise OnCircleSingularityError(
                f"odd index jump across t = {t!r}; singularity not resolvable"
            )
        return (hi + lo) // 2


def count_a_points(
    f: FunctionModel,
    a: complex,
    s: float,
    r: float,
    cfg: Optional[QuadConfig] = None,
    assume_analytic: bool = False,
) -> CountingData:
    """Number of solutions of f(z) = a in the annulus s < |z| < r.

    Rational models are solved exactly; expression models must be analytic
    in the closed annulus (structurally entire, or asserted by the caller),
    in which case the winding difference counts the a-points.
    """
    if not 0 < s < r:
        raise ValueError("need 0 < s < r")
    unit_tol = 1e-9
    if isinstance(f, RationalFunction):
        roots = oracle.solve_a_points(f, a)
        poles = f.poles
        for x in roots:
            rho = abs(x)
            if abs(rho - s) <= unit_tol * max(1.0, s) or abs(rho - r) <= unit_tol * max(1.0, r):
                raise BoundaryRootError(f"a-point at modulus {rho!r} on a boundary circle")
        for b, _ in poles:
            rho = abs(b)
            if abs(rho - s) <= unit_tol * max(1.0, s) or abs(rho - r) <= unit_tol * max(1.0, r):
                raise BoundaryRootError(f"pole at modulus {rho!r} on a boundary circle")
        zeros_in = sum(1 for x in roots if s < abs(x) < r)
        poles_in = sum(m for b, m in poles if s < abs(b) < r)
        zeros_t = sum(1 for x in roots if abs(abs(x) - 1.0) <= unit_tol)
        poles_t = sum(m for b, m in poles if abs(abs(b) - 1.0) <= unit_tol)
        return CountingData(s, r, zeros_in, poles_in, zeros_t, poles_t, True)

    if not (assume_analytic or f.is_entire()):
        raise UnsupportedCountError(
            "a-point counting for expressions needs analyticity in the annulus"
        )
    g = f.shift(a)
    diff = circle_index(g, r, cfg) - circle_index(g, s, cfg)
    if diff % 2:
        raise IntegralityError(diff / 2.0)
    return CountingData(s, r, diff // 2, 0, 0, 0, False)


def locate_jump_radii(
    f: FunctionModel,
    a: complex,
    tmin: float,
    tmax: float,
    cfg: Optional[QuadConfig] = None,
    rtol: float = 1e-10,
    seed_points: int = 33,
) -> list:
    """Radii in (tmin, tmax) where the index of f - a jumps, with the jump
    expressed as an a-point count (index difference / 2).

    Bisection over the integer-valued index, seeded on a log-spaced grid;
    each jump is localized to ``rtol`` relative accuracy.  Jump pairs that
    cancel inside one seed cell are invisible, which is fine for the
    monotone counting applications this feeds.
    """
    if not 0 < tmin < tmax:
        raise ValueError("need 0 < tmin < tmax")

    index_at: Callable[[float], Optional[int]]
    if isinstance(f, RationalFunction):
        if a == 0:
            shifted = list(f.factors)
        else:
            roots = oracle.solve_a_points(f, a)
            shifted = [(z, 1) for z in roots] + [(b, m) for b, m in f.factors if m < 0]
        index_at = lambda t: exact_circle_index(shifted, t)  # noqa: E731
    else:
        g = f.shift(a)
        # Integer resolution is all bisection needs; a lax tolerance keeps
        # the node counts sane when the circle closes in on a root.
        lax = QuadConfig(
            tol=max(1e-6, (cfg or QuadConfig()).tol),
            max_nodes=(cfg or QuadConfig()).max_nodes,
        )

        def index_at(t: float) -> Optional[int]:
            # None marks the quadrature blind zone around a root modulus.
            try:
                return circle_index(g, t, lax)
            except (OnCircleSingularityError, IntegralityError):
                return None

    ts = np.geomspace(tmin, tmax, seed_points)
    vs = [index_at(float(t)) for t in ts]
    if vs[0] is None or vs[-1] is None:
        raise OnCircleSingularityError("roots too close to the scan boundary radii")
    # Blind seed points sit inside a jump neighbourhood; collapse them into
    # their surrounding bracket.
    pts = [(float(t), v) for t, v in zip(ts, vs) if v is not None]

    found = []
    stack = [
        (pts[k][0], pts[k][1], pts[k + 1][0], pts[k + 1][1])
        for k in range(len(pts) - 1)
        if pts[k][1] != pts[k + 1][1]
    ]
    while stack:
        lo, vlo, hi, vhi = stack.pop()
        if hi - lo <= rtol * hi:
            jump2 = vhi - vlo
            if jump2 % 2:
                raise IntegralityError(jump2 / 2.0)
            found.append((math.sqrt(lo * hi), jump2 // 2))
            continue
        split = None
        for u in (0.5, 0.25, 0.75):
            probe = lo ** (1.0 - u) * hi**u
            vp = index_at(probe)
            if vp is not None:
                split = (probe, vp)
                break
        if split is None:
            # Unresolvable bracket (black-box root hugging these radii):
            # emit at the midpoint with the bracket width as the accuracy.
            jump2 = vhi - vlo
            if jump2 % 2:
                raise IntegralityError(jump2 / 2.0)
            found.append((math.sqrt(lo * hi), jump2 // 2))
            continue
        mid, vmid = split
        if vmid != vlo:
            stack.append((lo, vlo, mid, vmid))
        if vmid != vhi:
            stack.append((mid, vmid, hi, vhi))
    found.sort(key=lambda pair: pair[0])
    return found


def _band_count(factors: Sequence, lo: float, hi: float, sign: int) -> int:
    """Multiplicity sum of roots (sign=+1) or poles (sign=-1) with modulus
    strictly between lo and hi, excluding the unit circle shell."""
    total = 0
    for b, m in factors:
        if (m > 0) != (sign > 0):
            continue
        rho = abs(b)
        if abs(rho - 1.0) <= 1e-12:
            continue
        if lo < rho < hi:
            total += abs(m)
    return total


def _unit_circle_count(factors: Sequence, sign: int) -> int:
    return sum(
        abs(m)
        for b, m in factors
        if ((m > 0) == (sign > 0)) and abs(abs(b) - 1.0) <= 1e-12
    )


def argument_principle_residuals(f: RationalFunction, t: float) -> Tuple[int, int]:
    """Integer residuals of the two index/count relations at radii t and 1/t.

    Outer: nu(t) - nu(1) against 2 Z(1,t) + Z_T - 2 P(1,t) - P_T.
    Inner: nu(1) - nu(1/t) against 2 Z(1/t,1) + Z_T - 2 P(1/t,1) - P_T.
    Both residuals are zero whenever no root or pole sits on the circles of
    radius t and 1/t (unit-circle roots are fine; they enter the _T terms).
    """
    if not isinstance(f, RationalFunction):
        raise UnsupportedCountError("argument-principle residuals need a rational model")
    if t <= 1:
        raise ValueError("need t > 1")
    for b, _ in f.factors:
        rho = abs(b)
        if abs(rho - t) <= _on_circle_tol(t) or abs(rho - 1.0 / t) <= _on_circle_tol(1.0 / t):
            raise BoundaryRootError(f"root at modulus {rho!r} on a measurement circle")
    zt = _unit_circle_count(f.factors, +1)
    pt = _unit_circle_count(f.factors, -1)
    nu = lambda radius: exact_circle_index(f.factors, radius)  # noqa: E731
    lhs_outer = nu(t) - nu(1.0)
    rhs_outer = (
        2 * _band_count(f.factors, 1.0, t, +1)
        + zt
        - 2 * _band_count(f.factors, 1.0, t, -1)
        - pt
    )
    lhs_inner = nu(1.0) - nu(1.0 / t)
    rhs_inner = (
        2 * _band_count(f.factors, 1.0 / t, 1.0, +1)
        + zt
        - 2 * _band_count(f.factors, 1.0 / t, 1.0, -1)
        - pt
    )
    return lhs_outer - rhs_outer, lhs_inner - rhs_inner
