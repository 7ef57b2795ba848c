"""Two-parameter characteristic of meromorphic functions on annuli.

The window (tau, r) with tau, r >= 1 describes the annulus between radii
1/tau and r.  The characteristic is assembled from

* N  -- logarithmically weighted pole count over the annulus, plus a
        boundary term for poles on the unit circle,
* m  -- the proximity combination  m(1/tau) + m(r) - 2 m(1)  of circle
        averages of log+|f|,
* c  -- a boundary constant: the Im(f'/f dz) integral over the unit-circle
        arcs where |f| > 1 (full weight) and |f| = 1 (half weight),

as  T = N + m + c * log(tau/r).  Alongside the report builders this module
carries residual evaluators for the identities the construction rests on
(two Jensen-type identities, the unit-circle averaging lemmas, the Cartan
average, the first fundamental identity) and a grid scanner for the
structural properties of T (nonnegativity, monotonicity, log-convexity,
reciprocal symmetry, the derivative identity).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import oracle
from .funcdsl import ExpressionFunction, FunctionModel, RationalFunction
from .quad import (
    ArcLabel,
    QuadConfig,
    QuadratureResult,
    SingularSampleError,
    _romberg_line,
    arc_integrate,
    classify_circle,
    periodic_integrate,
)
from .winding import (
    BoundaryRootError,
    IntegralityError,
    OnCircleSingularityError,
    circle_index,
    exact_circle_index,
    locate_jump_radii,
    shifted_exact_index,
)

__all__ = [
    "PoleEnumerationError",
    "AnnulusWindow",
    "QuadDiagnostics",
    "CharacteristicReport",
    "FftReport",
    "CheckResult",
    "ScanReport",
    "proximity",
    "proximity_annulus",
    "annulus_counting",
    "boundary_constant",
    "characteristic",
    "classical_characteristic",
    "first_fundamental",
    "jensen_two_circle_residual",
    "jensen_annulus_residual",
    "cartan_average_residual",
    "unit_index_average_residual",
    "index_shift_residual",
    "torus_average_residual",
    "property_scan",
]

TWO_PI = 2.0 * math.pi


class PoleEnumerationError(Exception):
    """The pole set of a black-box expression cannot be enumerated."""


@dataclass(frozen=True)
class AnnulusWindow:
    """Parameter pair (tau, r), both >= 1, for the annulus A(1/tau, r)."""

    tau: float
    r: float

    def __post_init__(self):
        if not (self.tau >= 1.0 and self.r >= 1.0):
            raise ValueError("window requires tau >= 1 and r >= 1")

    @property
    def log_ratio(self) -> float:
        return math.log(self.tau / self.r)


@dataclass
class QuadDiagnostics:
    """Named quadrature results accumulated while assembling a report."""

    entries: list = field(default_factory=list)

    def add(self, name: str, result: QuadratureResult) -> float:
        self.entries.append((name, result))
        return result.value

    @property
    def total_error(self) -> float:
        return float(sum(r.error_estimate for _, r in self.entries))

    @property
    def converged(self) -> bool:
        return all(r.converged for _, r in self.entries)

    @property
    def near_singular(self) -> bool:
        return any(r.near_singular for _, r in self.entries)


@dataclass
class CharacteristicReport:
    N: float
    m_inner: float
    m_outer: float
    m_unit: float
    m_annulus: float
    cf: float
    T: float
    window: AnnulusWindow
    quad: QuadDiagnostics


@dataclass
class FftReport:
    """First-fundamental-identity report at one target value a."""

    a: complex
    lhs: float
    T: float
    eps1: float
    eps2: float
    eps1_bound: float
    window: AnnulusWindow
    quad_error: float

    @property
    def identity_residual(self) -> float:
        return abs(self.lhs - (self.T + self.eps1 + self.eps2 * self.window.log_ratio))


# ---------------------------------------------------------------------------
# Proximity (circle averages of log+ |f|) and full-log circle means
# ---------------------------------------------------------------------------


def _near_circle_angles(f: FunctionModel, t: float, poles_only: bool) -> list:
    """Angles of known roots/poles hugging the circle |z| = t."""
    if not isinstance(f, RationalFunction):
        return []
    out = []
    for b, m in f.factors:
        if poles_only and m > 0:
            continue
        if abs(abs(b) - t) <= 1e-6 * max(1.0, t):
            out.append(cmath.phase(b) % TWO_PI)
    return out


def _proximity_quad(
    f: FunctionModel,
    t: float,
    cfg: QuadConfig,
    extra_hints: Sequence[float] = (),
) -> QuadratureResult:
    """(1/2pi) integral of log+|f(t e^{i theta})|.

    Integrates log|f| over the arcs where |f| > 1 so the kinks of log+ fall
    on piece boundaries; on-circle poles (known or detected) get graded
    meshes.  Arcs where |f| stays within unit_tol of 1 contribute zero.
    """
    part = classify_circle(f, t, cfg)
    plus = part.select(ArcLabel.PLUS)
    if not plus:
        return QuadratureResult(0.0, 0.0, 0, False, True)

    def g(theta: np.ndarray) -> np.ndarray:
        z = t * np.exp(1j * np.asarray(theta, dtype=float))
        return np.maximum(f.log_abs_array(z), 0.0)

    hints = list(extra_hints) + _near_circle_angles(f, t, poles_only=True)
    full_circle = len(plus) == 1 and plus[0][0] == 0.0 and plus[0][1] == TWO_PI
    if full_circle and not hints:
        return periodic_integrate(g, cfg).scaled(1.0 / TWO_PI)
    for _ in range(8):
        try:
            return arc_integrate(g, plus, cfg, singular_angles=hints).scaled(1.0 / TWO_PI)
        except SingularSampleError as exc:
            hints.append(exc.angle)
    raise OnCircleSingularityError(f"could not isolate singular samples on |z| = {t!r}")


def proximity(f: FunctionModel, t: float, cfg: Optional[QuadConfig] = None) -> float:
    """Circle average of log+|f| at radius t."""
    cfg = cfg or QuadConfig()
    return _proximity_quad(f, t, cfg).value


def proximity_annulus(
    f: FunctionModel, w: AnnulusWindow, cfg: Optional[QuadConfig] = None
) -> float:
    """m(1/tau, f) + m(r, f) - 2 m(1, f)."""
    cfg = cfg or QuadConfig()
    cache: Dict[float, QuadratureResult] = {}

    def m(t: float) -> float:
        if t not in cache:
            cache[t] = _proximity_quad(f, t, cfg)
        return cache[t].value

    return m(1.0 / w.tau) + m(w.r) - 2.0 * m(1.0)


def _log_mean_quad(f: FunctionModel, t: float, cfg: QuadConfig) -> QuadratureResult:
    """(1/2pi) integral of log|f(t e^{i theta})| (full log, both signs)."""
    hints = _near_circle_angles(f, t, poles_only=False)

    def g(theta: np.ndarray) -> np.ndarray:
        z = t * np.exp(1j * np.asarray(theta, dtype=float))
        return f.log_abs_array(z)

    return periodic_integrate(g, cfg, singular_angles=hints).scaled(1.0 / TWO_PI)


# ---------------------------------------------------------------------------
# Counting function N
# ---------------------------------------------------------------------------


def _counting_from_jumps(jumps: Sequence, w: AnnulusWindow, on_t_tol: float = 1e-8) -> float:
    total = 0.0
    for rho, k in jumps:
        if k <= 0:
            continue
        if abs(rho - 1.0) <= on_t_tol:
            total += k * 0.5 * math.log(w.tau * w.r)
        elif rho < 1.0:
            total += k * max(math.log(w.tau * rho), 0.0)
        else:
            total += k * max(math.log(w.r / rho), 0.0)
    return total


def annulus_counting(
    f: FunctionModel,
    w: AnnulusWindow,
    cfg: Optional[QuadConfig] = None,
    poles: Optional[Sequence] = None,
    method: str = "auto",
) -> float:
    """Counting function N over the window.

    Poles must be enumerable: factored rational models use the closed-form
    radial sums, expressions need a caller-supplied pole list (location,
    order) or must be structurally pole-free.  ``method="numeric"`` instead
    locates pole radii as jumps of the reciprocal's index.
    """
    cfg = cfg or QuadConfig()
    if poles is not None:
        factors = tuple((complex(b), -abs(int(m))) for b, m in poles)
        return oracle.exact_counting(factors, w.tau, w.r)
    if method == "numeric":
        jumps = locate_jump_radii(f.reciprocal(), 0.0, 1.0 / w.tau, w.r, cfg)
        return _counting_from_jumps(jumps, w)
    if isinstance(f, RationalFunction):
        return oracle.exact_counting(f.factors, w.tau, w.r)
    if f.is_entire():
        return 0.0
    raise PoleEnumerationError(
        "cannot enumerate poles of a black-box expression; pass poles=..."
    )


def _reciprocal_counting(f: FunctionModel, w: AnnulusWindow, cfg: QuadConfig) -> float:
    """N(tau, r; 1/f): poles of the reciprocal are the zeros of f."""
    if isinstance(f, RationalFunction):
        return oracle.exact_counting(f.reciprocal().factors, w.tau, w.r)
    if f.is_entire():
        jumps = locate_jump_radii(f, 0.0, 1.0 / w.tau, w.r, cfg)
        return _counting_from_jumps(jumps, w)
    raise PoleEnumerationError("cannot enumerate zeros of a black-box expression")


# ---------------------------------------------------------------------------
# Boundary constant
# ---------------------------------------------------------------------------


def _index_integrand(f: FunctionModel):
    def g(theta: np.ndarray) -> np.ndarray:
        z = np.exp(1j * np.asarray(theta, dtype=float))
        return (z * f.log_deriv_array(z)).real

    return g


def _boundary_constant_quad(
    f: FunctionModel, cfg: QuadConfig
) -> Tuple[float, QuadratureResult]:
    part = classify_circle(f, 1.0, cfg)
    zero_arcs = part.select(ArcLabel.ZERO)
    if isinstance(f, RationalFunction):
        on_t = [b for b, _ in f.factors if abs(abs(b) - 1.0) <= 1e-9]
        if on_t:
            raise OnCircleSingularityError(
                f"isolated zero/pole on the unit circle at {on_t[0]!r}"
            )
    g = _index_integrand(f)
    plus_q = arc_integrate(g, part.select(ArcLabel.PLUS), cfg)
    zero_q = arc_integrate(g, zero_arcs, cfg)
    value = plus_q.value / TWO_PI + zero_q.value / (2.0 * TWO_PI)
    combined = QuadratureResult(
        value,
        plus_q.error_estimate / TWO_PI + zero_q.error_estimate / (2.0 * TWO_PI),
        plus_q.nodes + zero_q.nodes,
        plus_q.near_singular or zero_q.near_singular,
        plus_q.converged and zero_q.converged,
    )
    return value, combined


def boundary_constant(f: FunctionModel, cfg: Optional[QuadConfig] = None) -> float:
    """The constant c: full-weight Im(f'/f dz) over |f| > 1 arcs of the unit
    circle plus half-weight over |f| = 1 arcs."""
    cfg = cfg or QuadConfig()
    return _boundary_constant_quad(f, cfg)[0]


# ---------------------------------------------------------------------------
# The characteristic and the classical comparison value
# ---------------------------------------------------------------------------


def characteristic(
    f: FunctionModel,
    w: AnnulusWindow,
    cfg: Optional[QuadConfig] = None,
    poles: Optional[Sequence] = None,
) -> CharacteristicReport:
    """Assemble the full report: N, the proximity components, c, and T."""
    cfg = cfg or QuadConfig()
    diag = QuadDiagnostics()
    cache: Dict[float, QuadratureResult] = {}

    def prox(t: float) -> QuadratureResult:
        if t not in cache:
            cache[t] = _proximity_quad(f, t, cfg)
        return cache[t]

    m_inner = diag.add("m_inner", prox(1.0 / w.tau))
    m_outer = diag.add("m_outer", prox(w.r))
    m_unit = diag.add("m_unit", prox(1.0))
    m_annulus = m_inner + m_outer - 2.0 * m_unit
    n_value = annulus_counting(f, w, cfg, poles)
    cf, cf_quad = _boundary_constant_quad(f, cfg)
    diag.add("c_f", cf_quad)
    t_value = n_value + m_annulus + cf * w.log_ratio
    return CharacteristicReport(
        N=n_value,
        m_inner=m_inner,
        m_outer=m_outer,
        m_unit=m_unit,
        m_annulus=m_annulus,
        cf=cf,
        T=t_value,
        window=w,
        quad=diag,
    )


def classical_characteristic(
    f: RationalFunction, r: float, cfg: Optional[QuadConfig] = None
) -> float:
    """Classical characteristic m(r, f) + N(r, f) for rational models."""
    if not isinstance(f, RationalFunction):
        raise PoleEnumerationError("classical characteristic needs a rational model")
    cfg = cfg or QuadConfig()
    return _proximity_quad(f, r, cfg).value + oracle.classical_counting(f.factors, r)


# ---------------------------------------------------------------------------
# First fundamental identity
# ---------------------------------------------------------------------------


def first_fundamental(
    f: RationalFunction,
    a: complex,
    w: AnnulusWindow,
    cfg: Optional[QuadConfig] = None,
) -> FftReport:
    """Report for N + m of 1/(f - a) against T + eps1 + eps2 log(tau/r).

    eps1 is the proximity difference m(f - a) - m(f) (bounded by
    4 log+|a| + 4 log 2) and eps2 is half the unit-circle index of f - a
    minus the boundary constant.
    """
    if not isinstance(f, RationalFunction):
        raise PoleEnumerationError("the exact identity path needs a rational model")
    a = complex(a)
    cfg = cfg or QuadConfig()
    diag = QuadDiagnostics()

    apoints = oracle.solve_a_points(f, a)
    radii = (1.0 / w.tau, w.r, 1.0)
    for x in apoints:
        for t in radii:
            if abs(abs(x) - t) <= 1e-9 * max(1.0, t):
                raise BoundaryRootError(f"a-point at modulus {abs(x)!r} on circle {t!r}")

    n_shift_recip = oracle.exact_counting([(x, -1) for x in apoints], w.tau, w.r)

    shifted = f.shift(a)
    recip_shifted = shifted.reciprocal()

    def apoint_hints(t: float) -> list:
        return [
            cmath.phase(x) % TWO_PI
            for x in apoints
            if abs(abs(x) - t) <= 1e-6 * max(1.0, t)
        ]

    def pole_hints(t: float) -> list:
        return [
            cmath.phase(b) % TWO_PI
            for b, _ in f.poles
            if abs(abs(b) - t) <= 1e-6 * max(1.0, t)
        ]

    def prox_of(model: FunctionModel, hints) -> float:
        total = {}
        for t in radii:
            total[t] = diag.add(
                f"m[{t:.6g}]", _proximity_quad(model, t, cfg, extra_hints=hints(t))
            )
        return total[radii[0]] + total[radii[1]] - 2.0 * total[radii[2]]

    m_shift_recip = prox_of(recip_shifted, apoint_hints)
    lhs = n_shift_recip + m_shift_recip

    char = characteristic(f, w, cfg)
    diag.entries.extend(char.quad.entries)
    m_shift = prox_of(shifted, pole_hints)
    eps1 = m_shift - char.m_annulus
    nu1 = shifted_exact_index(f, a, 1.0)
    eps2 = 0.5 * nu1 - char.cf
    log_plus_a = math.log(abs(a)) if abs(a) > 1.0 else 0.0
    eps1_bound = 4.0 * log_plus_a + 4.0 * math.log(2.0)
    return FftReport(
        a=a,
        lhs=lhs,
        T=char.T,
        eps1=eps1,
        eps2=eps2,
        eps1_bound=eps1_bound,
        window=w,
        quad_error=diag.total_error,
    )


# ---------------------------------------------------------------------------
# Identity residuals
# ---------------------------------------------------------------------------


def jensen_two_circle_residual(
    f: FunctionModel, s: float, r: float, cfg: Optional[QuadConfig] = None
) -> float:
    """Residual of: integral of nu(t)/t over [s, r] equals (1/pi) times the
    difference of the log|f| circle integrals at r and s."""
    if not 0 < s < r:
        raise ValueError("need 0 < s < r")
    cfg = cfg or QuadConfig()
    jumps = locate_jump_radii(f, 0.0, s, r, cfg)
    breakpoints = [s] + [rho for rho, _ in jumps] + [r]
    lhs = 0.0
    for k in range(len(breakpoints) - 1):
        lo, hi = breakpoints[k], breakpoints[k + 1]
        if hi <= lo:
            continue
        nu = circle_index(f, math.sqrt(lo * hi), cfg)
        lhs += nu * math.log(hi / lo)
    rhs = 2.0 * (_log_mean_quad(f, r, cfg).value - _log_mean_quad(f, s, cfg).value)
    return abs(lhs - rhs)


def jensen_annulus_residual(
    f: FunctionModel, w: AnnulusWindow, cfg: Optional[QuadConfig] = None
) -> float:
    """Residual of the window form of Jensen's identity:

    N(1/f) - N(f) = mean log|f| at 1/tau + mean at r - 2 * mean at 1
                    + nu(1, f) log sqrt(tau/r).
    """
    cfg = cfg or QuadConfig()
    lhs = _reciprocal_counting(f, w, cfg) - annulus_counting(f, w, cfg)
    nu1 = circle_index(f, 1.0, cfg)
    rhs = (
        _log_mean_quad(f, 1.0 / w.tau, cfg).value
        + _log_mean_quad(f, w.r, cfg).value
        - 2.0 * _log_mean_quad(f, 1.0, cfg).value
        + nu1 * 0.5 * math.log(w.tau / w.r)
    )
    return abs(lhs - rhs)


def _fill_gaps(values: list) -> list:
    """Replace None entries by the mean of the nearest neighbours (cyclic)."""
    n = len(values)
    if all(v is None for v in values):
        raise ValueError("all nodes failed")
    out = list(values)
    for i in range(n):
        if out[i] is not None:
            continue
        j = next(k % n for k in range(i + 1, i + n) if values[k % n] is not None)
        h = next(k % n for k in range(i - 1, i - n, -1) if values[k % n] is not None)
        out[i] = 0.5 * (values[j] + values[h])
    return out


def cartan_average_residual(
    f: RationalFunction,
    w: AnnulusWindow,
    n_phi: int = 256,
    cfg: Optional[QuadConfig] = None,
) -> float:
    """|T - mean over phi of N(tau, r; 1/(f - e^{i phi}))|.

    The a-point sets come from the polynomial solver, so on-circle a-points
    land in the boundary term exactly.  N as a function of phi is smooth
    except where an a-point modulus crosses 1/tau, 1, or r; those angles are
    located by bisection from the n_phi-node grid and the mean is assembled
    from per-piece refined trapezoid integrals, which keeps the average
    accurate even when the grid straddles a kink.
    """
    if not isinstance(f, RationalFunction):
        raise PoleEnumerationError("the Cartan average needs a rational model")
    cfg = cfg or QuadConfig()
    char = characteristic(f, w, cfg)

    moduli_cache: Dict[float, np.ndarray] = {}

    def moduli(phi: float) -> np.ndarray:
        key = float(phi)
        if key not in moduli_cache:
            roots = oracle.solve_a_points(f, cmath.exp(1j * key))
            moduli_cache[key] = np.asarray([abs(x) for x in roots], dtype=float)
        return moduli_cache[key]

    def counting(phi: float) -> float:
        total = 0.0
        for rho in moduli(phi):
            if abs(rho - 1.0) <= 1e-12:
                total += 0.5 * math.log(w.tau * w.r)
            elif rho < 1.0:
                total += max(math.log(w.tau * rho), 0.0)
            else:
                total += max(math.log(w.r / rho), 0.0)
        return total

    def band_state(phi: float) -> tuple:
        m = moduli(phi)
        on_t = np.abs(m - 1.0) <= 1e-9
        return (
            int(np.count_nonzero(m < 1.0 / w.tau)),
            int(np.count_nonzero((m >= 1.0 / w.tau) & (m < 1.0) & ~on_t)),
            int(np.count_nonzero(on_t)),
            int(np.count_nonzero((m > 1.0) & (m <= w.r) & ~on_t)),
            int(np.count_nonzero(m > w.r)),
        )

    phis = [TWO_PI * k / n_phi for k in range(n_phi)]
    states = [band_state(p) for p in phis]
    events: list = []

    def refine(a: float, sa: tuple, b: float, sb: tuple) -> None:
        while b - a > 1e-10:
            mid = 0.5 * (a + b)
            sm = band_state(mid)
            if sm == sa:
                a = mid
            elif sm == sb:
                b = mid
            else:
                refine(a, sa, mid, sm)
                refine(mid, sm, b, sb)
                return
        events.append(0.5 * (a + b))

    for k in range(n_phi):
        a, b = phis[k], phis[k] + TWO_PI / n_phi
        sa, sb = states[k], states[(k + 1) % n_phi]
        if sa != sb:
            refine(a, sa, b, sb)

    bounds = [0.0] + sorted(events) + [TWO_PI]
    total = 0.0
    for k in range(len(bounds) - 1):
        lo, hi = bounds[k], bounds[k + 1]
        if hi - lo <= 1e-12:
            continue
        g = lambda arr: np.asarray([counting(p) for p in np.atleast_1d(arr)])  # noqa: E731
        piece = _romberg_line(g, lo, hi, max(cfg.tol, 1e-11), allow_singular=True)
        total += piece.value
    return abs(char.T - total / TWO_PI)


def unit_index_average_residual(
    f: FunctionModel, n_phi: int = 256, cfg: Optional[QuadConfig] = None
) -> float:
    """|(1/4pi) integral of nu(1, f - e^{i phi}) d phi  -  c_f| with the phi
    integral on a uniform grid."""
    cfg = cfg or QuadConfig()
    c = boundary_constant(f, cfg)
    values: list = []
    for k in range(n_phi):
        a = cmath.exp(2j * math.pi * k / n_phi)
        try:
            if isinstance(f, RationalFunction):
                values.append(shifted_exact_index(f, a, 1.0))
            else:
                values.append(circle_index(f.shift(a), 1.0, cfg))
        except (oracle.RootFindingError, IntegralityError, OnCircleSingularityError):
            values.append(None)
    values = _fill_gaps(values)
    mean = float(np.sum(values)) / (2.0 * n_phi)
    return abs(mean - c)


def index_shift_residual(
    f: FunctionModel, t: float, zeta: complex, cfg: Optional[QuadConfig] = None
) -> float:
    """Residual of nu(t, f - zeta) = nu(t, f) - (1/pi) * correction integral
    with integrand Im(zeta f' / (f (zeta - f)) dz)."""
    cfg = cfg or QuadConfig()
    zeta = complex(zeta)
    if isinstance(f, RationalFunction):
        nu_shift = shifted_exact_index(f, zeta, t)
        nu_base = exact_circle_index(f.factors, t)
    else:
        nu_shift = circle_index(f.shift(zeta), t, cfg)
        nu_base = circle_index(f, t, cfg)
    if zeta == 0:
        return float(abs(nu_shift - nu_base))

    def g(theta: np.ndarray) -> np.ndarray:
        z = t * np.exp(1j * np.asarray(theta, dtype=float))
        fz = f.eval_array(z)
        ld = f.log_deriv_array(z)
        return (zeta * ld / (zeta - fz) * 1j * z).imag

    corr = periodic_integrate(g, cfg)
    return abs(nu_shift - nu_base + corr.value / math.pi)


def torus_average_residual(
    f: FunctionModel, n_grid: int = 512, cfg: Optional[QuadConfig] = None
) -> float:
    """Residual of the double unit-circle average of
    Re(f'/(f (zeta - f)) dz dzeta) against the arc form:
    -(1/2pi) Im(f'/f dz) over |f| < 1 arcs minus half that over |f| = 1 arcs.

    The product grid skips samples where zeta collides with f(z); the
    residual decays like 1/n_grid when |f| = 1 arcs are present.
    """
    cfg = cfg or QuadConfig()
    theta = TWO_PI * np.arange(n_grid) / n_grid
    z = np.exp(1j * theta)
    fz = f.eval_array(z)
    ld = f.log_deriv_array(z)
    if not (np.isfinite(fz).all() and np.isfinite(ld).all()):
        raise OnCircleSingularityError("zero or pole on the unit circle")
    wz = ld * 1j * z  # f'/f dz per d theta
    acc = 0.0
    chunk = max(1, min(n_grid, (1 << 22) // n_grid))
    for start in range(0, n_grid, chunk):
        zeta = np.exp(1j * theta[start : start + chunk])
        denom = zeta[None, :] - fz[:, None]
        ok = np.abs(denom) >= 1e-8
        with np.errstate(all="ignore"):
            vals = (wz[:, None] * (1j * zeta)[None, :] / denom).real
        acc += float(np.where(ok, vals, 0.0).sum())
    lhs = acc / float(n_grid) ** 2

    part = classify_circle(f, 1.0, cfg)
    g = _index_integrand(f)
    minus_q = arc_integrate(g, part.select(ArcLabel.MINUS), cfg)
    zero_q = arc_integrate(g, part.select(ArcLabel.ZERO), cfg)
    rhs = -minus_q.value / TWO_PI - zero_q.value / (2.0 * TWO_PI)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Property scan over a window grid
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    violation: float
    limit: float
    location: Optional[tuple] = None

    @property
    def passed(self) -> bool:
        return self.violation <= self.limit


@dataclass
class ScanReport:
    taus: np.ndarray
    rs: np.ndarray
    T: np.ndarray
    T_reciprocal: np.ndarray
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _mean_interior_apoint_count(
    f: RationalFunction,
    tau: float,
    r: float,
    n_base: int,
    moduli_cache: Dict[float, np.ndarray],
    phi_tol: float = 1e-10,
    inclusive: bool = False,
) -> float:
    """Exact-to-bisection mean over phi of the number of e^{i phi}-points in
    the annulus between 1/tau and r.

    The count is an integer step function of phi; jumps are located by
    bisection and the piecewise-constant function integrated exactly.
    ``inclusive`` counts moduli sitting on the boundary circles as well,
    which is the one-sided limit matching a forward difference taken at a
    window boundary (tau = 1 or r = 1).
    """
    lo, hi = 1.0 / tau, r

    def moduli(phi: float) -> np.ndarray:
        key = float(phi)
        if key not in moduli_cache:
            roots = oracle.solve_a_points(f, cmath.exp(1j * key))
            moduli_cache[key] = np.asarray([abs(x) for x in roots], dtype=float)
        return moduli_cache[key]

    if inclusive:
        edge = 1e-9

        def count(phi: float) -> int:
            m = moduli(phi)
            return int(np.count_nonzero((m > lo - edge) & (m < hi + edge)))

    else:

        def count(phi: float) -> int:
            m = moduli(phi)
            return int(np.count_nonzero((m > lo) & (m < hi)))

    phis = [TWO_PI * k / n_base for k in range(n_base)]
    vals = [count(p) for p in phis]
    events: list = []

    def refine(a: float, va: int, b: float, vb: int) -> None:
        while b - a > phi_tol:
            mid = 0.5 * (a + b)
            vm = count(mid)
            if vm == va:
                a = mid
            elif vm == vb:
                b = mid
            else:
                refine(a, va, mid, vm)
                refine(mid, vm, b, vb)
                return
        events.append((0.5 * (a + b), vb))

    for k in range(n_base):
        a, b = phis[k], phis[k] + TWO_PI / n_base
        va, vb = vals[k], vals[(k + 1) % n_base]
        if va != vb:
            refine(a, va, b, vb)

    events.sort(key=lambda e: e[0])
    positions = [0.0] + [e[0] for e in events] + [TWO_PI]
    segment_values = [vals[0]] + [e[1] for e in events]
    mean = sum(
        v * (positions[k + 1] - positions[k]) for k, v in enumerate(segment_values)
    )
    return mean / TWO_PI


def property_scan(
    f: RationalFunction,
    taus: Sequence[float],
    rs: Sequence[float],
    cfg: Optional[QuadConfig] = None,
    n_phi: int = 512,
    fd_step: float = 5e-4,
    base_tol: float = 1e-6,
) -> ScanReport:
    """Grid scan of the structural properties of T.

    Checks, each against base_tol plus a slack from accumulated quadrature
    error estimates: nonnegativity, monotonicity along both log-axes,
    log-convexity (discrete second differences) along both axes, equality of
    T for f and 1/f, the half-index relation between the boundary constants,
    the classical two-sided diagonal bound, and the scaling derivative
    identity (directional finite differences of T against the exact phi-mean
    of the interior a-point count).
    """
    if not isinstance(f, RationalFunction):
        raise PoleEnumerationError("the property scan needs a rational model")
    cfg = cfg or QuadConfig()
    taus = np.asarray(sorted(float(t) for t in taus))
    rs = np.asarray(sorted(float(t) for t in rs))
    if taus[0] < 1.0 or rs[0] < 1.0:
        raise ValueError("grid values must be >= 1")

    recip = f.reciprocal()
    prox_cache: Dict[Tuple[int, float], QuadratureResult] = {}

    def prox(which: int, model: FunctionModel, t: float) -> QuadratureResult:
        key = (which, float(t))
        if key not in prox_cache:
            prox_cache[key] = _proximity_quad(model, t, cfg)
        return prox_cache[key]

    cf, cf_q = _boundary_constant_quad(f, cfg)
    cg, cg_q = _boundary_constant_quad(recip, cfg)

    def t_and_err(which: int, model: FunctionModel, c: float, tau: float, r: float):
        qi = prox(which, model, 1.0 / tau)
        qo = prox(which, model, r)
        qu = prox(which, model, 1.0)
        m_ann = qi.value + qo.value - 2.0 * qu.value
        n_val = oracle.exact_counting(model.factors, tau, r)
        t_val = n_val + m_ann + c * math.log(tau / r)
        err = qi.error_estimate + qo.error_estimate + 2.0 * qu.error_estimate
        return t_val, err

    nt, nr = len(taus), len(rs)
    T = np.zeros((nt, nr))
    E = np.zeros((nt, nr))
    Trec = np.zeros((nt, nr))
    for i, tau in enumerate(taus):
        for j, r in enumerate(rs):
            T[i, j], E[i, j] = t_and_err(0, f, cf, tau, r)
            Trec[i, j], _ = t_and_err(1, recip, cg, tau, r)

    checks: list = []
    slack = 10.0 * float(E.max()) + cf_q.error_estimate + cg_q.error_estimate
    limit = base_tol + slack

    checks.append(
        CheckResult(
            "nonnegative",
            max(0.0, -float(T.min())),
            limit,
            tuple(np.unravel_index(int(T.argmin()), T.shape)),
        )
    )

    dtau = np.diff(T, axis=0)
    dr = np.diff(T, axis=1)
    checks.append(CheckResult("monotone_tau", max(0.0, -float(dtau.min())) if dtau.size else 0.0, limit))
    checks.append(CheckResult("monotone_r", max(0.0, -float(dr.min())) if dr.size else 0.0, limit))

    def second_diff_violation(values: np.ndarray, axis: int, grid: np.ndarray) -> float:
        if len(grid) < 3:
            return 0.0
        logs = np.log(grid)
        if not np.allclose(np.diff(logs), np.diff(logs)[0], rtol=1e-9, atol=1e-12):
            raise ValueError("convexity check needs a log-uniform grid")
        d2 = np.diff(values, n=2, axis=axis)
        return max(0.0, -float(d2.min())) if d2.size else 0.0

    checks.append(CheckResult("convex_tau", second_diff_violation(T, 0, taus), limit))
    checks.append(CheckResult("convex_r", second_diff_violation(T, 1, rs), limit))

    checks.append(
        CheckResult(
            "reciprocal_symmetry",
            float(np.max(np.abs(T - Trec))),
            limit,
            tuple(np.unravel_index(int(np.abs(T - Trec).argmax()), T.shape)),
        )
    )

    nu1 = exact_circle_index(f.factors, 1.0)
    checks.append(
        CheckResult(
            "index_constant",
            abs(0.5 * nu1 - (cf - cg)),
            base_tol + 10.0 * (cf_q.error_estimate + cg_q.error_estimate),
        )
    )

    # Classical two-sided bound on the diagonal.
    diag_rs = [r for r in rs if np.min(np.abs(taus - r)) <= 1e-12]
    worst_sandwich = 0.0
    where_sandwich = None
    cl_unit = classical_characteristic(f, 1.0, cfg)
    for r in diag_rs:
        t_diag, _ = t_and_err(0, f, cf, r, r)
        cl_r = classical_characteristic(f, r, cfg)
        over = t_diag - cl_r
        under = (cl_r - 2.0 * cl_unit) - t_diag
        v = max(0.0, over, under)
        if v > worst_sandwich:
            worst_sandwich, where_sandwich = v, (r,)
    checks.append(CheckResult("classical_sandwich", worst_sandwich, limit, where_sandwich))

    # Scaling derivative identity.
    moduli_cache: Dict[float, np.ndarray] = {}
    worst_d = 0.0
    where_d = None
    slack_d = 0.0
    h = fd_step
    for i, tau in enumerate(taus):
        for j, r in enumerate(rs):
            one_sided = tau * math.exp(-h) < 1.0 or r * math.exp(-h) < 1.0
            if not one_sided:
                tp, ep = t_and_err(0, f, cf, tau * math.exp(h), r * math.exp(h))
                tm, em = t_and_err(0, f, cf, tau * math.exp(-h), r * math.exp(-h))
                lhs = (tp - tm) / (2.0 * h)
                err_fd = (ep + em) / (2.0 * h)
            else:
                t0, e0 = T[i, j], E[i, j]
                t1, e1 = t_and_err(0, f, cf, tau * math.exp(h), r * math.exp(h))
                t2, e2 = t_and_err(0, f, cf, tau * math.exp(2 * h), r * math.exp(2 * h))
                lhs = (-3.0 * t0 + 4.0 * t1 - t2) / (2.0 * h)
                err_fd = (3.0 * e0 + 4.0 * e1 + e2) / (2.0 * h)
            rhs = _mean_interior_apoint_count(
                f, tau, r, n_phi, moduli_cache, inclusive=one_sided
            )
            v = abs(lhs - rhs)
            slack_d = max(slack_d, 10.0 * err_fd)
            if v > worst_d:
                worst_d, where_d = v, (i, j)
    checks.append(CheckResult("derivative_identity", worst_d, base_tol + slack_d, where_d))

    return ScanReport(taus=taus, rs=rs, T=T, T_reciprocal=Trec, checks=checks)
