"""Exact reference computations for rational functions.

Polynomial root extraction by simultaneous (Aberth-Ehrlich) iteration, exact
annulus/classical counting functions from factor lists, and a-point solving
for f(z) = a.  These are the ground truth the quadrature paths are tested
against, so everything here is deterministic and dependency-free beyond
numpy array arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .funcdsl import (
    Add,
    Const,
    Div,
    Exp,
    ExprNode,
    ExpressionFunction,
    FunctionModel,
    IntPow,
    Mul,
    Neg,
    RationalFunction,
    Sub,
    Var,
)

__all__ = [
    "RootFindingError",
    "PolyCoeffs",
    "poly_roots",
    "rational_coeffs",
    "solve_a_points",
    "exact_counting",
    "classical_counting",
    "measure_circle_conflicts",
    "as_rational",
]

_EPS = np.finfo(float).eps


class RootFindingError(Exception):
    """Aberth iteration failed to converge; carries the best iterates."""

    def __init__(self, roots, residuals):
        super().__init__("polynomial root finder did not converge")
        self.roots = list(roots)
        self.residuals = list(residuals)


@dataclass(frozen=True)
class PolyCoeffs:
    """Ascending-degree coefficients with a nonzero leading coefficient."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if not coeffs or (len(coeffs) == 1 and coeffs[0] == 0):
            raise ValueError("zero polynomial")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=complex)


def _coerce_coeffs(p) -> np.ndarray:
    if isinstance(p, PolyCoeffs):
        return p.as_array()
    return PolyCoeffs(tuple(p)).as_array()


def poly_roots(p, max_iter: int = 500, step_tol: float = 1e-13) -> list:
    """All complex roots with multiplicity (repeated entries for clusters).

    Simultaneous Aberth-Ehrlich iteration from perturbed-circle starts.
    A root is frozen once its step drops under ``step_tol * (1 + |root|)``
    or its residual reaches the backward-error floor.  Raises
    :class:`RootFindingError` with the best iterates on non-convergence.
    """
    c = _coerce_coeffs(p)
    n = len(c) - 1
    if n < 1:
        return []
    c = c / np.max(np.abs(c))
    if n == 1:
        return [complex(-c[0] / c[1])]
    dc = npoly.polyder(c)
    cauchy = 1.0 + float(np.max(np.abs(c[:-1])) / np.abs(c[-1]))
    angles = 2.0 * math.pi * (np.arange(n) + 0.35) / n
    z = 0.5 * cauchy * np.exp(1j * angles)
    abs_c = np.abs(c)
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        pv = npoly.polyval(z, c)
        backward = npoly.polyval(np.abs(z), abs_c)
        resid_ok = np.abs(pv) <= 8.0 * _EPS * backward
        dv = npoly.polyval(z, dc)
        dv = np.where(dv == 0, _EPS, dv)
        w = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = (1.0 / diff).sum(axis=1) - 1.0  # subtract the diagonal's 1/1
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        step = np.where(active, w / denom, 0.0)
        z = z - step
        small = np.abs(step) <= step_tol * (1.0 + np.abs(z))
        active &= ~(small | resid_ok)
        if not active.any():
            order = np.lexsort((z.imag, z.real))
            return [complex(v) for v in z[order]]
    raise RootFindingError(z, np.abs(npoly.polyval(z, c)))


def rational_coeffs(f: RationalFunction):
    """Expand a factored rational function into (numerator, denominator)
    ascending coefficient arrays; the scale lives in the numerator."""
    num = np.asarray([f.scale], dtype=complex)
    den = np.asarray([1.0 + 0.0j], dtype=complex)
    for b, m in f.factors:
        lin = np.asarray([-b, 1.0], dtype=complex)
        for _ in range(abs(m)):
            if m > 0:
                num = npoly.polymul(num, lin)
            else:
                den = npoly.polymul(den, lin)
    return num, den


def solve_a_points(f: RationalFunction, a: complex, drop_tol: float = 1e-12) -> list:
    """Roots of f(z) = a with multiplicity (roots of num - a*den).

    Leading-coefficient cancellation (a equal to the ratio of leading
    coefficients) drops the degree; the lost roots escaped to infinity and
    are simply not returned.
    """
    a = complex(a)
    num, den = rational_coeffs(f)
    size = max(len(num), len(den))
    p = np.zeros(size, dtype=complex)
    p[: len(num)] += num
    p[: len(den)] -= a * den
    ref = max(float(np.max(np.abs(num))), abs(a) * float(np.max(np.abs(den))), 1e-300)
    k = len(p)
    while k > 1 and abs(p[k - 1]) <= drop_tol * ref:
        k -= 1
    p = p[:k]
    if len(p) == 1:
        if abs(p[0]) <= drop_tol * ref:
            raise ValueError("f is identically equal to a")
        return []
    return poly_roots(p)


def _log_plus(x: float) -> float:
    return math.log(x) if x > 1.0 else 0.0


def exact_counting(
    factors: Sequence,
    tau: float,
    r: float,
    boundary_tol: float = 1e-12,
) -> float:
    """Closed form of the annulus counting function for listed poles.

    Sums log(tau*|b|) over poles in (1/tau, 1), log(r/|b|) over poles in
    (1, r), and log(sqrt(tau*r)) per pole on the unit circle; multiplicities
    included.  The log+ clamps make the value continuous at the measurement
    circles, so a pole exactly at 1/tau or r contributes zero.
    """
    total = 0.0
    for b, m in factors:
        if m >= 0:
            continue
        mult = -m
        rho = abs(b)
        if abs(rho - 1.0) <= boundary_tol:
            total += mult * 0.5 * math.log(tau * r)
        elif rho < 1.0:
            total += mult * _log_plus(tau * rho)
        else:
            total += mult * _log_plus(r / rho)
    return total


def measure_circle_conflicts(
    factors: Sequence, tau: float, r: float, tol: float = 1e-12
) -> list:
    """Poles sitting on a measurement circle (modulus 1/tau or r) within tol."""
    bad = []
    for b, m in factors:
        if m >= 0:
            continue
        rho = abs(b)
        if abs(rho - 1.0 / tau) <= tol * max(1.0, 1.0 / tau) or abs(rho - r) <= tol * max(1.0, r):
            bad.append(complex(b))
    return bad


def classical_counting(factors: Sequence, r: float, origin_tol: float = 1e-15) -> float:
    """Classical N(r, f) from exact pole moduli (poles at 0 weighted log r)."""
    total = 0.0
    for b, m in factors:
        if m >= 0:
            continue
        mult = -m
        rho = abs(b)
        if rho <= origin_tol:
            total += mult * math.log(r)
        else:
            total += mult * _log_plus(r / rho)
    return total


# ---------------------------------------------------------------------------
# Expression -> rational conversion
# ---------------------------------------------------------------------------

_MAX_CONVERT_DEGREE = 64


def _tree_to_ratio(node: ExprNode, cap: int):
    """(num, den) ascending coefficient arrays, or None if not rational."""
    if isinstance(node, Const):
        return np.asarray([node.value], complex), np.asarray([1.0 + 0j], complex)
    if isinstance(node, Var):
        return np.asarray([0.0, 1.0], complex), np.asarray([1.0 + 0j], complex)
    if isinstance(node, Neg):
        sub = _tree_to_ratio(node.arg, cap)
        if sub is None:
            return None
        return -sub[0], sub[1]
    if isinstance(node, (Add, Sub, Mul, Div)):
        left = _tree_to_ratio(node.left, cap)
        right = _tree_to_ratio(node.right, cap)
        if left is None or right is None:
            return None
        n1, d1 = left
        n2, d2 = right
        if isinstance(node, Add):
            num = npoly.polyadd(npoly.polymul(n1, d2), npoly.polymul(n2, d1))
            den = npoly.polymul(d1, d2)
        elif isinstance(node, Sub):
            num = npoly.polysub(npoly.polymul(n1, d2), npoly.polymul(n2, d1))
            den = npoly.polymul(d1, d2)
        elif isinstance(node, Mul):
            num, den = npoly.polymul(n1, n2), npoly.polymul(d1, d2)
        else:
            if not np.any(n2):
                return None
            num, den = npoly.polymul(n1, d2), npoly.polymul(d1, n2)
        if len(num) - 1 > cap or len(den) - 1 > cap:
            return None
        return num, den
    if isinstance(node, IntPow):
        sub = _tree_to_ratio(node.base, cap)
        if sub is None:
            return None
        n1, d1 = sub
        k = node.exponent
        if k < 0:
            n1, d1 = d1, n1
            k = -k
        num = np.asarray([1.0 + 0j])
        den = np.asarray([1.0 + 0j])
        for _ in range(k):
            num = npoly.polymul(num, n1)
            den = npoly.polymul(den, d1)
            if len(num) - 1 > cap or len(den) - 1 > cap:
                return None
        return num, den
    if isinstance(node, Exp):
        return None
    return None


def _trim(c: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(c)))
    if scale == 0.0:
        return c[:1]
    k = len(c)
    while k > 1 and abs(c[k - 1]) <= 1e-14 * scale:
        k -= 1
    return c[:k]


def as_rational(
    model: FunctionModel, max_degree: int = _MAX_CONVERT_DEGREE
) -> Optional[RationalFunction]:
    """Convert a model to factored rational form when possible.

    Rational models pass through; expression trees without ``exp`` are
    expanded to a coefficient ratio and factored through the root finder.
    Returns None when the tree is genuinely transcendental or too large.
    """
    if isinstance(model, RationalFunction):
        return model
    if not isinstance(model, ExpressionFunction):
        return None
    ratio = _tree_to_ratio(model.tree, max_degree)
    if ratio is None:
        return None
    num, den = _trim(ratio[0]), _trim(ratio[1])
    if not np.any(num):
        return None  # the zero function has no factored representation
    try:
        zeros = poly_roots(num) if len(num) > 1 else []
        poles = poly_roots(den) if len(den) > 1 else []
    except RootFindingError:
        return None
    scale = complex(num[-1] / den[-1])
    factors = [(z, 1) for z in zeros] + [(p, -1) for p in poles]
    return RationalFunction(scale, tuple(factors))
