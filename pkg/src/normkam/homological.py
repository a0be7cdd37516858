"""Difference-equation solver R u = h and the parity bookkeeping around it.

R is the shift-difference operator (R u)(theta, r) = u(theta + gamma0, r)
- u(theta, r).  On the zero-mean subspace it inverts mode by mode:

    u_{kj} = h_{kj} / (e^{i <j, omega> gamma0} - 1),   j != 0,

and the unique zero-average representative has u_{k0} = 0.

The symmetry operator used throughout is (T h)(theta) = h(-theta -
gamma0): if T h = h the solution is odd in theta, if T h = -h it is
even, which is exactly what keeps the KAM change of variables commuting
with the involution G(theta, r) = (-theta, r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInImage, ParityViolation, SmallDivisor
from .series import (
    FourierTaylorSeries,
    l1_norm,
    project_mean,
    reflect_angle,
    shift_angle,
)


def half_turn_reflect(phi, gamma0):
    """The involution (T phi)(theta) = phi(-theta - gamma0)."""
    return shift_angle(reflect_angle(phi), gamma0)


def divisor_grid(phi, gamma0):
    """e^{i <j, omega> gamma0} - 1 over the mode box of ``phi``."""
    return np.exp(1j * phi._mode_dot_freq() * float(gamma0)) - 1.0


def solve_difference(h, gamma0, min_divisor):
    """Solve u(theta + gamma0, r) - u(theta, r) = h with [u] = 0.

    Requires h to have vanishing theta-average (NotInImage otherwise) and
    every divisor over h's support to stay >= min_divisor in modulus
    (SmallDivisor otherwise, failing loudly rather than amplifying noise).
    """
    if not project_mean(h).is_zero:
        raise NotInImage("right-hand side has nonzero theta-average; not in the image of R")
    div = divisor_grid(h, gamma0)
    mag = np.abs(div)
    support = np.abs(h._c) > 0.0
    mode_support = np.any(support, axis=0)
    bad = mode_support & (mag < float(min_divisor))
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        j = tuple(int(x) - h.cutoff for x in idx)
        raise SmallDivisor(j, float(mag[tuple(idx)]), float(min_divisor))
    out = np.zeros_like(h._c)
    np.divide(h._c, div, out=out, where=mode_support)
    center = (slice(None),) + (h.cutoff,) * h.m
    out[center] = 0.0
    return h._like(out)


def apply_difference(u, gamma0):
    """The forward operator R u = u(theta + gamma0, r) - u(theta, r)."""
    return shift_angle(u, gamma0) - u


def symmetrize_parity(f_s, g_s, gamma0):
    """Split off the T-symmetric part of f and the T-antisymmetric part of g.

    Returns (p_s, q_s, report) with p = (f + T f)/2, q = (g - T g)/2 and a
    report of the defining symmetry residuals ||T p - p|| and ||T q + q||
    (both vanish identically; measured here as an invariant check).
    """
    p = (f_s + half_turn_reflect(f_s, gamma0)).scale(0.5)
    q = (g_s - half_turn_reflect(g_s, gamma0)).scale(0.5)
    res_p = l1_norm(half_turn_reflect(p, gamma0) - p)
    res_q = l1_norm(half_turn_reflect(q, gamma0) + q)
    return p, q, SymmetryReport(res_p, res_q)


@dataclass(frozen=True)
class SymmetryReport:
    p_residual: float
    q_residual: float


@dataclass(frozen=True)
class ParityReport:
    source_symmetry: str          # "symmetric", "antisymmetric", or "mixed"
    expected_parity: str          # "odd", "even", or "none"
    odd_residual: float           # ||reflect(u) + u||
    even_residual: float          # ||reflect(u) - u||
    source_residual: float


def parity_of_solution(u, h, gamma0, tol=1e-12):
    """Check the parity clause: T-symmetric h gives odd u, antisymmetric gives even.

    ``h`` is the right-hand side that produced ``u``.  Residuals are
    reported in the coefficient l1 norm, scaled checks are relative to
    ||u||.  Raises ParityViolation when the implied parity fails at tol.
    """
    scale_h = max(l1_norm(h), 1e-300)
    sym = l1_norm(half_turn_reflect(h, gamma0) - h) / scale_h
    anti = l1_norm(half_turn_reflect(h, gamma0) + h) / scale_h
    odd_res = l1_norm(reflect_angle(u) + u)
    even_res = l1_norm(reflect_angle(u) - u)
    scale_u = max(l1_norm(u), 1e-300)
    if sym <= tol:
        kind, expected, failed = "symmetric", "odd", odd_res / scale_u > tol
        src_res = sym
    elif anti <= tol:
        kind, expected, failed = "antisymmetric", "even", even_res / scale_u > tol
        src_res = anti
    else:
        kind, expected, failed = "mixed", "none", False
        src_res = min(sym, anti)
    report = ParityReport(kind, expected, odd_res, even_res, src_res)
    if failed:
        raise ParityViolation(
            f"{kind} right-hand side implies {expected} solution; "
            f"residuals odd={odd_res:.3e} even={even_res:.3e}"
        )
    return report


def odd_part(u):
    """Projection onto odd-in-theta series (coefficient-exact)."""
    return (u - reflect_angle(u)).scale(0.5)


def even_part(u):
    """Projection onto even-in-theta series (coefficient-exact)."""
    return (u + reflect_angle(u)).scale(0.5)
