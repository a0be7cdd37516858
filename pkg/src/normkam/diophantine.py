"""Arithmetic admissibility scans for the small-divisor conditions.

Two scan shapes are used: the cylinder-map condition

    |<k, omega> gamma0 / (2 pi) - j| >= c0 / |k|^sigma,   0 < ||k|| <= Kmax,

with j the nearest integer, and the oscillator condition

    |k / omega - l| >= c0 / |k|^sigma,   1 <= k <= Kmax.

``|k|`` is taken as the max norm by default (the source condition does
not fix a norm); the l1 norm is available via ``norm="l1"``.  Scans are
finite: Kmax should default to the Fourier cutoff of the series actually
being solved, the only range a truncated solver touches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DiophantineParams:
    omega: tuple
    gamma0: float
    c0: float
    sigma: float
    scan_cutoff: int
    norm: str = "inf"

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        if self.c0 <= 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.scan_cutoff < 1:
            raise ValueError(f"scan cutoff must be >= 1, got {self.scan_cutoff}")
        if self.norm not in ("inf", "l1"):
            raise ValueError(f"norm must be 'inf' or 'l1', got {self.norm}")

    def min_divisor_bound(self):
        """Paper-style lower bound 4 c0 / Kmax^sigma for |e^{i<j,w>g0} - 1|."""
        return 4.0 * self.c0 / self.scan_cutoff ** self.sigma


@dataclass(frozen=True)
class ScanReport:
    passes: bool
    worst_k: tuple
    worst_margin: float
    best_c0: float
    c0: float
    sigma: float
    kmax: int

    def to_json_obj(self):
        return {
            "passes": bool(self.passes),
            "worst_k": list(self.worst_k),
            "worst_margin": float(self.worst_margin),
            "best_c0": float(self.best_c0),
            "c0": float(self.c0),
            "sigma": float(self.sigma),
            "kmax": int(self.kmax),
        }


def _dist_to_integer(x):
    return np.abs(x - np.round(x))


def _scan_axes(omega, gamma0, kmax, sigma, norm):
    """Scan k with first nonzero component positive (margins are k <-> -k
    symmetric); yields (best_scaled, argmin_k) with scaled = dist * ||k||^s."""
    m = len(omega)
    omega = np.asarray(omega, dtype=float)
    best = np.inf
    best_k = None
    if m == 1:
        k = np.arange(1, kmax + 1, dtype=float)
        x = k * omega[0] * gamma0 / (2.0 * np.pi)
        scaled = _dist_to_integer(x) * k ** sigma
        i = int(np.argmin(scaled))
        return float(scaled[i]), (int(k[i]),)
    # m >= 2: iterate leading components, vectorize the last axis
    last = np.arange(-kmax, kmax + 1, dtype=float)
    for head in itertools.product(range(-kmax, kmax + 1), repeat=m - 1):
        head_arr = np.array(head, dtype=float)
        # symmetry pruning: first nonzero component positive
        nz = [h for h in head if h != 0]
        if nz and nz[0] < 0:
            continue
        lo = 1.0 if not nz else -float(kmax)
        mask = last >= lo
        ks = last[mask]
        if ks.size == 0:
            continue
        x = (head_arr @ omega[:-1] + ks * omega[-1]) * gamma0 / (2.0 * np.pi)
        if norm == "inf":
            nk = np.maximum(np.abs(ks), np.abs(head_arr).max(initial=0.0))
        else:
            nk = np.abs(ks) + np.abs(head_arr).sum()
        valid = nk > 0
        if not np.any(valid):
            continue
        scaled = np.where(valid, _dist_to_integer(x) * nk ** sigma, np.inf)
        i = int(np.argmin(scaled))
        if scaled[i] < best:
            best = float(scaled[i])
            best_k = head + (int(ks[i]),)
    return best, best_k


def best_constant(omega, gamma0, sigma, kmax, norm="inf"):
    """min over the scan of dist(<k,w> g0 / 2pi) * ||k||^sigma.

    check_condition passes with c0 iff c0 <= this value (same reduction,
    so the consistency is exact, not approximate).
    """
    best, _ = _scan_axes(tuple(float(w) for w in omega), float(gamma0),
                         int(kmax), float(sigma), norm)
    return best


def check_condition(p: DiophantineParams) -> ScanReport:
    """Exhaustive finite scan of the cylinder-map small-divisor condition."""
    best, worst_k = _scan_axes(p.omega, p.gamma0, p.scan_cutoff, p.sigma, p.norm)
    if p.norm == "inf":
        nk = max(abs(x) for x in worst_k)
    else:
        nk = sum(abs(x) for x in worst_k)
    x = sum(ki * wi for ki, wi in zip(worst_k, p.omega)) * p.gamma0 / (2.0 * np.pi)
    worst_dist = float(abs(x - round(x)))
    return ScanReport(
        passes=bool(p.c0 <= best),
        worst_k=tuple(worst_k),
        worst_margin=worst_dist - p.c0 / nk ** p.sigma,
        best_c0=best,
        c0=p.c0,
        sigma=p.sigma,
        kmax=p.scan_cutoff,
    )


def check_oscillator_condition(omega, c0, sigma, kmax) -> ScanReport:
    """Scan |k / omega - l| >= c0 / k^sigma for the oscillator theorem."""
    omega = float(omega)
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    k = np.arange(1, int(kmax) + 1, dtype=float)
    x = k / omega
    scaled = _dist_to_integer(x) * k ** float(sigma)
    i = int(np.argmin(scaled))
    best = float(scaled[i])
    worst_k = (int(k[i]),)
    worst_dist = float(_dist_to_integer(x[i]))
    return ScanReport(
        passes=bool(c0 <= best),
        worst_k=worst_k,
        worst_margin=float(worst_dist - float(c0) / k[i] ** float(sigma)),
        best_c0=best,
        c0=float(c0),
        sigma=float(sigma),
        kmax=int(kmax),
    )
