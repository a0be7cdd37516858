"""Dense truncated Fourier-Taylor series algebra on the cylinder.

A series here is a double expansion

    phi(theta, r) = sum_{k,j} chi_{kj} exp(i <j, omega> theta) r^k,

with nonnegative radial orders k <= order_max, integer mode vectors
j in Z^m with ||j||_inf <= fourier_cutoff, and complex coefficients
subject to the reality condition conj(chi_{kj}) = chi_{k,-j}.

Coefficients are stored in a dense complex array indexed by (k, j+K);
all exported views iterate keys in sorted (k, lexicographic j) order, so
runs are bit-reproducible.  The reality condition is re-enforced by
symmetrization after every operation, and coefficients falling outside
the truncation are dropped with their absolute mass accumulated into a
per-series ``truncation_loss`` diagnostic (an upper bound, in l1 units).

The mode cutoff is a hard spectral truncation applied at every
operation; products whose modes exceed the cutoff never fold back into
retained modes, which is exact whenever the active spectra stay inside
the cutoff and is otherwise reported through ``truncation_loss``.

Series are immutable values: all operations are pure functions and it is
safe to share instances across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import FrequencyMismatch, InvalidEntry, InvalidFrequency, NotNearIdentity

# Coefficients below this magnitude are pruned to avoid denormal buildup.
PRUNE_THRESHOLD = 1e-300


@dataclass(frozen=True)
class StripDomain:
    """Complex strip |Im theta| < t, |r| < rho used by the weighted norm."""

    t: float
    rho: float

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise ValueError(f"strip half-width t must lie in (0, 1), got {self.t}")
        if not (0.0 < self.rho < 1.0):
            raise ValueError(f"radius bound rho must lie in (0, 1), got {self.rho}")

    def shrink(self, dt=0.0, drho=0.0):
        return StripDomain(self.t - dt, self.rho - drho)


class FourierTaylorSeries:
    """Immutable truncated Fourier-Taylor series."""

    __slots__ = ("freq", "order_max", "cutoff", "truncation_loss", "_c", "_cache")

    def __init__(self, freq, coeff_array, order_max, cutoff, truncation_loss=0.0):
        freq = tuple(float(w) for w in freq)
        if len(freq) == 0 or any(w == 0.0 for w in freq):
            raise InvalidFrequency(f"frequency vector must be nonempty and nonzero: {freq}")
        m = len(freq)
        shape = (order_max + 1,) + (2 * cutoff + 1,) * m
        arr = np.asarray(coeff_array, dtype=complex)
        if arr.shape != shape:
            raise InvalidEntry(f"coefficient array shape {arr.shape} != {shape}")
        # reality: chi_{k,-j} = conj(chi_{kj}); enforce by symmetrization
        flipped = np.flip(arr, axis=tuple(range(1, m + 1)))
        arr = 0.5 * (arr + np.conj(flipped))
        arr[np.abs(arr) < PRUNE_THRESHOLD] = 0.0
        arr.setflags(write=False)
        self.freq = freq
        self.order_max = int(order_max)
        self.cutoff = int(cutoff)
        self.truncation_loss = float(truncation_loss)
        self._c = arr
        self._cache = {}

    # -- construction -------------------------------------------------

    @classmethod
    def zeros(cls, freq, order_max, cutoff):
        m = len(tuple(freq))
        shape = (order_max + 1,) + (2 * cutoff + 1,) * m
        return cls(freq, np.zeros(shape, dtype=complex), order_max, cutoff)

    @property
    def m(self):
        return len(self.freq)

    @property
    def coefficients(self):
        """Read-only dense view, axis 0 is radial order, mode axes follow."""
        return self._c

    def _like(self, arr, loss=None):
        return FourierTaylorSeries(
            self.freq, arr, self.order_max, self.cutoff,
            self.truncation_loss if loss is None else loss,
        )

    def zero_like(self):
        return FourierTaylorSeries.zeros(self.freq, self.order_max, self.cutoff)

    # -- bookkeeping ---------------------------------------------------

    @property
    def is_zero(self):
        return not np.any(self._c)

    @property
    def order_min(self):
        """Smallest radial order carrying a nonzero coefficient (0 if empty)."""
        if "order_min" not in self._cache:
            nz = np.nonzero(np.any(self._c.reshape(self.order_max + 1, -1), axis=1))[0]
            self._cache["order_min"] = int(nz[0]) if nz.size else 0
        return self._cache["order_min"]

    def _mode_index(self, j):
        j = (j,) if np.isscalar(j) else tuple(int(x) for x in j)
        if len(j) != self.m:
            raise InvalidEntry(f"mode {j} has wrong dimension, expected {self.m}")
        if any(abs(x) > self.cutoff for x in j):
            raise InvalidEntry(f"mode {j} exceeds cutoff {self.cutoff}")
        return tuple(x + self.cutoff for x in j)

    def coefficient(self, k, j):
        if not (0 <= k <= self.order_max):
            raise InvalidEntry(f"order {k} outside [0, {self.order_max}]")
        return complex(self._c[(k,) + self._mode_index(j)])

    def items(self):
        """Yield ((k, j), chi) over nonzero coefficients in sorted key order."""
        K = self.cutoff
        for idx in zip(*np.nonzero(self._c)):
            k, jidx = int(idx[0]), tuple(int(x) - K for x in idx[1:])
            yield (k, jidx), complex(self._c[idx])

    def _mode_dot_freq(self):
        """Grid of <j, omega> over the mode box."""
        if "jw" not in self._cache:
            ax = np.arange(-self.cutoff, self.cutoff + 1, dtype=float)
            jw = np.zeros((2 * self.cutoff + 1,) * self.m)
            for i, w in enumerate(self.freq):
                shape = [1] * self.m
                shape[i] = ax.size
                jw = jw + w * ax.reshape(shape)
            self._cache["jw"] = jw
        return self._cache["jw"]

    def _mode_l1(self):
        if "jl1" not in self._cache:
            ax = np.abs(np.arange(-self.cutoff, self.cutoff + 1, dtype=float))
            jl1 = np.zeros((2 * self.cutoff + 1,) * self.m)
            for i in range(self.m):
                shape = [1] * self.m
                shape[i] = ax.size
                jl1 = jl1 + ax.reshape(shape)
            self._cache["jl1"] = jl1
        return self._cache["jl1"]

    # -- evaluation ----------------------------------------------------

    def _flat_terms(self):
        if "flat" not in self._cache:
            idx = np.nonzero(self._c)
            kk = idx[0].astype(float)
            jw = self._mode_dot_freq()[idx[1:]] if self.m else None
            chi = self._c[idx]
            self._cache["flat"] = (kk, jw, chi)
        return self._cache["flat"]

    def evaluate(self, theta, r):
        """Evaluate at real (theta, r); reality makes the result real."""
        kk, jw, chi = self._flat_terms()
        theta = np.asarray(theta, dtype=float)
        r = np.asarray(r, dtype=float)
        if kk.size == 0:
            return np.zeros(np.broadcast(theta, r).shape) if theta.shape or r.shape else 0.0
        phases = np.exp(1j * theta[..., None] * jw)
        radial = r[..., None] ** kk
        out = np.real(np.sum(chi * phases * radial, axis=-1))
        return float(out) if out.ndim == 0 else out

    def __call__(self, theta, r):
        return self.evaluate(theta, r)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        _require_compatible(self, other)
        return self._like(self._c + other._c,
                          loss=self.truncation_loss + other.truncation_loss)

    def __sub__(self, other):
        _require_compatible(self, other)
        return self._like(self._c - other._c,
                          loss=self.truncation_loss + other.truncation_loss)

    def __neg__(self):
        return self._like(-self._c)

    def scale(self, c):
        """Multiply by a real scalar (reality-preserving)."""
        return self._like(float(c) * self._c)

    def __mul__(self, other):
        if isinstance(other, FourierTaylorSeries):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __repr__(self):
        nnz = int(np.count_nonzero(self._c))
        return (f"FourierTaylorSeries(m={self.m}, order_max={self.order_max}, "
                f"cutoff={self.cutoff}, nnz={nnz}, order_min={self.order_min})")

    # -- serialization ---------------------------------------------------

    def to_json_obj(self):
        coeffs = [
            {"k": k, "j": list(j), "re": float(v.real), "im": float(v.imag)}
            for (k, j), v in self.items()
        ]
        return {
            "freq": list(self.freq),
            "order_max": self.order_max,
            "cutoff": self.cutoff,
            "coeffs": coeffs,
        }

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj):
        entries = {
            (c["k"], tuple(c["j"])): complex(c["re"], c["im"]) for c in obj["coeffs"]
        }
        return make_series(obj["freq"], entries, obj["order_max"], obj["cutoff"])

    @classmethod
    def from_json(cls, text):
        return cls.from_json_obj(json.loads(text))


def _require_compatible(a, b):
    if (a.freq != b.freq or a.order_max != b.order_max or a.cutoff != b.cutoff):
        raise FrequencyMismatch(
            f"incompatible series: freq {a.freq} vs {b.freq}, "
            f"orders {a.order_max} vs {b.order_max}, cutoffs {a.cutoff} vs {b.cutoff}"
        )


def make_series(freq, entries, order_max, fourier_cutoff):
    """Build a series from a {(k, j): chi} table, enforcing reality.

    ``j`` may be a bare int when the frequency vector has length 1.
    Raises InvalidEntry when a key violates the cutoffs and
    InvalidFrequency for an empty or degenerate frequency vector.
    """
    freq = tuple(float(w) for w in freq)
    if len(freq) == 0 or any(w == 0.0 for w in freq):
        raise InvalidFrequency(f"frequency vector must be nonempty and nonzero: {freq}")
    m = len(freq)
    K = int(fourier_cutoff)
    if K < 1:
        raise InvalidEntry(f"fourier_cutoff must be >= 1, got {fourier_cutoff}")
    N = int(order_max)
    if N < 0:
        raise InvalidEntry(f"order_max must be >= 0, got {order_max}")
    arr = np.zeros((N + 1,) + (2 * K + 1,) * m, dtype=complex)
    for (k, j), v in entries.items():
        j = (j,) if np.isscalar(j) else tuple(int(x) for x in j)
        if len(j) != m:
            raise InvalidEntry(f"mode {j} has wrong dimension, expected {m}")
        if not (0 <= k <= N):
            raise InvalidEntry(f"order {k} outside [0, {N}]")
        if any(abs(x) > K for x in j):
            raise InvalidEntry(f"mode {j} exceeds cutoff {K}")
        arr[(int(k),) + tuple(x + K for x in j)] += complex(v)
    return FourierTaylorSeries(freq, arr, N, K)


# -- products ----------------------------------------------------------


def _conv_modes(a, b, m):
    """Full convolution of two mode arrays (direct method, exact zeros)."""
    if m == 1:
        return np.convolve(a, b)
    from scipy.signal import convolve

    return convolve(a, b, mode="full", method="direct")


def multiply(a, b):
    """Cauchy product truncated to (order_max, cutoff), with loss tracking."""
    _require_compatible(a, b)
    N, K, m = a.order_max, a.cutoff, a.m
    out = np.zeros_like(a._c)
    loss = a.truncation_loss + b.truncation_loss
    flat_a = a._c.reshape(N + 1, -1)
    flat_b = b._c.reshape(N + 1, -1)
    l1a = np.abs(flat_a).sum(axis=1)
    l1b = np.abs(flat_b).sum(axis=1)
    rows_a = np.nonzero(l1a)[0]
    rows_b = np.nonzero(l1b)[0]
    keep = tuple([slice(None)] + [slice(K, 3 * K + 1)] * m)
    for k1 in rows_a:
        for k2 in rows_b:
            if k1 + k2 > N:
                loss += l1a[k1] * l1b[k2]
                continue
            full = _conv_modes(a._c[k1], b._c[k2], m)
            kept = full[keep[1:]]
            out[k1 + k2] += kept
            loss += np.abs(full).sum() - np.abs(kept).sum()
    return FourierTaylorSeries(a.freq, out, N, K, loss)


# -- angle and radial operators ----------------------------------------


def shift_angle(phi, c):
    """Angle translation: chi_{kj} <- chi_{kj} exp(i <j, omega> c)."""
    mult = np.exp(1j * phi._mode_dot_freq() * float(c))
    return phi._like(phi._c * mult)


def reflect_angle(phi):
    """Angle reflection theta -> -theta: chi_{kj} <- chi_{k,-j}."""
    return phi._like(np.flip(phi._c, axis=tuple(range(1, phi.m + 1))))


def project_mean(phi):
    """Keep only the j = 0 (theta-average) coefficients."""
    out = np.zeros_like(phi._c)
    center = (slice(None),) + (phi.cutoff,) * phi.m
    out[center] = phi._c[center]
    return phi._like(out)


def project_zero_mean(phi):
    """Keep only the j != 0 coefficients (vanishing theta-average part)."""
    out = np.array(phi._c)
    center = (slice(None),) + (phi.cutoff,) * phi.m
    out[center] = 0.0
    return phi._like(out)


def dtheta(phi):
    """Derivative in theta: chi_{kj} <- i <j, omega> chi_{kj}."""
    return phi._like(phi._c * (1j * phi._mode_dot_freq()))


def dr(phi):
    """Derivative in r: order k row moves to k-1 scaled by k."""
    out = np.zeros_like(phi._c)
    if phi.order_max >= 1:
        ks = np.arange(1, phi.order_max + 1, dtype=float)
        out[:-1] = phi._c[1:] * ks.reshape((-1,) + (1,) * phi.m)
    return phi._like(out)


def restrict_orders(phi, lo, hi):
    """Zero all radial orders outside [lo, hi]."""
    out = np.zeros_like(phi._c)
    lo = max(int(lo), 0)
    hi = min(int(hi), phi.order_max)
    if lo <= hi:
        out[lo:hi + 1] = phi._c[lo:hi + 1]
    return phi._like(out)


def max_abs_coefficient(phi, lo=None, hi=None):
    """Largest |chi| over radial orders in [lo, hi] (defaults: all)."""
    lo = 0 if lo is None else max(int(lo), 0)
    hi = phi.order_max if hi is None else min(int(hi), phi.order_max)
    if lo > hi:
        return 0.0
    return float(np.abs(phi._c[lo:hi + 1]).max(initial=0.0))


# -- norms --------------------------------------------------------------


def strip_norm(phi, dom):
    """Weighted l1 majorant sum |chi| exp(||j||_1 ||omega||_inf t) rho^k.

    An upper bound for the supremum of |phi| on the strip; computable,
    monotone in both domain parameters, and submultiplicative.
    """
    wmax = max(abs(w) for w in phi.freq)
    mode_w = np.exp(phi._mode_l1() * (wmax * dom.t))
    radial_w = dom.rho ** np.arange(phi.order_max + 1, dtype=float)
    weights = radial_w.reshape((-1,) + (1,) * phi.m) * mode_w
    return float(np.sum(np.abs(phi._c) * weights))


def l1_norm(phi):
    """Plain coefficient l1 norm (no domain weights)."""
    return float(np.abs(phi._c).sum())


# -- composition ---------------------------------------------------------


def _check_near_identity(s, name):
    if np.any(s._c[0]):
        raise NotNearIdentity(f"{name} has nonzero order-0 part (order_min must be >= 1)")


def compose_map(phi, u, v):
    """Truncated expansion of phi(theta + u(theta, r), r + v(theta, r)).

    Computed as the double Taylor sum over mixed partials of phi times
    powers of u and v; every retained power of u or v raises the radial
    order by at least 1, so the sum terminates within order_max passes.
    """
    _require_compatible(phi, u)
    _require_compatible(phi, v)
    _check_near_identity(u, "u")
    _check_near_identity(v, "v")
    N = phi.order_max
    result = phi.zero_like()
    Da = phi          # holds d_theta^a phi / a!
    Ua = None         # holds u^a
    for a in range(N + 1):
        if a > 0:
            Ua = u if a == 1 else multiply(Ua, u)
            if Ua.is_zero:
                break
            Da = dtheta(Da).scale(1.0 / a)
            if Da.is_zero:
                break
        inner = Da
        Dab = Da      # holds d_r^b Da / b!
        Vb = None
        for b in range(1, N + 1):
            Vb = v if b == 1 else multiply(Vb, v)
            if Vb.is_zero:
                break
            Dab = dr(Dab).scale(1.0 / b)
            if Dab.is_zero:
                break
            inner = inner + multiply(Dab, Vb)
        result = result + (inner if a == 0 else multiply(inner, Ua))
    return result
