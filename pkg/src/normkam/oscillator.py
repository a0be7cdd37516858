"""Resonant-oscillator application: x'' + phi(x) f(x') + omega^2 x + g(x) = p(t).

The first-order form used throughout is the reversible planar system

    x' = -omega y,
    y' = omega x + (phi(x) f(omega y) + g(x) - p(t)) / omega,

whose polar angle theta = atan2(y, x) advances monotonically for large
amplitudes, so the Poincare return (angle + 2 pi) is well defined in the
validity regime.  Averaging transforms built from the period means J1,
J2 and the spectral solve for the forcing correction reduce the return
map to varsigma_1 = varsigma_0 + gamma0 + gamma1 / lambda + o(1/lambda),
with the closed-form twist coefficient computed from the declared limits
of phi, f, g at infinity.

Orbit computations are independent per initial condition; sweeps are
plain maps over value-type tasks and merge reports in input order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import (
    AngleMonotonicityLost,
    FitIllConditioned,
    SmallDivisor,
    StepUnderflow,
)
from .expressions import Expression

_LIMIT_SAMPLE_X = 1.0e6
_LIMIT_TOL = 1.0e-4


def _trig_poly(coeffs, t):
    """sum_k coeffs[k] cos(k t), broadcasting over any shape of t."""
    t = np.asarray(t, dtype=float)
    ks = np.arange(len(coeffs))
    return np.tensordot(np.asarray(coeffs), np.cos(np.multiply.outer(ks, t)), axes=(0, 0))


@dataclass(frozen=True)
class OscillatorProblem:
    """Problem data: frequency, nonlinearities with declared limits, forcing.

    ``phi``, ``f``, ``g`` are expressions of one variable or None for
    identically zero; ``p_cos[k]`` is the coefficient of cos(k t), which
    keeps the forcing an even trigonometric polynomial by construction.
    """

    omega: float
    phi: Expression | None = None
    f: Expression | None = None
    g: Expression | None = None
    p_cos: tuple = ()
    phi_limits: tuple = (0.0, 0.0)   # (phi(-inf), phi(+inf))
    f_limit: float = 0.0             # f even: both one-sided limits coincide
    g_limits: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        object.__setattr__(self, "p_cos", tuple(float(a) for a in self.p_cos))
        object.__setattr__(self, "phi_limits", tuple(float(a) for a in self.phi_limits))
        object.__setattr__(self, "g_limits", tuple(float(a) for a in self.g_limits))

    # -- validation ------------------------------------------------------

    def validate(self):
        """Check evenness of f and the declared limits against samples."""
        if self.f is not None and not self.f.is_even():
            raise ValueError(f"f = {self.f.source!r} is not even")
        for name, expr, limits in (
            ("phi", self.phi, self.phi_limits),
            ("f", self.f, (self.f_limit, self.f_limit)),
            ("g", self.g, self.g_limits),
        ):
            lo, hi = limits
            if expr is None:
                if lo != 0.0 or hi != 0.0:
                    raise ValueError(f"{name} is zero but declares limits {limits}")
                continue
            got_minus = float(expr(-_LIMIT_SAMPLE_X))
            got_plus = float(expr(_LIMIT_SAMPLE_X))
            if abs(got_minus - lo) > _LIMIT_TOL or abs(got_plus - hi) > _LIMIT_TOL:
                raise ValueError(
                    f"declared limits of {name} {limits} disagree with samples "
                    f"({got_minus:.6g}, {got_plus:.6g}) at |x| = {_LIMIT_SAMPLE_X:g}"
                )
        return self

    @classmethod
    def from_dict(cls, d, validate=True):
        def expr(key):
            src = d.get(key)
            return None if src in (None, "", "0") else Expression(str(src))

        prob = cls(
            omega=float(d["omega"]),
            phi=expr("phi"),
            f=expr("f"),
            g=expr("g"),
            p_cos=tuple(d.get("p_cos", ())),
            phi_limits=tuple(d.get("phi_limits", (0.0, 0.0))),
            f_limit=float(d.get("f_limit", 0.0)),
            g_limits=tuple(d.get("g_limits", (0.0, 0.0))),
        )
        return prob.validate() if validate else prob

    # -- pointwise pieces --------------------------------------------------

    def p_eval(self, t):
        if not self.p_cos:
            return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
        return _trig_poly(self.p_cos, t)

    def nonlinearity(self, x, y):
        """phi(x) f(omega y) + g(x), the amplitude-bounded part of y'."""
        out = 0.0
        if self.phi is not None and self.f is not None:
            out = self.phi(x) * self.f(self.omega * y)
        if self.g is not None:
            out = out + self.g(x)
        return out


@dataclass(frozen=True)
class PolarState:
    r: float
    theta: float
    t: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError(f"polar radius must be positive, got {self.r}")

    def xy(self):
        return self.r * math.cos(self.theta), self.r * math.sin(self.theta)


def vector_field(problem, x, y, t):
    """Right-hand side (x', y') of the planar first-order system."""
    w = problem.omega
    xdot = -w * y
    ydot = w * x + (problem.nonlinearity(x, y) - problem.p_eval(t)) / w
    return xdot, ydot


def _rhs_xy(problem):
    def rhs(t, z):
        xd, yd = vector_field(problem, z[0], z[1], t)
        return (xd, yd)

    return rhs


def integrate_orbit(problem, initial, t_span, tol=1e-12, t_eval=None,
                    dense_output=False):
    """High-order explicit integration with optional dense output.

    ``initial`` is (x0, y0) at t_span[0]; local error per unit time is
    controlled by ``tol`` (both relative and absolute).  Raises
    StepUnderflow when the step size collapses.
    """
    sol = integrate.solve_ivp(
        _rhs_xy(problem), t_span, list(initial), method="DOP853",
        rtol=tol, atol=tol, t_eval=t_eval, dense_output=dense_output,
    )
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    return sol


def _rhs_polar_augmented(problem):
    base = _rhs_xy(problem)

    def rhs(t, z):
        xd, yd = base(t, z[:2])
        r2 = z[0] * z[0] + z[1] * z[1]
        return (xd, yd, (z[0] * yd - z[1] * xd) / r2)

    return rhs


def poincare_map(problem, state, tol=1e-12):
    """Advance the orbit until the polar angle has gained exactly 2 pi.

    Returns the section state (r, theta mod 2 pi preserved, t unwrapped).
    Raises AngleMonotonicityLost when the angular speed stops being
    positive along the orbit (radius below the validity regime).
    """
    x0, y0 = state.xy()
    theta_target = state.theta + 2.0 * math.pi
    rhs = _rhs_polar_augmented(problem)

    def section(t, z):
        return z[2] - theta_target

    section.terminal = True
    section.direction = 1.0
    horizon = state.t + 8.0 * math.pi / problem.omega
    sol = integrate.solve_ivp(
        rhs, (state.t, horizon), (x0, y0, state.theta), method="DOP853",
        rtol=tol, atol=tol, events=section,
    )
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    # angular speed at the solver nodes; any nonpositive value voids the section
    xs, ys = sol.y[0], sol.y[1]
    derivs = np.array([rhs(t, sol.y[:, i]) for i, t in enumerate(sol.t)])
    theta_dot = derivs[:, 2]
    if np.any(theta_dot <= 0.0):
        raise AngleMonotonicityLost(
            f"theta' dipped to {theta_dot.min():.3e}; r too small for the section"
        )
    if sol.status != 1 or not len(sol.t_events[0]):
        raise AngleMonotonicityLost("orbit failed to complete a full angular turn")
    t1 = float(sol.t_events[0][0])
    xe, ye, _ = sol.y_events[0][0]
    return PolarState(r=math.hypot(xe, ye), theta=state.theta, t=t1)


def rotation_number(problem, state, n_iterates, tol=1e-10):
    """Weighted Birkhoff average of the per-return time advances over 2 pi.

    Uses the smooth bump weights w(s) = exp(-1/(s(1-s))), which give
    super-polynomial convergence on quasi-periodic orbits.
    """
    advances = np.empty(n_iterates)
    cur = state
    for i in range(n_iterates):
        nxt = poincare_map(problem, cur, tol=tol)
        advances[i] = nxt.t - cur.t
        cur = nxt
    s = (np.arange(n_iterates) + 1.0) / (n_iterates + 1.0)
    w = np.exp(-1.0 / (s * (1.0 - s)))
    return float((w @ advances) / w.sum() / (2.0 * math.pi))


@dataclass(frozen=True)
class BoundednessReport:
    sup_norm: float
    escaped: bool
    t_escape: float | None
    t_final: float
    initial_norm: float


def boundedness_probe(problem, initial, t_max, bound, tol=1e-9,
                      samples_per_period=8, chunk_periods=2000):
    """Track sup(|x| + |x'|) up to t_max, reporting escape past ``bound``.

    Integration proceeds in chunks with dense sampling; the metric uses
    |x'| = omega |y|.  Escape stops the run early with the crossing chunk
    recorded.
    """
    w = problem.omega
    period = 2.0 * math.pi / w
    x0, y0 = initial
    initial_norm = abs(x0) + w * abs(y0)
    sup = initial_norm
    t0 = 0.0
    state = [x0, y0]
    chunk = chunk_periods * period
    while t0 < t_max:
        t1 = min(t0 + chunk, t_max)
        n = max(int((t1 - t0) / period * samples_per_period), 2)
        t_eval = np.linspace(t0, t1, n)
        sol = integrate_orbit(problem, state, (t0, t1), tol=tol, t_eval=t_eval)
        metric = np.abs(sol.y[0]) + w * np.abs(sol.y[1])
        sup = max(sup, float(metric.max()))
        if sup > bound:
            idx = int(np.argmax(metric > bound))
            return BoundednessReport(sup, True, float(sol.t[idx]), float(sol.t[idx]),
                                     initial_norm)
        state = [sol.y[0][-1], sol.y[1][-1]]
        t0 = t1
    return BoundednessReport(sup, False, None, float(t_max), initial_norm)


def _stacked_rhs_numpy(problem, n):
    w = problem.omega

    def rhs(t, z):
        x, y = z[:n], z[n:]
        return np.concatenate((-w * y,
                               w * x + (problem.nonlinearity(x, y) - problem.p_eval(t)) / w))

    return rhs


def _sweep_samples_scipy(problem, amps, t_max, tol, t_eval):
    n = len(amps)
    z0 = np.concatenate((np.array(amps), np.zeros(n)))
    sol = integrate.solve_ivp(_stacked_rhs_numpy(problem, n), (0.0, float(t_max)),
                              z0, method="DOP853", rtol=tol, atol=tol, t_eval=t_eval)
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    return sol.y.T


def _sweep_samples_jax(problem, amps, t_max, tol, t_eval):
    import jax

    jax.config.update("jax_enable_x64", True)
    import jax.numpy as jnp
    from jax.experimental.ode import odeint as jax_odeint

    jfuncs = {"arctan": jnp.arctan, "atan": jnp.arctan, "tanh": jnp.tanh,
              "exp": jnp.exp, "sqrt": jnp.sqrt, "abs": jnp.abs,
              "sin": jnp.sin, "cos": jnp.cos}
    n = len(amps)
    w = problem.omega
    phi = problem.phi.as_callable(jfuncs) if problem.phi is not None else None
    f = problem.f.as_callable(jfuncs) if problem.f is not None else None
    g = problem.g.as_callable(jfuncs) if problem.g is not None else None
    p_cos = jnp.asarray(problem.p_cos) if problem.p_cos else None
    p_ks = jnp.arange(len(problem.p_cos)) if problem.p_cos else None

    def rhs(z, t):
        x, y = z[:n], z[n:]
        nl = 0.0
        if phi is not None and f is not None:
            nl = phi(x) * f(w * y)
        if g is not None:
            nl = nl + g(x)
        p = jnp.sum(p_cos * jnp.cos(p_ks * t)) if p_cos is not None else 0.0
        return jnp.concatenate((-w * y, w * x + (nl - p) / w))

    z0 = jnp.concatenate((jnp.asarray(amps), jnp.zeros(n)))
    out = jax_odeint(rhs, z0, jnp.asarray(t_eval), rtol=tol, atol=tol)
    return np.asarray(out)


def boundedness_sweep(problem, amplitudes, t_max, bound_factor=2.0, tol=1e-9,
                      samples_per_period=16, engine="auto"):
    """Probe several initial amplitudes (x0 = A, y0 = 0) in one stacked run.

    The orbits are independent copies sharing the time axis, so stacking
    them into one system keeps a single solver loop.  ``engine`` selects
    the integrator backend: "jax" runs the whole loop jit-compiled (the
    arctan-type nonlinearities force small steps near the zero crossings,
    which makes interpreted stepping the bottleneck on long horizons),
    "scipy" uses DOP853, and "auto" prefers jax when importable.  Both
    backends agree on this problem class to ~1e-3 in the sup metric.
    Reports come back in input order.
    """
    w = problem.omega
    amps = [float(a) for a in amplitudes]
    n = len(amps)
    period = 2.0 * math.pi / w
    n_eval = max(int(float(t_max) / period * samples_per_period), 2)
    t_eval = np.linspace(0.0, float(t_max), n_eval)
    if engine == "auto":
        try:
            import jax  # noqa: F401

            engine = "jax"
        except ImportError:
            engine = "scipy"
    if engine == "jax":
        samples = _sweep_samples_jax(problem, amps, t_max, tol, t_eval)
    elif engine == "scipy":
        samples = _sweep_samples_scipy(problem, amps, t_max, tol, t_eval)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    reports = []
    for i, a in enumerate(amps):
        metric = np.abs(samples[:, i]) + w * np.abs(samples[:, n + i])
        sup = max(float(metric.max()), a)
        bound = bound_factor * a
        escaped = sup > bound
        t_escape = float(t_eval[int(np.argmax(metric > bound))]) if escaped else None
        reports.append(BoundednessReport(sup, escaped, t_escape, float(t_max), a))
    return reports


# -- averaging machinery ---------------------------------------------------


def compute_J(problem, lam, quad_tol=1e-11):
    """Period means J1, J2 of the angular drift integrands at radius lam."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    w = problem.omega
    two_pi = 2.0 * math.pi
    crossings = [math.pi / 2.0, 3.0 * math.pi / 2.0]

    def quad(fn):
        # at large lam the integrand has O(1/lam)-wide transitions near the
        # cosine zeros; quad flags roundoff there while still landing far
        # below the requested tolerance (checked against limit oracles)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(fn, 0.0, two_pi, points=crossings,
                                    epsabs=quad_tol, epsrel=quad_tol, limit=400)
        return val

    if problem.phi is not None and problem.f is not None:
        j1 = quad(lambda ph: problem.phi(lam * math.cos(ph))
                  * problem.f(w * lam * math.sin(ph)) * math.cos(ph)) / (two_pi * lam)
    else:
        j1 = 0.0
    if problem.g is not None:
        j2 = quad(lambda ph: problem.g(lam * math.cos(ph)) * math.cos(ph)) / (two_pi * lam)
    else:
        j2 = 0.0
    return j1, j2


@dataclass(frozen=True)
class AveragingTransforms:
    """Sampled/spectral data for the three averaging transforms at fixed lambda.

    S1 and S2 are cumulative quadratures on a theta grid (2 pi periodic,
    vanishing at the section theta = 0 mod 2 pi); S3 is the spectral
    solution of the forcing-correction equation with modes (k, l),
    k = +-1, l over the forcing spectrum.
    """

    lam: float
    omega: float
    p_cos: tuple
    theta_grid: np.ndarray
    s1_values: np.ndarray
    s2_values: np.ndarray
    s3_modes: tuple          # ((k, l, complex coefficient), ...)
    j1: float
    j2: float

    def S1(self, theta):
        return np.interp(np.mod(theta, 2.0 * math.pi), self.theta_grid, self.s1_values)

    def S2(self, theta):
        return np.interp(np.mod(theta, 2.0 * math.pi), self.theta_grid, self.s2_values)

    def S3(self, theta, tau):
        out = 0.0
        for k, l, c in self.s3_modes:
            out = out + np.real(c * np.exp(1j * (k * np.asarray(theta)
                                                 + l * np.asarray(tau))))
        return out

    def S3_pde_residual(self, theta, tau):
        """omega^-3 p(tau) cos(theta) + dS3/dtheta + omega^-1 dS3/dtau."""
        w = self.omega
        theta = np.asarray(theta, dtype=float)
        tau = np.asarray(tau, dtype=float)
        p = _trig_poly(self.p_cos, tau) if self.p_cos else 0.0
        acc = p * np.cos(theta) / w ** 3
        for k, l, c in self.s3_modes:
            phase = np.exp(1j * (k * theta + l * tau))
            acc = acc + np.real(c * 1j * (k + l / w) * phase)
        return acc


def averaging_transforms(problem, lam, n_theta=4096, min_divisor=1e-9):
    """Build (S1, S2, S3) at radius lam; see AveragingTransforms."""
    w = problem.omega
    theta = np.linspace(0.0, 2.0 * math.pi, int(n_theta) + 1)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    nonlin = problem.nonlinearity(lam * cos_t, lam * sin_t)
    integrand1 = -(nonlin * sin_t) / w ** 2
    s1 = integrate.cumulative_simpson(integrand1, x=theta, initial=0.0)
    j1, j2 = compute_J(problem, lam)
    if problem.phi is not None and problem.f is not None:
        term1 = problem.phi(lam * cos_t) * problem.f(w * lam * sin_t) * cos_t - lam * j1
    else:
        term1 = np.zeros_like(theta) - lam * j1
    if problem.g is not None:
        term2 = problem.g(lam * cos_t) * cos_t - lam * j2
    else:
        term2 = np.zeros_like(theta) - lam * j2
    s2 = integrate.cumulative_simpson((term1 + term2) / (w ** 3 * lam), x=theta,
                                      initial=0.0)
    modes = []
    for l, a_l in enumerate(problem.p_cos):
        if a_l == 0.0:
            continue
        p_hat = {0: a_l}.get(l, a_l / 2.0)
        for k in (1, -1):
            ls = (l,) if l == 0 else (l, -l)
            for ll in ls:
                div = k + ll / w
                if abs(div) < min_divisor:
                    raise SmallDivisor((k, ll), abs(div), min_divisor)
                modes.append((k, ll, -p_hat * 0.5 / (w ** 3 * 1j * div)))
    return AveragingTransforms(lam, w, problem.p_cos, theta, s1, s2, tuple(modes),
                               j1, j2)


def analytic_twist(problem):
    """Closed-form (gamma0, gamma1) from the declared limits at infinity."""
    w = problem.omega
    gamma0 = 2.0 * math.pi / w
    dphi = problem.phi_limits[1] - problem.phi_limits[0]
    dg = problem.g_limits[1] - problem.g_limits[0]
    gamma1 = -2.0 / w ** 3 * (dphi * problem.f_limit + dg)
    return gamma0, gamma1


@dataclass(frozen=True)
class TwistFitReport:
    gamma0_hat: float
    gamma1_hat: float
    residual_rms: float
    max_residual: float
    gamma0_analytic: float
    gamma1_analytic: float
    rows: tuple             # (lambda, phase, t_advance, r_return, t_return, varsigma_advance)
    lambdas: tuple
    mean_advances: tuple


def fit_twist(problem, lambda_range, samples, phases=8, tol=1e-11,
              use_transforms=True):
    """Regress the transformed return advance against 1/lambda.

    For each lambda (uniform in 1/lambda) and each section phase t0, run
    one Poincare return, convert (t0, t1) to the varsigma variable via
    the S3 correction (S1 and S2 vanish identically at the section),
    average over phases, and fit advance = gamma0 + gamma1 / lambda.
    With use_transforms=False the raw t-advance is fitted instead (cross
    check mode).
    """
    lo, hi = float(lambda_range[0]), float(lambda_range[1])
    if not (0.0 < lo < hi):
        raise FitIllConditioned(f"bad lambda range ({lo}, {hi})")
    if samples < 2:
        raise FitIllConditioned("need at least two lambda samples")
    if (hi - lo) / hi < 1e-3:
        raise FitIllConditioned("lambda range too narrow to resolve the slope")
    inv = np.linspace(1.0 / hi, 1.0 / lo, int(samples))
    lambdas = 1.0 / inv
    phase_grid = np.linspace(0.0, 2.0 * math.pi, int(phases), endpoint=False)
    rows = []
    means = []
    for lam in lambdas:
        tr = averaging_transforms(problem, lam) if use_transforms else None
        advances = []
        for t0 in phase_grid:
            state = PolarState(r=lam, theta=0.0, t=float(t0))
            out = poincare_map(problem, state, tol=tol)
            dt = out.t - state.t
            if use_transforms:
                lam0 = lam + float(tr.S1(0.0))
                lam1 = out.r + float(tr.S1(2.0 * math.pi))
                vs0 = state.t + float(tr.S3(0.0, state.t)) / lam0
                vs1 = out.t + float(tr.S3(2.0 * math.pi, out.t)) / lam1
                adv = vs1 - vs0
            else:
                adv = dt
            advances.append(adv)
            rows.append((float(lam), float(t0), float(dt), float(out.r),
                         float(np.mod(out.t, 2.0 * math.pi)), float(adv)))
        means.append(float(np.mean(advances)))
    means = np.array(means)
    design = np.column_stack((np.ones_like(inv), inv))
    coef, *_ = np.linalg.lstsq(design, means, rcond=None)
    fitted = design @ coef
    resid = means - fitted
    g0, g1 = analytic_twist(problem)
    return TwistFitReport(
        gamma0_hat=float(coef[0]),
        gamma1_hat=float(coef[1]),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        max_residual=float(np.max(np.abs(resid))),
        gamma0_analytic=g0,
        gamma1_analytic=g1,
        rows=tuple(rows),
        lambdas=tuple(float(x) for x in lambdas),
        mean_advances=tuple(float(x) for x in means),
    )
