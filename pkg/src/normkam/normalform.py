"""Normal-form machinery for reversible quasi-periodic cylinder maps.

A map here is M(theta, r) = (theta + gamma0 + f(theta, r), r + g(theta,
r)) with f, g Fourier-Taylor series vanishing at r = 0, assumed
reversible with respect to the involution G(theta, r) = (-theta, r),
i.e. M o G o M = G.

Three layers:

* ``birkhoff_reduce`` peels the map order by order, extracting the twist
  coefficients gamma_k (means of the normalized angular coefficient
  functions) through shift-difference equations, with every generator
  G-symmetrized so reversibility survives each stage.  The order-1
  radial stage is multiplicative and solved in log space on a sampling
  grid.

* ``kam_step`` performs one quadratic step: symmetrize the residual,
  truncate to orders [s, 2s-2], solve the modified difference equations
  for an odd u and even v, and re-substitute the implicit conjugacy
  until the new residual starts at order 2s-1.  A nonzero mean part in
  the truncated window contradicts formal linearizability and surfaces
  as ObstructionDetected (a result, not a failure).

* ``kam_iterate`` drives steps with s -> 2s-1, composes the transforms,
  and logs the measured decay against the d^{4/3} reference schedule.

The analytic smallness constants of the convergence proof are never
instantiated; every estimate is replaced by a measured norm plus a user
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .diophantine import DiophantineParams
from .errors import (
    NonPositiveMultiplier,
    NormkamError,
    ObstructionDetected,
    OrderDoublingFailure,
)
from .homological import even_part, odd_part, solve_difference, symmetrize_parity
from .series import (
    FourierTaylorSeries,
    StripDomain,
    compose_map,
    dr,
    dtheta,
    l1_norm,
    max_abs_coefficient,
    multiply,
    project_mean,
    project_zero_mean,
    reflect_angle,
    restrict_orders,
    shift_angle,
    strip_norm,
)

DEFAULT_DOMAIN = StripDomain(t=0.05, rho=0.3)


# -- domain types --------------------------------------------------------


@dataclass(frozen=True)
class ReversibleCylinderMap:
    """Rotation number gamma0 plus the two residual series (f, g)."""

    gamma0: float
    f: FourierTaylorSeries
    g: FourierTaylorSeries

    def __post_init__(self):
        if np.any(self.f.coefficients[0]) or np.any(self.g.coefficients[0]):
            raise NormkamError("map residuals must vanish at r = 0 (order_min >= 1)")

    @property
    def residual_order(self):
        """Lowest order present in (f, g); the other component's missing
        orders count as zero.  None when the map is the rigid rotation."""
        orders = [s.order_min for s in (self.f, self.g) if not s.is_zero]
        return min(orders) if orders else None

    def apply_point(self, theta, r):
        return (theta + self.gamma0 + self.f.evaluate(theta, r),
                r + self.g.evaluate(theta, r))


@dataclass(frozen=True)
class NearIdentityTransform:
    """(theta, r) = (xi + u(xi, eta), eta + v(xi, eta)); commutes with G
    when u is odd and v is even in the angle."""

    u: FourierTaylorSeries
    v: FourierTaylorSeries

    @classmethod
    def identity_like(cls, template):
        z = template.zero_like()
        return cls(z, z)

    @property
    def is_identity(self):
        return self.u.is_zero and self.v.is_zero

    def symmetry_residuals(self):
        """(||reflect(u) + u||, ||reflect(v) - v||); both zero iff GT = TG."""
        return (l1_norm(reflect_angle(self.u) + self.u),
                l1_norm(reflect_angle(self.v) - self.v))

    def apply_point(self, xi, eta):
        return (xi + self.u.evaluate(xi, eta), eta + self.v.evaluate(xi, eta))

    def invert_point(self, theta, r, tol=1e-13, max_iter=60):
        """Numerically invert at a single point by 2D Newton."""
        du_x, du_y = dtheta(self.u), dr(self.u)
        dv_x, dv_y = dtheta(self.v), dr(self.v)
        x, y = float(theta), float(r)
        for _ in range(max_iter):
            f1 = x + self.u.evaluate(x, y) - theta
            f2 = y + self.v.evaluate(x, y) - r
            if abs(f1) + abs(f2) < tol:
                break
            a = 1.0 + du_x.evaluate(x, y)
            b = du_y.evaluate(x, y)
            c = dv_x.evaluate(x, y)
            d = 1.0 + dv_y.evaluate(x, y)
            det = a * d - b * c
            x -= (d * f1 - b * f2) / det
            y -= (a * f2 - c * f1) / det
        return x, y


@dataclass(frozen=True)
class KamSchedule:
    """Geometric domain/size sequences of the iteration.

    t_n = (t0/2)(1 + (2/3)^n), rho_n likewise, d_{n+1} = (3/2)^n
    d_n^{4/3}, s_n = 2^(alpha+n) + 1.  The shrink schedule is recorded
    for diagnostics; truncation order, not analyticity loss, is the
    binding constraint at finite precision.
    """

    alpha: int
    t0: float
    rho0: float
    d0: float
    n_max: int

    def __post_init__(self):
        if not (0.0 < self.t0 < 1.0 and 0.0 < self.rho0 < 1.0 and 0.0 < self.d0 < 1.0):
            raise ValueError("t0, rho0, d0 must lie in (0, 1)")
        if self.alpha < 0 or self.n_max < 1:
            raise ValueError("alpha must be >= 0 and n_max >= 1")

    def t(self, n):
        return 0.5 * self.t0 * (1.0 + (2.0 / 3.0) ** n)

    def rho(self, n):
        return 0.5 * self.rho0 * (1.0 + (2.0 / 3.0) ** n)

    def s(self, n):
        return 2 ** (self.alpha + n) + 1

    def domain(self, n):
        return StripDomain(self.t(n), self.rho(n))

    def d_sequence(self, n_steps):
        """Reference decay d_0, ..., d_{n_steps} from the 4/3-power law."""
        out = [self.d0]
        for n in range(n_steps):
            out.append((1.5 ** n) * out[-1] ** (4.0 / 3.0))
        return out


@dataclass(frozen=True)
class KamTolerances:
    residual_tol: float = 1e-10       # relative gate on sub-doubled coefficients
    mean_tol: float = 1e-9            # relative obstruction threshold
    reversibility_tol: float = 1e-10  # reporting threshold for M o G o M - G
    min_divisor: float | None = None  # None: 4 c0 / Kmax^sigma from dioph
    conj_passes: int | None = None    # None: order_max + 2

    def divisor_bound(self, dioph: DiophantineParams):
        return self.min_divisor if self.min_divisor is not None else dioph.min_divisor_bound()


@dataclass(frozen=True)
class ReversibilityReport:
    theta_residual: float
    r_residual: float
    tol: float

    @property
    def passes(self):
        return max(self.theta_residual, self.r_residual) <= self.tol


@dataclass(frozen=True)
class StepReport:
    n: int
    s: int
    s_next: int
    d_before: float
    d_after: float
    mean_norm: float
    reversibility_residual: float
    u_norm: float
    v_norm: float
    du_norm: float
    dv_norm: float
    truncation_loss: float
    low_order_max: float        # max |coeff| left in orders [s, 2s-2] before cleanup
    cleanup_mass: float         # l1 mass zeroed below order 2s-1
    parity_residual: float      # pre-projection deviation of (u odd, v even)
    symmetry_residual: float    # residual of the (p, q) defining symmetry

    def to_json_obj(self):
        return {k: (int(v) if isinstance(v, (int, np.integer)) else float(v))
                for k, v in self.__dict__.items()}


# -- reversibility -------------------------------------------------------


def check_reversibility(M, dom=DEFAULT_DOMAIN, tol=1e-10):
    """Measure both components of M o G o M - G as series norms.

    The theta component reduces to f(-theta - gamma0 - f, r + g) - f and
    the radial one to g(-theta - gamma0 - f, r + g) + g.
    """
    bf = shift_angle(reflect_angle(M.f), M.gamma0)
    bg = shift_angle(reflect_angle(M.g), M.gamma0)
    res_f = compose_map(bf, M.f, M.g) - M.f
    res_g = compose_map(bg, M.f, M.g) + M.g
    return ReversibilityReport(strip_norm(res_f, dom), strip_norm(res_g, dom), tol)


# -- transform algebra ---------------------------------------------------


def conjugate_map(M, T, max_passes=None):
    """M' = T^{-1} o M o T by re-substituting the implicit conjugacy.

    Solves f' = u - u(xi + gamma0 + f', eta + g') + f(xi + u, eta + v)
    (and the g analogue) by fixed point; each pass raises the corrected
    order by at least order_min(T) - ... >= 1, so order_max + 2 passes
    always suffice at fixed truncation.
    """
    u, v = T.u, T.v
    fu = compose_map(M.f, u, v)
    gv = compose_map(M.g, u, v)
    us = shift_angle(u, M.gamma0)
    vs = shift_angle(v, M.gamma0)
    f1 = u - us + fu
    g1 = v - vs + gv
    passes = max_passes if max_passes is not None else M.f.order_max + 2
    for _ in range(passes):
        f2 = u - compose_map(us, f1, g1) + fu
        g2 = v - compose_map(vs, f1, g1) + gv
        delta = l1_norm(f2 - f1) + l1_norm(g2 - g1)
        f1, g1 = f2, g2
        if delta == 0.0 or delta <= 1e-15 * (l1_norm(f1) + l1_norm(g1)):
            break
    return ReversibleCylinderMap(M.gamma0, f1, g1)


def compose_transforms(outer, inner):
    """(outer o inner) as a near-identity transform."""
    if outer.is_identity:
        return inner
    if inner.is_identity:
        return outer
    u = inner.u + compose_map(outer.u, inner.u, inner.v)
    v = inner.v + compose_map(outer.v, inner.u, inner.v)
    return NearIdentityTransform(u, v)


def invert_transform(T, max_passes=None):
    """Series inverse of a near-identity transform (fixed point)."""
    if T.is_identity:
        return T
    u, v = T.u, T.v
    iu, iv = -u, -v
    passes = max_passes if max_passes is not None else u.order_max + 2
    for _ in range(passes):
        nu = -compose_map(u, iu, iv)
        nv = -compose_map(v, iu, iv)
        delta = l1_norm(nu - iu) + l1_norm(nv - iv)
        iu, iv = nu, nv
        if delta == 0.0 or delta <= 1e-15 * (l1_norm(iu) + l1_norm(iv)):
            break
    return NearIdentityTransform(iu, iv)


def conjugated_rotation(gamma0, u, v):
    """Build W^{-1} o R_gamma0 o W: a formally linearizable map, exactly
    reversible when u is odd and v is even (synthetic test input)."""
    zero = u.zero_like()
    rotation = ReversibleCylinderMap(float(gamma0), zero, zero)
    return conjugate_map(rotation, NearIdentityTransform(u, v))


# -- Birkhoff reduction ---------------------------------------------------


def _order_row(series, k):
    """The order-k coefficient function as a mode array (copy)."""
    return np.array(series.coefficients[k])


def _series_from_row(template, k, row):
    arr = np.zeros_like(template.coefficients)
    arr[k] = row
    return FourierTaylorSeries(template.freq, arr, template.order_max, template.cutoff)


def _torus_samples(row, cutoff, m, grid):
    """Sample F(x) = sum_j row_j e^{i<j,x>} on the m-torus grid."""
    spec = np.zeros((grid,) * m, dtype=complex)
    for idx in zip(*np.nonzero(row)):
        j = tuple(int(x) - cutoff for x in idx)
        spec[tuple(jj % grid for jj in j)] = row[idx]
    return np.fft.ifftn(spec) * grid ** m


def _torus_coefficients(samples, cutoff, m, grid):
    """Inverse of _torus_samples, truncated to modes ||j||_inf <= cutoff."""
    spec = np.fft.fftn(samples) / grid ** m
    row = np.zeros((2 * cutoff + 1,) * m, dtype=complex)
    for idx in np.ndindex(*row.shape):
        j = tuple(int(x) - cutoff for x in idx)
        row[idx] = spec[tuple(jj % grid for jj in j)]
    return row


@dataclass(frozen=True)
class BirkhoffStageReport:
    k: int
    gamma_k: float
    radial_mean: float           # b_k; ~0 for reversible input (log-mean at k=1)
    radial_residual: float       # l1 of the order-k radial row after the stage
    angular_residual: float      # l1 of the oscillating order-k angular row after
    divisor_min: float


@dataclass(frozen=True)
class BirkhoffResult:
    map: ReversibleCylinderMap
    gammas: tuple
    transform: NearIdentityTransform
    reports: tuple


def birkhoff_reduce(M, N, dioph, tolerances=None, grid_factor=4):
    """Normalize orders 1..N-1, extracting the twist constants gamma_k.

    Stage structure per order k (paper-style): first the radial
    coefficient is removed (multiplicatively via the principal logarithm
    on a sampling grid at k = 1, additively otherwise), then the angular
    coefficient is reduced to its mean gamma_k.  Both generators are
    G-symmetrized, so each stage preserves reversibility.  The returned
    map carries sum gamma_k r^k in its angular series; when every
    gamma_k vanishes its residual order is >= N.
    """
    tol = tolerances or KamTolerances()
    min_div = tol.divisor_bound(dioph)
    cur = M
    template = M.f
    K, m = template.cutoff, template.m
    grid = max(grid_factor * K, 8)
    zero = template.zero_like()
    transform = NearIdentityTransform.identity_like(template)
    gammas = []
    reports = []
    for k in range(1, N):
        # ---- radial stage: kill the order-k part of g
        row_g = _order_row(cur.g, k)
        b_k = 0.0
        if np.any(row_g):
            if k == 1:
                # multiplicative: phi1(theta) = 1 + g_1(theta) > 0
                samples = _torus_samples(row_g, K, m, grid)
                mult = 1.0 + np.real(samples)
                if np.min(mult) <= 0.0:
                    raise NonPositiveMultiplier(
                        f"order-1 radial multiplier dips to {np.min(mult):.3e}"
                    )
                log_series = _series_from_row(
                    template, 1, _torus_coefficients(np.log(mult), K, m, grid))
                b_k = float(np.real(project_mean(log_series).coefficients[(1,) + (K,) * m]))
                w = -solve_difference(project_zero_mean(log_series), cur.gamma0, min_div)
                # scaling factor c(theta) = 1/sqrt(G1(theta) G1(-theta)) - 1, G1 = e^w
                w_row = _order_row(w, 1)
                g1 = np.exp(np.real(_torus_samples(w_row, K, m, grid)))
                g1_neg = np.exp(np.real(_torus_samples(_flip_modes(w_row), K, m, grid)))
                c_row = _torus_coefficients(1.0 / np.sqrt(g1 * g1_neg) - 1.0, K, m, grid)
                v_series = even_part(_series_from_row(template, 1, c_row))
            else:
                g_series = _series_from_row(template, k, row_g)
                b_k = float(np.real(project_mean(g_series).coefficients[(k,) + (K,) * m]))
                w = -solve_difference(project_zero_mean(g_series), cur.gamma0, min_div)
                v_series = -even_part(w)
            stage = NearIdentityTransform(zero, v_series)
            cur = conjugate_map(cur, stage)
            transform = compose_transforms(transform, stage)
        radial_residual = float(np.abs(_order_row(cur.g, k)).sum())

        # ---- angular stage: reduce the order-k part of f to its mean
        f_series = _series_from_row(template, k, _order_row(cur.f, k))
        gamma_k = float(np.real(project_mean(f_series).coefficients[(k,) + (K,) * m]))
        osc = project_zero_mean(f_series)
        if not osc.is_zero:
            w = -solve_difference(osc, cur.gamma0, min_div)
            stage = NearIdentityTransform(-odd_part(w), zero)
            cur = conjugate_map(cur, stage)
            transform = compose_transforms(transform, stage)
        gammas.append(gamma_k)
        ang_residual = l1_norm(
            project_zero_mean(_series_from_row(template, k, _order_row(cur.f, k))))
        divs = np.abs(np.exp(1j * template._mode_dot_freq() * cur.gamma0) - 1.0)
        div_min = float(divs[template._mode_l1() > 0].min())
        reports.append(BirkhoffStageReport(k, gamma_k, b_k, radial_residual,
                                           ang_residual, div_min))
    return BirkhoffResult(cur, tuple(gammas), transform, tuple(reports))


def _flip_modes(row):
    """Mode array of F(-x) given that of F(x)."""
    return np.flip(row)


# -- KAM step and driver ---------------------------------------------------


def kam_step(M, s, dioph, tolerances=None, dom=DEFAULT_DOMAIN):
    """One quadratic normalization step: residual order s -> 2s - 1.

    Returns (M', delta_transform, StepReport).  Raises ObstructionDetected
    when the truncated symmetrized residual has a mean part above the
    relative tolerance (a twist-type finding), SmallDivisor when a needed
    divisor underflows, and OrderDoublingFailure when coefficients below
    order 2s - 1 survive above tolerance after the conjugacy.
    """
    tol = tolerances or KamTolerances()
    if s is None:
        s = M.residual_order
    if s is None:
        ident = NearIdentityTransform.identity_like(M.f)
        report = StepReport(0, 0, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                            0.0, 0.0, 0.0, 0.0, 0.0)
        return M, ident, report
    if s < 2:
        raise NormkamError(f"kam_step needs residual order >= 2, got {s}")
    min_div = tol.divisor_bound(dioph)
    N = M.f.order_max
    d_before = strip_norm(M.f, dom) + strip_norm(M.g, dom)
    coeff_scale = max(max_abs_coefficient(M.f), max_abs_coefficient(M.g))

    # (a) symmetrized residual, truncated to the active window [s, 2s-2]
    p, q, sym_rep = symmetrize_parity(M.f, M.g, M.gamma0)
    p_star = restrict_orders(p, s, 2 * s - 2)
    q_star = restrict_orders(q, s, 2 * s - 2)

    # (b) modified difference equations; u must come out odd and v even
    u = solve_difference(project_zero_mean(p_star), M.gamma0, min_div)
    v = solve_difference(project_zero_mean(q_star), M.gamma0, min_div)
    parity_residual = (l1_norm(reflect_angle(u) + u)
                       + l1_norm(reflect_angle(v) - v))
    u = odd_part(u)
    v = even_part(v)
    delta = NearIdentityTransform(u, v)

    # (c) mean part: must vanish for formally linearizable maps
    mean_p = project_mean(p_star)
    mean_q = project_mean(q_star)
    mean_norm = l1_norm(mean_p) + l1_norm(mean_q)
    if mean_norm > tol.mean_tol * coeff_scale:
        center = (M.f.cutoff,) * M.f.m
        for k in range(s, 2 * s - 1):
            val_p = mean_p.coefficients[(k,) + center]
            val_q = mean_q.coefficients[(k,) + center]
            if abs(val_p) + abs(val_q) > tol.mean_tol * coeff_scale:
                raise ObstructionDetected(k, float(np.real(val_p)), mean_norm)
        raise ObstructionDetected(s, mean_norm, mean_norm)

    # (d) implicit conjugacy by fixed-point re-substitution
    M1 = conjugate_map(M, delta, max_passes=tol.conj_passes)

    # (e) order-doubling gate, cleanup, reversibility measurement
    low_max = max(max_abs_coefficient(M1.f, 0, 2 * s - 2),
                  max_abs_coefficient(M1.g, 0, 2 * s - 2))
    if low_max > tol.residual_tol * coeff_scale:
        raise OrderDoublingFailure(
            f"coefficients of size {low_max:.3e} below order {2 * s - 1} "
            f"exceed {tol.residual_tol:.1e} x scale {coeff_scale:.3e}"
        )
    f2 = restrict_orders(M1.f, 2 * s - 1, N)
    g2 = restrict_orders(M1.g, 2 * s - 1, N)
    cleanup_mass = l1_norm(M1.f - f2) + l1_norm(M1.g - g2)
    M2 = ReversibleCylinderMap(M.gamma0, f2, g2)
    rev = check_reversibility(M2, dom, tol.reversibility_tol)
    d_after = strip_norm(f2, dom) + strip_norm(g2, dom)
    report = StepReport(
        n=0, s=s, s_next=2 * s - 1,
        d_before=d_before, d_after=d_after,
        mean_norm=mean_norm,
        reversibility_residual=max(rev.theta_residual, rev.r_residual),
        u_norm=strip_norm(u, dom), v_norm=strip_norm(v, dom),
        du_norm=strip_norm(dtheta(u), dom) + strip_norm(dr(u), dom),
        dv_norm=strip_norm(dtheta(v), dom) + strip_norm(dr(v), dom),
        truncation_loss=f2.truncation_loss + g2.truncation_loss,
        low_order_max=low_max, cleanup_mass=cleanup_mass,
        parity_residual=parity_residual,
        symmetry_residual=sym_rep.p_residual + sym_rep.q_residual,
    )
    return M2, delta, report


@dataclass(frozen=True)
class ObstructionInfo:
    step: int
    order: int
    value: float
    mean_norm: float


@dataclass(frozen=True)
class KamResult:
    transform: NearIdentityTransform
    final_map: ReversibleCylinderMap
    reports: tuple
    stop_reason: str              # "n_max", "exhausted", or "obstruction"
    obstruction: ObstructionInfo | None
    measured_decay: tuple         # d_0 (input), then d_after per step
    schedule_decay: tuple         # reference d_n from the 4/3 law

    def decay_exponent(self):
        """Log-log slope of d_{n+1} against d_n over the measured decay."""
        d = [x for x in self.measured_decay if x > 0.0]
        if len(d) < 3:
            return None
        x = np.log(d[:-1])
        y = np.log(d[1:])
        return float(np.polyfit(x, y, 1)[0])


def kam_iterate(M, schedule, dioph, tolerances=None):
    """Drive kam_step with s -> 2s - 1, composing transforms T_{n+1} = T_n o dT.

    Stops at schedule.n_max, at coefficient exhaustion (residual order
    beyond order_max leaves an exactly zero residual), or at the first
    obstruction, which is returned as a finding rather than raised.
    """
    tol = tolerances or KamTolerances()
    transform = NearIdentityTransform.identity_like(M.f)
    reports = []
    measured = [strip_norm(M.f, schedule.domain(0)) + strip_norm(M.g, schedule.domain(0))]
    obstruction = None
    stop = "n_max"
    cur = M
    for n in range(schedule.n_max):
        s = cur.residual_order
        if s is None:
            stop = "exhausted"
            break
        try:
            cur, delta, report = kam_step(cur, s, dioph, tol, schedule.domain(n))
        except ObstructionDetected as exc:
            obstruction = ObstructionInfo(n, exc.order, exc.value, exc.mean_norm)
            stop = "obstruction"
            break
        reports.append(replace(report, n=n))
        transform = compose_transforms(transform, delta)
        measured.append(report.d_after)
    return KamResult(
        transform=transform,
        final_map=cur,
        reports=tuple(reports),
        stop_reason=stop,
        obstruction=obstruction,
        measured_decay=tuple(measured),
        schedule_decay=tuple(schedule.d_sequence(len(measured) - 1)),
    )
