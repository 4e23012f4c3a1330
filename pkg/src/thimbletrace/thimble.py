"""Finite-dimensional Picard-Lefschetz engine.

Evaluates I = integral over the real line of exp(f(x)) dx for polynomial
f that is purely imaginary on the real axis, by decomposing the contour
into steepest-descent thimbles attached to the critical points of f:

    I = sum_alpha n_alpha exp(f(z_alpha)) * integral of exp(f - f(z_alpha))

n_alpha counts signed crossings of the steepest-ascent (dual) contour
with the real axis.  An independent damped real-line oracle
(Levin-collocation tails, epsilon -> 0 Richardson) cross-checks every
decomposition.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    AmbiguousIntersectionError,
    CausticError,
    FlowStallError,
    OracleFailureError,
    TruncationError,
    ValidationError,
)

# flow termination thresholds
CONVERGENCE_GRAD = 1e-10
DESCENT_DEPTH = 48.0     # stop once Re f dropped this far below the saddle
ASCENT_HEIGHT = 5.0      # dual flows stop this far above Re f = 0
SEED_OFFSET = 1e-6
DEGENERATE_HESSIAN = 1e-8


@dataclass(frozen=True)
class ExponentFunction:
    """Polynomial exponent f(z) = sum_k coeffs[k] z^k, degree >= 2.

    With imaginary_on_real set, Re f must vanish on the real axis (all
    coefficients purely imaginary); this is what makes the real contour a
    stationary-phase integral.
    """

    coeffs: tuple
    imaginary_on_real: bool = True

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)
        if self.degree < 2:
            raise ValidationError("exponent degree must be >= 2")
        if self.imaginary_on_real:
            xs = np.linspace(-3.0, 3.0, 25)
            vals = self(xs)
            scale = max(1.0, float(np.max(np.abs(vals))))
            if np.max(np.abs(vals.real)) > 1e-12 * scale:
                raise ValidationError(
                    "exponent is not purely imaginary on the real axis"
                )

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def deriv(self, z):
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(z, d)

    def second(self, z):
        d2 = np.polynomial.polynomial.polyder(self.coeffs, 2)
        return np.polynomial.polynomial.polyval(z, d2)

    def conjugate(self):
        """g with g(x) = conj(f(x)) for real x."""
        return ExponentFunction(
            tuple(np.conj(c) for c in self.coeffs), self.imaginary_on_real
        )

    def phase_coeffs(self):
        """Real coefficients q with f(x) = i q(x) on the real axis."""
        return tuple((c / 1j).real for c in self.coeffs)


@dataclass(frozen=True)
class CriticalPoint:
    location: complex
    value: complex
    hessian: complex
    morse_index: int = 1

    @property
    def is_real(self):
        return abs(self.location.imag) <= 1e-10 * (1.0 + abs(self.location))


@dataclass(frozen=True)
class Thimble:
    critical: CriticalPoint
    samples: tuple
    dual_samples: tuple
    intersection_number: int
    descent_terminations: tuple = ("decay", "decay")
    ascent_terminations: tuple = ("height", "height")


def find_critical_points(f):
    """All critical points of f with values and Hessians, sorted by (Re, Im).

    Degenerate points (vanishing f'') violate the Morse assumption and
    raise CausticError.
    """
    dcoeffs = np.polynomial.polynomial.polyder(f.coeffs)
    roots = np.polynomial.polynomial.polyroots(np.array(dcoeffs, dtype=complex))
    polished = []
    d2coeffs = np.polynomial.polynomial.polyder(f.coeffs, 2)
    for r in roots:
        z = complex(r)
        for _ in range(50):
            g = np.polynomial.polynomial.polyval(z, dcoeffs)
            h = np.polynomial.polynomial.polyval(z, d2coeffs)
            if h == 0:
                break
            step = g / h
            z -= step
            if abs(step) < 1e-16 * (1 + abs(z)):
                break
        polished.append(z)
    hessians = [complex(f.second(z)) for z in polished]
    scale = max(1.0, max(abs(h) for h in hessians))
    for z, h in zip(polished, hessians):
        if abs(h) < DEGENERATE_HESSIAN * scale:
            raise CausticError(
                "degenerate critical point at %s (f'' = %s)" % (z, h)
            )
    order = np.lexsort(
        (np.array([z.imag for z in polished]), np.array([z.real for z in polished]))
    )
    return [
        CriticalPoint(
            location=polished[i],
            value=complex(f(polished[i])),
            hessian=hessians[i],
            morse_index=1,
        )
        for i in order
    ]


def escape_radius(f):
    """10 (max |critical point| + 1), the truncation radius for flows."""
    crits = find_critical_points(f)
    return 10.0 * (max(abs(c.location) for c in crits) + 1.0)


def _flow_events(f, radius, re_f_stop=None, stop_below=True):
    def converged(t, y):
        return abs(f.deriv(complex(y[0], y[1]))) - CONVERGENCE_GRAD

    converged.terminal = True
    converged.direction = -1.0

    def escaped(t, y):
        return math.hypot(y[0], y[1]) - radius

    escaped.terminal = True
    escaped.direction = 1.0

    events = [converged, escaped]
    if re_f_stop is not None:
        sign = 1.0 if stop_below else -1.0

        def depth(t, y):
            return sign * (re_f_stop - f(complex(y[0], y[1])).real)

        depth.terminal = True
        depth.direction = 1.0
        events.append(depth)
    return events


def _run_flow(f, start, sign, tau_max, radius, re_f_stop=None, stop_below=True):
    """Integrate dz/dtau = sign * conj(f'(z)); sign=-1 descends Re f."""

    def rhs(t, y):
        w = sign * np.conj(f.deriv(complex(y[0], y[1])))
        return [w.real, w.imag]

    events = _flow_events(f, radius, re_f_stop, stop_below)
    sol = solve_ivp(
        rhs,
        (0.0, tau_max),
        [start.real, start.imag],
        method="DOP853",
        rtol=1e-11,
        atol=1e-13,
        events=events,
        dense_output=True,
    )
    if sol.status == -1:
        raise FlowStallError("flow integration stalled: %s" % sol.message)
    reason = "tau_max"
    if sol.t_events[0].size:
        reason = "converged"
    elif sol.t_events[1].size:
        reason = "escaped"
    elif len(sol.t_events) > 2 and sol.t_events[2].size:
        reason = "decay" if sign < 0 else "height"
    return sol, reason


def _resample(sol, max_leg=0.15):
    """Points along the dense solution with bounded leg lengths."""
    ts = list(sol.t)
    pts = [complex(y[0], y[1]) for y in sol.y.T]
    out_t = [ts[0]]
    out_z = [pts[0]]
    for t0, t1, z0, z1 in zip(ts[:-1], ts[1:], pts[:-1], pts[1:]):
        legs = int(np.ceil(abs(z1 - z0) / (max_leg * (1.0 + abs(z0))))) or 1
        for j in range(1, legs + 1):
            tj = t0 + (t1 - t0) * j / legs
            yj = sol.sol(tj)
            out_t.append(tj)
            out_z.append(complex(yj[0], yj[1]))
    return out_z


def flow(f, start, direction="down", tau_max=200.0):
    """Gradient-flow trajectory of Re f from `start`.

    direction "down" integrates dz/dtau = -conj(f'(z)) (Re f decreases,
    Im f conserved); "up" ascends.  Terminates at tau_max, on convergence
    to a critical point, or at the escape radius.
    """
    if direction not in ("down", "up"):
        raise ValidationError("direction must be 'down' or 'up'")
    start = complex(start)
    if abs(f.deriv(start)) < CONVERGENCE_GRAD:
        raise ValidationError("flow must not start at a critical point")
    sign = -1.0 if direction == "down" else 1.0
    sol, _ = _run_flow(f, start, sign, tau_max, escape_radius(f))
    return _resample(sol)


def _descent_direction(crit):
    """Unit tangent of the steepest-descent curve, oriented Re-increasing
    (Im-increasing when vertical)."""
    psi = np.angle(crit.hessian)
    phi = 0.5 * (np.pi - psi)
    v = np.exp(1j * phi)
    if v.real < -1e-12 or (abs(v.real) <= 1e-12 and v.imag < 0):
        v = -v
    return v


def build_thimble(f, crit):
    """Thimble and dual thimble through one nondegenerate critical point.

    Both are sampled by continuation from z_alpha offset along the
    descent/ascent eigendirections of the Hessian of Re f, ordered by
    signed arclength; the dual's crossing count with the real axis is the
    intersection number.
    """
    if abs(crit.hessian) < DEGENERATE_HESSIAN:
        raise CausticError("cannot build a thimble at a degenerate point")
    radius = escape_radius(f)
    z0 = crit.location
    eps = SEED_OFFSET * (1.0 + abs(z0))
    v_desc = _descent_direction(crit)
    v_asc = 1j * v_desc  # positively oriented frame (descent, ascent)

    re0 = crit.value.real
    down_stop = re0 - DESCENT_DEPTH
    up_stop = max(0.0, re0) + ASCENT_HEIGHT

    minus_sol, term_m = _run_flow(f, z0 - eps * v_desc, -1.0, 1e6, radius, down_stop, True)
    plus_sol, term_p = _run_flow(f, z0 + eps * v_desc, -1.0, 1e6, radius, down_stop, True)
    samples = (
        list(reversed(_resample(minus_sol))) + [z0] + _resample(plus_sol)
    )

    dual_minus, aterm_m = _run_flow(f, z0 - eps * v_asc, +1.0, 1e6, radius, up_stop, False)
    dual_plus, aterm_p = _run_flow(f, z0 + eps * v_asc, +1.0, 1e6, radius, up_stop, False)
    dual_samples = (
        list(reversed(_resample(dual_minus))) + [z0] + _resample(dual_plus)
    )

    n = _intersection_count(f, crit, dual_samples)
    return Thimble(
        critical=crit,
        samples=tuple(samples),
        dual_samples=tuple(dual_samples),
        intersection_number=n,
        descent_terminations=(term_m, term_p),
        ascent_terminations=(aterm_m, aterm_p),
    )


def _intersection_count(f, crit, dual_samples):
    """Signed crossings of the dual contour with the real axis.

    Shortcuts from the sign of Re f(z_alpha): a real critical point has
    the trivial flow (n = 1); Re f(z_alpha) > 0 cannot reach the real
    contour (n = 0).  Tangential approaches are reported, never resolved.
    """
    scale = 1.0 + abs(crit.location)
    if crit.is_real:
        return 1
    if crit.value.real > 1e-12 * scale:
        return 0
    im = np.array([z.imag for z in dual_samples])
    signs = np.sign(im)
    n = 0
    for k in range(len(im) - 1):
        if signs[k] != 0 and signs[k + 1] != 0 and signs[k] != signs[k + 1]:
            n += 1 if im[k + 1] > im[k] else -1
        elif signs[k + 1] == 0:
            raise AmbiguousIntersectionError(
                "dual thimble touches the real axis tangentially near %s"
                % dual_samples[k + 1]
            )
    # tangential graze: a near-axis dip without a sign change
    interior = np.abs(im[1:-1])
    dips = (interior < 1e-9 * scale) & (np.sign(im[:-2]) == np.sign(im[2:]))
    if np.any(dips):
        raise AmbiguousIntersectionError(
            "dual thimble grazes the real axis without crossing"
        )
    return n


def intersection_number(f, thimble):
    """n_alpha for a built thimble (recomputed from its dual samples)."""
    return _intersection_count(f, thimble.critical, list(thimble.dual_samples))


def thimble_integral(f, thimble):
    """exp(f(z_alpha)) times the integral of exp(f - f(z_alpha)) along the
    sampled thimble polyline.

    The polyline is a legitimate contour between the same valleys, so
    integrating exp(f) along it equals the thimble integral; segments are
    subdivided until exp varies slowly, then Gauss-Legendre handles each.
    """
    pts = np.array(thimble.samples, dtype=complex)
    f0 = thimble.critical.value
    ends = np.exp(np.array([f(pts[0]), f(pts[-1])]) - f0)
    if np.max(np.abs(ends)) > 1e-16:
        raise TruncationError(
            "thimble truncated before decay (endpoint weights %s); "
            "terminations %s" % (np.abs(ends), thimble.descent_terminations)
        )
    nodes, weights = np.polynomial.legendre.leggauss(12)
    total = 0j
    fa = f(pts[:-1])
    fb = f(pts[1:])
    counts = np.ceil(np.abs(fb - fa) / 0.4).astype(int) + 1
    for (za, zb, m) in zip(pts[:-1], pts[1:], counts):
        sub = za + (zb - za) * np.linspace(0.0, 1.0, m + 1)
        for sa, sb in zip(sub[:-1], sub[1:]):
            mid = 0.5 * (sa + sb)
            half = 0.5 * (sb - sa)
            zz = mid + half * nodes
            total += half * np.sum(weights * np.exp(f(zz) - f0))
    return complex(np.exp(f0) * total)


def thimble_sum(f):
    """Sum of n_alpha-weighted thimble integrals over all critical points."""
    total = 0j
    for crit in find_critical_points(f):
        th = build_thimble(f, crit)
        if th.intersection_number == 0:
            continue
        total += th.intersection_number * thimble_integral(f, th)
    return complex(total)


# ---------------------------------------------------------------------------
# independent oracle: damped real-line quadrature


@lru_cache(maxsize=8)
def _chebyshev_system(n):
    """Chebyshev-Lobatto nodes (descending) and differentiation matrix."""
    k = np.arange(n)
    x = np.cos(np.pi * k / (n - 1))
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** k
    xmat = np.tile(x, (n, 1)).T
    dx = xmat - xmat.T + np.eye(n)
    d = np.outer(c, 1.0 / c) / dx
    d -= np.diag(d.sum(axis=1))
    return x, d


def _levin_panel(qc, dqc, a, b, eps, n):
    """Levin collocation for the integral of exp(-eps x^2 + i q(x)) on [a, b].

    Solves u' + i q'(x) u = exp(-eps x^2); the antiderivative of the
    oscillatory integrand is then u exp(i q).  Valid while q' does not
    vanish on the panel (tails only).
    """
    x, d = _chebyshev_system(n)
    z = a + (b - a) * (x + 1.0) / 2.0
    dmat = d * (2.0 / (b - a))
    qp = np.polynomial.polynomial.polyval(z, dqc)
    g = np.exp(-eps * z**2)
    u = np.linalg.solve(dmat + 1j * np.diag(qp), g.astype(complex))
    qv = np.polynomial.polynomial.polyval(z, qc)
    return u[0] * np.exp(1j * qv[0]) - u[-1] * np.exp(1j * qv[-1])


def _damped_integral(f, eps):
    """Integral of exp(f(x) - eps x^2) over the real line.

    Stationary-phase core by doubling Gauss-Legendre; oscillatory tails by
    Levin collocation on geometrically widening panels.
    """
    qc = f.phase_coeffs()
    dqc = np.polynomial.polynomial.polyder(qc)
    crits = find_critical_points(f)
    x0 = 2.0 * (1.0 + max(abs(c.location) for c in crits))
    x_max = math.sqrt(42.0 / eps)

    # core
    core = None
    n = 64
    while n <= (1 << 15):
        nodes, weights = np.polynomial.legendre.leggauss(n)
        zz = x0 * nodes
        vals = np.exp(1j * np.polynomial.polynomial.polyval(zz, qc) - eps * zz**2)
        value = x0 * np.sum(weights * vals)
        if core is not None and abs(value - core) < 1e-13 * (1 + abs(value)):
            core = value
            break
        core = value
        n *= 2

    def tail(sign):
        total = 0j
        est = 0.0
        a = x0
        while a < x_max:
            b = min(2.0 * a, x_max)
            coarse = _levin_panel(qc, dqc, sign * a, sign * b, eps, 20)
            fine = _levin_panel(qc, dqc, sign * a, sign * b, eps, 30)
            total += np.sign(sign) * fine
            est += abs(fine - coarse)
            a = b
        return total, est

    right, est_r = tail(+1.0)
    left, est_l = tail(-1.0)
    return complex(core + right + left), est_r + est_l


def oracle_integral(f, eps_values=(1e-2, 1e-3, 1e-4)):
    """(value, error estimate) for the undamped oscillatory integral.

    Computes the eps-damped integral at the given sequence and Richardson
    (Neville) extrapolates to eps -> 0.
    """
    if not f.imaginary_on_real:
        raise ValidationError("oracle requires a purely imaginary exponent on R")
    eps_values = sorted(eps_values, reverse=True)
    values = []
    quad_err = 0.0
    for eps in eps_values:
        val, est = _damped_integral(f, eps)
        values.append(val)
        quad_err += est
    # Neville extrapolation to eps = 0
    table = list(values)
    correction = None
    for level in range(1, len(eps_values)):
        new = []
        for i in range(len(table) - 1):
            e_lo = eps_values[i + level]
            e_hi = eps_values[i]
            new.append((e_hi * table[i + 1] - e_lo * table[i]) / (e_hi - e_lo))
        correction = abs(new[-1] - table[-1])
        table = new
    value = table[-1]
    error = (correction if correction is not None else 0.0) + quad_err
    spread = abs(values[-1] - value)
    if correction is not None and correction > 10 * (abs(value) + 1.0):
        raise OracleFailureError(
            "damped-integral extrapolation diverged (correction %.3e)" % correction
        )
    return complex(value), float(error + spread * 1e-3)
