"""Period lattice of homology cycles on the energy curve.

Cycles are realized as explicit contours in the q-plane: each homology
generator is an ellipse around a pair of adjacent (sorted) branch points,
and arbitrary integer combinations are walked as excursions from a common
anchor point, with the branch of p = sqrt(E - V(q)) continued along the
whole path.  Periods are

    action       S(gamma) = contour integral of p dq
    time period  T(gamma) = contour integral of dq / (2 p)

computed with a doubling periodic-trapezoid rule (spectrally accurate for
closed analytic contours) on loops and composite trapezoid on connectors.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    BasisMismatchError,
    ContourDegeneracyError,
    NoRealOrbitError,
    ValidationError,
)
from .model import EnergyCurve

REL_QUAD_TOL = 1e-10
MATCH_RESIDUAL = 1e-6
# Contour clearance from a branch-point pair, as a fraction of the pair
# separation (floor required to keep quadrature away from the sqrt
# singularities) and of the gap to the nearest foreign branch point.
CLEARANCE_FLOOR = 0.10
CLEARANCE_TARGET = 0.35
CLEARANCE_GAP_FRACTION = 0.60
_MAX_LOOP_SAMPLES = 2 ** 19


@dataclass(frozen=True)
class Cycle:
    """Integer homology coordinates in a generator basis.

    kind == "homology" for ordinary classes; the genus-0 real orbit is not
    a homology class (the curve is a sphere) and carries
    kind == "real_orbit_direct" with empty coords.
    """

    coords: tuple
    basis_id: str
    kind: str = "homology"

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    def is_trivial(self):
        return self.kind == "homology" and all(c == 0 for c in self.coords)

    def is_primitive(self):
        g = 0
        for c in self.coords:
            g = math.gcd(g, abs(c))
        return g == 1


@dataclass(frozen=True)
class PeriodData:
    """Action and time period of one cycle (hbar = 1)."""

    cycle: Cycle
    action: complex
    time_period: complex


@dataclass(frozen=True)
class _Ellipse:
    """Ellipse around a branch-point pair; axis is the unit vector along it."""

    center: complex
    axis: complex
    semi_major: float
    semi_minor: float

    def point(self, theta):
        return self.center + self.axis * (
            self.semi_major * np.cos(theta) + 1j * self.semi_minor * np.sin(theta)
        )

    def tangent(self, theta):
        return self.axis * (
            -self.semi_major * np.sin(theta) + 1j * self.semi_minor * np.cos(theta)
        )

    @property
    def top(self):
        # Basepoint for all traversals and for connector attachment.
        return self.point(0.5 * np.pi)

    def contains(self, z):
        w = (z - self.center) / self.axis
        return (w.real / self.semi_major) ** 2 + (w.imag / self.semi_minor) ** 2 < 1.0


@dataclass(frozen=True)
class Generator:
    """One homology generator: contour, sheet bookkeeping, and periods.

    orientation is the normalized traversal sense (+1 = counterclockwise in
    theta); start_p is the continued momentum at the basepoint (ellipse
    top) on the canonical sheet.
    """

    index: int
    pair: tuple
    ellipse: _Ellipse
    orientation: int
    start_p: complex
    action: complex
    time_period: complex

    def contour_samples(self, n=512):
        """(points, momenta) along the normalized contour."""
        phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        theta = 0.5 * np.pi + self.orientation * phi
        z = self.ellipse.point(theta)
        return z, None  # momenta filled by callers that hold the curve


def basis_id_for(curve):
    coeffs = ",".join(format(c, ".17g") for c in curve.potential.coeffs)
    return "V[%s]E[%s,%s]" % (
        coeffs,
        format(curve.energy.real, ".17g"),
        format(curve.energy.imag, ".17g"),
    )


# ---------------------------------------------------------------------------
# branch-continued momentum along sampled paths


def _continued_momentum(w2, p_start=None):
    """Branch-continued sqrt(w2) along an ordered sample chain.

    Returns None when consecutive samples turn the argument of w2 by too
    much for an unambiguous continuation (caller should refine).
    """
    arg = np.angle(w2)
    darg = np.diff(arg)
    darg -= 2 * np.pi * np.round(darg / (2 * np.pi))
    if darg.size and np.max(np.abs(darg)) > 1.75:
        return None, 0.0
    phase = np.concatenate(([arg[0]], arg[0] + np.cumsum(darg)))
    p = np.sqrt(np.abs(w2)) * np.exp(0.5j * phase)
    if p_start is not None:
        if abs(p[0] - p_start) > abs(p[0] + p_start):
            p = -p
    total_turn = phase[-1] - phase[0] if darg.size else 0.0
    return p, total_turn


def _check_clearance(w2, context):
    absw2 = np.abs(w2)
    if absw2.min() < 1e-10 * max(absw2.max(), 1e-300):
        raise ContourDegeneracyError(
            "contour passes too close to a branch point (%s)" % context
        )


def _loop_integrals(curve, ellipse, orientation, start_p=None, tol=REL_QUAD_TOL):
    """One full traversal of the ellipse: (action, time_period, p_at_basepoint).

    Doubling periodic trapezoid; converges geometrically since the
    integrand is analytic on the closed contour.  Also asserts the loop
    encloses exactly one branch pair (momentum returns to its start).
    """
    m = 256
    prev = None
    while m <= _MAX_LOOP_SAMPLES:
        phi = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
        theta = 0.5 * np.pi + orientation * phi
        z = ellipse.point(theta)
        dz = orientation * ellipse.tangent(theta)
        w2 = np.asarray(curve.momentum_squared(z), dtype=complex)
        _check_clearance(w2, "loop")
        p, turn = _continued_momentum(w2, start_p)
        if p is None:
            m *= 2
            continue
        # wrap-around turn of arg(w2): a two-point loop gives +-4 pi
        wrap = np.angle(w2[0]) - np.angle(w2[-1])
        wrap -= 2 * np.pi * np.round(wrap / (2 * np.pi))
        total = turn + wrap
        if abs(abs(total) - 4 * np.pi) > 0.5:
            raise ContourDegeneracyError(
                "loop does not enclose a single branch pair (arg turn %.3f pi)"
                % (total / np.pi)
            )
        weight = 2 * np.pi / m
        action = weight * np.sum(p * dz)
        period = weight * np.sum(dz / (2.0 * p))
        if prev is not None:
            ds = abs(action - prev[0]) <= tol * (abs(action) + 1e-14)
            dt = abs(period - prev[1]) <= tol * (abs(period) + 1e-14)
            if ds and dt:
                return complex(action), complex(period), complex(p[0])
        prev = (action, period)
        m *= 2
    raise ContourDegeneracyError("loop quadrature failed to converge")


def _segment_integrals(curve, za, zb, p_in, tol=REL_QUAD_TOL):
    """Straight-segment integrals with continued momentum.

    Returns (action, time_period, p_out).  Connector segments always come
    in canceling pairs, so modest accuracy here never limits the total.
    """
    m = 64
    prev = None
    while m <= _MAX_LOOP_SAMPLES:
        t = np.linspace(0.0, 1.0, m + 1)
        z = za + t * (zb - za)
        w2 = np.asarray(curve.momentum_squared(z), dtype=complex)
        _check_clearance(w2, "connector")
        p, _ = _continued_momentum(w2, p_in)
        if p is None:
            m *= 2
            continue
        dz = (zb - za) / m
        action = dz * (np.sum(p) - 0.5 * (p[0] + p[-1]))
        period = dz * (np.sum(1.0 / (2 * p)) - 0.5 * (1 / (2 * p[0]) + 1 / (2 * p[-1])))
        if prev is not None:
            if (
                abs(action - prev[0]) <= tol * (abs(action) + 1e-12)
                and abs(period - prev[1]) <= tol * (abs(period) + 1e-12)
            ):
                return complex(action), complex(period), complex(p[-1])
        prev = (action, period)
        m *= 2
    raise ContourDegeneracyError("connector quadrature failed to converge")


# ---------------------------------------------------------------------------
# generator construction


def _distance_to_segment(a, b, pts):
    ab = b - a
    denom = abs(ab) ** 2
    out = []
    for p in pts:
        t = ((p - a) * np.conj(ab)).real / denom
        t = min(1.0, max(0.0, t))
        out.append(abs(a + t * ab - p))
    return out


def _pair_ellipse(z1, z2, others):
    sep = abs(z2 - z1)
    axis = (z2 - z1) / sep
    gaps = _distance_to_segment(z1, z2, others)
    gap = min(gaps) if gaps else math.inf
    clearance = max(CLEARANCE_FLOOR * sep, min(CLEARANCE_TARGET * sep, CLEARANCE_GAP_FRACTION * gap))
    if clearance > CLEARANCE_GAP_FRACTION * gap:
        raise ContourDegeneracyError(
            "cannot keep clearance %.3g around pair (%s, %s): foreign branch "
            "point only %.3g away" % (CLEARANCE_FLOOR * sep, z1, z2, gap)
        )
    ell = _Ellipse(
        center=(z1 + z2) / 2.0,
        axis=axis,
        semi_major=sep / 2.0 + clearance,
        semi_minor=clearance,
    )
    # foreign points must stay clear of the contour, not merely outside it
    margin = _Ellipse(ell.center, ell.axis, 1.2 * ell.semi_major, 1.2 * ell.semi_minor)
    for o in others:
        if margin.contains(complex(o)):
            raise ContourDegeneracyError(
                "generator ellipse around (%s, %s) runs too close to branch "
                "point %s" % (z1, z2, o)
            )
    return ell


def _normalize_orientation(action, period):
    """Flip so Re S > 0, or Im S > 0 when the action is purely imaginary."""
    toln = 1e-9 * abs(action)
    if action.real < -toln or (abs(action.real) <= toln and action.imag < 0):
        return -1, -action, -period
    return 1, action, period


@lru_cache(maxsize=64)
def _generators(curve):
    bpts = [complex(b) for b in curve.branch_points]
    d = len(bpts)
    gens = []
    index = 0
    for k in range(d - 2, 0, -1):
        pair = (bpts[k], bpts[k + 1])
        others = bpts[:k] + bpts[k + 2:]
        ell = _pair_ellipse(pair[0], pair[1], others)
        action, period, p0 = _loop_integrals(curve, ell, +1)
        orient, action, period = _normalize_orientation(action, period)
        gens.append(
            Generator(
                index=index,
                pair=pair,
                ellipse=ell,
                orientation=orient,
                start_p=p0,
                action=action,
                time_period=period,
            )
        )
        index += 1
    return tuple(gens)


def generators(curve):
    """The geometric generator contours (ellipses, sheets, periods)."""
    return list(_generators(curve))


@lru_cache(maxsize=64)
def _basis_matrix(curve):
    """Columns express the public basis in geometric-generator coordinates.

    Identity except for genus-1 curves at real energy whose branch points
    split into a real pair and a conjugate imaginary pair (the over-barrier
    regime of a symmetric quartic).  There the basis is aligned with the
    elliptic period convention carried over from the all-real regime: the
    second generator stays the purely-imaginary-action cycle and the first
    is fixed so the classical real orbit decomposes as (1, -2).
    """
    gens = _generators(curve)
    n = len(gens)
    identity = tuple(
        tuple(1 if i == j else 0 for i in range(n)) for j in range(n)
    )
    if n != 2:
        return identity
    energy = curve.energy
    if abs(energy.imag) > 1e-12 * max(1.0, abs(energy)):
        return identity
    pts = np.array(curve.branch_points, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(pts))))
    n_real = int(np.sum(np.abs(pts.imag) < 1e-9 * scale))
    if n_real != 2:
        return identity
    s_im = gens[1].action
    if abs(s_im.real) > 1e-8 * abs(s_im):
        return identity
    try:
        orbit = real_orbit_trajectory(curve.potential, energy.real)
        r, _ = match_integer_combination(
            list(gens), complex(orbit.action), complex(orbit.time_period)
        )
    except (NoRealOrbitError, BasisMismatchError):
        return identity
    omega1 = (r[0], r[1] + 2)
    omega2 = (0, 1)
    # columns are the public generators
    return ((omega1[0], omega1[1]), (omega2[0], omega2[1]))


def _to_geometric(curve, coords):
    """Geometric-generator coordinates of public coords."""
    cols = _basis_matrix(curve)
    n = len(cols)
    geo = [0] * n
    for j, c in enumerate(coords):
        for i in range(n):
            geo[i] += c * cols[j][i]
    return tuple(geo)


def _from_geometric(curve, geo):
    """Public coordinates of a geometric integer vector (or None)."""
    cols = _basis_matrix(curve)
    n = len(cols)
    if n == 0:
        return ()
    b = np.array(cols, dtype=float).T
    x = np.linalg.solve(b, np.array(geo, dtype=float))
    pub = np.rint(x).astype(int)
    if not np.array_equal(np.array(_to_geometric(curve, tuple(pub))), np.array(geo)):
        return None
    return tuple(int(v) for v in pub)


def homology_basis(curve):
    """2g generator cycles; empty for genus 0.

    Generators are closed contours around adjacent sorted branch-point
    pairs, ordered from the rightmost pair inward; orientations are
    normalized so every action lies in the closed right half plane (purely
    imaginary actions point up).  See _basis_matrix for the over-barrier
    alignment of the quartic basis.
    """
    gens = generators(curve)
    bid = basis_id_for(curve)
    cycles = []
    for g in gens:
        coords = [0] * len(gens)
        coords[g.index] = 1
        cycles.append(Cycle(coords=tuple(coords), basis_id=bid))
    return cycles


# ---------------------------------------------------------------------------
# composite contours


def _sky_level(curve, gens):
    pts = np.array(curve.branch_points, dtype=complex)
    tops = np.array([g.ellipse.top for g in gens], dtype=complex)
    diam = float(np.max(np.abs(pts[:, None] - pts[None, :]))) if len(pts) > 1 else 1.0
    return float(max(pts.imag.max(), tops.imag.max()) + diam + 1.0)


def _bridge_waypoints(anchor, top, sky):
    return [anchor, complex(top.real, sky), top]


def _walk_bridge(curve, waypoints, p_in, tol):
    s = 0j
    t = 0j
    for za, zb in zip(waypoints[:-1], waypoints[1:]):
        ds, dt, p_in = _segment_integrals(curve, za, zb, p_in, tol)
        s += ds
        t += dt
    return s, t, p_in


def _composite_integrals(curve, gens, coords, tol=REL_QUAD_TOL):
    """Walk the contour realizing sum_i coords[i] * generator_i.

    Excursions from a single sky anchor: down to a generator basepoint,
    |n| loops (direction fixed by the arrival sheet so each traversal adds
    the generator's normalized class), and back up the same connector.
    """
    active = [(g, coords[g.index]) for g in gens if coords[g.index] != 0]
    sky = _sky_level(curve, gens)
    anchor = complex(active[0][0].ellipse.top.real, sky)
    p0 = complex(np.sqrt(curve.momentum_squared(anchor)))
    p_cur = p0
    total_s = 0j
    total_t = 0j
    for g, n in active:
        path = _bridge_waypoints(anchor, g.ellipse.top, sky)
        ds, dt, p_cur = _walk_bridge(curve, path, p_cur, tol)
        total_s += ds
        total_t += dt
        same = abs(p_cur - g.start_p)
        opposite = abs(p_cur + g.start_p)
        if min(same, opposite) > 0.25 * max(same, opposite):
            raise ContourDegeneracyError(
                "ambiguous sheet on arrival at generator %d" % g.index
            )
        sheet = 1 if same < opposite else -1
        direction = g.orientation * sheet * (1 if n > 0 else -1)
        ls, lt, _ = _loop_integrals(curve, g.ellipse, direction, p_cur, tol)
        total_s += abs(n) * ls
        total_t += abs(n) * lt
        ds, dt, p_cur = _walk_bridge(curve, list(reversed(path)), p_cur, tol)
        total_s += ds
        total_t += dt
    if abs(p_cur - p0) > 1e-6 * (abs(p0) + 1e-30):
        raise ContourDegeneracyError(
            "sheet bookkeeping failed to close (|dp| = %.3e)" % abs(p_cur - p0)
        )
    return total_s, total_t


# ---------------------------------------------------------------------------
# public period operations


def cycle_period(curve, cycle):
    """PeriodData for one cycle: S = loop integral of p dq, T of dq/(2p).

    Single geometric loops use the cached generator values; other classes
    are walked as composite contours with full sheet bookkeeping.
    """
    if cycle.kind == "real_orbit_direct":
        return _real_orbit_direct_period(curve, cycle)
    gens = generators(curve)
    if len(cycle.coords) != len(gens):
        raise ValidationError(
            "cycle has %d coordinates but the curve has %d generators"
            % (len(cycle.coords), len(gens))
        )
    if cycle.is_trivial():
        return PeriodData(cycle=cycle, action=0j, time_period=0j)
    geo = _to_geometric(curve, cycle.coords)
    nonzero = [(i, c) for i, c in enumerate(geo) if c != 0]
    if len(nonzero) == 1 and abs(nonzero[0][1]) == 1:
        i, c = nonzero[0]
        g = gens[i]
        return PeriodData(cycle=cycle, action=c * g.action, time_period=c * g.time_period)
    action, period = _composite_integrals(curve, gens, geo)
    return PeriodData(cycle=cycle, action=action, time_period=period)


def period_lattice(curve):
    """cycle_period over the homology basis (empty for genus 0)."""
    return [cycle_period(curve, c) for c in homology_basis(curve)]


def primitive_decomposition(cycle):
    """(primitive cycle, repetition count r) with coords = r * primitive."""
    if cycle.kind != "homology" or cycle.is_trivial():
        raise ValidationError("trivial cycle has no primitive decomposition")
    r = 0
    for c in cycle.coords:
        r = math.gcd(r, abs(c))
    prim = tuple(c // r for c in cycle.coords)
    return Cycle(coords=prim, basis_id=cycle.basis_id, kind=cycle.kind), r


# ---------------------------------------------------------------------------
# real classical orbits


def real_turning_points(potential, energy):
    """Real simple roots of E - V(q), ascending."""
    coeffs = [-c for c in potential.coeffs]
    coeffs[0] += float(energy)
    roots = np.polynomial.polynomial.polyroots(np.array(coeffs, dtype=complex))
    scale = max(1.0, float(np.max(np.abs(roots))))
    real = sorted(r.real for r in roots if abs(r.imag) < 1e-9 * scale)
    return real

def allowed_intervals(potential, energy):
    """Maximal intervals of classically allowed motion (E - V > 0)."""
    pts = real_turning_points(potential, energy)
    intervals = []
    for a, b in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (a + b)
        if (energy - potential(mid)).real > 0:
            intervals.append((a, b))
    return intervals


@dataclass(frozen=True)
class RealOrbit:
    """One period of real classical motion, from direct time integration."""

    energy: float
    interval: tuple
    action: float
    time_period: float
    times: tuple
    positions: tuple
    momenta: tuple

    def resample(self, n):
        """(q, p) at n uniformly spaced times over one period."""
        t = np.linspace(0.0, self.time_period, n, endpoint=False)
        q = np.interp(t, self.times, self.positions, period=self.time_period)
        p = np.interp(t, self.times, self.momenta, period=self.time_period)
        return q, p


def real_orbit_trajectory(potential, energy, interval=None, rtol=1e-12):
    """Integrate Hamilton's equations over exactly one period.

    H = p^2 + V(q): dq/dt = 2p, dp/dt = -V'(q).  The section q = q0 with
    q increasing detects the period; the action accumulates 2 p^2.
    """
    energy = float(energy)
    if interval is None:
        intervals = allowed_intervals(potential, energy)
        if not intervals:
            raise NoRealOrbitError(
                "no classically allowed real motion at E = %g" % energy
            )
        interval = intervals[-1]
    a, b = interval
    q0 = 0.5 * (a + b)
    w2 = energy - potential(q0)
    if w2 <= 0:
        raise NoRealOrbitError("interval midpoint is classically forbidden")
    p0 = math.sqrt(float(w2))

    def rhs(t, y):
        q, p, _ = y
        return [2.0 * p, -float(potential.derivative(q).real), 2.0 * p * p]

    # Section offset from the start point so the t = 0 state does not
    # register as a crossing; the period is the gap between the first two
    # upward crossings of the offset section.
    q_section = q0 + 0.25 * (b - q0)

    def section(t, y):
        return y[0] - q_section

    section.terminal = 2
    section.direction = 1.0

    # crude period estimate for the time budget
    qs = np.linspace(a, b, 257)[1:-1]
    integrand = 1.0 / np.sqrt(np.maximum(energy - potential(qs).real, 1e-300))
    t_estimate = float(np.trapz(integrand, qs))
    t_max = 10.0 * t_estimate + 10.0

    sol = solve_ivp(
        rhs,
        (0.0, t_max),
        [q0, p0, 0.0],
        method="DOP853",
        rtol=rtol,
        atol=1e-13,
        events=section,
        dense_output=True,
        max_step=t_estimate / 20.0,
    )
    if len(sol.t_events[0]) < 2:
        raise NoRealOrbitError("orbit failed to return to its section")
    period = float(sol.t_events[0][1] - sol.t_events[0][0])
    action = float(sol.y_events[0][1][2] - sol.y_events[0][0][2])
    t_start = float(sol.t_events[0][0])
    ts = t_start + np.linspace(0.0, period, 512, endpoint=False)
    states = sol.sol(ts)
    return RealOrbit(
        energy=energy,
        interval=(float(a), float(b)),
        action=action,
        time_period=period,
        times=tuple(ts - t_start),
        positions=tuple(states[0]),
        momenta=tuple(states[1]),
    )


def match_integer_combination(gens, action, period, residual_tol=MATCH_RESIDUAL):
    """Integer coordinates n with sum n_i (S_i, T_i) = (action, period).

    Least squares over the real/imaginary parts, rounded, with a relative
    residual check.  Raises BasisMismatchError beyond residual_tol.
    """
    rows = []
    for g in gens:
        rows.append(
            [g.action.real, g.action.imag, g.time_period.real, g.time_period.imag]
        )
    a = np.array(rows, dtype=float).T
    b = np.array([action.real, action.imag, period.real, period.imag])
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    n = np.rint(x).astype(int)
    residual = float(np.linalg.norm(a @ n - b)) / max(1.0, float(np.linalg.norm(b)))
    if residual > residual_tol:
        raise BasisMismatchError(
            "periods (%s, %s) are not an integer combination of the basis "
            "(best %s, residual %.3e)" % (action, period, n.tolist(), residual)
        )
    return [int(v) for v in n], residual


def identify_class(curve, action, period, residual_tol=MATCH_RESIDUAL):
    """Public-basis coordinates of the class with the given (S, T).

    Matches in the geometric basis, then converts; raises
    BasisMismatchError when the periods fall outside the public lattice.
    """
    gens = generators(curve)
    geo, residual = match_integer_combination(gens, action, period, residual_tol)
    pub = _from_geometric(curve, tuple(geo))
    if pub is None:
        raise BasisMismatchError(
            "class %s lies outside the public period lattice" % (geo,)
        )
    return Cycle(coords=pub, basis_id=basis_id_for(curve)), residual


def real_orbit_cycle(curve):
    """Homology coordinates of the classical real orbit at real energy.

    Determined by one period of real-time Hamilton integration matched to
    the generator period lattice.  Genus-0 curves return the direct
    contour marker instead of homology coordinates.
    """
    energy = curve.energy
    if abs(energy.imag) > 1e-12 * max(1.0, abs(energy)):
        raise ValidationError("real orbit requires real energy")
    intervals = allowed_intervals(curve.potential, energy.real)
    if not intervals:
        raise NoRealOrbitError("no real turning points at E = %s" % energy)
    bid = basis_id_for(curve)
    if curve.genus == 0:
        return Cycle(coords=(), basis_id=bid, kind="real_orbit_direct")
    orbit = real_orbit_trajectory(curve.potential, energy.real, intervals[-1])
    cyc, _ = identify_class(curve, complex(orbit.action), complex(orbit.time_period))
    return cyc


def real_orbit_contour(curve):
    """Sampled contour of the genus-0 real orbit (ellipse around the only
    branch pair), for curves without homology generators."""
    if curve.genus != 0:
        raise ValidationError("direct real-orbit contour is the genus-0 path")
    z1, z2 = curve.branch_points
    ell = _pair_ellipse(complex(z1), complex(z2), [])
    phi = np.linspace(0.0, 2 * np.pi, 512, endpoint=False)
    return ell.point(0.5 * np.pi + phi)


def _real_orbit_direct_period(curve, cycle):
    z1, z2 = curve.branch_points
    ell = _pair_ellipse(complex(z1), complex(z2), [])
    action, period, _ = _loop_integrals(curve, ell, +1)
    _, action, period = _normalize_orientation(action, period)
    return PeriodData(cycle=cycle, action=action, time_period=period)
