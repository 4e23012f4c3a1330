"""Assembly of the semiclassical and quantum trace-formula densities.

Both densities share the smooth phase-space term Gamma(E); the orbit sums
differ in their amplitudes: the semiclassical sum uses the 1D libration
weight T_p / (2 pi) per repetition (the parabolic-monodromy limit of the
Gutzwiller amplitude, with +-r repetitions paired into cosines), while the
quantum sum uses one-loop determinant amplitudes from the loop-space
module and explicit intersection-number rules per homology class.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateEnergyError,
    NoRealOrbitError,
    NoVolumeError,
    ValidationError,
)
from . import loopspace as _loop
from . import periods as _periods
from . import spectrum as _spectrum
from .model import curve as _curve

IMAG_ACTION_RTOL = 1e-8


@dataclass(frozen=True)
class TraceTerm:
    """One orbit-sum term: class, repetition, action, amplitude, phases."""

    orbit_class: object
    repetition: int
    action: complex
    amplitude: complex
    maslov: int
    intersection: int
    provenance: str

    def __post_init__(self):
        if self.repetition < 1:
            raise ValidationError("repetition must be >= 1")
        if self.provenance not in ("semiclassical", "one-loop-quantum"):
            raise ValidationError("unknown provenance %r" % (self.provenance,))


class MaslovResult(NamedTuple):
    index: int
    flagged: bool
    reason: str


class EbkResult(NamedTuple):
    levels: tuple
    skipped: tuple   # requested n that fell outside the action range


@dataclass(frozen=True)
class TunnelingPoint:
    coefficients: tuple
    doublet_energy: float
    splitting: float
    barrier_action_imag: float
    log_splitting: float
    residual: float


@dataclass(frozen=True)
class TunnelingReport:
    slope: object          # float or None for degenerate regressions
    points: tuple
    skipped: tuple         # (coefficients, reason)


# ---------------------------------------------------------------------------
# turning-point data for the real orbit sum


def _well_data(potential, energy):
    """(S, T) of the primitive libration in each allowed interval.

    S = 2 integral of sqrt(E - V), T = integral of dq/sqrt(E - V); the
    sin substitution removes the turning-point singularities.
    """
    intervals = _periods.allowed_intervals(potential, energy)
    if not intervals:
        raise NoRealOrbitError("no classically allowed motion at E = %g" % energy)
    out = []
    for a, b in intervals:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        prev = None
        n = 32
        while n <= (1 << 15):
            phi, w = np.polynomial.legendre.leggauss(n)
            phi = phi * (0.5 * np.pi)
            w = w * (0.5 * np.pi)
            q = mid + half * np.sin(phi)
            ratio = (energy - np.asarray(potential(q), dtype=float)) / (
                (q - a) * (b - q)
            )
            if np.any(ratio <= 0):
                raise DegenerateEnergyError(
                    "allowed interval (%g, %g) is not simple" % (a, b)
                )
            root = np.sqrt(ratio)
            cosphi = np.cos(phi)
            action = 2.0 * half**2 * float(np.sum(w * cosphi**2 * root))
            period = float(np.sum(w / root))
            if prev is not None and (
                abs(action - prev[0]) <= 1e-11 * (abs(action) + 1e-30)
                and abs(period - prev[1]) <= 1e-11 * (abs(period) + 1e-30)
            ):
                break
            prev = (action, period)
            n *= 2
        out.append(((float(a), float(b)), action, period))
    return out


def maslov_index(curve, cycle):
    """Turning-point traversal count of a cycle's nominal contour.

    Each generator is pictured as one loop around its branch-point pair;
    the index sums |winding| over branch points.  Cycles whose contour
    winds around no real turning point report 0 with a flag; composite
    cycles are flagged for review (the convention beyond single real
    librations is a heuristic).
    """
    if cycle.kind == "real_orbit_direct":
        return MaslovResult(index=2, flagged=False, reason="")
    gens = _periods.generators(curve)
    if len(cycle.coords) != len(gens):
        raise ValidationError("cycle does not match the curve's basis")
    if cycle.is_trivial():
        return MaslovResult(index=0, flagged=True, reason="trivial cycle")
    winding = {}
    for g, c in zip(gens, cycle.coords):
        for b in g.pair:
            winding[b] = winding.get(b, 0) + c
    total = sum(abs(w) for w in winding.values())
    scale = max(1.0, max(abs(b) for b in winding))
    real_touched = any(
        abs(b.imag) < 1e-9 * scale and w != 0 for b, w in winding.items()
    )
    if not real_touched:
        return MaslovResult(index=0, flagged=True, reason="no real turning points")
    composite = sum(1 for c in cycle.coords if c != 0) > 1 or any(
        abs(c) > 1 for c in cycle.coords
    )
    if composite:
        return MaslovResult(
            index=total,
            flagged=True,
            reason="composite cycle: traversal count needs review",
        )
    return MaslovResult(index=total, flagged=False, reason="")


# ---------------------------------------------------------------------------
# semiclassical density (Eq.-3-type assembly)


def semiclassical_density(potential, e_grid, r_max, sigma, collect_terms=False):
    """Smoothed density of states from the real-orbit sum.

    d(E) = Gamma(E) + sum over wells and repetitions of
    2 (T/2pi) cos(r (S - pi mu / 2)) exp(-(r T sigma)^2 / 2) with mu = 2;
    degenerate grid energies are skipped (NaN) and reported.
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    if r_max < 0:
        raise ValidationError("r_max must be nonnegative")
    values = []
    skipped = []
    terms = []
    for energy in e_grid:
        energy = float(energy)
        try:
            gamma = _spectrum.phase_space_volume(potential, energy)
            wells = _well_data(potential, energy) if r_max > 0 else []
        except (DegenerateEnergyError, NoVolumeError, NoRealOrbitError) as exc:
            skipped.append((energy, str(exc)))
            values.append(math.nan)
            continue
        total = gamma
        for (interval, action, period) in wells:
            weight = period / (2.0 * math.pi)
            for r in range(1, r_max + 1):
                damp = math.exp(-0.5 * (r * period * sigma) ** 2)
                total += 2.0 * weight * math.cos(r * (action - math.pi)) * damp
                if collect_terms:
                    terms.append(
                        {
                            "energy": energy,
                            "interval": interval,
                            "repetition": r,
                            "action": action,
                            "amplitude": weight,
                            "maslov": 2,
                            "damping": damp,
                        }
                    )
        values.append(total)
    if collect_terms:
        return values, skipped, terms
    return values


# ---------------------------------------------------------------------------
# quantum density (Eq.-10-type assembly)


def default_intersection(action, requested=None):
    """The rule set for n_rp: 1 for real-action classes, 0 for classes
    with negative imaginary action, requested (default 1) for tunneling
    classes; requesting n != 0 below the axis is rejected."""
    scale = abs(action) + 1e-300
    if abs(action.imag) <= IMAG_ACTION_RTOL * scale:
        return 1 if requested is None else int(requested)
    if action.imag > 0:
        return 1 if requested is None else int(requested)
    if requested not in (None, 0):
        raise ValidationError(
            "class with Im S < 0 cannot intersect the real contour; "
            "requested n = %r rejected" % (requested,)
        )
    return 0


def _orbit_for_class(potential, energy, cycle, n_modes, warm=None):
    """Refined loop orbit in the requested homology class.

    Supports the classical real-orbit class and the purely imaginary
    tunneling class; other classes have no seed constructor here.
    """
    if warm is not None:
        try:
            seeded = _loop.replace_energy(warm, energy)
            orbit = _loop.refine_orbit(seeded)
            if cycle.kind == "real_orbit_direct":
                return orbit
            if _loop.orbit_class(orbit).coords == cycle.coords:
                return orbit
        except Exception:
            pass
    c = _curve(potential, energy)
    real_cycle = _periods.real_orbit_cycle(c)
    if cycle.coords == real_cycle.coords:
        seed = _loop.real_orbit_seed(potential, energy, n_modes)
        return _loop.refine_orbit(seed)
    pd = _periods.cycle_period(c, cycle)
    if abs(pd.action.real) <= IMAG_ACTION_RTOL * abs(pd.action):
        seed = _loop.tunneling_seed(potential, energy, n_modes)
        orbit = _loop.refine_orbit(seed)
        got = _loop.orbit_class(orbit)
        if got.coords != cycle.coords:
            raise ValidationError(
                "tunneling seed landed in class %s, not %s"
                % (got.coords, cycle.coords)
            )
        return orbit
    raise ValidationError(
        "no orbit constructor for class %s (real and tunneling classes "
        "are supported)" % (cycle.coords,)
    )


def quantum_density(
    potential,
    e_grid,
    classes,
    r_max,
    sigma,
    n_modes=12,
    collect_terms=False,
):
    """Smoothed density from the one-loop quantum orbit sum.

    classes is a list of (Cycle, n) pairs; n = None applies the default
    intersection rule.  Each class is paired with its orientation
    reversal (whose n follows the rule) so the assembled density is real;
    the smooth term is Gamma(E).  Amplitudes are one-loop only.
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    values = []
    skipped = []
    terms = []
    warm = {}
    for energy in e_grid:
        energy = float(energy)
        try:
            gamma = _spectrum.phase_space_volume(potential, energy)
            c = _curve(potential, energy)
        except (DegenerateEnergyError, NoVolumeError) as exc:
            skipped.append((energy, str(exc)))
            values.append(math.nan)
            continue
        total = complex(gamma)
        for cycle, requested in classes:
            pd = _periods.cycle_period(c, cycle)
            orbit = None
            # the orientation reversal negates (S, T) exactly; pairing the
            # two keeps the assembled density real
            for orient in (1, -1):
                action_o = orient * pd.action
                n_rp = default_intersection(
                    action_o, requested if orient == 1 else None
                )
                if n_rp == 0 or r_max < 1:
                    continue
                if orbit is None:
                    orbit = _orbit_for_class(
                        potential, energy, cycle, n_modes, warm.get(cycle.coords)
                    )
                    warm[cycle.coords] = orbit
                for r in range(1, r_max + 1):
                    amp, _ = _loop.gaussian_amplitude(orbit, r, refine_modes=False)
                    damp = math.exp(-0.5 * (r * abs(pd.time_period) * sigma) ** 2)
                    total += n_rp * amp * np.exp(1j * r * action_o) * damp
                    if collect_terms:
                        terms.append(
                            TraceTerm(
                                orbit_class=cycle,
                                repetition=r,
                                action=complex(action_o),
                                amplitude=complex(amp),
                                maslov=2,
                                intersection=n_rp,
                                provenance="one-loop-quantum",
                            )
                        )
        if abs(total.imag) > 1e-10 * (abs(total) + 1.0):
            raise ValidationError(
                "assembled density has imaginary residue %.3e" % total.imag
            )
        values.append(float(total.real))
    if collect_terms:
        return values, skipped, terms
    return values


# ---------------------------------------------------------------------------
# EBK levels


def _rightmost_action(potential, energy):
    wells = _well_data(potential, energy)
    return wells[-1][1]


def ebk_levels(potential, n_range, tol=1e-12):
    """Energies with S(E) = 2 pi (n + 1/2) on the rightmost well (mu = 2).

    Bisection on the monotone action; requested levels whose target falls
    in the gap at a well merger (or beyond the bracketing budget) are
    reported in `skipped`.
    """
    vmin = _spectrum._potential_minimum(potential)
    levels = []
    skipped = []
    for n in n_range:
        if n < 0:
            skipped.append((int(n), "negative quantum number"))
            continue
        target = 2.0 * math.pi * (n + 0.5)
        lo = vmin + 1e-9 * max(1.0, abs(vmin))
        hi = vmin + 1.0
        ok = False
        for _ in range(200):
            try:
                if _rightmost_action(potential, hi) >= target:
                    ok = True
                    break
            except (DegenerateEnergyError, NoRealOrbitError):
                pass
            hi = vmin + 2.0 * (hi - vmin)
        if not ok:
            skipped.append((int(n), "action range exhausted"))
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            try:
                s_mid = _rightmost_action(potential, mid)
            except (DegenerateEnergyError, NoRealOrbitError):
                lo = mid
                continue
            if s_mid < target:
                lo = mid
            else:
                hi = mid
            if hi - lo < tol * max(1.0, abs(hi)):
                break
        e_star = 0.5 * (lo + hi)
        try:
            if abs(_rightmost_action(potential, e_star) - target) > 1e-6 * target:
                skipped.append((int(n), "target falls across a well merger"))
                continue
        except (DegenerateEnergyError, NoRealOrbitError):
            skipped.append((int(n), "degenerate energy at the bisection point"))
            continue
        levels.append(float(e_star))
    return EbkResult(levels=tuple(levels), skipped=tuple(skipped))


# ---------------------------------------------------------------------------
# tunneling regression


def _imaginary_generator_action(potential, energy):
    """Im S of the purely-imaginary-action homology generator."""
    c = _curve(potential, energy)
    for pd in _periods.period_lattice(c):
        if abs(pd.action.real) <= 1e-8 * abs(pd.action):
            return float(pd.action.imag)
    raise ValidationError("no purely imaginary cycle at E = %g" % energy)


def tunneling_report(potential_family, doublet_index=0, spectrum_tol=1e-9):
    """ln(splitting) against the imaginary barrier action over a family.

    For each member: the oracle doublet splitting Delta E and
    Theta = Im S(tunneling cycle) at the doublet energy; the regression
    slope of ln Delta E on -Theta is 1 for ideal instanton scaling.
    """
    points = []
    skipped = []
    for pot in potential_family:
        coeffs = tuple(pot.coeffs)
        count = 2 * (doublet_index + 1)
        try:
            spec = _spectrum.eigenvalues(pot, count, tol=spectrum_tol)
        except Exception as exc:
            skipped.append((coeffs, "spectrum failed: %s" % exc))
            continue
        e_lo = spec.eigenvalues[2 * doublet_index]
        e_hi = spec.eigenvalues[2 * doublet_index + 1]
        splitting = e_hi - e_lo
        if splitting <= 1e-12:
            skipped.append((coeffs, "unresolvable splitting %.3e" % splitting))
            continue
        e_mid = 0.5 * (e_lo + e_hi)
        try:
            theta = _imaginary_generator_action(pot, e_mid)
        except Exception as exc:
            skipped.append((coeffs, "no tunneling cycle: %s" % exc))
            continue
        points.append(
            TunnelingPoint(
                coefficients=coeffs,
                doublet_energy=float(e_mid),
                splitting=float(splitting),
                barrier_action_imag=float(theta),
                log_splitting=float(math.log(splitting)),
                residual=0.0,
            )
        )
    slope = None
    if len(points) >= 2:
        x = np.array([-p.barrier_action_imag for p in points])
        y = np.array([p.log_splitting for p in points])
        if float(np.var(x)) > 0:
            slope = float(np.cov(x, y, bias=True)[0, 1] / np.var(x))
            fit = y.mean() + slope * (x - x.mean())
            points = tuple(
                TunnelingPoint(
                    coefficients=p.coefficients,
                    doublet_energy=p.doublet_energy,
                    splitting=p.splitting,
                    barrier_action_imag=p.barrier_action_imag,
                    log_splitting=p.log_splitting,
                    residual=float(y[i] - fit[i]),
                )
                for i, p in enumerate(points)
            )
    return TunnelingReport(slope=slope, points=tuple(points), skipped=tuple(skipped))