"""Exact quantum oracle: eigenvalues of -d^2/dq^2 + V(q) and densities.

hbar = 1 throughout, consistent with H = p^2 + V(q).  Eigenvalues come
from 3-point finite differences on [-L, L] with Richardson extrapolation
in the grid spacing; L is chosen so the classically forbidden tails carry
negligible eigenfunction mass.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import NoVolumeError, ResolutionError, ValidationError

WKB_TAIL_DECAY = 16.0  # integral of sqrt(V - E) beyond the box edge
_MAX_GRID = 1 << 21


@dataclass(frozen=True)
class Spectrum:
    """Converged low-lying eigenvalues with their discretization data."""

    eigenvalues: tuple
    potential: object
    grid_extent: float
    grid_points: int
    convergence: tuple

    def __len__(self):
        return len(self.eigenvalues)


class TraceU(NamedTuple):
    value: complex
    last_term_modulus: float


class FourierCheck(NamedTuple):
    max_relative_deviation: float
    reconstructed: tuple
    direct: tuple
    converged: bool


def _potential_minimum(potential):
    """Global minimum of V over the real line (confining potential)."""
    dcoeffs = np.polynomial.polynomial.polyder(potential.coeffs)
    roots = np.polynomial.polynomial.polyroots(np.array(dcoeffs, dtype=complex))
    candidates = [r.real for r in roots if abs(r.imag) < 1e-9 * (1 + abs(r))]
    if not candidates:
        candidates = [0.0]
    return min(float(potential(q).real) for q in candidates)


def _counting_estimate(potential, energy):
    """Approximate number of levels below `energy` (phase-space count)."""
    from .periods import allowed_intervals  # local: avoids cycle at import

    total = 0.0
    for a, b in allowed_intervals(potential, energy):
        qs = 0.5 * (a + b) + 0.5 * (b - a) * np.sin(
            np.linspace(-0.5 * np.pi, 0.5 * np.pi, 301)[1:-1]
        )
        vals = np.sqrt(np.maximum((energy - potential(qs)).real, 0.0))
        # ds = (b-a)/2 cos(phi) dphi against sqrt(E - V)
        phi = np.linspace(-0.5 * np.pi, 0.5 * np.pi, 301)[1:-1]
        total += 2.0 * np.trapz(vals * 0.5 * (b - a) * np.cos(phi), phi)
    return total / (2 * np.pi)


def _energy_budget(potential, count):
    """Energy comfortably above the `count`-th level."""
    vmin = _potential_minimum(potential)
    e = vmin + 1.0
    while _counting_estimate(potential, e) < count + 3:
        e = vmin + 2.0 * (e - vmin)
        if e - vmin > 1e12:
            raise ResolutionError("could not bracket the requested level count")
    return e


def _box_extent(potential, e_top):
    """Half-width L with WKB tail integral beyond the turning points."""
    from .periods import real_turning_points

    pts = real_turning_points(potential, e_top)
    q_out = max(abs(pts[0]), abs(pts[-1])) if pts else 1.0
    L = q_out * 1.05 + 0.1
    while True:
        qs = np.linspace(q_out, L, 513)
        barrier = np.sqrt(np.maximum((potential(qs) - e_top).real, 0.0))
        if np.trapz(barrier, qs) >= WKB_TAIL_DECAY:
            return L
        L = 1.3 * L + 0.1
        if L > 1e6:
            raise ResolutionError("potential too shallow for a finite box")


def _fd_levels(potential, count, L, m, tol):
    """Lowest `count` Dirichlet eigenvalues on an m-point interior grid."""
    h = 2.0 * L / (m + 1)
    x = -L + h * np.arange(1, m + 1)
    diag = 2.0 / h**2 + np.asarray(potential(x), dtype=float)
    off = np.full(m - 1, -1.0 / h**2)
    # explicit bisection tolerance: the LAPACK default scales with the
    # matrix norm ~ 2/h^2 and would swamp tight convergence targets
    return eigvalsh_tridiagonal(
        diag,
        off,
        select="i",
        select_range=(0, count - 1),
        lapack_driver="stebz",
        tol=min(0.01 * tol, 1e-10),
    )


def eigenvalues(potential, count, tol=1e-8):
    """Lowest `count` eigenvalues of -d''/dq'' + V to tolerance `tol`.

    Doubles the grid until the Richardson-extrapolated levels move by less
    than tol; the per-level convergence estimates are stored alongside.
    """
    if count < 0:
        raise ValidationError("count must be nonnegative")
    if count == 0:
        return Spectrum(
            eigenvalues=(),
            potential=potential,
            grid_extent=0.0,
            grid_points=0,
            convergence=(),
        )
    e_top = _energy_budget(potential, count)
    L = _box_extent(potential, e_top)
    m = 1024
    coarse = _fd_levels(potential, count, L, m, tol)
    previous = None
    while m <= _MAX_GRID:
        fine = _fd_levels(potential, count, L, 2 * m + 1, tol)
        richardson = (4.0 * fine - coarse) / 3.0
        if previous is not None:
            shifts = np.abs(richardson - previous)
            if np.max(shifts) < tol:
                return Spectrum(
                    eigenvalues=tuple(float(e) for e in richardson),
                    potential=potential,
                    grid_extent=float(L),
                    grid_points=2 * m + 1,
                    convergence=tuple(float(s) for s in shifts),
                )
        previous = richardson
        coarse = fine
        m = 2 * m + 1
    raise ResolutionError(
        "eigenvalues did not converge to %g within the grid budget" % tol
    )


def smoothed_density(spec, sigma, grid):
    """Gaussian-smoothed density of states on the energy grid."""
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    grid = np.asarray(grid, dtype=float)
    if not len(spec.eigenvalues):
        return [0.0] * len(grid)
    levels = np.array(spec.eigenvalues)
    norm = 1.0 / (sigma * math.sqrt(2 * math.pi))
    dens = norm * np.exp(-((grid[:, None] - levels[None, :]) ** 2) / (2 * sigma**2))
    return [float(v) for v in dens.sum(axis=1)]


def trace_U(spec, t):
    """Tr U(t) = sum_n exp(-i E_n t) over the available levels.

    Im t must be <= 0 (otherwise the summands grow with energy).  The
    modulus of the last retained term is reported as a truncation gauge.
    """
    t = complex(t)
    if t.imag > 1e-12 * max(1.0, abs(t)):
        raise ValidationError("Im t > 0 makes the trace sum grow; use Im t <= 0")
    if not len(spec.eigenvalues):
        return TraceU(value=0j, last_term_modulus=0.0)
    levels = np.array(spec.eigenvalues)
    terms = np.exp(-1j * levels * t)
    return TraceU(value=complex(terms.sum()), last_term_modulus=float(abs(terms[-1])))


def fourier_density_check(spec, sigma, grid):
    """Self-consistency of the trace transform and the smoothed density.

    Reconstructs (1/2pi) integral of exp(iEt - sigma^2 t^2 / 2) Tr U(t)
    over t in [-8/sigma, 8/sigma] and compares with smoothed_density on
    the same grid; both sides share the Gaussian kernel.
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    grid = np.asarray(grid, dtype=float)
    direct = np.array(smoothed_density(spec, sigma, grid))
    if not len(spec.eigenvalues):
        return FourierCheck(0.0, tuple(0.0 for _ in grid), tuple(direct), True)
    t_max = 8.0 / sigma
    levels = np.array(spec.eigenvalues)
    # resolve the fastest phase on the grid
    omega = float(np.max(np.abs(grid[:, None] - levels[None, :])))
    n_t = int(max(2048, 8 * omega * t_max))
    if n_t > 4_000_000:
        return FourierCheck(math.inf, tuple(), tuple(direct), False)
    ts = np.linspace(-t_max, t_max, n_t + 1)
    damping = np.exp(-0.5 * sigma**2 * ts**2)
    trace = np.exp(-1j * levels[None, :] * ts[:, None]).sum(axis=1)
    integrand = np.exp(1j * grid[:, None] * ts[None, :]) * (damping * trace)[None, :]
    recon = np.trapz(integrand, ts, axis=1).real / (2 * np.pi)
    scale = float(np.max(np.abs(direct))) or 1.0
    deviation = float(np.max(np.abs(recon - direct)) / scale)
    return FourierCheck(
        max_relative_deviation=deviation,
        reconstructed=tuple(float(v) for v in recon),
        direct=tuple(float(v) for v in direct),
        converged=True,
    )


def phase_space_volume(potential, energy):
    """Gamma(E): phase-space volume of the energy surface, 1D.

    (1/2pi) times the integral of dq/sqrt(E - V) over every classically
    allowed interval; equals the summed real well periods over 2 pi.
    """
    from .periods import allowed_intervals

    energy = float(energy)
    vmin = _potential_minimum(potential)
    if energy <= vmin + 1e-12 * max(1.0, abs(vmin)):
        raise NoVolumeError("E = %g is not above min V = %g" % (energy, vmin))
    intervals = allowed_intervals(potential, energy)
    if not intervals:
        raise NoVolumeError("no classically allowed region at E = %g" % energy)
    total = 0.0
    for a, b in intervals:
        total += _interval_time(potential, energy, a, b)
    return total / (2 * np.pi)


def _interval_time(potential, energy, a, b, tol=1e-11):
    """Integral of dq / sqrt(E - V) over one allowed interval.

    The substitution q = mid + half sin(phi) removes the inverse-sqrt
    turning-point singularities: the integrand becomes 1/sqrt(w) with
    w = (E - V) / ((q - a)(b - q)) smooth and positive.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    prev = None
    n = 32
    while n <= (1 << 16):
        phi, weights = np.polynomial.legendre.leggauss(n)
        phi = phi * (0.5 * np.pi)
        weights = weights * (0.5 * np.pi)
        q = mid + half * np.sin(phi)
        w = (energy - np.asarray(potential(q), dtype=float)) / ((q - a) * (b - q))
        if np.any(w <= 0):
            raise NoVolumeError("allowed interval (%g, %g) is not simple" % (a, b))
        value = float(np.sum(weights / np.sqrt(w)))
        if prev is not None and abs(value - prev) <= tol * (abs(value) + 1e-30):
            return value
        prev = value
        n *= 2
    raise ResolutionError("turning-point quadrature failed to converge")
