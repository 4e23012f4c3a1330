"""Fourier-discretized complexified loops and their action functional.

A loop state is a truncated Fourier series for (q(eta), p(eta)) with
eta-period 1, together with a complex time period T and a real energy E.
The reparameterized reduced action

    S~ = closed integral of p dq + T * integral of (E - H) d eta

is stationary exactly on complex periodic orbits: dz/d eta = T O grad H
with H = E on the loop.  This module evaluates S~, refines orbits by
Newton iteration, integrates the loop-space gradient flow of Re(i S~)
(the coupled flow with complexified T), and computes one-loop Gaussian
amplitudes from the second variation with the critical-manifold zero
modes projected out.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateOrbitError,
    FlowStallError,
    NoConvergenceError,
    ResolutionError,
    ValidationError,
)
from . import periods as _periods
from .model import curve as _curve

MIN_MODES = 8
ALIAS_FRACTION = 1e-6
NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50


@dataclass(frozen=True)
class LoopState:
    """Fourier loop (q, p) with complex period T at real energy E.

    q_modes[j], p_modes[j] are the coefficients of exp(2 pi i k eta) for
    k = j - n_modes, j = 0 .. 2 n_modes.
    """

    q_modes: tuple
    p_modes: tuple
    period: complex
    energy: float
    n_modes: int
    potential: object

    def __post_init__(self):
        n = int(self.n_modes)
        if n < MIN_MODES:
            raise ValidationError("n_modes must be >= %d" % MIN_MODES)
        if len(self.q_modes) != 2 * n + 1 or len(self.p_modes) != 2 * n + 1:
            raise ValidationError("mode arrays must have length 2 n_modes + 1")
        object.__setattr__(self, "q_modes", tuple(complex(c) for c in self.q_modes))
        object.__setattr__(self, "p_modes", tuple(complex(c) for c in self.p_modes))
        object.__setattr__(self, "period", complex(self.period))
        object.__setattr__(self, "energy", float(self.energy))

    @property
    def wavenumbers(self):
        return np.arange(-self.n_modes, self.n_modes + 1)

    def q_array(self):
        return np.array(self.q_modes, dtype=complex)

    def p_array(self):
        return np.array(self.p_modes, dtype=complex)


@dataclass(frozen=True)
class FlowTrajectory:
    """Accepted flow states and the Morse-function record along them."""

    states: tuple   # (tau, LoopState)
    morse_series: tuple  # (tau, Re(i S~), Im(i S~))


# ---------------------------------------------------------------------------
# spectral helpers


def _grid_size(n_modes, degree):
    """Padded grid length keeping products of degree `degree` alias-free
    inside the retained mode window."""
    need = degree * n_modes + n_modes + 1
    m = 1
    while m < need:
        m *= 2
    return m


def _to_physical(modes, m):
    n = (len(modes) - 1) // 2
    x = np.zeros(m, dtype=complex)
    k = np.arange(-n, n + 1)
    x[k % m] = modes
    return np.fft.ifft(x) * m


def _to_modes(values, n):
    m = len(values)
    x = np.fft.fft(values) / m
    k = np.arange(-n, n + 1)
    return x[k % m]


def _derivative_modes(modes):
    n = (len(modes) - 1) // 2
    k = np.arange(-n, n + 1)
    return 2j * np.pi * k * np.array(modes, dtype=complex)


def _flip(modes):
    """Modes of the complex conjugate function: conj(u)_k = conj(u_{-k})."""
    return np.conj(np.array(modes, dtype=complex)[::-1])


def check_aliasing(state):
    """Top-quartile mode energy must stay below ALIAS_FRACTION of total."""
    q = state.q_array()
    p = state.p_array()
    k = state.wavenumbers
    total = float(np.sum(np.abs(q) ** 2 + np.abs(p) ** 2))
    if total < 1e-300:
        return
    top = np.abs(k) >= int(math.ceil(0.75 * state.n_modes))
    frac = float(np.sum(np.abs(q[top]) ** 2 + np.abs(p[top]) ** 2)) / total
    if frac > ALIAS_FRACTION:
        raise ResolutionError(
            "top-quartile mode energy fraction %.2e exceeds %.0e; "
            "increase n_modes" % (frac, ALIAS_FRACTION)
        )


def _h_terms(state):
    """(mean of H on the loop, modes of V'(q), modes of V''(q))."""
    pot = state.potential
    n = state.n_modes
    m = _grid_size(n, pot.degree)
    q = _to_physical(state.q_array(), m)
    p = _to_physical(state.p_array(), m)
    h = p * p + pot(q)
    vp = pot.derivative(q)
    vpp = pot.second_derivative(q)
    mean_h = complex(np.mean(h))
    vp_modes = _to_modes(vp, n)
    vpp_modes2 = _to_modes(vpp, 2 * n)  # needed out to +-2N by the Hessian
    return mean_h, vp_modes, vpp_modes2


# ---------------------------------------------------------------------------
# action and residual


def action(state, check_resolution=True):
    """The reparameterized reduced action of the loop.

    The circulation term sums exactly over modes; the Hamiltonian term is
    pseudo-spectral on an alias-free padded grid.
    """
    if check_resolution:
        check_aliasing(state)
    q = state.q_array()
    p = state.p_array()
    k = state.wavenumbers
    circulation = complex(np.sum(p[::-1] * (2j * np.pi * k) * q))
    mean_h, _, _ = _h_terms(state)
    return circulation + state.period * (state.energy - mean_h)


def _residual_parts(state):
    """(R_q, R_p, R_E): the discretized stationarity equations."""
    q = state.q_array()
    p = state.p_array()
    t = state.period
    mean_h, vp_modes, _ = _h_terms(state)
    rq = _derivative_modes(q) - 2.0 * t * p
    rp = _derivative_modes(p) + t * vp_modes
    re = mean_h - state.energy
    return rq, rp, re


def critical_residual(state):
    """Norm of the discretized orbit equations; zero exactly on solutions."""
    check_aliasing(state)
    rq, rp, re = _residual_parts(state)
    return float(
        math.sqrt(
            float(np.sum(np.abs(rq) ** 2) + np.sum(np.abs(rp) ** 2)) + abs(re) ** 2
        )
    )


# ---------------------------------------------------------------------------
# Newton refinement


def _complex_jacobian(state):
    """Holomorphic Jacobian of (R_q, R_p, R_E) in (q, p, T)."""
    n = state.n_modes
    dim = 2 * n + 1
    p = state.p_array()
    t = state.period
    k = state.wavenumbers
    _, vp_modes, vpp2 = _h_terms(state)

    d = np.diag(2j * np.pi * k)
    jac = np.zeros((2 * dim + 1, 2 * dim + 1), dtype=complex)
    # R_q rows: D q - 2 T p
    jac[:dim, :dim] = d
    jac[:dim, dim:2 * dim] = -2.0 * t * np.eye(dim)
    jac[:dim, -1] = -2.0 * p
    # R_p rows: D p + T W(q); dW_k/dq_j = (V'' modes)[k - j]
    sub = np.subtract.outer(k, k)
    jac[dim:2 * dim, :dim] = t * vpp2[sub + 2 * n]
    jac[dim:2 * dim, dim:2 * dim] = d
    jac[dim:2 * dim, -1] = vp_modes
    # R_E row: mean H - E; d(mean H)/dq_j = (V')_{-j}, d/dp_j = 2 p_{-j}
    jac[-1, :dim] = vp_modes[::-1]
    jac[-1, dim:2 * dim] = 2.0 * p[::-1]
    return jac


def _stacked_system(state):
    """Real-stacked residual and Jacobian with the phase gauge row.

    Unknown vector layout: [Re X; Im X] with X = (q modes, p modes, T).
    """
    n = state.n_modes
    dim = 2 * n + 1
    rq, rp, re = _residual_parts(state)
    fc = np.concatenate([rq, rp, [re]])
    f = np.concatenate([fc.real, fc.imag, [0.0]])
    jc = _complex_jacobian(state)
    jr = np.block([[jc.real, -jc.imag], [jc.imag, jc.real]])
    gauge = np.zeros(2 * (2 * dim + 1))
    # Im of the k = +1 mode of q: imaginary block offset + index of k = 1
    gauge[(2 * dim + 1) + (n + 1)] = 1.0
    jr = np.vstack([jr, gauge])
    return f, jr


def _state_from_vector(state, x):
    dim = 2 * state.n_modes + 1
    xc = x[: 2 * dim + 1] + 1j * x[2 * dim + 1:]
    return replace(
        state,
        q_modes=tuple(xc[:dim]),
        p_modes=tuple(xc[dim:2 * dim]),
        period=complex(xc[-1]),
    )


def _state_to_vector(state):
    xc = np.concatenate(
        [state.q_array(), state.p_array(), [complex(state.period)]]
    )
    return np.concatenate([xc.real, xc.imag])


def refine_orbit(seed, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER):
    """Newton iteration on the discretized orbit equations.

    One linear gauge row (Im of the k = +1 mode of q) fixes the time
    translation; the remaining critical-manifold direction is handled by
    the least-squares step.  Raises NoConvergenceError with the residual
    history on divergence, DegenerateOrbitError when the Jacobian loses
    rank beyond the gauge mode.
    """
    state = seed
    history = [critical_residual(state)]
    x = _state_to_vector(state)
    for iteration in range(max_iter):
        if history[-1] < tol:
            return state
        f_vec, jac = _stacked_system(state)
        if iteration == 0:
            sv = np.linalg.svd(jac, compute_uv=False)
            tiny = int(np.sum(sv < 1e-10 * sv[0]))
            if tiny > 1:
                raise DegenerateOrbitError(
                    "orbit Jacobian has %d near-zero singular values beyond "
                    "the gauge mode" % tiny
                )
        step, *_ = np.linalg.lstsq(jac, -f_vec, rcond=None)
        scale = 1.0
        for _ in range(8):
            trial = _state_from_vector(state, x + scale * step)
            r = critical_residual(trial)
            if r < history[-1] or r < tol:
                break
            scale *= 0.5
        else:
            raise NoConvergenceError(
                "Newton step failed to reduce the residual", history
            )
        state = trial
        x = x + scale * step
        history.append(r)
        if iteration >= 3 and history[-1] > 4.0 * min(history[:-1]):
            raise NoConvergenceError("Newton iteration diverging", history)
    raise NoConvergenceError(
        "no convergence to %g after %d iterations" % (tol, max_iter), history
    )


def orbit_class(state, residual_tol=1e-6):
    """Homology coordinates of a refined orbit via the period lattice."""
    s = action(state)
    c = _curve(state.potential, state.energy)
    cyc, _ = _periods.identify_class(c, complex(s), complex(state.period), residual_tol)
    return cyc


# ---------------------------------------------------------------------------
# loop-space gradient flow (complexified T)


def integrate_flow(start, tau_span, direction="down", rtol=1e-10):
    """Gradient flow of Re(i S~) on the loop space, with T flowing too.

    Down-flow decreases Re(i S~) monotonically and conserves Im(i S~);
    fixed points are exactly the discretized orbit equations' solutions.
    Saddles have unstable directions, so generic trajectories eventually
    escape; integration stops early (with the partial trajectory
    returned) once the state norm grows by a large factor.
    """
    if direction not in ("down", "up"):
        raise ValidationError("direction must be 'down' or 'up'")
    sign = 1.0 if direction == "down" else -1.0
    check_aliasing(start)
    pot = start.potential
    n = start.n_modes
    dim = 2 * n + 1
    k = np.arange(-n, n + 1)
    dk = 2j * np.pi * k
    m = _grid_size(n, pot.degree)
    energy = start.energy

    def unpack(x):
        xc = x[:2 * dim + 1] + 1j * x[2 * dim + 1:]
        return xc[:dim], xc[dim:2 * dim], xc[-1]

    def rhs(tau, x):
        qm, pm, t = unpack(x)
        q = _to_physical(qm, m)
        p = _to_physical(pm, m)
        mean_h = np.mean(p * p + pot(q))
        vp = _to_modes(pot.derivative(q), n)
        a = dk * pm + t * vp
        b = dk * qm - 2.0 * t * pm
        dq = -1j * np.conj(a[::-1])
        dp = 1j * np.conj(b[::-1])
        dt = 1j * np.conj(energy - mean_h)
        vec = np.concatenate([dq, dp, [dt]])
        return sign * np.concatenate([vec.real, vec.imag])

    x0 = _state_to_vector(start)
    norm0 = float(np.linalg.norm(x0)) + 1.0

    def escaped(tau, x):
        return float(np.linalg.norm(x)) - 20.0 * norm0

    escaped.terminal = True
    escaped.direction = 1.0

    sol = solve_ivp(
        rhs,
        (0.0, float(tau_span)),
        x0,
        method="DOP853",
        rtol=rtol,
        atol=1e-12,
        events=escaped,
    )
    if sol.status == -1:
        raise FlowStallError("loop-space flow stalled: %s" % sol.message)
    states = []
    morse = []
    for tau, col in zip(sol.t, sol.y.T):
        st = _state_from_vector(start, col)
        f = 1j * action(st, check_resolution=False)
        states.append((float(tau), st))
        morse.append((float(tau), float(f.real), float(f.imag)))
    return FlowTrajectory(states=tuple(states), morse_series=tuple(morse))


# ---------------------------------------------------------------------------
# seeds


def harmonic_reference(potential_stiffness, energy, n_modes, potential=None):
    """Exact harmonic loop: V_ref = k q^2 with T = pi/sqrt(k).

    Used both as a test seed and as the determinant-regularization
    reference; `potential` overrides the stored potential object.
    """
    from .model import build_potential

    k = float(potential_stiffness)
    if k <= 0:
        raise ValidationError("stiffness must be positive")
    pot = potential if potential is not None else build_potential([0, 0, k])
    omega = 2.0 * math.sqrt(k)
    amp = math.sqrt(abs(energy) / k)
    dim = 2 * n_modes + 1
    q = np.zeros(dim, dtype=complex)
    p = np.zeros(dim, dtype=complex)
    q[n_modes + 1] = 0.5 * amp
    q[n_modes - 1] = 0.5 * amp
    p[n_modes + 1] = 0.25j * amp * omega
    p[n_modes - 1] = -0.25j * amp * omega
    return LoopState(
        q_modes=tuple(q),
        p_modes=tuple(p),
        period=2.0 * math.pi / omega,
        energy=abs(energy),
        n_modes=n_modes,
        potential=pot,
    )


def real_orbit_seed(potential, energy, n_modes, interval=None):
    """Loop seed from one period of real-time Hamilton integration."""
    orbit = _periods.real_orbit_trajectory(potential, energy, interval)
    m = _grid_size(n_modes, potential.degree)
    q, p = orbit.resample(m)
    return LoopState(
        q_modes=tuple(_to_modes(q.astype(complex), n_modes)),
        p_modes=tuple(_to_modes(p.astype(complex), n_modes)),
        period=complex(orbit.time_period),
        energy=float(energy),
        n_modes=n_modes,
        potential=potential,
    )


def tunneling_seed(potential, energy, n_modes):
    """Loop seed from the imaginary-time (inverted-potential) oscillation.

    Integrates the barrier bounce q_E(u) with dq/du = 2 p_E,
    dp_E/du = +V'(q); the loop is q = q_E, p = i p_E with period T = -i u0,
    which solves the complexified orbit equations and carries purely
    imaginary action.
    """
    energy = float(energy)
    pts = _periods.real_turning_points(potential, energy)
    barrier = None
    for a, b in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (a + b)
        if (energy - potential(mid)).real < 0:
            barrier = (a, b)
            break
    if barrier is None:
        raise ValidationError("no classically forbidden interval at this energy")
    a, b = barrier
    q0 = 0.5 * (a + b)
    pe0 = math.sqrt(float((potential(q0) - energy).real))

    def rhs(t, y):
        return [2.0 * y[1], float(potential.derivative(y[0]).real), 2.0 * y[1] ** 2]

    q_section = q0 + 0.25 * (b - q0)

    def section(t, y):
        return y[0] - q_section

    section.terminal = 2
    section.direction = 1.0

    qs = np.linspace(a, b, 257)[1:-1]
    speed = 1.0 / np.sqrt(np.maximum((potential(qs) - energy).real, 1e-300))
    t_est = float(np.trapz(speed, qs))
    sol = solve_ivp(
        rhs,
        (0.0, 10.0 * t_est + 10.0),
        [q0, pe0, 0.0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-13,
        events=section,
        dense_output=True,
        max_step=t_est / 20.0,
    )
    if len(sol.t_events[0]) < 2:
        raise ValidationError("barrier bounce failed to close")
    u0 = float(sol.t_events[0][1] - sol.t_events[0][0])
    t_start = float(sol.t_events[0][0])
    m = _grid_size(n_modes, potential.degree)
    ts = t_start + np.linspace(0.0, u0, m, endpoint=False)
    states = sol.sol(ts)
    q = states[0].astype(complex)
    p = 1j * states[1]
    return LoopState(
        q_modes=tuple(_to_modes(q, n_modes)),
        p_modes=tuple(_to_modes(p, n_modes)),
        period=-1j * u0,
        energy=energy,
        n_modes=n_modes,
        potential=potential,
    )


def replace_energy(state, energy):
    """The same loop data re-targeted at a different energy (a Newton seed)."""
    return replace(state, energy=float(energy))


def shift_state(state, delta_eta):
    """The same loop reparameterized by eta -> eta + delta_eta."""
    k = state.wavenumbers
    phase = np.exp(2j * np.pi * k * delta_eta)
    return replace(
        state,
        q_modes=tuple(state.q_array() * phase),
        p_modes=tuple(state.p_array() * phase),
    )


def pad_modes(state, n_modes):
    """Zero-pad the mode window (n_modes >= state.n_modes)."""
    if n_modes < state.n_modes:
        raise ValidationError("cannot truncate modes with pad_modes")
    dim = 2 * n_modes + 1
    q = np.zeros(dim, dtype=complex)
    p = np.zeros(dim, dtype=complex)
    lo = n_modes - state.n_modes
    q[lo:lo + 2 * state.n_modes + 1] = state.q_array()
    p[lo:lo + 2 * state.n_modes + 1] = state.p_array()
    return replace(state, q_modes=tuple(q), p_modes=tuple(p), n_modes=n_modes)


def repetition_cover(state, r):
    """The r-fold cover: mode k of the cover is mode k/r of the base."""
    if r < 1:
        raise ValidationError("repetition must be >= 1")
    if r == 1:
        return state
    n_r = r * state.n_modes
    dim = 2 * n_r + 1
    q = np.zeros(dim, dtype=complex)
    p = np.zeros(dim, dtype=complex)
    base_k = state.wavenumbers
    q[base_k * r + n_r] = state.q_array()
    p[base_k * r + n_r] = state.p_array()
    return replace(
        state,
        q_modes=tuple(q),
        p_modes=tuple(p),
        period=r * state.period,
        n_modes=n_r,
    )


# ---------------------------------------------------------------------------
# one-loop (Gaussian) amplitudes


def _action_hessian(state):
    """Second variation of S~ in (q, p, T), complex symmetric."""
    n = state.n_modes
    dim = 2 * n + 1
    k = state.wavenumbers
    p = state.p_array()
    t = state.period
    _, vp_modes, vpp2 = _h_terms(state)

    h = np.zeros((2 * dim + 1, 2 * dim + 1), dtype=complex)
    # gradient components: G_q[k] = -[p' + T V'(q)]_{-k},
    # G_p[k] = [q' - 2 T p]_{-k}, G_T = E - mean H
    neg = np.add.outer(-k, -k)  # -(k + j)
    h[:dim, :dim] = -t * vpp2[neg + 2 * n]
    onflip = np.zeros((dim, dim), dtype=complex)
    onflip[np.arange(dim), dim - 1 - np.arange(dim)] = 2j * np.pi * k
    # d G_q[k] / d p_j = 2 pi i k delta_{j,-k}
    h[:dim, dim:2 * dim] = onflip
    h[:dim, -1] = -vp_modes[::-1]
    h[dim:2 * dim, :dim] = onflip.T
    mflip = np.zeros((dim, dim), dtype=complex)
    mflip[np.arange(dim), dim - 1 - np.arange(dim)] = -2.0 * t
    h[dim:2 * dim, dim:2 * dim] = mflip
    h[dim:2 * dim, -1] = -2.0 * p[::-1]
    h[-1, :dim] = -vp_modes[::-1]
    h[-1, dim:2 * dim] = -2.0 * p[::-1]
    return h


def _sorted_spectrum(state, zero_tol=1e-5):
    """(eigenvalues by |.| ascending, zero-mode count) of the second
    variation.

    Generic orbits carry one complex zero (the critical-manifold shift,
    i.e. the two real zero modes); isochronous loops (harmonic) carry a
    defective second zero because the period does not vary with energy.
    More than two is a genuine degeneracy.
    """
    h = _action_hessian(state)
    lam = np.linalg.eigvals(h)
    lam = lam[np.argsort(np.abs(lam))]
    scale = float(np.median(np.abs(lam)))
    zeros = int(np.sum(np.abs(lam) < zero_tol * scale))
    if zeros > 2:
        raise DegenerateOrbitError(
            "second variation has %d near-zero eigenvalues (expected the "
            "critical-manifold pair at most)" % zeros
        )
    return lam, zeros


def _reference_state(state):
    """Harmonic loop with matching |T|, energy scale, modes, and dimension."""
    t_abs = abs(state.period)
    stiffness = (math.pi / t_abs) ** 2
    e_ref = abs(state.energy) if abs(state.energy) > 1e-9 else 1.0
    return harmonic_reference(stiffness, e_ref, state.n_modes)


def _log_det_ratio(orbit, r):
    """log of |det' cover / det' reference-cover| with matched reductions.

    The reference is the harmonic loop at matching base period, energy
    scale, and truncation, covered r-fold like the orbit.  Equal numbers
    of soft modes are removed from both spectra: the reference's
    defective isochronous zero is matched against the orbit's softest
    direction (the one that flows to zero in the harmonic limit), so the
    ratio always compares equal-dimension reduced determinants.
    """
    cover = repetition_cover(orbit, r)
    ref_cover = repetition_cover(_reference_state(orbit), r)
    lam_o, zeros_o = _sorted_spectrum(cover)
    lam_r, zeros_r = _sorted_spectrum(ref_cover)
    drop = max(zeros_o, zeros_r, 1)
    return float(
        np.sum(np.log(np.abs(lam_o[drop:]))) - np.sum(np.log(np.abs(lam_r[drop:])))
    )


def gaussian_amplitude(orbit, r=1, maslov=2, refine_modes=True):
    """One-loop amplitude of the r-fold cover of a refined orbit.

    |T_r| / (2 pi) times the inverse square root of the reduced
    second-variation determinant magnitude, regularized as a ratio
    against the r-fold cover of the harmonic reference at matching period
    and truncation.  The branch of the square root is fixed by the
    explicit Maslov phase exp(-i r pi mu / 2); residual determinant
    phases are a branch convention and are not folded in.  Returns
    (amplitude, convergence estimate from mode doubling).
    """
    res = critical_residual(orbit)
    if res > 1e-8:
        raise ValidationError(
            "gaussian_amplitude needs a converged orbit (residual %.2e)" % res
        )
    logmag = _log_det_ratio(orbit, r)
    estimate = math.inf
    if refine_modes:
        finer = refine_orbit(pad_modes(orbit, 2 * orbit.n_modes))
        logmag2 = _log_det_ratio(finer, r)
        estimate = abs(logmag2 - logmag)
        logmag = logmag2
    t_abs = r * abs(orbit.period)
    amp = (
        (t_abs / (2.0 * math.pi))
        * math.exp(-0.5 * logmag)
        * np.exp(-0.5j * math.pi * maslov * r)
    )
    return complex(amp), float(estimate)
