"""Polynomial potentials and their complexified energy curves.

The Hamiltonian is H(q, p) = p^2 + V(q) with V a real, even-degree,
confining polynomial.  For a complex energy E the equation
p^2 = E - V(q) defines a hyperelliptic curve; its branch points are the
roots of E - V(q) and its genus is floor((d - 1)/2) for d = deg V.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateEnergyError, ValidationError

# Two roots closer than this fraction of the maximum root spacing count as
# collided (energy at a critical value of V).
DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True)
class Potential:
    """Real polynomial potential V(q) = sum_k coeffs[k] q^k.

    Trailing zero coefficients are trimmed at construction; the trimmed
    degree must be even and >= 2 with positive leading coefficient.
    """

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, q):
        """Evaluate V at a (possibly complex, possibly array) argument."""
        return np.polynomial.polynomial.polyval(q, self.coeffs)

    def derivative(self, q):
        """Evaluate V'(q)."""
        dcoeffs = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(q, dcoeffs)

    def derivative_coeffs(self):
        return tuple(np.polynomial.polynomial.polyder(self.coeffs))

    def second_derivative(self, q):
        d2 = np.polynomial.polynomial.polyder(self.coeffs, 2)
        return np.polynomial.polynomial.polyval(q, d2)

    def hamiltonian(self, q, p):
        """H(q, p) = p^2 + V(q)."""
        return p * p + self(q)


@dataclass(frozen=True)
class EnergyCurve:
    """The complexified energy surface p^2 = E - V(q).

    branch_points are the d simple roots of E - V(q), sorted by
    (real part, imaginary part); genus is floor((d - 1)/2).
    """

    potential: Potential
    energy: complex
    branch_points: tuple
    genus: int = field(default=0)

    def momentum_squared(self, q):
        """E - V(q), the square of the momentum on the curve."""
        return self.energy - self.potential(q)


def build_potential(coeffs):
    """Validate coefficients (constant term first) and build a Potential.

    Trailing zeros are trimmed; after trimming the degree must be even,
    at least 2, and the leading coefficient positive.
    """
    coeffs = [float(c) for c in coeffs]
    if not coeffs:
        raise ValidationError("empty coefficient list")
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    degree = len(coeffs) - 1
    if degree < 2:
        raise ValidationError(
            "potential degree must be >= 2, got degree %d after trimming" % degree
        )
    if degree % 2 != 0:
        raise ValidationError("potential degree must be even, got %d" % degree)
    if coeffs[-1] <= 0:
        raise ValidationError(
            "leading coefficient must be positive for a confining potential, got %r"
            % coeffs[-1]
        )
    return Potential(tuple(coeffs))


def _polish_root(poly_coeffs, root, iterations=5):
    """A few Newton steps on sum_k c_k q^k at a companion-matrix root."""
    dcoeffs = np.polynomial.polynomial.polyder(poly_coeffs)
    z = complex(root)
    for _ in range(iterations):
        f = np.polynomial.polynomial.polyval(z, poly_coeffs)
        df = np.polynomial.polynomial.polyval(z, dcoeffs)
        if df == 0:
            break
        step = f / df
        z -= step
        if abs(step) < 1e-16 * (1 + abs(z)):
            break
    return z


def branch_points(potential, energy):
    """All d roots of E - V(q), polished and sorted by (Re, Im).

    Raises DegenerateEnergyError if two roots sit closer than
    DEGENERACY_RTOL times the maximum root spacing (E at a critical
    value of V).
    """
    energy = complex(energy)
    # E - V(q) as ascending coefficients.
    pcoeffs = [-c for c in potential.coeffs]
    pcoeffs[0] += energy
    pcoeffs = np.array(pcoeffs, dtype=complex)
    roots = np.polynomial.polynomial.polyroots(pcoeffs)
    roots = np.array([_polish_root(pcoeffs, r) for r in roots])

    scale = max(1.0, float(np.max(np.abs(roots))))
    coeff_scale = float(np.max(np.abs(pcoeffs)))
    residuals = np.abs(energy - potential(roots))
    tol = 1e-12 * coeff_scale * max(1.0, scale) ** potential.degree
    if np.any(residuals > tol):
        worst = float(np.max(residuals))
        raise DegenerateEnergyError(
            "root polishing failed: max residual %.3e exceeds %.3e" % (worst, tol),
            cluster=list(roots),
        )

    # Degeneracy check against the widest pair spacing.
    if len(roots) >= 2:
        diffs = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(diffs, np.inf)
        min_sep = float(np.min(diffs))
        max_sep = float(np.max(np.abs(roots[:, None] - roots[None, :])))
        if min_sep < DEGENERACY_RTOL * max_sep:
            i, j = np.unravel_index(np.argmin(diffs), diffs.shape)
            raise DegenerateEnergyError(
                "branch points collided at energy %s (separation %.3e)"
                % (energy, min_sep),
                cluster=[roots[i], roots[j]],
            )

    order = np.lexsort((roots.imag, roots.real))
    return [complex(r) for r in roots[order]]


def curve(potential, energy):
    """EnergyCurve at the given (regular) energy.

    genus = floor((d - 1)/2); a quartic gives genus 1, degree 6 genus 2.
    """
    pts = branch_points(potential, energy)
    g = (potential.degree - 1) // 2
    return EnergyCurve(
        potential=potential,
        energy=complex(energy),
        branch_points=tuple(pts),
        genus=g,
    )
