"""Scalar filter functions of ``xi = h * omega`` used by trigonometric methods.

All functions accept scalars or arrays and act elementwise; ``Omega`` is
diagonal so no matrix functions are ever formed.
"""
import numpy as np

SINC_SERIES_CUTOFF = 1e-4
UPSILON_TOL = 1e-10
# filter values this small are zeros that roundoff moved off 0
FILTER_ZERO_TOL = 1e-13


class SingularFilterError(ArithmeticError):
    """A filter is evaluated at one of its poles."""

    def __init__(self, message, xi=None):
        super().__init__(message)
        self.xi = xi


class InconsistentCoefficientsError(ValueError):
    pass


def phi0(xi):
    return np.cos(xi)


def _sinc_series(x):
    x2 = x * x
    return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))


def phi1(xi):
    """``sin(xi) / xi`` with a Taylor branch near the removable singularity."""
    x = np.asarray(xi, dtype=float)
    small = np.abs(x) < SINC_SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    out = np.where(small, _sinc_series(x), np.sin(safe) / safe)
    return out if out.ndim else float(out)


sinc = phi1


def sigma_filter(coeffs, xi):
    """``sigma(xi) = sinc(xi/2) / (2 bbar1(xi))``, weight of the modified invariants."""
    x = np.asarray(xi, dtype=float)
    bb = np.asarray(coeffs.bbar1(x), dtype=float)
    zero = np.abs(bb) <= FILTER_ZERO_TOL
    if np.any(zero):
        bad = np.atleast_1d(x)[np.atleast_1d(zero)][0]
        raise SingularFilterError(f"{coeffs.name}: bbar1 vanishes at xi = {bad!r}", xi=float(bad))
    out = 0.5 * phi1(0.5 * x) / bb
    return out if np.ndim(out) else float(out)


def upsilon(coeffs, xi, return_residual=False):
    """Kick weight of the Strang-splitting form of a symmetric ERKN method.

    ``Upsilon = 2 bbar1(xi) / sinc(xi/2)``; the second relation
    ``cos(xi/2) Upsilon = b1(xi)`` must hold as well, otherwise the method
    cannot be written as linear half-flow / kick / linear half-flow.
    """
    x = np.asarray(xi, dtype=float)
    s = np.asarray(phi1(0.5 * x), dtype=float)
    zero = np.abs(s) <= FILTER_ZERO_TOL
    if np.any(zero):
        bad = np.atleast_1d(x)[np.atleast_1d(zero)][0]
        raise SingularFilterError(f"sinc(xi/2) vanishes at xi = {bad!r}", xi=float(bad))
    ups = 2.0 * np.asarray(coeffs.bbar1(x), dtype=float) / s
    resid = np.abs(np.cos(0.5 * x) * ups - np.asarray(coeffs.b1(x), dtype=float))
    worst = float(np.max(resid)) if resid.size else 0.0
    if worst > UPSILON_TOL:
        raise InconsistentCoefficientsError(
            f"{coeffs.name} is not a linear/kick/linear splitting: "
            f"|cos(xi/2) Upsilon - b1| = {worst:.3e}"
        )
    if not np.ndim(ups):
        ups, resid = float(ups), float(resid)
    if return_residual:
        return ups, resid
    return ups
