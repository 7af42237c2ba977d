"""Pseudospectral discretisation of the periodic wave equation on [-pi, pi).

Coefficient vectors of length ``2M`` are stored in FFT wraparound order:
slot ``m`` holds mode ``j = m`` for ``m < M`` and ``j = m - 2M`` otherwise,
so slot ``M`` carries ``j = -M`` (which also stands in for ``j = +M``).
Use :func:`mode_indices` or :meth:`SpectralState.mode` for logical access.

The transform pair uses the collocation grid ``x_k = k pi / M`` for
``k = -M .. M-1`` and the normalisation

    q_j = 1/(2M) sum_k w_k exp(-i j x_k),      w_k = sum_j q_j exp(i j x_k).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

HERMITIAN_TOL = 1e-10


class HermitianSymmetryError(ValueError):
    """Coefficient vector is too far from describing a real field."""


@dataclass(frozen=True, eq=False)
class WaveProblem:
    """``u_tt - u_xx + rho u + g(u) = 0`` on ``2M`` collocation points.

    ``U`` is the potential with ``U' = g`` and ``U(0) = 0``.  When
    ``g_poly`` is given (ascending power coefficients of ``g``) the
    compiled stepping kernels can be used.
    """

    rho: float
    M: int
    g: Callable[[np.ndarray], np.ndarray]
    U: Callable[[np.ndarray], np.ndarray]
    g_poly: Optional[tuple] = None
    name: str = "custom"

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")
        g0 = float(np.asarray(self.g(np.zeros(1)))[0])
        if g0 != 0.0:
            raise ValueError(f"nonlinearity must vanish at 0, g(0) = {g0}")
        d = 1e-4
        slope = (float(self.U(np.array([d]))[0]) - float(self.U(np.array([-d]))[0])) / (2 * d)
        if abs(slope) > 1e-6:
            raise ValueError(f"potential U is not flat at 0 (U'(0) ~ {slope})")

    @classmethod
    def polynomial(cls, rho: float, M: int, coeffs: Sequence[float], name: str = "poly"):
        """Nonlinearity ``g(u) = sum_k coeffs[k] u**k`` (``coeffs[0..1]`` must be 0)."""
        c = np.asarray(coeffs, dtype=float)
        if c.size < 1:
            c = np.zeros(1)
        if np.any(c[:2] != 0.0):
            raise ValueError("g(0) = g'(0) = 0 requires the constant and linear coefficients to vanish")
        u_coeffs = P.polyint(c)

        def g(u, _c=c):
            return P.polyval(u, _c)

        def U(u, _c=u_coeffs):
            return P.polyval(u, _c)

        return cls(rho=float(rho), M=int(M), g=g, U=U, g_poly=tuple(float(x) for x in c), name=name)

    @classmethod
    def quadratic(cls, rho: float = 0.5, M: int = 64):
        """The test problem with ``g(u) = -u**2``."""
        return cls.polynomial(rho, M, [0.0, 0.0, -1.0], name="minus_u2")

    @classmethod
    def linear(cls, rho: float = 0.5, M: int = 64):
        """``g = 0``: the linear Klein-Gordon equation."""
        return cls.polynomial(rho, M, [0.0], name="zero")

    @property
    def size(self) -> int:
        return 2 * self.M

    @property
    def is_linear(self) -> bool:
        return self.g_poly is not None and not any(self.g_poly)


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Fourier coefficients ``q`` of ``u`` and ``p`` of ``u_t`` (wraparound order)."""

    q: np.ndarray
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        q = np.ascontiguousarray(self.q, dtype=complex)
        p = np.ascontiguousarray(self.p, dtype=complex)
        if q.shape != p.shape or q.ndim != 1 or q.size % 2:
            raise ValueError("q and p must be 1-D arrays of the same even length")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def M(self) -> int:
        return self.q.size // 2

    def mode(self, j: int) -> tuple:
        """``(q_j, p_j)`` for logical index ``-M <= j <= M`` (``j = M`` aliases ``-M``)."""
        M = self.M
        if not -M <= j <= M:
            raise IndexError(f"mode {j} outside [-{M}, {M}]")
        m = j % (2 * M)
        return self.q[m], self.p[m]

    def copy(self) -> "SpectralState":
        return SpectralState(self.q.copy(), self.p.copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p)))

    @classmethod
    def zeros(cls, M: int) -> "SpectralState":
        return cls(np.zeros(2 * M, complex), np.zeros(2 * M, complex))


def mode_indices(M: int) -> np.ndarray:
    """Logical index ``j`` of each storage slot."""
    return np.rint(np.fft.fftfreq(2 * M, 1.0 / (2 * M))).astype(int)


def mirror_slots(M: int) -> np.ndarray:
    """Storage slot of ``-j`` for each slot ``j`` (slot ``M`` maps to itself)."""
    return (-np.arange(2 * M)) % (2 * M)


def collocation_grid(problem: WaveProblem) -> np.ndarray:
    M = problem.M
    return np.arange(-M, M) * (np.pi / M)


def frequencies(problem: WaveProblem) -> np.ndarray:
    """``omega_j = sqrt(rho + j**2)`` in storage order."""
    j = mode_indices(problem.M).astype(float)
    return np.sqrt(problem.rho + j * j)


def _alternating(M: int) -> np.ndarray:
    # exp(-i j x_{-M}) = (-1)^j shifts the grid origin to the left endpoint
    return np.where(np.arange(2 * M) % 2 == 0, 1.0, -1.0)


def hermitian_residual(c: np.ndarray) -> float:
    """Relative deviation of ``c`` from ``c_{-j} = conj(c_j)``."""
    c = np.asarray(c)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return 0.0
    mirrored = np.conj(c[mirror_slots(c.size // 2)])
    return float(np.max(np.abs(c - mirrored)) / scale)


def symmetrize(c: np.ndarray) -> np.ndarray:
    """Average ``c`` with its conjugate mirror image."""
    return 0.5 * (c + np.conj(c[mirror_slots(c.size // 2)]))


def _check_length(n: int, M: Optional[int]) -> int:
    if n % 2 or n == 0:
        raise ValueError(f"expected an even, positive length, got {n}")
    if M is not None and n != 2 * M:
        raise ValueError(f"expected length {2 * M}, got {n}")
    return n // 2


def _from_grid(w: np.ndarray) -> np.ndarray:
    # Real samples -> exactly Hermitian coefficients.
    M = w.size // 2
    half = np.fft.rfft(w) / (2 * M)
    out = np.empty(2 * M, complex)
    out[: M + 1] = half
    out[M + 1 :] = np.conj(half[1:M][::-1])
    out[M] = out[M].real
    out[0] = out[0].real
    return out * _alternating(M)


def _to_grid(q: np.ndarray) -> np.ndarray:
    M = q.size // 2
    return np.fft.irfft((q * _alternating(M))[: M + 1], n=2 * M) * (2 * M)


def forward_dft(samples, M: Optional[int] = None) -> np.ndarray:
    """Coefficients ``q_j`` of real samples taken on :func:`collocation_grid`."""
    w = np.asarray(samples)
    if np.iscomplexobj(w):
        if np.any(np.abs(w.imag) > HERMITIAN_TOL * max(1.0, np.max(np.abs(w)))):
            raise ValueError("forward_dft expects real samples")
        w = w.real
    _check_length(w.size, M)
    return _from_grid(np.asarray(w, dtype=float))


def inverse_dft(coeffs, M: Optional[int] = None) -> np.ndarray:
    """Real field values ``u(x_k)`` of Hermitian coefficients."""
    q = np.asarray(coeffs, dtype=complex)
    _check_length(q.size, M)
    res = hermitian_residual(q)
    if res > HERMITIAN_TOL:
        raise HermitianSymmetryError(f"coefficients are not Hermitian (residual {res:.3e})")
    return _to_grid(symmetrize(q))


def eval_nonlinearity(q, problem: WaveProblem) -> np.ndarray:
    """``g~(q) = -F g(F^{-1} q)``."""
    u = inverse_dft(q, problem.M)
    return -_from_grid(np.asarray(problem.g(u), dtype=float))


def nonlinearity_unchecked(q: np.ndarray, problem: WaveProblem) -> np.ndarray:
    """:func:`eval_nonlinearity` without the symmetry check, for stepping loops."""
    return -_from_grid(np.asarray(problem.g(_to_grid(q)), dtype=float))


def sample_initial(u0: Callable, v0: Callable, problem: WaveProblem) -> SpectralState:
    x = collocation_grid(problem)
    return SpectralState(forward_dft(u0(x)), forward_dft(v0(x)))


def reference_initial_u(x):
    y = np.asarray(x) / np.pi
    return 0.1 * (y - 1) ** 3 * (y + 1) ** 2


def reference_initial_v(x):
    y = np.asarray(x) / np.pi
    return 0.01 * y * (y - 1) * (y + 1) ** 2


INITIAL_DATA = {
    "poly": (reference_initial_u, reference_initial_v),
    "cosine": (lambda x: 0.1 * np.cos(x), lambda x: np.zeros_like(x)),
    "zero": (lambda x: np.zeros_like(x), lambda x: np.zeros_like(x)),
}
