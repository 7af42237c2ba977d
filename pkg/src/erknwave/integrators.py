"""Time stepping for ``q'' + Omega^2 q = g~(q)``.

``erkn_step`` is the one-stage explicit ERKN map.  ``phi_L`` / ``phi_NL`` are
the exact linear flow and the nonlinear kick of the Strang splitting, and
``trig_step`` is the trigonometric integrator ``kick(h/2) o linear(h) o kick(h/2)``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import _backend
from .diagnostics import sobolev_norm
from .filters import InconsistentCoefficientsError, SingularFilterError, phi1, upsilon
from .methods import ErknCoefficients, check_symmetry, default_grid
from .spectral import (
    HERMITIAN_TOL,
    HermitianSymmetryError,
    SpectralState,
    WaveProblem,
    frequencies,
    hermitian_residual,
    nonlinearity_unchecked,
)


class CorruptedStateError(HermitianSymmetryError):
    pass


class BlowUpError(RuntimeError):
    def __init__(self, step: int, message: Optional[str] = None):
        super().__init__(message or f"non-finite state at step {step}")
        self.step = step


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StepContext:
    """Stepsize, problem and method together with per-mode filter values.

    Filters are evaluated at ``xi_j = |h| omega_j``; the sign of ``h`` enters
    only through the explicit factors of ``h`` in the scheme.
    """

    h: float
    problem: WaveProblem
    coeffs: ErknCoefficients
    omega: np.ndarray
    cos_h: np.ndarray
    sinc_h: np.ndarray
    cos_c: np.ndarray
    sinc_c: np.ndarray
    b1: np.ndarray
    bbar1: np.ndarray
    upsilon: Optional[np.ndarray] = None

    @property
    def xi(self) -> np.ndarray:
        return abs(self.h) * self.omega

    def signed(self, sign: int) -> "StepContext":
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if sign == 1:
            return self
        return make_context(self.problem, self.coeffs, -self.h)

    def with_upsilon(self, values) -> "StepContext":
        ups = np.broadcast_to(np.asarray(values, dtype=float), self.omega.shape).copy()
        return dataclasses.replace(self, upsilon=ups)

    # kernel argument bundles
    def erkn_arrays(self):
        h, c1 = self.h, self.coeffs.c1
        return (
            self.cos_c, h * c1 * self.sinc_c, self.cos_h, h * self.sinc_h,
            h * self.omega**2 * self.sinc_h, h * h * self.bbar1, h * self.b1,
        )

    def trig_arrays(self):
        if self.upsilon is None:
            raise PreconditionError(f"{self.coeffs.name} has no splitting weight Upsilon")
        h, ups = self.h, self.upsilon
        return (
            self.cos_h, h * self.sinc_h, h * self.omega**2 * self.sinc_h,
            0.5 * h * h * self.sinc_h * ups, 0.5 * h * self.cos_h * ups, 0.5 * h * ups,
        )


@lru_cache(maxsize=64)
def make_context(problem: WaveProblem, coeffs: ErknCoefficients, h: float) -> StepContext:
    """Cached per ``(problem, method, h)``; negative ``h`` gets its own entry."""
    h = float(h)
    if h == 0.0 or not np.isfinite(h):
        raise ValueError("stepsize must be finite and nonzero")
    om = frequencies(problem)
    xi = abs(h) * om
    c1 = coeffs.c1
    try:
        ups = np.asarray(upsilon(coeffs, xi), dtype=float)
    except (InconsistentCoefficientsError, SingularFilterError):
        ups = None
    arrays = dict(
        omega=om,
        cos_h=np.cos(xi),
        sinc_h=np.asarray(phi1(xi), dtype=float),
        cos_c=np.cos(c1 * xi),
        sinc_c=np.asarray(phi1(c1 * xi), dtype=float),
        b1=np.asarray(coeffs.b1(xi), dtype=float),
        bbar1=np.asarray(coeffs.bbar1(xi), dtype=float),
        upsilon=ups,
    )
    for v in arrays.values():
        if v is not None:
            v.setflags(write=False)
    return StepContext(h=h, problem=problem, coeffs=coeffs, **arrays)


def _check_state(state: SpectralState, ctx: StepContext) -> None:
    if state.q.size != 2 * ctx.problem.M:
        raise ValueError(f"state has {state.q.size} modes, context expects {2 * ctx.problem.M}")
    res = max(hermitian_residual(state.q), hermitian_residual(state.p))
    if res > HERMITIAN_TOL:
        raise CorruptedStateError(f"state lost Hermitian symmetry (residual {res:.3e})")


def erkn_step(state: SpectralState, ctx: StepContext) -> SpectralState:
    """One step of the one-stage explicit ERKN method."""
    _check_state(state, ctx)
    q, p, h = state.q, state.p, ctx.h
    Q = ctx.cos_c * q + (h * ctx.coeffs.c1) * ctx.sinc_c * p
    G = nonlinearity_unchecked(Q, ctx.problem)
    qn = ctx.cos_h * q + h * ctx.sinc_h * p + (h * h) * ctx.bbar1 * G
    pn = -h * ctx.omega**2 * ctx.sinc_h * q + ctx.cos_h * p + h * ctx.b1 * G
    return SpectralState(qn, pn)


def erkn_step_signed(state: SpectralState, ctx: StepContext, sign: int) -> SpectralState:
    return erkn_step(state, ctx.signed(sign))


def phi_L(state: SpectralState, theta: float, problem: WaveProblem) -> SpectralState:
    """Exact flow of ``q'' + Omega^2 q = 0`` over time ``theta``."""
    om = frequencies(problem)
    c, s = np.cos(theta * om), np.sin(theta * om)
    return SpectralState(c * state.q + (s / om) * state.p, -om * s * state.q + c * state.p)


def phi_NL(state: SpectralState, h: float, upsilon_values, problem: WaveProblem) -> SpectralState:
    """Kick ``p <- p + h Upsilon g~(q)``; ``q`` is returned untouched."""
    ups = np.asarray(upsilon_values, dtype=float)
    if ups.shape not in ((), (2 * problem.M,)):
        raise ValueError("Upsilon must be a scalar or have one value per mode")
    if h == 0:
        return SpectralState(state.q, state.p.copy())
    return SpectralState(state.q, state.p + h * ups * nonlinearity_unchecked(state.q, problem))


def _trig(q, p, gq, ctx: StepContext):
    cos_h, hsinc, wsin, kq, kp0, kp1 = ctx.trig_arrays()
    qn = cos_h * q + hsinc * p + kq * gq
    Gn = nonlinearity_unchecked(qn, ctx.problem)
    pn = cos_h * p - wsin * q + kp0 * gq + kp1 * Gn
    return qn, pn, Gn


def trig_step(state: SpectralState, ctx: StepContext) -> SpectralState:
    """One step of the symmetric trigonometric integrator with weight ``ctx.upsilon``."""
    _check_state(state, ctx)
    gq = nonlinearity_unchecked(state.q, ctx.problem)
    qn, pn, _ = _trig(state.q, state.p, gq, ctx)
    return SpectralState(qn, pn)


def _require_symmetric(ctx: StepContext) -> None:
    xi_max = max(4.0, float(np.max(ctx.xi)))
    ok, res = check_symmetry(ctx.coeffs, default_grid(xi_max, 4096))
    if not ok or ctx.upsilon is None:
        raise PreconditionError(
            f"{ctx.coeffs.name} is not symmetric (residuals {res}); the Strang-splitting "
            "conjugacy only holds for symmetric ERKN methods"
        )


def composition_sides(state0: SpectralState, n_steps: int, ctx: StepContext):
    """``(ERKN^n x, L(h/2) K(h/2) TI^{n-1} K(h/2) L(h/2) x)`` for a symmetric method."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    _require_symmetric(ctx)
    pb, h, ups = ctx.problem, ctx.h, ctx.upsilon
    lhs = state0
    for _ in range(n_steps):
        lhs = erkn_step(lhs, ctx)
    rhs = phi_NL(phi_L(state0, 0.5 * h, pb), 0.5 * h, ups, pb)
    for _ in range(n_steps - 1):
        rhs = trig_step(rhs, ctx)
    rhs = phi_L(phi_NL(rhs, 0.5 * h, ups, pb), 0.5 * h, pb)
    return lhs, rhs


def verify_composition(state0: SpectralState, n_steps: int, ctx: StepContext, s: float = 1.0) -> float:
    lhs, rhs = composition_sides(state0, n_steps, ctx)
    pb = ctx.problem
    return max(sobolev_norm(lhs.q - rhs.q, s + 1, pb), sobolev_norm(lhs.p - rhs.p, s, pb))


def integrate(state0: SpectralState, ctx: StepContext, n_steps: int, record_stride: int = 1,
              sink: Optional[Callable] = None, stepper: str = "erkn", backend: Optional[str] = None,
              reuse_nonlinearity: bool = True, t0: float = 0.0) -> SpectralState:
    """Advance ``n_steps`` steps, calling ``sink(t, state)`` every ``record_stride`` steps.

    Records are taken at the start, every ``record_stride`` steps and at the
    final time.  Polynomial nonlinearities run through the selected kernels
    (compiled when available); other nonlinearities step in Python.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    if stepper not in ("erkn", "trig"):
        raise ValueError(f"unknown stepper {stepper!r}")
    _check_state(state0, ctx)
    if sink is not None:
        sink(t0, state0)
    if n_steps == 0:
        return state0

    use_kernel = ctx.problem.g_poly is not None and (stepper == "erkn" or reuse_nonlinearity)
    q, p = state0.q.copy(), state0.p.copy()
    if use_kernel:
        kern = _backend.get_kernels(backend)
        poly = np.asarray(ctx.problem.g_poly, dtype=float)
        if stepper == "erkn":
            args = ctx.erkn_arrays()
        else:
            args = ctx.trig_arrays()
            gq = nonlinearity_unchecked(q, ctx.problem)

    done = 0
    while done < n_steps:
        chunk = min(record_stride, n_steps - done)
        if use_kernel and stepper == "erkn":
            ok = kern.erkn_advance(q, p, chunk, *args, poly)
        elif use_kernel:
            ok = kern.trig_advance(q, p, chunk, *args, gq, poly)
        else:
            ok = 0
            state = SpectralState(q, p)
            for _ in range(chunk):
                state = erkn_step(state, ctx) if stepper == "erkn" else trig_step(state, ctx)
                if not state.is_finite():
                    break
                ok += 1
            q, p = state.q.copy(), state.p.copy()
        if ok < chunk:
            raise BlowUpError(done + ok + 1)
        done += chunk
        if sink is not None:
            sink(t0 + done * ctx.h, SpectralState(q.copy(), p.copy()))
    return SpectralState(q, p)


def oscillator_step(q, p, omega, h: float, coeffs: ErknCoefficients, force: Callable):
    """The ERKN map for ``q'' + diag(omega)^2 q = force(q)`` (scalars or small vectors)."""
    q, p, omega = (np.asarray(a, dtype=float) for a in (q, p, omega))
    xi = abs(h) * omega
    c1 = coeffs.c1
    Q = np.cos(c1 * xi) * q + h * c1 * phi1(c1 * xi) * p
    G = np.asarray(force(Q), dtype=float)
    qn = np.cos(xi) * q + h * phi1(xi) * p + h * h * coeffs.bbar1(xi) * G
    pn = -h * omega**2 * phi1(xi) * q + np.cos(xi) * p + h * coeffs.b1(xi) * G
    return qn, pn


def _fd_jacobian(x: np.ndarray, omega, h, coeffs, force) -> np.ndarray:
    n = x.size // 2
    d = 1e-6 * max(1.0, float(np.max(np.abs(x))))
    J = np.empty((x.size, x.size))
    for col in range(x.size):
        e = np.zeros(x.size)
        e[col] = d
        plus = np.concatenate([np.atleast_1d(v) for v in oscillator_step(*np.split(x + e, [n]), omega, h, coeffs, force)])
        minus = np.concatenate([np.atleast_1d(v) for v in oscillator_step(*np.split(x - e, [n]), omega, h, coeffs, force)])
        J[:, col] = (plus - minus) / (2 * d)
    return J


def jacobian_determinant_probe(omega: float, h: float, coeffs: ErknCoefficients,
                               g_scalar: Callable, amplitude: float) -> float:
    """``|det J - 1|`` of the central-difference Jacobian of the one-step map at ``(A, A)``.

    With one degree of freedom this is a single scalar condition and cannot
    separate every non-symplectic method; see :func:`symplectic_form_probe`.
    """
    x = np.array([amplitude, amplitude], dtype=float)
    J = _fd_jacobian(x, np.array([omega], dtype=float), h, coeffs, g_scalar)
    return float(abs(np.linalg.det(J) - 1.0))


def coupled_force(q):
    """``-grad V`` for ``V = q1^2 q2 + q2^3 / 3``."""
    return -np.array([2.0 * q[0] * q[1], q[0] ** 2 + q[1] ** 2])


def symplectic_form_probe(omegas, h: float, coeffs: ErknCoefficients, force: Callable = coupled_force,
                          amplitude: float = 0.1) -> float:
    """``max |J^T S J - S|`` for a two-frequency oscillator with a coupling potential."""
    omegas = np.asarray(omegas, dtype=float)
    n = omegas.size
    x = np.full(2 * n, amplitude)
    J = _fd_jacobian(x, omegas, h, coeffs, force)
    S = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    return float(np.max(np.abs(J.T @ S @ J - S)))
