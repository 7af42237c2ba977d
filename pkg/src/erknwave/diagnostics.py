"""Conserved and modified functionals of the discrete wave equation.

Sums written with one prime in the literature (end terms ``j = +-M`` halved)
reduce to plain sums over the ``2M`` stored modes, because ``q_M`` and
``q_{-M}`` share a slot.  Double-primed sums (end terms quartered) reduce to
the interior modes plus half of the ``j = -M`` term, except for the momentum
where the two end terms cancel exactly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .filters import SingularFilterError, phi1, sigma_filter
from .spectral import (
    SpectralState,
    WaveProblem,
    _to_grid,
    frequencies,
    mirror_slots,
    mode_indices,
)

MOMENTUM_IMAG_TOL = 1e-10


class SymmetryViolationError(ValueError):
    pass


def _dprime_weights(M: int) -> np.ndarray:
    w = np.ones(2 * M)
    w[M] = 0.5
    return w


def potential(q: np.ndarray, problem: WaveProblem) -> float:
    """``V(q) = 1/(2M) sum_k U(u_k)``."""
    return float(np.mean(problem.U(_to_grid(q))))


def _quadratic(state: SpectralState, omega: np.ndarray, weight=1.0) -> float:
    terms = np.abs(state.p) ** 2 + omega**2 * np.abs(state.q) ** 2
    return 0.5 * float(np.sum(weight * terms))


def energy(state: SpectralState, problem: WaveProblem) -> float:
    return _quadratic(state, frequencies(problem)) + potential(state.q, problem)


def _momentum_terms(state: SpectralState, weight=1.0) -> np.ndarray:
    M = state.M
    j = mode_indices(M).astype(float)
    # j = -M pairs with j = +M and the two cancel
    j[M] = 0.0
    return -1j * j * weight * state.q[mirror_slots(M)] * state.p


def momentum(state: SpectralState, weight=1.0) -> float:
    """``K = -sum'' i j q_{-j} p_j``."""
    terms = _momentum_terms(state, weight)
    total = np.sum(terms)
    scale = float(np.sum(np.abs(terms)))
    if abs(total.imag) > MOMENTUM_IMAG_TOL * max(scale, 1.0):
        raise SymmetryViolationError(f"momentum has imaginary part {total.imag:.3e}")
    return float(total.real)


def mode_actions(state: SpectralState, problem: WaveProblem) -> np.ndarray:
    """``I_j`` for every stored slot."""
    om = frequencies(problem)
    return 0.5 * om * np.abs(state.q) ** 2 + np.abs(state.p) ** 2 / (2.0 * om)


def fold_actions(I: np.ndarray) -> np.ndarray:
    """Harmonic actions ``J_l`` for ``l = 0..M`` from per-slot ``I_j``."""
    M = I.size // 2
    J = np.empty(M + 1)
    J[0] = I[0]
    J[1:M] = I[1:M] + I[2 * M - 1 : M : -1]
    J[M] = I[M]
    return J


def actions(state: SpectralState, problem: WaveProblem) -> np.ndarray:
    return fold_actions(mode_actions(state, problem))


def total_action(state: SpectralState, problem: WaveProblem) -> float:
    """``sum'' I_j``."""
    return float(np.sum(_dprime_weights(state.M) * mode_actions(state, problem)))


def sobolev_norm(c, s: float, problem: WaveProblem) -> float:
    """``||c||_s = (sum'' omega_j^{2s} |c_j|^2)^{1/2}``."""
    c = np.asarray(c)
    om = frequencies(problem)
    return float(np.sqrt(np.sum(_dprime_weights(problem.M) * om ** (2 * s) * np.abs(c) ** 2)))


def state_norm(state: SpectralState, problem: WaveProblem, s: float = 1.0) -> float:
    """``(||q||_{s+1}^2 + ||p||_s^2)^{1/2}``, the size of initial data."""
    return float(np.hypot(sobolev_norm(state.q, s + 1, problem), sobolev_norm(state.p, s, problem)))


def sigma_values(problem: WaveProblem, coeffs, h: float) -> np.ndarray:
    """Per-slot modified-invariant weights ``sigma(|h| omega_j)``."""
    xi = abs(h) * frequencies(problem)
    try:
        return np.asarray(sigma_filter(coeffs, xi), dtype=float)
    except SingularFilterError as exc:
        bad = exc.xi
        slots = np.flatnonzero(xi == bad) if bad is not None else []
        modes = sorted({abs(int(mode_indices(problem.M)[s])) for s in slots})
        raise SingularFilterError(f"{exc} (mode(s) {modes})", xi=bad) from None


def modified_quantities(state: SpectralState, problem: WaveProblem, coeffs, h: float,
                        sigma: Optional[np.ndarray] = None):
    """Modified energy, momentum, total action and per-mode actions ``J_l``-folded.

    Returns ``(H_hat, K_hat, I_hat_total, I_hat_folded)``; ``sigma`` enters the
    quadratic part of the energy only.
    """
    if sigma is None:
        sigma = sigma_values(problem, coeffs, h)
    om = frequencies(problem)
    H = _quadratic(state, om, sigma) + potential(state.q, problem)
    K = momentum(state, sigma)
    I = sigma * mode_actions(state, problem)
    return H, K, float(np.sum(_dprime_weights(state.M) * I)), fold_actions(I)


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    momentum: float
    total_action: float
    actions: np.ndarray = field(repr=False)
    mod_energy: float = float("nan")
    mod_momentum: float = float("nan")
    mod_total_action: float = float("nan")


class Recorder:
    """Collects :class:`DiagnosticsRecord` objects along a trajectory.

    Modified quantities are filled in when ``coeffs`` and ``h`` are given
    and the weights are finite at every mode.
    """

    def __init__(self, problem: WaveProblem, coeffs=None, h: Optional[float] = None):
        self.problem = problem
        self.records = []
        self.omega = frequencies(problem)
        self.sigma = None
        self.sigma_error = None
        if coeffs is not None and h is not None:
            try:
                self.sigma = sigma_values(problem, coeffs, h)
            except SingularFilterError as exc:
                self.sigma_error = str(exc)

    def make(self, t: float, state: SpectralState) -> DiagnosticsRecord:
        pb = self.problem
        V = potential(state.q, pb)
        I = mode_actions(state, pb)
        w = _dprime_weights(pb.M)
        rec = DiagnosticsRecord(
            t=float(t),
            energy=_quadratic(state, self.omega) + V,
            momentum=momentum(state),
            total_action=float(np.sum(w * I)),
            actions=fold_actions(I),
        )
        if self.sigma is not None:
            rec.mod_energy = _quadratic(state, self.omega, self.sigma) + V
            rec.mod_momentum = momentum(state, self.sigma)
            rec.mod_total_action = float(np.sum(w * self.sigma * I))
        return rec

    def __call__(self, t: float, state: SpectralState) -> None:
        self.records.append(self.make(t, state))


@dataclass
class DriftSummary:
    max_abs_deviation: float
    linear_slope: float
    reference_value: float


def drift_summary(records, field: Union[str, Callable] = "energy") -> DriftSummary:
    """Maximum deviation from the initial value and its least-squares slope in time."""
    if len(records) < 2:
        raise ValueError("drift_summary needs at least two records")
    get = field if callable(field) else (lambda r: getattr(r, field))
    t = np.array([r.t for r in records], dtype=float)
    v = np.array([get(r) for r in records], dtype=float)
    dev = v - v[0]
    tc = t - t.mean()
    denom = float(np.dot(tc, tc))
    slope = float(np.dot(tc, dev - dev.mean()) / denom) if denom > 0 else 0.0
    return DriftSummary(float(np.max(np.abs(dev))), slope, float(v[0]))


# --- non-resonance indicators -------------------------------------------------


@dataclass(frozen=True)
class ResonanceRow:
    j: int
    k: str
    lhs: float
    rhs: float
    condition: str
    passed: bool


@dataclass
class ResonanceReport:
    h: float
    eps: float
    N: int
    support: tuple
    rows: list
    c_infimum: float

    def counts(self) -> dict:
        out = {}
        for row in self.rows:
            total, fails = out.get(row.condition, (0, 0))
            out[row.condition] = (total + 1, fails + (not row.passed))
        return out

    def near_resonant(self) -> list:
        """The ``(j, k)`` pairs violating the main non-resonance inequality."""
        return [(r.j, r.k) for r in self.rows if r.condition == "inequa" and not r.passed]


def format_k(k: dict) -> str:
    """``{1: 1, 3: -2}`` -> ``"+<1>-2<3>"``; the zero vector is ``"0"``."""
    if not k:
        return "0"
    parts = []
    for l in sorted(k):
        c = k[l]
        sign = "+" if c > 0 else "-"
        mag = "" if abs(c) == 1 else str(abs(c))
        parts.append(f"{sign}{mag}<{l}>")
    return "".join(parts)


def enumerate_k(support, order: int):
    """Integer vectors supported on ``support`` with ``sum |k_l| <= order``."""
    support = list(support)
    for coeffs in itertools.product(range(-order, order + 1), repeat=len(support)):
        if sum(abs(c) for c in coeffs) <= order:
            yield {l: c for l, c in zip(support, coeffs) if c}


def _sin_product(h, wj, kw):
    return abs(np.sin(0.5 * h * (wj - kw)) * np.sin(0.5 * h * (wj + kw)))


def resonance_report(h: float, problem: WaveProblem, N: int = 1, eps: Optional[float] = None,
                     initial: Optional[SpectralState] = None, exhaustive: bool = False,
                     s: float = 1.0, c_min: float = 0.0) -> ResonanceReport:
    """Evaluate the three non-resonance indicators at stepsize ``h``.

    Rows are listed for ``j = 0..M`` since every indicator depends on ``j``
    only through ``omega_j = omega_{-j}``.  Combinations ``k`` for the main
    inequality range over ``sum |k_l| <= 2N`` supported on the ``2N`` modes
    of largest initial action (all modes when ``exhaustive``).  ``eps``
    defaults to the size of ``initial``.
    """
    if not 1 <= N <= 3:
        raise ValueError("N must be 1, 2 or 3")
    M = problem.M
    if eps is None:
        if initial is None:
            raise ValueError("need eps or an initial state")
        eps = state_norm(initial, problem, s)
    omega = np.sqrt(problem.rho + np.arange(M + 1) ** 2.0)

    if exhaustive:
        support = tuple(range(M + 1))
    else:
        if initial is not None:
            J = actions(initial, problem)
            ranked = sorted(range(M + 1), key=lambda l: (-J[l], l))
        else:
            ranked = list(range(M + 1))
        support = tuple(sorted(ranked[: 2 * N]))

    rows = []
    root = np.sqrt(eps)
    ks = [(k, sum(c * omega[l] for l, c in k.items())) for k in enumerate_k(support, 2 * N)]
    for j in range(M + 1):
        wj = omega[j]
        for k, kw in ks:
            if len(k) == 1 and k.get(j, 0) in (1, -1):
                continue
            lhs = _sin_product(h, wj, kw)
            rhs = root * h * h * (wj + abs(kw))
            rows.append(ResonanceRow(j, format_k(k), lhs, rhs, "inequa", lhs >= rhs))

    for j in range(M + 1):
        lhs = abs(np.sin(h * omega[j]))
        rhs = h * root
        rows.append(ResonanceRow(j, format_k({j: 1}), lhs, rhs, "further", lhs >= rhs))

    ratios = []
    seen = set()
    for j1 in range(-M, M + 1):
        for j2 in range(j1, M + 1):
            j = j1 + j2
            if abs(j) > M:
                continue
            for s1, s2 in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                k = {}
                for l, c in ((abs(j1), s1), (abs(j2), s2)):
                    k[l] = k.get(l, 0) + c
                k = {l: c for l, c in k.items() if c}
                key = (abs(j), tuple(sorted(k.items())))
                if key in seen:
                    continue
                seen.add(key)
                kw = sum(c * omega[l] for l, c in k.items())
                wj = omega[abs(j)]
                lhs = _sin_product(h, wj, kw)
                rhs = h * h * abs(float(phi1(h * wj)))
                if rhs > 0:
                    ratios.append(lhs / rhs)
                rows.append(ResonanceRow(abs(j), format_k(k), lhs, rhs, "another", lhs > c_min * rhs))
    c_inf = float(min(ratios)) if ratios else float("inf")
    return ResonanceReport(h, float(eps), N, support, rows, c_inf)
