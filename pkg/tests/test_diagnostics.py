import itertools

import numpy as np
import pytest

from erknwave.diagnostics import (
    DiagnosticsRecord,
    Recorder,
    SymmetryViolationError,
    actions,
    drift_summary,
    energy,
    enumerate_k,
    format_k,
    modified_quantities,
    momentum,
    resonance_report,
    sigma_values,
    sobolev_norm,
    state_norm,
    total_action,
)
from erknwave.filters import SingularFilterError, sigma_filter
from erknwave.integrators import make_context, phi_L
from erknwave.methods import get_method
from erknwave.spectral import SpectralState, WaveProblem

from conftest import random_hermitian
from oracles import (
    literal_energy,
    literal_J,
    literal_momentum,
    literal_sobolev,
    literal_total_action,
    omega,
    random_states,
)


def test_functionals_match_literal_formulas():
    for pb, x in random_states():
        M = pb.M
        assert abs(energy(x, pb) - literal_energy(x.q, x.p, pb)) < 1e-13
        K = literal_momentum(x.q, x.p, M)
        assert abs(K.imag) < 1e-13
        assert abs(momentum(x) - K.real) < 1e-13
        assert np.max(np.abs(actions(x, pb) - literal_J(x.q, x.p, M, pb.rho))) < 1e-13
        assert abs(total_action(x, pb) - literal_total_action(x.q, x.p, M, pb.rho)) < 1e-13
        for s in (0.0, 1.0, 2.0):
            assert abs(sobolev_norm(x.q, s, pb) - literal_sobolev(x.q, s, M, pb.rho)) < 1e-13
        eps = np.hypot(literal_sobolev(x.q, 2, M, pb.rho), literal_sobolev(x.p, 1, M, pb.rho))
        assert abs(state_norm(x, pb) - eps) < 1e-13


def test_modified_quantities_match_literal_formulas():
    c = get_method("ERKN3")
    for pb, x in random_states(seed=11):
        h = 0.5
        sig = np.array([sigma_filter(c, h * omega(j, pb.rho)) for j in range(-pb.M, pb.M)])
        sig = np.roll(sig, -pb.M)  # to slot order
        H, K, I, J = modified_quantities(x, pb, c, h)
        assert abs(H - literal_energy(x.q, x.p, pb, sig)) < 1e-13
        assert abs(K - literal_momentum(x.q, x.p, pb.M, sig).real) < 1e-13
        assert abs(I - literal_total_action(x.q, x.p, pb.M, pb.rho, sig)) < 1e-13
        Jlit = literal_J(x.q, x.p, pb.M, pb.rho) * np.array([sigma_filter(c, h * omega(l, pb.rho))
                                                             for l in range(pb.M + 1)])
        assert np.max(np.abs(J - Jlit)) < 1e-13


def test_energy_examples():
    pb = WaveProblem.linear(rho=0.5, M=4)
    assert energy(SpectralState.zeros(4), pb) == 0.0
    q = np.zeros(8, complex)
    q[1] = q[-1] = 0.5
    assert energy(SpectralState(q, np.zeros(8, complex)), pb) == pytest.approx(0.375, abs=1e-15)


def test_energy_even_for_even_potential(rng):
    pb = WaveProblem.polynomial(0.5, 8, [0.0, 0.0, 0.0, -1.0])
    x = SpectralState(random_hermitian(rng, 8), random_hermitian(rng, 8))
    assert energy(x, pb) == pytest.approx(energy(SpectralState(-x.q, x.p), pb), rel=1e-14)


def test_momentum_examples(rng):
    M = 4
    q = np.zeros(2 * M, complex)
    p = np.zeros(2 * M, complex)
    q[1] = q[-1] = 1.0
    p[1], p[-1] = 1j, -1j
    assert momentum(SpectralState(q, p)) == pytest.approx(2.0, abs=1e-15)
    assert momentum(SpectralState(random_hermitian(rng, M), np.zeros(2 * M, complex))) == 0.0


def test_momentum_rejects_non_hermitian():
    q = np.zeros(8, complex)
    p = np.zeros(8, complex)
    q[1] = q[-1] = 1.0
    p[1] = 1.0
    with pytest.raises(SymmetryViolationError):
        momentum(SpectralState(q, p))


def test_action_examples():
    pb = WaveProblem.linear(M=4)
    q = np.zeros(8, complex)
    q[2] = q[-2] = 1.0
    J = actions(SpectralState(q, np.zeros(8, complex)), pb)
    assert J.shape == (5,)
    assert J[2] == pytest.approx(np.sqrt(4.5))
    assert np.all(actions(SpectralState.zeros(4), pb) == 0)


def test_sobolev_examples():
    pb = WaveProblem.linear(M=4)
    assert sobolev_norm(np.zeros(8), 1.0, pb) == 0.0
    q = np.zeros(8, complex)
    q[1] = q[-1] = 1.0
    assert sobolev_norm(q, 0.0, pb) == pytest.approx(np.sqrt(2.0))


def test_functionals_invariant_under_linear_flow(reference_state):
    pb = WaveProblem.linear(M=64)
    x = reference_state
    H0, K0, J0 = energy(x, pb), momentum(x), actions(x, pb)
    for _ in range(1000):
        x = phi_L(x, 0.5, pb)
    assert abs(energy(x, pb) - H0) < 1e-11
    assert abs(momentum(x) - K0) < 1e-11
    assert np.max(np.abs(actions(x, pb) - J0)) < 1e-12


def test_modified_examples(reference_problem, reference_state):
    pb, x = reference_problem, reference_state
    plain = (energy(x, pb), momentum(x), total_action(x, pb))
    H, K, I, _ = modified_quantities(x, pb, get_method("ERKN4"), 0.5)
    assert np.allclose((H, K, I), plain, rtol=1e-14, atol=0)
    H, K, I, _ = modified_quantities(x, pb, get_method("ERKN3"), 1e-8)
    assert np.allclose((H, K, I), plain, rtol=1e-6, atol=0)


def test_modified_singular_names_mode():
    pb = WaveProblem.linear(rho=0.5, M=8)
    # ERKN2's bbar1 vanishes at xi = 5 pi / 4; put that at mode 4
    h = 5 * np.pi / (4 * np.sqrt(16.5))
    with pytest.raises(SingularFilterError, match=r"mode\(s\) \[4\]"):
        sigma_values(pb, get_method("ERKN2"), h)
    rec = Recorder(pb, get_method("ERKN2"), h)
    assert rec.sigma is None and rec.sigma_error
    rec(0.0, SpectralState.zeros(8))
    assert np.isnan(rec.records[0].mod_energy)


def test_recorder_consistency(reference_problem, reference_state):
    rec = Recorder(reference_problem, get_method("ERKN3"), 0.5)
    rec(0.0, reference_state)
    r = rec.records[0]
    assert r.energy == pytest.approx(energy(reference_state, reference_problem), rel=1e-15)
    assert r.total_action == pytest.approx(r.actions[:-1].sum() + 0.5 * r.actions[-1], rel=1e-12)
    H, K, I, _ = modified_quantities(reference_state, reference_problem, get_method("ERKN3"), 0.5)
    assert (r.mod_energy, r.mod_momentum, r.mod_total_action) == pytest.approx((H, K, I), rel=1e-15)


def _records(values, times=None):
    times = np.arange(len(values)) if times is None else times
    return [DiagnosticsRecord(float(t), float(v), 0.0, 0.0, np.zeros(1)) for t, v in zip(times, values)]


def test_drift_examples():
    d = drift_summary(_records([3.0] * 10))
    assert (d.max_abs_deviation, d.linear_slope, d.reference_value) == (0.0, 0.0, 3.0)
    t = np.linspace(0, 50, 101)
    d = drift_summary(_records(1.5 - 0.02 * t, t))
    assert d.linear_slope == pytest.approx(-0.02, abs=1e-12)
    assert d.max_abs_deviation == pytest.approx(1.0)
    with pytest.raises(ValueError):
        drift_summary(_records([1.0]))
    assert drift_summary(_records([1.0, 2.0]), lambda r: 2 * r.energy).linear_slope == pytest.approx(2.0)


def test_format_k():
    assert format_k({}) == "0"
    assert format_k({3: -2, 1: 1}) == "+<1>-2<3>"


def test_enumerate_k_counts():
    ks = list(enumerate_k((0, 1), 2))
    # lattice points of the l1 ball of radius 2 in two dimensions
    assert len(ks) == 13
    assert {} in ks


def test_resonance_exhaustive_small_case():
    pb = WaveProblem.quadratic(rho=0.5, M=2)
    h, eps = 0.5, 0.01
    rep = resonance_report(h, pb, N=1, eps=eps, exhaustive=True)
    om = np.sqrt(0.5 + np.arange(3) ** 2.0)
    expect = {}
    for j in range(3):
        for k in itertools.product(range(-2, 3), repeat=3):
            if sum(map(abs, k)) > 2:
                continue
            if sum(map(abs, k)) == 1 and abs(k[j]) == 1:
                continue
            kw = float(np.dot(k, om))
            lhs = abs(np.sin(h / 2 * (om[j] - kw)) * np.sin(h / 2 * (om[j] + kw)))
            rhs = np.sqrt(eps) * h * h * (om[j] + abs(kw))
            expect[(j, format_k({l: c for l, c in enumerate(k) if c}))] = (lhs, rhs)
    got = {(r.j, r.k): (r.lhs, r.rhs, r.passed) for r in rep.rows if r.condition == "inequa"}
    assert set(got) == set(expect)
    for key, (lhs, rhs) in expect.items():
        assert got[key][0] == pytest.approx(lhs, abs=1e-15)
        assert got[key][1] == pytest.approx(rhs, abs=1e-15)
        assert got[key][2] == (lhs >= rhs)
    assert rep.counts()["further"][0] == 3


def test_resonance_excludes_own_mode():
    rep = resonance_report(0.5, WaveProblem.quadratic(M=2), eps=0.01, exhaustive=True)
    assert not any(r.condition == "inequa" and r.k in (f"+<{r.j}>", f"-<{r.j}>") for r in rep.rows)


def test_resonance_further_fails_at_pi():
    pb = WaveProblem.quadratic(rho=0.5, M=4)
    h = np.pi / np.sqrt(0.5)
    rep = resonance_report(h, pb, eps=0.01, exhaustive=True)
    row = next(r for r in rep.rows if r.condition == "further" and r.j == 0)
    assert not row.passed and row.lhs < 1e-15


def test_resonance_reference_counts(reference_problem, reference_state):
    rep = resonance_report(0.5, reference_problem, N=2, initial=reference_state)
    assert rep.eps == pytest.approx(0.07068843298842069, rel=1e-12)
    assert rep.support == (0, 1, 2, 3)
    assert rep.counts() == {"inequa": (20857, 19689), "further": (65, 6), "another": (12515, 0)}
    again = resonance_report(0.5, reference_problem, N=2, initial=reference_state)
    assert again.rows == rep.rows and again.c_infimum == rep.c_infimum


def test_resonance_rejects_bad_N(reference_problem):
    with pytest.raises(ValueError):
        resonance_report(0.5, reference_problem, N=4, eps=0.1)
    with pytest.raises(ValueError):
        resonance_report(0.5, reference_problem, N=1)


def test_context_filters_are_shared(reference_problem):
    ctx = make_context(reference_problem, get_method("ERKN3"), 0.5)
    assert np.allclose(sigma_values(reference_problem, get_method("ERKN3"), 0.5),
                       sigma_filter(get_method("ERKN3"), ctx.xi), rtol=0, atol=0)
