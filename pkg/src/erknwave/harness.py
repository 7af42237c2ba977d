"""Experiment drivers behind the command line interface."""
from __future__ import annotations

import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .diagnostics import Recorder, drift_summary, resonance_report, sobolev_norm, state_norm
from .integrators import BlowUpError, PreconditionError, integrate, make_context, verify_composition
from .methods import classify, get_method, method_names, resolve_method
from .spectral import INITIAL_DATA, WaveProblem, sample_initial

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

NONLINEARITIES = {
    "minus_u2": [0.0, 0.0, -1.0],
    "minus_u3": [0.0, 0.0, 0.0, -1.0],
    "zero": [0.0],
}

RUN_COLUMNS = [
    "t", "H", "K", "I", "H_err", "K_err", "I_err",
    "mod_H", "mod_K", "mod_I", "mod_H_err", "mod_K_err", "mod_I_err",
]
SUMMARY_COLUMNS = [
    "method", "quantity", "max_abs_deviation", "max_rel_deviation", "linear_slope", "reference_value", "eps",
]
FULL_HORIZON = 1e5


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    rho: float = 0.5
    M: int = 64
    h: float = 0.5
    T: float = 1e4
    record_stride: int = 20
    methods: list = field(default_factory=lambda: ["ERKN1", "ERKN2", "ERKN3", "ERKN4"])
    s: float = 1.0
    g_name: str = "minus_u2"
    initial_name: str = "poly"
    output_dir: str = "runs"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.rho > 0:
            raise ConfigError("rho must be positive")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError("M must be a positive integer")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ConfigError("h must be positive")
        if self.T < 0:
            raise ConfigError("T must be nonnegative")
        _ = self.n_steps
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigError("record_stride must be an integer >= 1")
        if not self.methods:
            raise ConfigError("methods must not be empty")
        for name in self.methods:
            try:
                get_method(name)
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from None
        if self.g_name not in NONLINEARITIES:
            raise ConfigError(f"unknown g_name {self.g_name!r}; choose from {sorted(NONLINEARITIES)}")
        if self.initial_name not in INITIAL_DATA:
            raise ConfigError(f"unknown initial_name {self.initial_name!r}; choose from {sorted(INITIAL_DATA)}")

    @property
    def n_steps(self) -> int:
        n = round(self.T / self.h)
        if abs(n * self.h - self.T) > 1e-9 * max(1.0, abs(self.T)):
            raise ConfigError(f"T = {self.T} is not an integer multiple of h = {self.h}")
        return int(n)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        data = dict(data)
        if "methods" in data:
            data["methods"] = [str(m).upper() for m in data["methods"]]
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def problem(self) -> WaveProblem:
        return WaveProblem.polynomial(self.rho, self.M, NONLINEARITIES[self.g_name], name=self.g_name)

    def initial_state(self, problem=None):
        problem = problem or self.problem()
        u0, v0 = INITIAL_DATA[self.initial_name]
        return sample_initial(u0, v0, problem)


def fmt(x) -> str:
    """Shortest round-trip decimal form."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _streams(stdout, stderr):
    return (sys.stdout if stdout is None else stdout,
            sys.stderr if stderr is None else stderr)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _trajectory(cfg: ExperimentConfig, name: str):
    pb = cfg.problem()
    x0 = cfg.initial_state(pb)
    coeffs = get_method(name)
    rec = Recorder(pb, coeffs, cfg.h)
    integrate(x0, make_context(pb, coeffs, cfg.h), cfg.n_steps, cfg.record_stride, sink=rec)
    return rec


def run_experiment(cfg: ExperimentConfig, out_dir=None, log=None, workers=None) -> dict:
    """Integrate every configured method and write ``<method>.csv`` plus ``summary.csv``.

    Returns the recorders keyed by method name.  Raises :class:`BlowUpError`
    (with ``method`` set) on non-finite states.
    """
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    pb = cfg.problem()
    eps = state_norm(cfg.initial_state(pb), pb, cfg.s)
    scale = eps * eps if eps > 0 else 1.0

    def job(name):
        try:
            return _trajectory(cfg, name)
        except BlowUpError as exc:
            exc.method = name
            raise

    with ThreadPoolExecutor(max_workers=workers or min(4, len(cfg.methods))) as pool:
        recorders = dict(zip(cfg.methods, pool.map(job, cfg.methods)))

    summary = []
    pairs = [("H", "energy"), ("K", "momentum"), ("I", "total_action"),
             ("mod_H", "mod_energy"), ("mod_K", "mod_momentum"), ("mod_I", "mod_total_action")]
    for name, rec in recorders.items():
        if rec.sigma_error and log is not None:
            print(f"{name}: modified quantities unavailable ({rec.sigma_error})", file=log)
        R = rec.records
        first = R[0]
        rows = []
        for r in R:
            row = [r.t]
            for short, attr in pairs[:3]:
                row.append(getattr(r, attr))
            row += [(getattr(r, a) - getattr(first, a)) / scale for _, a in pairs[:3]]
            row += [getattr(r, a) for _, a in pairs[3:]]
            row += [(getattr(r, a) - getattr(first, a)) / scale for _, a in pairs[3:]]
            rows.append([fmt(v) for v in row])
        _write_csv(out / f"{name}.csv", RUN_COLUMNS, rows)
        if len(R) >= 2:
            for short, attr in pairs:
                d = drift_summary(R, attr)
                summary.append([name, short, fmt(d.max_abs_deviation), fmt(d.max_abs_deviation / scale),
                                fmt(d.linear_slope), fmt(d.reference_value), fmt(eps)])
        else:
            for short, attr in pairs:
                summary.append([name, short, "0.0", "0.0", "0.0", fmt(getattr(first, attr)), fmt(eps)])
    _write_csv(out / "summary.csv",
               SUMMARY_COLUMNS, summary)
    return recorders


def convergence_study(cfg: ExperimentConfig, h_list, t_end: float = 1.0, ref_method: str = "ERKN4"):
    """Self-convergence errors at ``t_end`` against a fine ``ref_method`` solution.

    Returns ``{method: (errors, orders, mean_order or None)}``; ``mean_order``
    is ``None`` when every error is at roundoff level.
    """
    hs = sorted((float(h) for h in h_list), reverse=True)
    if len(hs) < 3:
        raise ConfigError("need at least three stepsizes")
    for a, b in zip(hs, hs[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise ConfigError("stepsizes must halve successively")
    pb = cfg.problem()
    x0 = cfg.initial_state(pb)

    def solve(coeffs, h):
        n = round(t_end / h)
        if abs(n * h - t_end) > 1e-9:
            raise ConfigError(f"t_end = {t_end} is not a multiple of h = {h}")
        return integrate(x0, make_context(pb, coeffs, h), n, n)

    ref = solve(get_method(ref_method), hs[-1] / 16)
    size = max(state_norm(ref, pb, cfg.s), 1e-300)
    results = {}
    for name in cfg.methods:
        errs = []
        for h in hs:
            y = solve(get_method(name), h)
            errs.append(float(np.hypot(sobolev_norm(y.q - ref.q, cfg.s + 1, pb),
                                       sobolev_norm(y.p - ref.p, cfg.s, pb))))
        errs = np.array(errs)
        if np.all(errs <= 1e-12 * (1.0 + size)):
            results[name] = (errs, None, None)
            continue
        orders = np.log2(errs[:-1] / errs[1:])
        results[name] = (errs, orders, float(np.mean(orders)))
    return hs, results


# --- commands -------------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig, out_dir=None, stdout=None, stderr=None) -> int:
    stdout, stderr = _streams(stdout, stderr)
    try:
        run_experiment(cfg, out_dir, log=stderr)
    except BlowUpError as exc:
        print(f"error: method {getattr(exc, 'method', '?')} blew up at step {exc.step}", file=stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=stderr)
        return EXIT_FAIL
    out = Path(out_dir or cfg.output_dir)
    print(f"wrote {len(cfg.methods)} trajectories and summary.csv to {out}", file=stdout)
    return EXIT_OK


def cmd_check(spec: str, stdout=None, stderr=None, xi_max: float = 4.0) -> int:
    stdout, stderr = _streams(stdout, stderr)
    try:
        coeffs = resolve_method(spec)
    except (KeyError, ValueError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"error: {msg}", file=stderr)
        print(f"available methods: {', '.join(method_names())}", file=stderr)
        return EXIT_USAGE
    rep = classify(coeffs, xi_max=xi_max)
    yes = {True: "yes", False: "no"}
    print(f"{rep.name}: symmetric {yes[rep.symmetric]}, symplectic {yes[rep.symplectic]}"
          + (f" (d1 = {rep.d1:.12g})" if rep.d1 is not None else ""), file=stdout)
    for line in rep.key_values():
        print(line, file=stdout)
    return EXIT_OK


def cmd_converge(cfg: ExperimentConfig, h_list, out_dir=None, stdout=None, stderr=None) -> int:
    stdout, stderr = _streams(stdout, stderr)
    try:
        hs, results = convergence_study(cfg, h_list)
    except ConfigError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except BlowUpError as exc:
        print(f"error: blow-up at step {exc.step}", file=stderr)
        return EXIT_FAIL
    rows = []
    for name, (errs, orders, mean) in results.items():
        if mean is None:
            print(f"{name}: exact (errors at roundoff level, max {errs.max():.2e})", file=stdout)
        else:
            print(f"{name}: observed order {mean:.3f} (pairwise {', '.join(f'{o:.3f}' for o in orders)})",
                  file=stdout)
        for i, (h, e) in enumerate(zip(hs, errs)):
            order = "" if (orders is None or i == 0) else fmt(orders[i - 1])
            rows.append([name, fmt(h), fmt(e), order])
    out = Path(out_dir or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "convergence.csv", ["method", "h", "error", "order"], rows)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_compose_verify(cfg: ExperimentConfig, method: str, n: int, stdout=None, stderr=None) -> int:
    stdout, stderr = _streams(stdout, stderr)
    try:
        coeffs = get_method(method)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=stderr)
        return EXIT_USAGE
    if n < 1:
        print("error: n must be >= 1", file=stderr)
        return EXIT_USAGE
    pb = cfg.problem()
    try:
        dev = verify_composition(cfg.initial_state(pb), n, make_context(pb, coeffs, cfg.h), cfg.s)
    except PreconditionError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    ok = dev < 1e-10 * n
    print(f"{coeffs.name}: n={n} deviation={dev:.3e} ({'pass' if ok else 'FAIL'}, bound {1e-10 * n:.1e})",
          file=stdout)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_resonance(cfg: ExperimentConfig, N: int, out_dir=None, eps=None, exhaustive=False,
                  stdout=None, stderr=None) -> int:
    stdout, stderr = _streams(stdout, stderr)
    if not 1 <= N <= 3:
        print("error: N must be 1, 2 or 3", file=stderr)
        return EXIT_USAGE
    pb = cfg.problem()
    rep = resonance_report(cfg.h, pb, N, eps=eps, initial=cfg.initial_state(pb),
                           exhaustive=exhaustive, s=cfg.s)
    out = Path(out_dir or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "resonance.csv", ["j", "k_support", "lhs", "rhs", "condition", "pass"],
                   ([r.j, r.k, fmt(r.lhs), fmt(r.rhs), r.condition, str(r.passed).lower()]
                    for r in rep.rows))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=stderr)
        return EXIT_FAIL
    print(f"h={cfg.h} eps={rep.eps:.6g} N={N} support={list(rep.support)}", file=stdout)
    for cond, (total, fails) in rep.counts().items():
        print(f"{cond}: {total} rows, {fails} violations", file=stdout)
    print(f"another: measured c infimum {rep.c_infimum:.6g}", file=stdout)
    return EXIT_OK
