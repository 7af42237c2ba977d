"""One-stage explicit ERKN methods and checks of their structural properties."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .filters import phi0, phi1

SYMMETRY_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10
MIN_GRID_POINTS = 16
DEFAULT_XI_MAX = 4.0
DEFAULT_GRID_POINTS = 1024


class IndeterminateError(ValueError):
    """No grid point allows a well-conditioned estimate of ``d1``."""


@dataclass(frozen=True, eq=False)
class ErknCoefficients:
    """``c1`` and the filter functions ``b1(xi)``, ``bbar1(xi)`` with ``xi = h*omega``."""

    name: str
    c1: float
    b1: Callable = field(repr=False)
    bbar1: Callable = field(repr=False)

    def __post_init__(self):
        if not 0.0 <= self.c1 <= 1.0:
            raise ValueError(f"c1 must lie in [0, 1], got {self.c1}")
        sample = np.linspace(0.0, DEFAULT_XI_MAX, 33)
        for label, fn in (("b1", self.b1), ("bbar1", self.bbar1)):
            vals = np.asarray(fn(sample), dtype=float)
            if vals.shape != sample.shape or not np.all(np.isfinite(vals)):
                raise ValueError(f"{self.name}: {label} must be finite on [0, {DEFAULT_XI_MAX}]")


@dataclass
class PropertyReport:
    name: str
    symmetric: bool
    symplectic: bool
    d1: Optional[float]
    max_residuals: dict

    def key_values(self) -> list:
        d1 = "none" if self.d1 is None else repr(self.d1)
        lines = [
            f"method={self.name}",
            f"symmetric={str(self.symmetric).lower()}",
            f"symplectic={str(self.symplectic).lower()}",
            f"d1={d1}",
        ]
        lines += [f"residual.{k}={v!r}" for k, v in sorted(self.max_residuals.items())]
        return lines


def _erkn1():
    return ErknCoefficients(
        "ERKN1", 0.5,
        b1=lambda x: np.cos(0.5 * np.asarray(x)),
        bbar1=lambda x: 0.5 * phi1(0.5 * np.asarray(x)) ** 2,
    )


def _erkn2():
    return ErknCoefficients(
        "ERKN2", 0.2,
        b1=lambda x: np.cos(0.8 * np.asarray(x)),
        bbar1=lambda x: 0.8 * phi1(0.8 * np.asarray(x)),
    )


def _erkn3():
    return ErknCoefficients(
        "ERKN3", 0.5,
        b1=lambda x: phi1(0.5 * np.asarray(x)) * np.cos(0.5 * np.asarray(x)),
        bbar1=lambda x: 0.5 * phi1(0.5 * np.asarray(x)) ** 2,
    )


def _erkn4():
    return ErknCoefficients(
        "ERKN4", 0.5,
        b1=lambda x: np.cos(0.5 * np.asarray(x)),
        bbar1=lambda x: 0.5 * phi1(0.5 * np.asarray(x)),
    )


_BUILTINS = {"ERKN1": _erkn1(), "ERKN2": _erkn2(), "ERKN3": _erkn3(), "ERKN4": _erkn4()}


def builtin_methods() -> list:
    return list(_BUILTINS.values())


def method_names() -> list:
    return list(_BUILTINS)


def get_method(name: str) -> ErknCoefficients:
    try:
        return _BUILTINS[name.upper()]
    except KeyError:
        raise KeyError(f"unknown method {name!r}; available: {', '.join(_BUILTINS)}") from None


_EXPR_NAMES = {
    "cos": np.cos, "sin": np.sin, "tan": np.tan, "sinc": phi1, "sqrt": np.sqrt,
    "exp": np.exp, "pi": np.pi, "abs": np.abs,
}
_SAFE_EXPR = re.compile(r"^[\sA-Za-z0-9_.+\-*/()]*$")


def _compile_expr(text: str) -> Callable:
    if not _SAFE_EXPR.match(text) or "__" in text:
        raise ValueError(f"unsupported characters in expression {text!r}")
    code = compile(text, "<coefficient>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMES and name not in ("x", "xi"):
            raise ValueError(f"unknown name {name!r} in expression {text!r}")

    def fn(x):
        x = np.asarray(x, dtype=float)
        out = eval(code, {"__builtins__": {}}, dict(_EXPR_NAMES, x=x, xi=x))
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()

    return fn


def parse_custom(spec: str) -> ErknCoefficients:
    """Parse ``"c1=0.5; b1=cos(x/2); bbar1=0.5*sinc(x/2)"`` into coefficients.

    Expressions are in terms of ``x`` (``= h*omega``) and may use
    ``cos, sin, tan, sinc, sqrt, exp, abs, pi``.
    """
    parts = {}
    for item in spec.split(";"):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {item!r}")
        parts[key.strip().lower()] = value.strip()
    missing = {"c1", "b1", "bbar1"} - parts.keys()
    if missing:
        raise ValueError(f"custom method is missing {sorted(missing)}")
    c1 = float(_compile_expr(parts["c1"])(0.0))
    return ErknCoefficients(
        parts.get("name", "custom"), c1,
        b1=_compile_expr(parts["b1"]), bbar1=_compile_expr(parts["bbar1"]),
    )


def resolve_method(text: str) -> ErknCoefficients:
    if "=" in text:
        return parse_custom(text)
    return get_method(text)


def default_grid(xi_max: float = DEFAULT_XI_MAX, n: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """``n`` equispaced points in ``(0, xi_max]``."""
    return xi_max * np.arange(1, n + 1) / n


def _grid(xi_grid) -> np.ndarray:
    xi = np.asarray(xi_grid, dtype=float).ravel()
    if xi.size < MIN_GRID_POINTS:
        raise ValueError(f"need at least {MIN_GRID_POINTS} grid points for a verdict, got {xi.size}")
    return xi


def symmetry_residuals(coeffs: ErknCoefficients, xi) -> dict:
    """Pointwise residuals of the three symmetry conditions."""
    xi = np.asarray(xi, dtype=float)
    c1 = coeffs.c1
    b, bb = np.asarray(coeffs.b1(xi), float), np.asarray(coeffs.bbar1(xi), float)
    return {
        "c1": np.full(xi.shape, abs(c1 - 0.5)),
        "bbar1_reflection": np.abs(bb - (phi1(xi) * b - phi0(xi) * bb)),
        "stage_consistency": np.abs(phi0(c1 * xi) * bb - c1 * phi1(c1 * xi) * b),
    }


def symplecticity_residuals(coeffs: ErknCoefficients, xi, d1: float) -> dict:
    xi = np.asarray(xi, dtype=float)
    c1 = coeffs.c1
    b, bb = np.asarray(coeffs.b1(xi), float), np.asarray(coeffs.bbar1(xi), float)
    return {
        "position": np.abs(phi0(xi) * b + xi * xi * phi1(xi) * bb - d1 * phi0(c1 * xi)),
        "velocity": np.abs(phi1(xi) * b - phi0(xi) * bb - c1 * d1 * phi1(c1 * xi)),
    }


def check_symmetry(coeffs: ErknCoefficients, xi_grid, tol: float = SYMMETRY_TOL):
    xi = _grid(xi_grid)
    res = {k: float(np.max(v)) for k, v in symmetry_residuals(coeffs, xi).items()}
    ok = coeffs.c1 == 0.5 and res["bbar1_reflection"] <= tol and res["stage_consistency"] <= tol
    return ok, res


def estimate_d1(coeffs: ErknCoefficients, xi) -> float:
    xi = np.sort(np.asarray(xi, dtype=float))
    denom = phi0(coeffs.c1 * xi)
    good = np.flatnonzero(np.abs(denom) >= 0.5)
    if good.size == 0:
        raise IndeterminateError(f"{coeffs.name}: no well-conditioned point to estimate d1")
    x = xi[good[0]]
    num = phi0(x) * coeffs.b1(x) + x * x * phi1(x) * coeffs.bbar1(x)
    return float(num / denom[good[0]])


def check_symplecticity(coeffs: ErknCoefficients, xi_grid, tol: float = SYMPLECTIC_TOL):
    """Grid test of the sufficient symplecticity conditions.

    Returns ``(verdict, d1, residuals)``; ``d1`` is ``None`` when the verdict
    is negative.  A negative verdict only means the sufficient condition fails.
    """
    xi = _grid(xi_grid)
    d1 = estimate_d1(coeffs, xi)
    res = {k: float(np.max(v)) for k, v in symplecticity_residuals(coeffs, xi, d1).items()}
    ok = max(res.values()) <= tol
    return ok, (d1 if ok else None), res


def classify(coeffs: ErknCoefficients, xi_max: float = DEFAULT_XI_MAX,
             n_points: int = DEFAULT_GRID_POINTS) -> PropertyReport:
    grid = default_grid(xi_max, n_points)
    sym, sres = check_symmetry(coeffs, grid)
    symp, d1, pres = check_symplecticity(coeffs, grid)
    residuals = {f"symmetry.{k}": v for k, v in sres.items()}
    residuals.update({f"symplecticity.{k}": v for k, v in pres.items()})
    return PropertyReport(coeffs.name, sym, symp, d1, residuals)
