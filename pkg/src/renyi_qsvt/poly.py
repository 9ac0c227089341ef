"""Certified bounded Chebyshev polynomials.

Every constructor samples an entire (analytic everywhere) extension of its
target, takes the Chebyshev interpolant on a Lobatto grid large enough that the
coefficient tail is negligible, truncates at the smallest degree meeting the
internal tolerance, and then certifies the stated inequalities on grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy import fft, special

from .errors import ConstructionError, DomainError, ParameterError

MAX_EXACT_DEGREE = 250_000
MAX_SAMPLE_GRID = 1 << 21
DEFAULT_CERT_GRID = 10_000
MIN_CERT_GRID = 10_000
_GLOBAL_GRID_CAP = 1 << 22
ENVELOPE_FLOOR = 1e-13
# Absolute allowance for band checks; Clenshaw rounding at degree ~1e4 reaches a few 1e-14.
RANGE_FP_SLACK = 1e-13


class DegreeBudgetExceeded(ConstructionError):
    """Required degree is above the exact-mode limit; callers switch to idealized mode."""


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class CertEntry:
    interval: tuple[float, float]
    description: str
    kind: str  # "sup_error", "abs", "envelope", "range"
    bound: float
    worst: float
    passed: bool
    n_points: int

    @property
    def slack(self) -> float:
        return self.bound - self.worst


@dataclass(frozen=True)
class CertBundle:
    entries: tuple[CertEntry, ...]
    grid_size: int
    degree_formula: float = float("nan")
    K: float = float("nan")

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def worst_ratio(self) -> float:
        return max((e.worst / e.bound if e.bound > 0 else math.inf) for e in self.entries)


@dataclass(frozen=True)
class ChebyshevPoly:
    """Polynomial sum_k coeffs[k] T_k(x) with definite parity."""

    coeffs: np.ndarray
    parity: str
    cert: CertBundle | None = field(default=None, compare=False)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ParameterError("parity must be 'even' or 'odd'")
        c = np.array(self.coeffs, dtype=np.float64).ravel()
        if c.size == 0:
            c = np.zeros(1)
        c[(0 if self.parity == "odd" else 1)::2] = 0.0
        nz = np.flatnonzero(c)
        c = c[: (nz[-1] + 1 if nz.size else 1)]
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else 0

    @property
    def certified(self) -> bool:
        return self.cert is not None and self.cert.passed

    def __call__(self, x):
        return eval_poly(self, x)

    def with_cert(self, cert: CertBundle) -> "ChebyshevPoly":
        return replace(self, cert=cert)

    # --- coefficient dump -------------------------------------------------
    def dumps(self) -> str:
        lines = [f"chebyshev parity={self.parity} degree={self.degree}"]
        lines += [repr(float(v)) for v in self.coeffs[: self.degree + 1]]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ChebyshevPoly":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "chebyshev":
            raise ParameterError("not a chebyshev coefficient dump")
        meta = dict(tok.split("=", 1) for tok in head[1:])
        coeffs = np.array([float(v) for v in lines[1:]])
        poly = cls(coeffs, meta["parity"])
        if poly.degree != int(meta["degree"]):
            raise ParameterError("degree header does not match coefficients")
        return poly

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "ChebyshevPoly":
        return cls.loads(Path(path).read_text())


def chebyshev_basis(k: int) -> ChebyshevPoly:
    c = np.zeros(k + 1)
    c[k] = 1.0
    return ChebyshevPoly(c, "even" if k % 2 == 0 else "odd")


# ---------------------------------------------------------------------------
# evaluation


def eval_poly(poly: ChebyshevPoly, x):
    """Clenshaw evaluation. Raises DomainError outside [-1, 1]."""
    xa = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(xa) > 1.0) or np.any(np.isnan(xa)):
        raise DomainError("evaluation point outside [-1, 1]")
    out = npcheb.chebval(xa, poly.coeffs)
    return float(out) if np.ndim(out) == 0 else out


def _values_on_lobatto(coeffs: np.ndarray, G: int) -> np.ndarray:
    """Values at x_k = cos(pi k / G), k = 0..G, via one DCT-I (needs G >= degree)."""
    a = np.zeros(G + 1)
    a[: coeffs.size] = coeffs
    a[1:G] *= 0.5
    return fft.dct(a, type=1)


def _coeffs_from_lobatto(values: np.ndarray) -> np.ndarray:
    """Inverse of _values_on_lobatto: Chebyshev interpolant coefficients."""
    G = values.size - 1
    a = fft.dct(values, type=1) / G
    a[0] *= 0.5
    a[G] *= 0.5
    return a


def _lobatto(G: int) -> np.ndarray:
    return np.cos(np.pi * np.arange(G + 1) / G)


def _pow2_at_least(n: int) -> int:
    return 1 << max(1, int(math.ceil(math.log2(max(n, 2)))))


# ---------------------------------------------------------------------------
# certification


def _reference_points(poly: ChebyshevPoly, lo: float, hi: float, grid: int):
    """Chebyshev-spaced points covering [lo, hi] and the polynomial values there.

    Points come from a global Lobatto grid (evaluated with one DCT) sized so the
    interval receives ``grid`` points when affordable; sparse remainders near the
    middle of [-1, 1] are topped up with a local Chebyshev grid via Clenshaw.
    """
    N = poly.degree
    span = math.acos(max(-1.0, lo)) - math.acos(min(1.0, hi))
    need = grid * math.pi / max(span, 1e-300)
    G = min(_GLOBAL_GRID_CAP, max(_pow2_at_least(int(need)), _pow2_at_least(8 * (N + 1))))
    xs = _lobatto(G)
    vals = _values_on_lobatto(np.asarray(poly.coeffs), G)
    mask = (xs >= lo) & (xs <= hi)
    px, pv = xs[mask], vals[mask]
    short = grid - px.size
    if short > 0 and short * (N + 1) <= 4e8:
        k = np.arange(short)
        loc = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * (k + 0.5) / short)
        px = np.concatenate([px, loc])
        pv = np.concatenate([pv, npcheb.chebval(loc, poly.coeffs)])
    ends = np.array([lo, hi])
    px = np.concatenate([px, ends])
    pv = np.concatenate([pv, npcheb.chebval(ends, poly.coeffs)])
    return px, pv


def certify(
    poly: ChebyshevPoly,
    interval: tuple[float, float],
    target: Callable | float | None,
    kind: str,
    grid: int = DEFAULT_CERT_GRID,
    bound: float | None = None,
    description: str = "",
) -> CertEntry:
    """Grid certification of one inequality.

    kind:
      "abs"        |P(x)| <= bound (target ignored, or target is the bound);
      "sup_error"  |P(x) - target(x)| <= bound;
      "envelope"   |P(x)| <= target(x) pointwise (bound is a relative factor, default 1);
      "range"      target = (lo_val, hi_val): lo_val <= P(x) <= hi_val, up to RANGE_FP_SLACK.
    Passing means worst <= bound at every grid point.
    """
    if grid < MIN_CERT_GRID:
        raise ParameterError(f"certification grid must have at least {MIN_CERT_GRID} points")
    lo, hi = float(interval[0]), float(interval[1])
    if not -1.0 <= lo <= hi <= 1.0:
        raise ParameterError("certification interval must lie inside [-1, 1]")
    xs, vals = _reference_points(poly, lo, hi, grid)
    if kind == "abs":
        b = float(target if bound is None else bound)
        worst = float(np.max(np.abs(vals)))
    elif kind == "sup_error":
        b = float(bound)
        worst = float(np.max(np.abs(vals - np.asarray(target(xs), float))))
    elif kind == "envelope":
        b = 1.0 if bound is None else float(bound)
        # Absolute floor keeps rounding-level values at an envelope zero from reading as infinite.
        env = np.maximum(np.asarray(target(xs), float), ENVELOPE_FLOOR)
        worst = float(np.max(np.abs(vals) / env))
    elif kind == "range":
        lo_v, hi_v = target
        dev = np.maximum(lo_v - vals, vals - hi_v)
        worst_dev = float(np.max(dev))
        return CertEntry((lo, hi), description or f"P in [{lo_v}, {hi_v}]", kind, RANGE_FP_SLACK, worst_dev,
                         worst_dev <= RANGE_FP_SLACK, int(xs.size))
    else:
        raise ParameterError(f"unknown bound kind {kind!r}")
    return CertEntry((lo, hi), description or kind, kind, b, worst, worst <= b, int(xs.size))


# ---------------------------------------------------------------------------
# construction helpers


def _chebfit(F: Callable[[np.ndarray], np.ndarray], tol: float, parity: str,
             max_degree: int = MAX_EXACT_DEGREE, start: int = 256) -> np.ndarray:
    """Truncated Chebyshev interpolant of F with tail sum <= tol."""
    G = _pow2_at_least(start)
    while True:
        vals = F(_lobatto(G))
        a = _coeffs_from_lobatto(vals)
        a[(0 if parity == "odd" else 1)::2] = 0.0
        # Coefficients below the DCT rounding floor (~eps max|F| / sqrt(G)) carry no information.
        noise = 64.0 * np.finfo(float).eps * float(np.max(np.abs(vals))) / math.sqrt(G)
        if float(np.max(np.abs(a[G // 2:]))) <= noise:
            sig = np.where(np.abs(a) > noise, np.abs(a), 0.0)
            tail = np.cumsum(sig[::-1])[::-1]  # tail[k] = sum_{j>=k} |a_j|
            over = np.flatnonzero(tail > 0.5 * tol)
            N = int(over[-1]) if over.size else 0
            if N > max_degree:
                raise DegreeBudgetExceeded(f"degree {N} exceeds exact budget {max_degree}")
            return a[: N + 1].copy()
        if G // 2 > max_degree or G >= MAX_SAMPLE_GRID:
            raise DegreeBudgetExceeded(
                f"series not resolved with {G} samples (degree budget {max_degree})",
                best_error=float(np.max(np.abs(a[G // 2:]))),
            )
        G *= 2


def _gauss_box(x, t, s):
    """Indicator of [-t, t] convolved with a Gaussian of standard deviation s."""
    r = 1.0 / (math.sqrt(2.0) * s)
    return 0.5 * (special.erf((x + t) * r) - special.erf((x - t) * r))


def _reg_power(x, c, T, odd):
    """Entire extension x^p |x|^{-(c+p)} P((c+p)/2, T x^2) of x^{-c} on x > 0."""
    p = 1 if odd else 0
    a = 0.5 * (c + p)
    z = T * x * x
    small = z < 1e-8
    zs = np.where(small, 1.0, z)
    core = np.where(small, (1.0 - a * z / (a + 1.0)) / special.gamma(a + 1.0),
                    special.gammainc(a, zs) * zs ** (-a))
    out = T ** a * core
    return out * x if odd else out


def _finish(poly: ChebyshevPoly, checks: Sequence[tuple], grid: int, formula: float) -> ChebyshevPoly:
    entries = tuple(certify(poly, *chk[:3], grid=grid, bound=chk[3], description=chk[4]) for chk in checks)
    K = poly.degree / formula if formula > 0 else float("nan")
    return poly.with_cert(CertBundle(entries, grid, formula, K))


def _escalate(build: Callable[[float], ChebyshevPoly], what: str, rescale_checks=None) -> ChebyshevPoly:
    """Retry with a tighter internal tolerance (roughly doubling degree) up to 4 times."""
    best = math.inf
    shrink = 1.0
    for _ in range(5):
        poly = build(shrink)
        if poly.cert.passed:
            return poly
        bad = [e for e in poly.cert.entries if not e.passed]
        # Overshoot of the unit bound by at most 1e-6: rescale and re-certify.
        if rescale_checks is not None and any(e.description == "|P|<=1" for e in bad):
            w = next(e.worst for e in bad if e.description == "|P|<=1")
            if 1.0 < w <= 1.0 + 1e-6:
                scaled = ChebyshevPoly(np.asarray(poly.coeffs) / w, poly.parity, label=poly.label)
                scaled = rescale_checks(scaled)
                if scaled.cert.passed:
                    return scaled
        best = min(best, poly.cert.worst_ratio())
        shrink *= 0.25
    raise ConstructionError(f"{what}: certification failed after escalation", best_error=best)


# ---------------------------------------------------------------------------
# degree formulas (log base 2 throughout)


def neg_power_degree_formula(c, delta, eps):
    return max(1.0, c) / delta * math.log2(1.0 / eps)


def rectangle_degree_formula(delta_p, eps_p):
    return math.log2(1.0 / eps_p) / delta_p


def bounded_power_degree_formula(c, beta, nu, eta):
    return max(1.0, c) / nu * math.log2(1.0 / (beta * nu * eta))


# ---------------------------------------------------------------------------
# constructors


def approx_rectangle(delta_p: float, eps_p: float, t: float, grid: int = DEFAULT_CERT_GRID,
                     max_degree: int = MAX_EXACT_DEGREE) -> ChebyshevPoly:
    """Even P with P in [0, eps'] for |x| >= t + delta', P in [1 - eps', 1] for |x| <= t - delta'."""
    if not 0 < delta_p < 1:
        raise ParameterError("delta' must lie in (0, 1)")
    if not 0 < eps_p < 0.5:
        raise ParameterError("eps' must lie in (0, 1/2)")
    if not delta_p <= t:
        raise ParameterError("t must be at least delta'")
    s = delta_p / math.sqrt(2.0 * math.log(4.0 / eps_p))

    def F(x):
        return 0.5 * eps_p + (1.0 - eps_p) * _gauss_box(x, t, s)

    formula = rectangle_degree_formula(delta_p, eps_p)

    def checks_for(poly):
        chk = [((-1.0, 1.0), 1.0, "abs", None, "|P|<=1")]
        if t + delta_p < 1.0:
            chk.append(((t + delta_p, 1.0), (0.0, eps_p), "range", None, "outer band"))
        if t - delta_p > 0.0:
            chk.append(((0.0, min(1.0, t - delta_p)), (1.0 - eps_p, 1.0), "range", None, "inner band"))
        return _finish(poly, chk, grid, formula)

    def build(shrink):
        a = _chebfit(F, shrink * eps_p / 8.0, "even", max_degree)
        return checks_for(ChebyshevPoly(a, "even", label=f"rect({delta_p:g},{eps_p:g},{t:g})"))

    return _escalate(build, "approx_rectangle", checks_for)


def approx_neg_power(c: float, delta: float, eps: float, parity: str = "even",
                     grid: int = DEFAULT_CERT_GRID, max_degree: int = MAX_EXACT_DEGREE) -> ChebyshevPoly:
    """P with |P(x) - (delta^c/2) x^{-c}| <= eps on [delta, 1] and |P| <= 1 on [-1, 1].

    c = 0 is accepted for even parity and yields the constant 1/2.
    """
    if parity not in ("even", "odd"):
        raise ParameterError("parity must be 'even' or 'odd'")
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    if not 0 < eps <= 0.5:
        raise ParameterError("eps must lie in (0, 1/2]")
    if c < 0 or (c == 0 and parity == "odd"):
        raise ParameterError("c must be positive (c = 0 only with even parity)")
    if c == 0:
        poly = ChebyshevPoly(np.array([0.5]), "even", label="const(1/2)")
        chk = [((-1.0, 1.0), 1.0, "abs", None, "|P|<=1"),
               ((delta, 1.0), lambda x: np.full_like(x, 0.5), "sup_error", eps, "target error")]
        return _finish(poly, chk, grid, neg_power_degree_formula(c, delta, eps))

    odd = parity == "odd"
    scale = 0.5 * delta ** c

    def target(x):
        return scale * np.abs(x) ** (-c)

    formula = neg_power_degree_formula(c, delta, eps)

    def checks_for(poly):
        chk = [((-1.0, 1.0), 1.0, "abs", None, "|P|<=1"),
               ((delta, 1.0), target, "sup_error", eps, "target error")]
        return _finish(poly, chk, grid, formula)

    def build(shrink):
        e = shrink * eps
        a_shape = 0.5 * (c + (1 if odd else 0))
        kappa = float(special.gammainccinv(a_shape, e / 4.0))
        T = kappa / delta ** 2
        t_w = delta * 2.0 ** (-1.0 / c)
        s_w = (delta - t_w) / (math.sqrt(2.0) * float(special.erfcinv(e / 4.0)))

        def F(x):
            return scale * _reg_power(x, c, T, odd) * (1.0 - _gauss_box(x, t_w, s_w))

        a = _chebfit(F, e / 4.0, parity, max_degree)
        return checks_for(ChebyshevPoly(a, parity, label=f"negpow({c:g},{delta:g},{eps:g},{parity})"))

    return _escalate(build, "approx_neg_power", checks_for)


def _product(parts: Sequence[ChebyshevPoly], prefactor: Callable[[np.ndarray], np.ndarray],
             extra_degree: int, parity: str) -> np.ndarray:
    """Coefficients of prefactor(x) * prod(parts) where prefactor is a degree-extra_degree monomial."""
    D = extra_degree + sum(p.degree for p in parts)
    G = _pow2_at_least(D + 1)
    vals = prefactor(_lobatto(G))
    for p in parts:
        vals = vals * _values_on_lobatto(np.asarray(p.coeffs), G)
    a = _coeffs_from_lobatto(vals)[: D + 1]
    a[(0 if parity == "odd" else 1)::2] = 0.0
    return a


@dataclass(frozen=True)
class BoundedPowerParts:
    S: ChebyshevPoly
    Q: ChebyshevPoly
    P: ChebyshevPoly
    multiplier: float
    power: int


def bounded_power_target(c, beta):
    return lambda x: 2.0 ** (-c - 1.0) * beta ** (-c) * np.abs(x) ** c


def approx_bounded_power_parts(c: float, beta: float, nu: float, eta: float,
                               grid: int = DEFAULT_CERT_GRID,
                               max_degree: int = MAX_EXACT_DEGREE) -> BoundedPowerParts:
    if not c > 0:
        raise ParameterError("c must be positive")
    if not 0 < beta <= 1:
        raise ParameterError("beta must lie in (0, 1]")
    if not 0 < nu < beta:
        raise ParameterError("nu must lie in (0, beta)")
    if not 0 < eta < 0.5:
        raise ParameterError("eta must lie in (0, 1/2)")
    k = int(math.ceil(c))
    d = k - c
    eps_in = beta ** c * nu ** d * eta / 2.0
    Q = approx_neg_power(d, nu, eps_in, "even", grid, max_degree)
    P = approx_rectangle(beta / 2.0, eps_in, 1.5 * beta, grid, max_degree)
    mult = 2.0 ** (-c) * beta ** (-c) * nu ** (-d)
    parity = "even" if k % 2 == 0 else "odd"
    if Q.degree + P.degree + k > max_degree:
        raise DegreeBudgetExceeded(f"product degree {Q.degree + P.degree + k} exceeds {max_degree}")
    a = _product([Q, P], lambda x: mult * x ** k, k, parity)
    f = bounded_power_target(c, beta)
    S = ChebyshevPoly(a, parity, label=f"bpow({c:g},{beta:g},{nu:g},{eta:g})")
    chk = [((-1.0, 1.0), 1.0, "abs", None, "|P|<=1"),
           ((0.0, nu), lambda x: 2.0 * f(x), "envelope", 1.0, "|S|<=2f on [0,nu]"),
           ((nu, beta), f, "sup_error", eta, "|f-S|<=eta on [nu,beta]")]
    S = _finish(S, chk, grid, bounded_power_degree_formula(c, beta, nu, eta))
    if not S.cert.passed:
        raise ConstructionError("approx_bounded_power: certification failed",
                                best_error=S.cert.worst_ratio())
    return BoundedPowerParts(S, Q, P, mult, k)


def approx_bounded_power(c: float, beta: float, nu: float, eta: float,
                         grid: int = DEFAULT_CERT_GRID, max_degree: int = MAX_EXACT_DEGREE) -> ChebyshevPoly:
    """S approximating f(x) = 2^{-c-1} beta^{-c} x^c on [nu, beta], small on [0, nu], |S| <= 1."""
    return approx_bounded_power_parts(c, beta, nu, eta, grid, max_degree).S


def scaled(poly: ChebyshevPoly, factor: float, label: str = "") -> ChebyshevPoly:
    """factor * poly; certificate is dropped (caller re-certifies)."""
    return ChebyshevPoly(np.asarray(poly.coeffs) * factor, poly.parity, label=label or poly.label)


def certify_bound(poly: ChebyshevPoly, grid: int = DEFAULT_CERT_GRID, extra: Sequence[CertEntry] = ()) -> ChebyshevPoly:
    """Attach a certificate with the unit-bound check plus any extra entries."""
    e = certify(poly, (-1.0, 1.0), 1.0, "abs", grid=grid, description="|P|<=1")
    return poly.with_cert(CertBundle((e, *extra), grid))
