"""Numerical engines shared by the physics modules.

Three tools live here:

* adaptive Gauss-Kronrod (7/15) quadrature on finite intervals and on
  ``[a, inf)`` through the logarithmic map ``x = a - s ln(u)``;
* Matsubara summation with a geometric tail bound and an Euler-Maclaurin
  remainder for very low temperatures;
* a five-point second derivative with Richardson extrapolation.

All integrands are vectorised: they receive a 1-D array of abscissae and
return an array whose leading axis matches it.  Trailing axes are carried
through, which lets nested integrals be evaluated for a whole batch of
outer nodes in one call.  Error control for vector-valued integrands uses
the max-norm, relative to the max-norm of the running total.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

__all__ = [
    "ConvergenceError",
    "QuadratureSpec",
    "IntegralResult",
    "DerivativeResult",
    "integrate_interval",
    "integrate_semi_infinite",
    "matsubara_sum",
    "second_derivative",
]


class ConvergenceError(RuntimeError):
    """Raised when a numerical engine cannot produce a trustworthy value."""


# Gauss-Kronrod 7/15 rule (QUADPACK qk15), nodes on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1::2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])

_MAPPINGS = ("log",)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for one adaptive integral.

    ``scale`` is the length of the logarithmic map used on semi-infinite
    ranges; it should not exceed the decay length of the integrand.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 400
    mapping: str = "log"
    scale: float = 1.0

    def __post_init__(self):
        if not 1e-14 < self.rel_tol < 1e-2:
            raise ValueError(f"rel_tol must lie in (1e-14, 1e-2), got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 8:
            raise ValueError("max_subdivisions must be at least 8")
        if self.mapping not in _MAPPINGS:
            raise ValueError(f"unknown mapping {self.mapping!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def tighter(self, factor: float = 10.0) -> "QuadratureSpec":
        """Spec for an inner integral: tolerances divided by ``factor``."""
        return replace(self, rel_tol=max(self.rel_tol / factor, 2e-14),
                       abs_tol=self.abs_tol / factor)


@dataclass(frozen=True)
class IntegralResult:
    value: float | np.ndarray
    error_estimate: float
    evaluations: int
    converged: bool = True


@dataclass(frozen=True)
class DerivativeResult:
    value: float
    error_estimate: float
    step: float
    noise_limited: bool = False


def _norm(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def _gk_panels(f, lo: np.ndarray, hi: np.ndarray):
    """Apply the 7/15 rule to every panel ``[lo[i], hi[i]]`` in one call of f."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    y = np.asarray(f(x), dtype=float)
    if y.shape[0] != x.shape[0]:
        raise ValueError("integrand must return an array with leading axis matching its input")
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y.reshape(x.shape[0], -1)).all(axis=1)]
        raise FloatingPointError(f"non-finite integrand sample at x = {bad[0]!r}")
    y = y.reshape((lo.shape[0], 15) + y.shape[1:])
    wshape = (1, 15) + (1,) * (y.ndim - 2)
    hshape = (-1,) + (1,) * (y.ndim - 2)
    kron = np.sum(y * _KWEIGHTS.reshape(wshape), axis=1) * half.reshape(hshape)
    gauss = np.sum(y * _GWEIGHTS.reshape(wshape), axis=1) * half.reshape(hshape)
    # QUADPACK error heuristic, applied to the max-norm of vector-valued panels
    mean = kron / (2.0 * half.reshape(hshape))
    resasc = np.sum(np.abs(y - mean[:, None]) * _KWEIGHTS.reshape(wshape), axis=1) \
        * np.abs(half.reshape(hshape))
    diff = np.abs(kron - gauss)
    axes = tuple(range(1, kron.ndim))
    diff_n = diff.max(axis=axes) if axes else diff
    asc_n = resasc.max(axis=axes) if axes else resasc
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = asc_n * np.minimum(1.0, (200.0 * diff_n / asc_n) ** 1.5)
    err = np.where(asc_n > 0, np.maximum(scaled, 50 * np.finfo(float).eps * diff_n), diff_n)
    return kron, err


def integrate_interval(f: Callable, a: float, b: float,
                       spec: QuadratureSpec = QuadratureSpec()) -> IntegralResult:
    """Globally adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    Panels are bisected worst-first, several at a time, so the integrand
    sees large batches.  On budget exhaustion the best estimate is returned
    with ``converged=False``.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("integrate_interval needs finite limits")
    if a == b:
        y = np.asarray(f(np.array([a])), dtype=float)
        return IntegralResult(np.zeros(y.shape[1:]) if y.ndim > 1 else 0.0, 0.0, 1)

    lo = np.linspace(a, b, 3)[:-1]
    hi = np.linspace(a, b, 3)[1:]
    vals, errs = _gk_panels(f, lo, hi)
    evaluations = 15 * lo.size
    # heap of (-err, tiebreak, lo, hi); values kept in a dict for the reduction
    heap = []
    store = {}
    counter = 0
    for i in range(lo.size):
        heapq.heappush(heap, (-errs[i], counter, lo[i], hi[i]))
        store[counter] = vals[i]
        counter += 1
    n_panels = lo.size

    while True:
        total = sum(store[k] for k in sorted(store))
        err_total = -sum(h[0] for h in heap)
        tol = max(spec.abs_tol, spec.rel_tol * _norm(total))
        if err_total <= tol:
            return IntegralResult(_scalarise(total), float(err_total), evaluations, True)
        if n_panels >= spec.max_subdivisions:
            return IntegralResult(_scalarise(total), float(err_total), evaluations, False)

        # split the worst panels until the untouched remainder fits into tol/2
        pick = []
        remaining = err_total
        while heap and remaining > 0.5 * tol and n_panels + len(pick) < spec.max_subdivisions:
            item = heapq.heappop(heap)
            pick.append(item)
            remaining += item[0]
        if not pick:
            return IntegralResult(_scalarise(total), float(err_total), evaluations, False)
        p_lo = np.array([p[2] for p in pick])
        p_hi = np.array([p[3] for p in pick])
        p_mid = 0.5 * (p_lo + p_hi)
        if np.any((p_mid <= p_lo) | (p_mid >= p_hi)):
            # panels at floating-point resolution; give up refining
            for p in pick:
                heapq.heappush(heap, p)
            total = sum(store[k] for k in sorted(store))
            err_total = -sum(h[0] for h in heap)
            return IntegralResult(_scalarise(total), float(err_total), evaluations, False)
        for p in pick:
            del store[p[1]]
        new_lo = np.concatenate([p_lo, p_mid])
        new_hi = np.concatenate([p_mid, p_hi])
        vals, errs = _gk_panels(f, new_lo, new_hi)
        evaluations += 15 * new_lo.size
        for i in range(new_lo.size):
            heapq.heappush(heap, (-errs[i], counter, new_lo[i], new_hi[i]))
            store[counter] = vals[i]
            counter += 1
        n_panels += len(pick)


def _scalarise(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def integrate_semi_infinite(f: Callable, spec: QuadratureSpec = QuadratureSpec(),
                            lower: float = 0.0) -> IntegralResult:
    """Integral of ``f`` over ``[lower, inf)``.

    The substitution ``x = lower - scale * ln(u)`` turns exponentially
    decaying integrands into tame functions of ``u`` on ``(0, 1]``; the
    Gauss-Kronrod nodes never touch ``u = 0``.
    """
    s = spec.scale

    def mapped(u):
        x = lower - s * np.log(u)
        y = np.asarray(f(x), dtype=float)
        jac = (s / u).reshape((-1,) + (1,) * (y.ndim - 1))
        with np.errstate(over="ignore", invalid="ignore"):
            out = y * jac
        # f underflowed to zero while the Jacobian overflowed
        return np.where(y == 0.0, 0.0, out)

    return integrate_interval(mapped, 0.0, 1.0, spec)


def matsubara_sum(term: Callable, spec: QuadratureSpec = QuadratureSpec(),
                  max_terms: int = 4096, continuous_tail: bool = True,
                  block: int = 16) -> IntegralResult:
    """Evaluate ``term(0)/2 + sum_{n>=1} term(n)``.

    ``term`` is called with float arrays of indices.  Terms are summed in
    blocks of doubling size; the truncation error is bounded by the
    geometric tail ``|t_N| q / (1 - q)`` with ``q`` the observed ratio of
    consecutive terms.  When more than ``max_terms`` terms would be needed
    and ``continuous_tail`` is set, the remainder from index ``N`` on is
    replaced by the Euler-Maclaurin expansion

        sum_{n>=N} t(n) = int_N^inf t + t(N)/2 - t'(N)/12 + t'''(N)/720 - ...

    which requires ``term`` to accept non-integer indices.
    """
    values = []
    n0 = 0
    size = block
    total = 0.0
    evaluations = 0
    q = 1.0
    while True:
        idx = np.arange(n0, n0 + size, dtype=float)
        t = np.asarray(term(idx), dtype=float)
        if not np.all(np.isfinite(t)):
            raise FloatingPointError("non-finite Matsubara term")
        evaluations += idx.size
        w = np.ones_like(t)
        if n0 == 0:
            w[0] = 0.5
        total += float(np.sum(w * t))
        values.append(t)
        n0 += size
        last, prev = abs(t[-1]), abs(t[-2])
        if last == 0.0:
            return IntegralResult(total, 0.0, evaluations, True)
        q = last / prev if prev > 0 else 1.0
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if q < 1.0:
            tail = last * q / (1.0 - q)
            if tail <= tol:
                return IntegralResult(total, float(tail), evaluations, True)
        if n0 + 2 * size > max_terms:
            break
        size *= 2

    if not continuous_tail:
        raise ConvergenceError(
            f"Matsubara terms show no sufficient decay within {n0} terms (ratio {q:.6g})")

    # Euler-Maclaurin remainder from the first index not yet summed
    n_start = float(n0)
    stencil = n_start + np.arange(-2.0, 3.0)
    ts = np.asarray(term(stencil), dtype=float)
    evaluations += 5
    d1 = (ts[3] - ts[1]) / 2.0 - (ts[4] - 2 * ts[3] + 2 * ts[1] - ts[0]) / 12.0
    d3 = (ts[4] - 2 * ts[3] + 2 * ts[1] - ts[0]) / 2.0
    decay = 1.0 / max(-np.log(q), 1e-12) if q < 1.0 else float(n0)
    tail_spec = replace(spec.tighter(), scale=max(decay, 1.0))
    integral = integrate_semi_infinite(lambda nu: np.asarray(term(nu), dtype=float),
                                       tail_spec, lower=n_start)
    evaluations += integral.evaluations
    remainder = float(integral.value) + ts[2] / 2.0 - d1 / 12.0 + d3 / 720.0
    total += remainder
    # next Euler-Maclaurin term is of order t^(5)/30240; bound it by the t''' term
    error = abs(d3) / 720.0 + integral.error_estimate
    tol = max(spec.abs_tol, spec.rel_tol * abs(total))
    return IntegralResult(float(total), float(error), evaluations,
                          bool(integral.converged and error <= tol))


def _stencil5(f: Callable, x0: float, h: float) -> float:
    fm2, fm1, f0, fp1, fp2 = (f(x0 + k * h) for k in (-2, -1, 0, 1, 2))
    return (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12.0 * h * h)


def second_derivative(f: Callable, x0: float, rel_tol: float = 1e-8,
                      h: float | None = None) -> DerivativeResult:
    """Second derivative by the five-point stencil and two Richardson levels.

    The base step is ``x0 * max(1e-3, rel_tol**0.25)`` unless ``h`` is given.
    Three step sizes ``h, h/2, h/4`` are combined; the stencil error is
    ``O(h^4)`` so each extrapolation divides by 15, then 63.  If the second
    extrapolation moves the value more than the first one did the result is
    limited by noise in ``f`` and flagged.
    """
    if h is None:
        h = abs(x0) * max(1e-3, rel_tol ** 0.25)
        if h == 0.0:
            h = max(1e-3, rel_tol ** 0.25)
    d = [_stencil5(f, x0, h / 2 ** j) for j in range(3)]
    r1 = [d[j + 1] + (d[j + 1] - d[j]) / 15.0 for j in range(2)]
    r2 = r1[1] + (r1[1] - r1[0]) / 63.0
    first = abs(r1[1] - r1[0])
    second = abs(r2 - r1[1])
    noise = first > abs(d[2] - d[1]) and first > 1e-9 * abs(r2)
    return DerivativeResult(float(r2), float(max(first, second)), float(h), bool(noise))
