"""Special functions: complex log-gamma, integer-order Bessel K, Meijer G.

The Meijer G-function is evaluated from its Mellin-Barnes representation

    G^{m,n}_{p,q}(x | a; b) = 1/(2 pi i) * int_C Phi(s) x^s ds,

    Phi(s) = prod_{j<=m} Gamma(b_j - s) prod_{k<=n} Gamma(1 - a_k + s)
             / (prod_{j>m} Gamma(1 - b_j + s) prod_{k>n} Gamma(a_k - s)),

along a vertical line Re s = c that separates the poles of the two numerator
families.  The integrand is formed in the log domain, so gamma products never
overflow, and only the conjugate-symmetric upper half line is integrated.

By default ``c`` is placed where |Phi(c) x^c| is smallest on the real axis.
That point is a saddle of the analytic integrand, so the vertical line
crosses it along the steepest-descent direction: the integrand carries no
large oscillating mass, and exponentially small values of G (large
arguments of the Bessel-type families) come out with full relative accuracy
instead of drowning in cancellation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize, special

from .errors import ContourError, ConvergenceError, DomainError, PoleError, UnderflowWarning
from .quadrature import gauss_kronrod

_EPS = np.finfo(float).eps
# K_n(x) < 1e-308 beyond roughly this argument for small orders.
_BESSEL_UNDERFLOW_X = 705.0


class LogGammaValue(NamedTuple):
    """log Gamma(z) split into log|Gamma(z)| and arg Gamma(z) in (-pi, pi]."""

    log_modulus: float
    phase: float

    def gamma(self) -> complex:
        return complex(np.exp(complex(self.log_modulus, self.phase)))


def _wrap_phase(phi):
    wrapped = np.mod(phi + np.pi, 2 * np.pi) - np.pi
    # mod maps +pi to -pi; keep the principal interval (-pi, pi].
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def log_gamma(z) -> LogGammaValue:
    """Principal-branch log Gamma(z) for complex ``z``.

    Raises PoleError on (or within rounding of) a non-positive integer.
    """
    z = complex(z)
    nearest = round(z.real)
    if nearest <= 0 and abs(z - nearest) <= 8 * _EPS * max(1.0, abs(z)):
        raise PoleError(f"Gamma has a pole at z = {nearest}")
    lg = special.loggamma(z)
    return LogGammaValue(float(lg.real), float(_wrap_phase(lg.imag)))


def _check_bessel_args(order, x):
    if int(order) != order or order < 0:
        raise DomainError(f"order must be a non-negative integer, got {order!r}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("Bessel K is only defined here for x > 0")
    return int(order), x


def _log_k_small_x(order, x):
    # Finite part of the ascending series; valid when K_order(x) overflows,
    # i.e. x is tiny against the order and the log terms are negligible.
    k = np.arange(order)
    q = x[:, None] ** 2 / 4.0
    with np.errstate(divide="ignore"):
        log_terms = special.gammaln(order - k) - special.gammaln(k + 1) + k * np.log(q)
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    top = log_terms.max(axis=1, keepdims=True)
    total = np.sum(signs * np.exp(log_terms - top), axis=1)
    return np.log(0.5) - order * np.log(x / 2.0) + top[:, 0] + np.log(total)


def log_bessel_k_int(order, x):
    """log K_order(x) for integer order >= 0 and x > 0, free of over/underflow."""
    order, x = _check_bessel_args(order, x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    with np.errstate(over="ignore"):
        kve = special.kve(order, x)
    out = np.log(kve) - x
    bad = ~np.isfinite(out)
    if np.any(bad):
        out[bad] = _log_k_small_x(order, x[bad])
    return float(out[0]) if scalar else out


def bessel_k_int(order, x):
    """Modified Bessel function of the second kind K_order(x), integer order.

    Values that underflow double precision are returned as 0 with an
    UnderflowWarning.
    """
    order, x = _check_bessel_args(order, x)
    with np.errstate(over="ignore"):
        val = special.kv(order, x)
    if np.any((val == 0) | (x > _BESSEL_UNDERFLOW_X)):
        val = np.exp(log_bessel_k_int(order, x))
        if np.any(val == 0):
            warnings.warn(f"K_{order}(x) underflows to 0", UnderflowWarning, stacklevel=2)
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class MeijerGSpec:
    """Orders and parameters of one G^{m,n}_{p,q} evaluation.

    ``a`` holds the p upper parameters and ``b`` the q lower parameters; the
    first n of ``a`` and the first m of ``b`` enter the numerator gammas.
    ``contour_re=None`` means the abscissa is chosen per argument.
    """

    m: int
    n: int
    a: Sequence[float]
    b: Sequence[float]
    contour_re: float | None = None
    truncation_height: float = 40.0
    rel_tol: float = 1e-9
    _lo: float = field(init=False, repr=False, compare=False)
    _hi: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise ValueError(
                f"need 0 <= m <= q and 0 <= n <= p, got (m,n,p,q)=({self.m},{self.n},{self.p},{self.q})")
        if self.truncation_height <= 0 or self.rel_tol <= 0:
            raise ValueError("truncation_height and rel_tol must be positive")
        lo = max((ak - 1.0 for ak in self.a[:self.n]), default=-math.inf)
        hi = min(self.b[:self.m], default=math.inf)
        if not lo < hi:
            raise ContourError(
                f"pole families overlap: max(a_k - 1) = {lo} >= min(b_j) = {hi}")
        if self.contour_re is not None and not lo < self.contour_re < hi:
            raise ContourError(f"contour_re={self.contour_re} not inside ({lo}, {hi})")
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_hi", hi)

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def q(self) -> int:
        return len(self.b)

    @property
    def strip(self) -> tuple[float, float]:
        """Open interval of admissible contour abscissae."""
        return self._lo, self._hi

    @property
    def decay_rate(self) -> float:
        """m + n - (p + q)/2; the integrand decays like exp(-pi * rate * |t|)."""
        return self.m + self.n - 0.5 * (self.p + self.q)

    def with_contour(self, contour_re: float) -> "MeijerGSpec":
        return MeijerGSpec(self.m, self.n, self.a, self.b, contour_re,
                           self.truncation_height, self.rel_tol)


def _log_phi(spec: MeijerGSpec, s):
    """log Phi(s) on the principal branches, s complex (array)."""
    out = np.zeros_like(s, dtype=complex)
    for bj in spec.b[:spec.m]:
        out += special.loggamma(bj - s)
    for ak in spec.a[:spec.n]:
        out += special.loggamma(1.0 - ak + s)
    for bj in spec.b[spec.m:]:
        out -= special.loggamma(1.0 - bj + s)
    for ak in spec.a[spec.n:]:
        out -= special.loggamma(ak - s)
    return out


def _smooth_log_abs_gamma(u):
    # log|Gamma(u)| with the |sin(pi u)| factor of the reflection formula
    # dropped for u < 1/2: continuous, no spikes at the zeros of 1/Gamma.
    u = float(u)
    if u >= 0.5:
        return math.lgamma(u)
    return math.log(math.pi) - math.lgamma(1.0 - u)


def _real_objective(spec: MeijerGSpec, c: float, logx: float) -> float:
    val = c * logx
    for bj in spec.b[:spec.m]:
        val += math.lgamma(bj - c)
    for ak in spec.a[:spec.n]:
        val += math.lgamma(1.0 - ak + c)
    for bj in spec.b[spec.m:]:
        val -= _smooth_log_abs_gamma(1.0 - bj + c)
    for ak in spec.a[spec.n:]:
        val -= _smooth_log_abs_gamma(ak - c)
    return val


def saddle_abscissa(spec: MeijerGSpec, x: float) -> float:
    """Real point of the strip minimising |Phi(c) x^c| (smoothed)."""
    lo, hi = spec.strip
    logx = math.log(x)

    def obj(c):
        return _real_objective(spec, c, logx)

    # Finite search window: walk outward from a finite start on open sides
    # until the objective turns upward.
    if math.isfinite(lo) and math.isfinite(hi):
        left, right = lo, hi
    else:
        if math.isfinite(hi):
            start = hi - 1.0
        elif math.isfinite(lo):
            start = lo + 1.0
        else:
            start = 0.0
        left = lo if math.isfinite(lo) else None
        right = hi if math.isfinite(hi) else None
        step = 1.0
        f0 = obj(start)
        if left is None:
            c, fc = start, f0
            while True:
                cn = c - step
                fn = obj(cn)
                if fn > fc or step > 4096:
                    left = cn
                    break
                c, fc, step = cn, fn, 2 * step
        if right is None:
            c, fc, step = start, f0, 1.0
            while True:
                cn = c + step
                fn = obj(cn)
                if fn > fc or step > 4096:
                    right = cn
                    break
                c, fc, step = cn, fn, 2 * step
    width = right - left
    pad = 1e-9 * max(1.0, width)
    if math.isfinite(lo):
        left = max(left, lo + pad)
    if math.isfinite(hi):
        right = min(right, hi - pad)
    res = optimize.minimize_scalar(obj, bounds=(left, right), method="bounded",
                                   options={"xatol": 1e-6 * max(width, 1e-3)})
    c = float(res.x)
    # Keep a margin from the poles so the quadrature never straddles one.
    margin = 0.02 * min(width, 1.0) if math.isfinite(width) else 0.02
    if math.isfinite(lo):
        c = max(c, lo + margin)
    if math.isfinite(hi):
        c = min(c, hi - margin)
    return c


def meijer_g(spec: MeijerGSpec, x, log_scale: float = 0.0):
    """Real value of G^{m,n}_{p,q}(x) * exp(-log_scale) for x > 0.

    ``log_scale`` lets callers divide by huge normalisers (e.g. Gamma(L) for
    L in the hundreds) inside the exponent, before anything can overflow.
    Accepts a scalar or an array of arguments.

    Raises ContourError or ConvergenceError (with the achieved error).
    """
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs > 0)):
        raise DomainError("Meijer G is evaluated here for x > 0 only")
    if spec.decay_rate <= 0:
        raise ConvergenceError(
            "vertical-contour integral needs m + n - (p + q)/2 > 0", math.inf)
    if xs.ndim == 0:
        return _meijer_g_scalar(spec, float(xs), log_scale)
    return np.array([_meijer_g_scalar(spec, float(v), log_scale) for v in xs.ravel()]).reshape(xs.shape)


def _meijer_g_scalar(spec: MeijerGSpec, x: float, log_scale: float) -> float:
    c = spec.contour_re if spec.contour_re is not None else saddle_abscissa(spec, x)
    logx = math.log(x)
    lo, hi = spec.strip
    ref = float(np.real(_log_phi(spec, np.array([complex(c, 0.0)]))[0])) + c * logx

    def integrand(t):
        s = c + 1j * t
        return np.real(np.exp(_log_phi(spec, s) + s * logx - ref))

    # Panels start at the scale of the nearest pole so the peak at t=0 is
    # resolved, then grow geometrically to unit width.
    gap = min(c - lo, hi - c)
    h = min(gap, 1.0) / 4.0
    pts = [0.0]
    while pts[-1] + h < 1.0:
        pts.append(pts[-1] + h)
        h *= 2.0
    T = spec.truncation_height
    pts.extend(np.arange(1.0, T + 0.5, 1.0).tolist())
    pts = np.unique(np.asarray(pts))

    total = 0.0
    err = 0.0
    decay = math.pi * spec.decay_rate
    a_end = 0.0
    edges = pts
    max_height = 1e5 + 100 * T
    while True:
        res = gauss_kronrod(integrand, edges, rtol=spec.rel_tol / 4,
                            atol=spec.rel_tol * 1e-3 * abs(total), strict=False)
        total += res.value
        err += res.error
        a_end = edges[-1]
        # Exponential tail bound from the integrand envelope at the cut.
        probe = a_end + np.linspace(-1.0, 0.0, 9)
        env = float(np.max(np.abs(np.exp(_log_phi(spec, c + 1j * probe) + (c + 1j * probe) * logx - ref))))
        tail = env / decay
        if tail <= 0.1 * spec.rel_tol * abs(total):
            err += tail
            break
        if a_end >= max_height:
            raise ConvergenceError(
                f"Meijer G tail still significant at |Im s| = {a_end:g}", (err + tail) / max(abs(total), 1e-300))
        edges = np.linspace(a_end, 2 * a_end, 41)

    if err > spec.rel_tol * abs(total) and err > 1e-300:
        raise ConvergenceError("Meijer G contour quadrature", err / max(abs(total), 1e-300))
    return total / math.pi * math.exp(ref - log_scale)
