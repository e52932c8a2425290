"""Distributions of the cascade gain, receiver distance and end-to-end SNR.

Rayleigh convention: every per-hop amplitude is sqrt(a^2 + b^2) with a, b
independent standard normals, so E[h^2] = E[g^2] = 2 and the cascade power
X = |sum_l h_l g_l exp(j eps_l)|^2 has E[X] = 4L.  This is the scale under
which

    F_X(x) = 1 - 2^(1-L) / Gamma(L) * sqrt(x)^L * K_L(sqrt(x))

is a distribution function; the Monte Carlo sampler uses the same scale.

Receivers are uniform on the annulus R1 <= d <= R2 around the surface and the
source-to-surface distance d_SR is fixed, so the mean SNR scale is
gamma_bar = rho / d_SR^delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import ConfigError, DomainError
from .specfun import MeijerGSpec, log_bessel_k_int, meijer_g

LN2 = math.log(2.0)


@dataclass(frozen=True)
class QoSConfig:
    """Delay-QoS exponent A = theta * T * B / ln 2.

    Build with ``QoSConfig(A)`` or ``QoSConfig.from_theta(theta, T, B)``.
    """

    A: float
    theta: float | None = None
    T: float | None = None
    B: float | None = None

    def __post_init__(self):
        if not (self.A > 0 and math.isfinite(self.A)):
            raise ConfigError(f"A must be positive and finite, got {self.A!r}")

    @classmethod
    def from_theta(cls, theta: float, T: float = 1.0, B: float = 1.0) -> "QoSConfig":
        if theta <= 0 or T <= 0 or B <= 0:
            raise ConfigError("theta, T and B must all be positive")
        return cls(theta * T * B / LN2, theta, T, B)


@dataclass(frozen=True)
class SystemConfig:
    """One link scenario.  ``rho`` is the linear transmit SNR P / sigma^2."""

    rho: float
    delta: float
    L: int
    R1: float
    R2: float
    qos: QoSConfig = field(default_factory=lambda: QoSConfig(1.0))
    d_SR: float = 1.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError(f"rho must be > 0, got {self.rho!r}")
        if not self.delta > 0:
            raise ConfigError(f"delta must be > 0, got {self.delta!r}")
        if int(self.L) != self.L or self.L < 1:
            raise ConfigError(f"L must be an integer >= 1, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if not 0 < self.R1 < self.R2:
            raise ConfigError(f"need 0 < R1 < R2, got R1={self.R1!r}, R2={self.R2!r}")
        if not self.d_SR > 0:
            raise ConfigError(f"d_SR must be > 0, got {self.d_SR!r}")
        if not isinstance(self.qos, QoSConfig):
            raise ConfigError("qos must be a QoSConfig")

    @property
    def A(self) -> float:
        return self.qos.A

    def gamma_bar(self) -> float:
        """rho / d_SR^delta: SNR scale before the surface-to-receiver loss."""
        return self.rho / self.d_SR ** self.delta

    def gamma_bar_eff(self, d_RD: float) -> float:
        """SNR scale with the surface-to-receiver distance also fixed."""
        if not d_RD > 0:
            raise ConfigError(f"d_RD must be > 0, got {d_RD!r}")
        return self.gamma_bar() / d_RD ** self.delta

    def as_dict(self) -> dict:
        return {"rho": self.rho, "delta": self.delta, "L": self.L, "R1": self.R1,
                "R2": self.R2, "d_SR": self.d_SR, "A": self.A}


def _check_ring(R1, R2):
    if not 0 < R1 < R2:
        raise ConfigError(f"need 0 < R1 < R2, got R1={R1!r}, R2={R2!r}")


def _check_L(L):
    if int(L) != L or L < 1:
        raise DomainError(f"L must be an integer >= 1, got {L!r}")
    return int(L)


def _maybe_scalar(out, like):
    return float(np.reshape(out, -1)[0]) if np.ndim(like) == 0 else out


# --- cascade power X -------------------------------------------------------

def cdf_cascade_x(x, L):
    """Distribution function of the cascade power X."""
    L = _check_L(L)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise DomainError("cdf_cascade_x needs x >= 0")
    out = np.zeros_like(xs)
    pos = xs > 0
    z = np.sqrt(xs[pos])
    # log of 2^(1-L)/Gamma(L) * z^L K_L(z); tends to 0 as z -> 0
    log_tail = (1 - L) * LN2 - special.gammaln(L) + L * np.log(z) + log_bessel_k_int(L, z)
    out[pos] = -np.expm1(np.minimum(log_tail, 0.0))
    return _maybe_scalar(out, x)


def log_pdf_cascade_x(x, L):
    L = _check_L(L)
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs > 0)):
        raise DomainError("pdf_cascade_x needs x > 0")
    z = np.sqrt(xs)
    return (L - 1) * np.log(z) + log_bessel_k_int(L - 1, z) - L * LN2 - special.gammaln(L)


def pdf_cascade_x(x, L, form="bessel"):
    """Density of the cascade power X.

    ``form="meijer"`` evaluates the equivalent G^{2,0}_{0,2}(x/4 | L-1, 0)
    representation instead of the Bessel one; the two must agree.
    For L = 1 the density has a logarithmic singularity at 0.
    """
    L = _check_L(L)
    if form == "bessel":
        return _maybe_scalar(np.exp(log_pdf_cascade_x(x, L)), x)
    if form != "meijer":
        raise ValueError(f"unknown form {form!r}")
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs > 0)):
        raise DomainError("pdf_cascade_x needs x > 0")
    spec = MeijerGSpec(2, 0, [], [L - 1, 0])
    return meijer_g(spec, xs / 4.0, log_scale=math.log(4.0) + special.gammaln(L))


# --- geometry --------------------------------------------------------------

def pdf_distance(r, R1, R2):
    """Density of the receiver distance, uniform over the annulus."""
    _check_ring(R1, R2)
    r = np.asarray(r, dtype=float)
    out = np.where((r >= R1) & (r <= R2), 2.0 * r / (R2 ** 2 - R1 ** 2), 0.0)
    return _maybe_scalar(out, r)


def pdf_pathloss(y, R1, R2, delta):
    """Density of Y = d^delta on [R1^delta, R2^delta]."""
    _check_ring(R1, R2)
    if not delta > 0:
        raise ConfigError("delta must be > 0")
    y = np.asarray(y, dtype=float)
    inside = (y >= R1 ** delta) & (y <= R2 ** delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 2.0 * np.abs(y) ** (2.0 / delta - 1.0) / (delta * (R2 ** 2 - R1 ** 2))
    return _maybe_scalar(np.where(inside, val, 0.0), y)


def mean_inverse_pathloss(R1, R2, delta):
    """E[1/Y] for the ring model (closed form)."""
    _check_ring(R1, R2)
    span = R2 ** 2 - R1 ** 2
    if abs(delta - 2.0) < 1e-12:
        return 2.0 * math.log(R2 / R1) / span
    return 2.0 * (R2 ** (2 - delta) - R1 ** (2 - delta)) / ((2 - delta) * span)


def mean_snr(cfg: SystemConfig) -> float:
    """E[gamma] = gamma_bar * 4L * E[1/Y]."""
    return cfg.gamma_bar() * 4 * cfg.L * mean_inverse_pathloss(cfg.R1, cfg.R2, cfg.delta)


# --- end-to-end SNR, random receiver location ------------------------------

@dataclass(frozen=True)
class _SnrMellin:
    """Per-config constants shared by the G-function forms of the SNR law."""

    omegas: tuple        # R_i^delta / (4 gamma_bar), i = 1, 2
    log_scales: tuple    # log of the normaliser divided by R_i^(2+delta)

    @classmethod
    def of(cls, cfg: SystemConfig, extra_log_norm: float = 0.0):
        d, gb = cfg.delta, cfg.gamma_bar()
        log_norm = (special.gammaln(cfg.L) + extra_log_norm
                    + math.log(2 * d * gb * (cfg.R2 ** 2 - cfg.R1 ** 2)))
        radii = (cfg.R1, cfg.R2)
        return cls(tuple(R ** d / (4 * gb) for R in radii),
                   tuple(log_norm - (2 + d) * math.log(R) for R in radii))


_CANCEL = 1e-3


def _ring_difference(spec_small, spec_large, mel: _SnrMellin, z_factor, extra_log):
    """R2-term minus R1-term of a G-function pair, switching forms on cancellation.

    ``spec_small`` gives value = T2 - T1 without cancellation for small
    arguments; ``spec_large`` gives the same value as U1 - U2 and is free of
    cancellation for large arguments (its algebraic parts cancel exactly).
    """
    w1, w2 = mel.omegas
    s1, s2 = (ls - extra_log for ls in mel.log_scales)
    t2 = meijer_g(spec_small, w2 * z_factor, s2)
    t1 = meijer_g(spec_small, w1 * z_factor, s1)
    val = t2 - t1
    big = max(abs(t1), abs(t2))
    if abs(val) >= _CANCEL * big:
        return val
    u1 = meijer_g(spec_large, w1 * z_factor, s1)
    u2 = meijer_g(spec_large, w2 * z_factor, s2)
    alt = u1 - u2
    if abs(alt) * big >= abs(val) * max(abs(u1), abs(u2)):
        return alt
    return val


def _snr_pdf_specs(cfg):
    d, L = cfg.delta, cfg.L
    lower = [L - 1, 0, -1 - 2 / d]
    return MeijerGSpec(2, 1, [-2 / d], lower), MeijerGSpec(3, 0, [-2 / d], lower)


def pdf_snr(gamma, cfg: SystemConfig):
    """SNR density for a ring-distributed receiver with uniform phase errors.

    Difference of two G^{2,1}_{1,3} terms at arguments R_i^delta gamma /
    (4 gamma_bar).  Far in the tail the two terms share an identical
    algebraic part, so there the value is taken from the exactly equivalent
    pair of G^{3,0}_{1,3} terms, which have that part removed.
    """
    gs = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any(~(gs > 0)):
        raise DomainError("pdf_snr needs gamma > 0")
    small, large = _snr_pdf_specs(cfg)
    mel = _SnrMellin.of(cfg)
    out = np.array([_ring_difference(small, large, mel, g, 0.0) for g in gs])
    return _maybe_scalar(out, gamma)


def cdf_snr(gamma, cfg: SystemConfig):
    """Distribution function obtained by integrating ``pdf_snr`` in closed form.

    The lower tail uses G^{2,2}_{2,4}; past the median the survival function
    is computed from G^{4,0}_{2,4} so that neither tail loses precision.
    """
    gs = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any(gs < 0):
        raise DomainError("cdf_snr needs gamma >= 0")
    d, L = cfg.delta, cfg.L
    lower = [L - 1, 0, -1 - 2 / d, -1]
    cdf_spec = MeijerGSpec(2, 2, [0, -2 / d], lower)
    sf_spec = MeijerGSpec(4, 0, [-2 / d, 0], lower)
    mel = _SnrMellin.of(cfg)
    w1, w2 = mel.omegas
    out = np.zeros_like(gs)
    for i, g in enumerate(gs):
        if g == 0:
            continue
        s1, s2 = (ls - math.log(g) for ls in mel.log_scales)
        F = meijer_g(cdf_spec, w2 * g, s2) - meijer_g(cdf_spec, w1 * g, s1)
        if F > 0.5:
            F = 1.0 - (meijer_g(sf_spec, w1 * g, s1) - meijer_g(sf_spec, w2 * g, s2))
        out[i] = min(max(F, 0.0), 1.0)
    return _maybe_scalar(out, gamma)


def _mixing_integral(log_integrand, lo, hi, rtol):
    grid = np.linspace(lo, hi, 65)
    top = float(np.max(log_integrand(grid)))
    if not math.isfinite(top):
        return 0.0
    val, err = integrate.quad(lambda y: math.exp(log_integrand(y) - top), lo, hi,
                              epsabs=0.0, epsrel=rtol, limit=400)
    return val * math.exp(top)


def pdf_snr_by_mixing(gamma, cfg: SystemConfig, rtol=1e-11):
    """SNR density from the defining integral over the path-loss variable.

    (1/gamma_bar) * int y f_X(gamma y / gamma_bar) f_Y(y) dy over
    [R1^delta, R2^delta], by adaptive quadrature.  Independent of any
    G-function machinery; used to check ``pdf_snr``.
    """
    gs = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any(~(gs > 0)):
        raise DomainError("pdf_snr_by_mixing needs gamma > 0")
    d, L, gb = cfg.delta, cfg.L, cfg.gamma_bar()
    lo, hi = cfg.R1 ** d, cfg.R2 ** d
    log_fy_norm = math.log(2.0 / (d * (cfg.R2 ** 2 - cfg.R1 ** 2)))
    out = np.empty_like(gs)
    for i, g in enumerate(gs):
        def log_integrand(y, g=g):
            y = np.asarray(y, dtype=float)
            return (np.log(y) + log_pdf_cascade_x(g * y / gb, L)
                    + log_fy_norm + (2.0 / d - 1.0) * np.log(y) - math.log(gb))
        out[i] = _mixing_integral(log_integrand, lo, hi, rtol)
    return _maybe_scalar(out, gamma)


def cdf_snr_by_mixing(gamma, cfg: SystemConfig, rtol=1e-11):
    """P(gamma_D <= gamma) = int F_X(gamma y / gamma_bar) f_Y(y) dy."""
    gs = np.atleast_1d(np.asarray(gamma, dtype=float))
    d, L, gb = cfg.delta, cfg.L, cfg.gamma_bar()
    lo, hi = cfg.R1 ** d, cfg.R2 ** d
    out = np.empty_like(gs)
    for i, g in enumerate(gs):
        val, _ = integrate.quad(
            lambda y: cdf_cascade_x(g * y / gb, L) * pdf_pathloss(y, cfg.R1, cfg.R2, d),
            lo, hi, epsabs=1e-14, epsrel=rtol, limit=400)
        out[i] = val
    return _maybe_scalar(out, gamma)


# --- end-to-end SNR, fixed receiver location -------------------------------

def pdf_snr_fixed(gamma, gamma_bar_eff, L):
    """SNR density with both distances fixed: a scaled cascade-power density."""
    if not gamma_bar_eff > 0:
        raise DomainError("gamma_bar_eff must be > 0")
    gs = np.asarray(gamma, dtype=float)
    return _maybe_scalar(np.exp(log_pdf_cascade_x(gs / gamma_bar_eff, L)) / gamma_bar_eff, gamma)


def cdf_snr_fixed(gamma, gamma_bar_eff, L):
    return cdf_cascade_x(np.asarray(gamma, dtype=float) / gamma_bar_eff, L)
