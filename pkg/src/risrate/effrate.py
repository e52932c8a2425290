"""Effective rate R = -(1/A) log2 E[(1 + gamma)^-A] of the surface-aided link."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .channel import LN2, SystemConfig, mean_snr, pdf_snr, pdf_snr_fixed
from .errors import AsymptoteUndefined, ConfigError, DomainError, MomentOutOfRange
from .quadrature import gauss_kronrod
from .specfun import MeijerGSpec, meijer_g

METHODS = ("closed", "quadrature", "phase_only", "asymptotic", "monte_carlo", "ideal_mc")

# Slack allowed above M = 1 before a value is treated as an evaluator failure.
_MOMENT_SLACK = 1e-9


@dataclass(frozen=True)
class RateEstimate:
    """Effective rate in bit/s/Hz plus how it was obtained.

    ``err_abs`` is a numerical error estimate for deterministic methods and
    the half-width of the 95% confidence interval for Monte Carlo ones.
    ``clamped`` records that the moment was pulled back into (0, 1].
    """

    rate: float
    method: str
    err_abs: float
    meta: dict = field(default_factory=dict, compare=False)
    clamped: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if not self.err_abs >= 0:
            raise ValueError("err_abs must be >= 0")

    @property
    def moment(self) -> float:
        """E[(1+gamma)^-A] implied by the rate."""
        return 2.0 ** (-self.meta.get("A", math.nan) * self.rate)


def rate_from_moment(M, A, method, err_M=0.0, meta=None) -> RateEstimate:
    """Turn a moment estimate into a RateEstimate, refusing nonsense values."""
    meta = dict(meta or {})
    meta.setdefault("A", A)
    if not (M > 0 and math.isfinite(M)) or M > 1 + _MOMENT_SLACK:
        raise MomentOutOfRange(f"E[(1+snr)^-A] = {M!r} is outside (0, 1]")
    clamped = M > 1.0
    if clamped:
        M = 1.0
    rate = -math.log(M) / (A * LN2)
    err = abs(err_M) / (M * A * LN2)
    return RateEstimate(max(rate, 0.0), method, err, meta, clamped)


def _check_A(A):
    if not (A > 0 and math.isfinite(A)):
        raise ConfigError(f"A must be positive, got {A!r}")


def effective_rate_closed(cfg: SystemConfig) -> RateEstimate:
    """Exact effective rate for a ring-distributed receiver with phase errors.

    The moment is W / (2 delta gamma_bar Gamma(L) Gamma(A) (R2^2 - R1^2)) with
    W the difference of two G^{3,2}_{2,4} values at R_i^delta/(4 gamma_bar),
    weighted by R_i^(2+delta).  The normaliser is folded into each G-function
    exponent so nothing overflows for large L or A.
    """
    if not isinstance(cfg, SystemConfig):
        raise ConfigError("effective_rate_closed needs a SystemConfig")
    d, L, A, gb = cfg.delta, cfg.L, cfg.A, cfg.gamma_bar()
    spec = MeijerGSpec(3, 2, [-2 / d, 0], [L - 1, 0, A - 1, -1 - 2 / d])
    log_norm = (special.gammaln(L) + special.gammaln(A)
                + math.log(2 * d * gb * (cfg.R2 ** 2 - cfg.R1 ** 2)))
    terms = [meijer_g(spec, R ** d / (4 * gb), log_norm - (2 + d) * math.log(R))
             for R in (cfg.R2, cfg.R1)]
    M = terms[0] - terms[1]
    err_M = spec.rel_tol * (abs(terms[0]) + abs(terms[1]))
    return rate_from_moment(M, A, "closed", err_M, cfg.as_dict())


def _moment_quadrature(pdf, A, scale, rtol):
    # gamma = scale * t / (1 - t) maps (0, inf) onto (0, 1); the scale puts the
    # bulk of the density near the middle of the unit interval.
    def integrand(t):
        g = scale * t / (1.0 - t)
        jac = scale / (1.0 - t) ** 2
        return np.exp(-A * np.log1p(g)) * pdf(g) * jac

    edges = [0.0, 0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98, 0.999, 1.0]
    res = gauss_kronrod(integrand, edges, rtol=rtol, atol=1e-15)
    return res.value, res.error


def effective_rate_quadrature(cfg: SystemConfig, rtol: float = 1e-8) -> RateEstimate:
    """Effective rate by direct quadrature of the moment against ``pdf_snr``."""
    _check_A(cfg.A)
    M, err = _moment_quadrature(lambda g: pdf_snr(g, cfg), cfg.A, mean_snr(cfg), rtol)
    return rate_from_moment(M, cfg.A, "quadrature", err, cfg.as_dict())


def effective_rate_phase_only(gamma_bar_eff: float, L: int, A: float) -> RateEstimate:
    """Effective rate with both distances fixed (phase errors only).

    Moment = G^{3,1}_{1,3}(1/(4 gbe) | 0; L-1, 0, A-1) / (4 gbe Gamma(A) Gamma(L)).
    """
    if not gamma_bar_eff > 0:
        raise DomainError("gamma_bar_eff must be > 0")
    if int(L) != L or L < 1:
        raise DomainError(f"L must be an integer >= 1, got {L!r}")
    _check_A(A)
    spec = MeijerGSpec(3, 1, [0], [L - 1, 0, A - 1])
    log_norm = math.log(4 * gamma_bar_eff) + special.gammaln(A) + special.gammaln(L)
    M = meijer_g(spec, 1.0 / (4 * gamma_bar_eff), log_norm)
    meta = {"gamma_bar_eff": gamma_bar_eff, "L": int(L), "A": A}
    return rate_from_moment(M, A, "phase_only", spec.rel_tol * abs(M), meta)


def effective_rate_phase_only_quadrature(gamma_bar_eff: float, L: int, A: float,
                                         rtol: float = 1e-8) -> RateEstimate:
    """Direct-quadrature counterpart of ``effective_rate_phase_only``."""
    _check_A(A)
    pdf = lambda g: pdf_snr_fixed(g, gamma_bar_eff, L)  # noqa: E731
    M, err = _moment_quadrature(pdf, A, 4 * L * gamma_bar_eff, rtol)
    meta = {"gamma_bar_eff": gamma_bar_eff, "L": int(L), "A": A}
    return rate_from_moment(M, A, "quadrature", err, meta)


def effective_rate_asymptotic(cfg: SystemConfig) -> RateEstimate:
    """High-SNR approximation; needs L > 1 and A > 1.

    Keeps the leading small-argument term of each G^{3,2}_{2,4}:
    M ~ (R2^(2+delta) - R1^(2+delta)) /
        (gamma_bar (2 delta + 4) (L-1) (A-1) (R2^2 - R1^2)).
    """
    d, L, A, gb = cfg.delta, cfg.L, cfg.A, cfg.gamma_bar()
    if L <= 1 or A <= 1:
        raise AsymptoteUndefined(f"high-SNR approximation needs L > 1 and A > 1 (L={L}, A={A})")
    log_M = (math.log(cfg.R2 ** (2 + d) - cfg.R1 ** (2 + d))
             - math.log(gb * (2 * d + 4) * (L - 1) * (A - 1) * (cfg.R2 ** 2 - cfg.R1 ** 2)))
    # Outside the high-SNR regime the approximation can exceed 1; the rate is
    # then reported as is (negative), never clamped.
    return RateEstimate(-log_M / (A * LN2), "asymptotic", 0.0, cfg.as_dict())
