"""Monte Carlo simulation of the end-to-end SNR and its effective rate.

Random streams: shard ``i`` of a run with seed ``s`` draws from
``numpy.random.PCG64(SeedSequence([s, i]))`` (SeedSequence hashes the pair),
in fixed chunks of ``CHUNK`` samples.  Within a chunk the draw order is
h-amplitudes, g-amplitudes, phase errors, distance uniforms -- always all
four, whatever the scenario, so scenarios run with the same seed share their
fading draws.  Results depend only on (seed, shards, samples).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import LN2, SystemConfig
from .effrate import RateEstimate
from .errors import ConfigError

CHUNK = 1 << 15
RNG_ALGORITHM = "numpy PCG64 / SeedSequence([seed, shard]); chunk=32768; order=h,g,eps,u"
Z95 = 1.959963984540054
Z99 = 2.5758293035489004

FULL = "full_uncertainty"
PHASE_ONLY = "phase_only"
IDEAL = "ideal_phase"


@dataclass(frozen=True)
class Scenario:
    """Which SNR model to simulate.

    full_uncertainty draws the receiver distance on the ring; phase_only and
    ideal_phase use the fixed distance ``d_RD``; ideal_phase also zeroes
    every phase error.
    """

    kind: str = FULL
    d_RD: float | None = None

    def __post_init__(self):
        if self.kind not in (FULL, PHASE_ONLY, IDEAL):
            raise ConfigError(f"unknown scenario {self.kind!r}")
        if self.kind == FULL and self.d_RD is not None:
            raise ConfigError("full_uncertainty draws d_RD; do not pass one")
        if self.kind != FULL and not (self.d_RD is not None and self.d_RD > 0):
            raise ConfigError(f"{self.kind} needs a positive d_RD")

    @classmethod
    def full(cls):
        return cls(FULL)

    @classmethod
    def phase_only(cls, d_RD):
        return cls(PHASE_ONLY, d_RD)

    @classmethod
    def ideal_phase(cls, d_RD):
        return cls(IDEAL, d_RD)


@dataclass(frozen=True)
class McRequest:
    cfg: SystemConfig
    scenario: Scenario = field(default_factory=Scenario.full)
    samples: int = 10 ** 6
    seed: int = 0
    shards: int = 1

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise ConfigError("samples must be a positive integer")
        if int(self.shards) != self.shards or self.shards < 1:
            raise ConfigError("shards must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an integer in [0, 2^64)")


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    stderr: float
    n: int


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray       # per-bin probability, sums to 1
    density: np.ndarray    # mass / bin width


@dataclass(frozen=True)
class McResult:
    rate: RateEstimate
    rate_stderr: float
    moment_M: MeanEstimate
    ergodic_capacity: MeanEstimate
    rng: str = RNG_ALGORITHM
    histogram: Histogram | None = None

    def ci(self, z=Z95):
        """(low, high) confidence interval of the rate for a normal quantile z."""
        return self.rate.rate - z * self.rate_stderr, self.rate.rate + z * self.rate_stderr


def shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(shard)])))


def shard_sizes(samples: int, shards: int) -> list[int]:
    base, extra = divmod(samples, shards)
    return [base + (i < extra) for i in range(shards)]


def draw_chunk(cfg: SystemConfig, scenario: Scenario, rng: np.random.Generator, size: int):
    """Return (X, d_RD) arrays for ``size`` independent channel realisations."""
    L = cfg.L
    h = rng.rayleigh(size=(size, L))
    g = rng.rayleigh(size=(size, L))
    eps = rng.uniform(-math.pi, math.pi, size=(size, L))
    u = rng.random(size)
    amp = h * g
    if scenario.kind == IDEAL:
        x = amp.sum(axis=1) ** 2
    else:
        x = (amp * np.cos(eps)).sum(axis=1) ** 2 + (amp * np.sin(eps)).sum(axis=1) ** 2
    if scenario.kind == FULL:
        d = np.sqrt(cfg.R1 ** 2 + u * (cfg.R2 ** 2 - cfg.R1 ** 2))
    else:
        d = np.full(size, float(scenario.d_RD))
    return x, d


def snr_from_draws(cfg: SystemConfig, x, d):
    return cfg.gamma_bar() * x / d ** cfg.delta


def sample_snr(cfg: SystemConfig, scenario: Scenario, rng: np.random.Generator, size=None):
    """Draw SNR realisation(s); a float when ``size`` is None."""
    n = 1 if size is None else int(size)
    x, d = draw_chunk(cfg, scenario, rng, n)
    g = snr_from_draws(cfg, x, d)
    return float(g[0]) if size is None else g


def _iter_shard(req: McRequest, shard: int, n: int):
    rng = shard_rng(req.seed, shard)
    while n > 0:
        m = min(CHUNK, n)
        yield draw_chunk(req.cfg, req.scenario, rng, m)
        n -= m


class _Moments:
    """Running (count, mean, M2) merged with Chan et al.'s pairwise update."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self):
        self.n, self.mean, self.m2 = 0, 0.0, 0.0

    def add_batch(self, v):
        nb = v.size
        mb = float(np.mean(v))
        m2b = float(np.sum((v - mb) ** 2))
        self.merge(nb, mb, m2b)

    def merge(self, nb, mb, m2b):
        n = self.n + nb
        delta = mb - self.mean
        self.mean += delta * nb / n
        self.m2 += m2b + delta * delta * self.n * nb / n
        self.n = n

    def estimate(self):
        var = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        return MeanEstimate(self.mean, math.sqrt(var / self.n), self.n)


def _map_shards(fn, req: McRequest):
    sizes = shard_sizes(req.samples, req.shards)
    if req.shards == 1:
        return [fn(0, sizes[0])]
    workers = min(req.shards, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() preserves shard order, so the reduction below is ordered.
        return list(pool.map(fn, range(req.shards), sizes))


def _shard_stats(req: McRequest, rhos, shard, n):
    A = req.cfg.A
    out = [(_Moments(), _Moments()) for _ in rhos]
    for x, d in _iter_shard(req, shard, n):
        base = x / d ** req.cfg.delta / req.cfg.d_SR ** req.cfg.delta
        for (mom, erg), rho in zip(out, rhos):
            lg = np.log1p(rho * base)
            mom.add_batch(np.exp(-A * lg))
            erg.add_batch(lg / LN2)
    return out


def _result(req: McRequest, rho, mom: _Moments, erg: _Moments) -> McResult:
    A = req.cfg.A
    M = mom.estimate()
    C = erg.estimate()
    rate = -math.log(M.mean) / (A * LN2)
    rate_se = M.stderr / (M.mean * A * LN2)
    method = "ideal_mc" if req.scenario.kind == IDEAL else "monte_carlo"
    meta = dict(req.cfg.as_dict(), rho=rho, scenario=req.scenario.kind,
                d_RD=req.scenario.d_RD, samples=req.samples, seed=req.seed,
                shards=req.shards, rng=RNG_ALGORITHM)
    return McResult(RateEstimate(rate, method, Z95 * rate_se, meta), rate_se, M, C)


def run_mc_sweep(req: McRequest, rhos) -> list[McResult]:
    """``run_mc`` at several transmit SNRs from one set of channel draws.

    The draws do not depend on rho, so each entry equals ``run_mc`` on the
    request with ``cfg.rho`` replaced (common random numbers).
    """
    rhos = [float(r) for r in rhos]
    if any(not r > 0 for r in rhos):
        raise ConfigError("rho values must be positive")
    per_shard = _map_shards(lambda i, n: _shard_stats(req, rhos, i, n), req)
    results = []
    for k, rho in enumerate(rhos):
        mom, erg = _Moments(), _Moments()
        for shard in per_shard:
            m, e = shard[k]
            mom.merge(m.n, m.mean, m.m2)
            erg.merge(e.n, e.mean, e.m2)
        results.append(_result(req, rho, mom, erg))
    return results


def run_mc(req: McRequest) -> McResult:
    """Estimate E[(1+gamma)^-A], the effective rate and the ergodic capacity."""
    return run_mc_sweep(req, [req.cfg.rho])[0]


def snr_samples(req: McRequest) -> np.ndarray:
    """All SNR draws of a request, concatenated in shard order."""
    def one(shard, n):
        parts = [snr_from_draws(req.cfg, x, d) for x, d in _iter_shard(req, shard, n)]
        return np.concatenate(parts) if parts else np.empty(0)
    return np.concatenate(_map_shards(one, req))


def cascade_samples(req: McRequest) -> np.ndarray:
    """Draws of the cascade power X alone (no path loss)."""
    def one(shard, n):
        parts = [x for x, _ in _iter_shard(req, shard, n)]
        return np.concatenate(parts) if parts else np.empty(0)
    return np.concatenate(_map_shards(one, req))


def empirical_pdf(req: McRequest, bins: int = 200, coverage: float = 0.9999,
                  samples: np.ndarray | None = None) -> Histogram:
    """Log-binned empirical SNR density over the central ``coverage`` of draws."""
    g = snr_samples(req) if samples is None else np.asarray(samples)
    tail = (1.0 - coverage) / 2.0
    lo, hi = np.quantile(g, [tail, 1.0 - tail])
    edges = np.geomspace(lo, hi, bins + 1)
    counts, _ = np.histogram(g, bins=edges)
    mass = counts / counts.sum()
    return Histogram(edges, mass, mass / np.diff(edges))


def ks_distance(samples, cdf, grid_size: int = 4000) -> float:
    """Kolmogorov-Smirnov distance between draws and a model CDF.

    The model CDF is tabulated on a log grid spanning the draws and
    interpolated (in log gamma) at every sorted draw, so the statistic is
    exact up to the interpolation error of a smooth CDF.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    grid = np.geomspace(x[0], x[-1], grid_size)
    F = np.interp(np.log(x), np.log(grid), np.asarray(cdf(grid), dtype=float))
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    return float(max(np.max(ecdf_hi - F), np.max(F - ecdf_lo)))
