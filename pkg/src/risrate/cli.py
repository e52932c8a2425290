"""Command-line front end: ``risrate rate | sweep | validate``.

Transmit SNR enters in dB here and nowhere else; everything below the CLI
works with linear ratios.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import __version__
from .channel import (QoSConfig, SystemConfig, cdf_cascade_x, pdf_cascade_x,
                      pdf_snr, pdf_snr_by_mixing)
from .effrate import (effective_rate_asymptotic, effective_rate_closed,
                      effective_rate_phase_only, effective_rate_quadrature)
from .errors import RisRateError
from .montecarlo import McRequest, Scenario, run_mc
from .specfun import MeijerGSpec, bessel_k_int, meijer_g
from .sweep import (SWEEP_METHODS, ConfigParseError, build_config,
                    build_sweep, emit_csv, parse_pairs, preset_pairs, run_sweep)

# flag name -> config key
_FLAG_KEYS = {"rho_db": "rho_db", "L": "L", "R1": "R1", "R2": "R2", "delta": "delta",
              "A": "A", "theta": "theta", "T": "T", "B": "B", "d_SR": "d_SR",
              "d_RD": "d_RD", "axis": "axis", "grid": "grid", "samples": "mc_samples",
              "seed": "mc_seed", "shards": "mc_shards"}


def _add_config_flags(p):
    p.add_argument("--config", help="key = value file")
    p.add_argument("--rho-db", dest="rho_db", help="transmit SNR P/sigma^2 in dB")
    p.add_argument("--L", help="number of surface elements")
    p.add_argument("--R1", help="inner ring radius [m]")
    p.add_argument("--R2", help="outer ring radius [m]")
    p.add_argument("--delta", help="path-loss exponent")
    p.add_argument("--A", help="QoS exponent A (exclusive with --theta)")
    p.add_argument("--theta", help="buffer decay rate [1/bit]; A = theta*T*B/ln2")
    p.add_argument("--T", help="block length [s] (with --theta, default 1)")
    p.add_argument("--B", help="bandwidth [Hz] (with --theta, default 1)")
    p.add_argument("--d-SR", dest="d_SR", help="source-to-surface distance [m], default 1")
    p.add_argument("--d-RD", dest="d_RD", help="fixed receiver distance for phase_only / ideal_mc")
    p.add_argument("--samples", help="Monte Carlo samples")
    p.add_argument("--seed", help="Monte Carlo seed")
    p.add_argument("--shards", help="Monte Carlo shards")
    p.add_argument("--method", action="append", choices=SWEEP_METHODS,
                   help="method to run (repeatable)")


def _collect_pairs(args, start=None):
    pairs = dict(start or {})
    lines = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_pairs = parse_pairs(fh.read())
        lines = file_pairs.pop("__lines__")
        pairs.update(file_pairs)
    for attr, key in _FLAG_KEYS.items():
        val = getattr(args, attr, None)
        if val is not None:
            pairs[key] = str(val)
    # A and theta are exclusive; the later source wins.
    if getattr(args, "A", None) is not None:
        pairs.pop("theta", None)
    elif getattr(args, "theta", None) is not None:
        pairs.pop("A", None)
    if args.method:
        pairs["methods"] = ",".join(args.method)
    pairs["__lines__"] = lines
    return pairs


def cmd_rate(args) -> int:
    pairs = _collect_pairs(args)
    cfg = build_config(pairs)
    methods = args.method or ["closed", "quad", "asym", "phase_only", "mc", "ideal_mc"]
    d_RD = float(pairs.get("d_RD", cfg.R1))
    samples = int(float(pairs.get("mc_samples", 10 ** 5)))
    seed = int(pairs.get("mc_seed", 0))
    shards = int(pairs.get("mc_shards", 1))
    print(f"# rho={cfg.rho:.6g} (linear) delta={cfg.delta} L={cfg.L} R1={cfg.R1} "
          f"R2={cfg.R2} d_SR={cfg.d_SR} A={cfg.A:.6g} d_RD={d_RD}")
    print(f"{'method':<12} {'rate_bps_hz':>20} {'err':>12}")
    status = 0
    for m in methods:
        try:
            if m == "closed":
                est = effective_rate_closed(cfg)
            elif m == "quad":
                est = effective_rate_quadrature(cfg)
            elif m == "asym":
                est = effective_rate_asymptotic(cfg)
            elif m == "phase_only":
                est = effective_rate_phase_only(cfg.gamma_bar_eff(d_RD), cfg.L, cfg.A)
            else:
                scen = Scenario.full() if m == "mc" else Scenario.ideal_phase(d_RD)
                est = run_mc(McRequest(cfg, scen, samples, seed, shards)).rate
            print(f"{m:<12} {est.rate:>20.12g} {est.err_abs:>12.3g}")
        except RisRateError as exc:
            print(f"{m:<12} {'nan':>20} {'nan':>12}  # {type(exc).__name__}: {exc}")
            if m != "asym":
                status = 1
    return status


def cmd_sweep(args) -> int:
    start = preset_pairs(args.preset) if args.preset else None
    pairs = _collect_pairs(args, start)
    spec = build_sweep(pairs, build_config(pairs))
    t0 = time.perf_counter()
    rows = run_sweep(spec, log=lambda msg: print(f"warning: {msg}", file=sys.stderr))
    emit_csv(rows, args.out or sys.stdout)
    failed = sum(r.error is not None for r in rows)
    print(f"# {len(rows)} rows, {failed} failed, {time.perf_counter() - t0:.1f} s, "
          f"meta_hash={spec.meta_hash()}", file=sys.stderr)
    return 0


def _validation_checks(samples):
    ring = dict(delta=3.4, R1=2.0, R2=5.0, qos=QoSConfig(5.4))

    def g11():
        worst = 0.0
        for c in (0.5, 1.0, 2.0, 5.4):
            spec = MeijerGSpec(1, 1, [1 - c], [0])
            for x in np.logspace(-3, 3, 20):
                ref = math.gamma(c) * (1 + x) ** -c
                worst = max(worst, abs(meijer_g(spec, x) - ref) / ref)
        return worst <= 1e-8, f"max rel err {worst:.2e}"

    def g02():
        worst = 0.0
        for nu in range(7):
            spec = MeijerGSpec(2, 0, [], [nu, 0])
            for z in np.logspace(-2, 2, 15):
                ref = 2 * z ** (nu / 2) * bessel_k_int(nu, 2 * math.sqrt(z))
                worst = max(worst, abs(meijer_g(spec, z) - ref) / ref)
        return worst <= 1e-8, f"max rel err {worst:.2e}"

    def cascade():
        worst = 0.0
        for L in (1, 5, 40):
            for x in (1.0, 10.0, 100.0):
                h = 1e-4 * x
                num = (cdf_cascade_x(x + h, L) - cdf_cascade_x(x - h, L)) / (2 * h)
                worst = max(worst, abs(num / pdf_cascade_x(x, L) - 1))
        return worst <= 1e-5, f"max rel err {worst:.2e}"

    def mixing():
        cfg = SystemConfig(rho=10.0, L=40, **ring)
        g = np.logspace(-2, 4, 12)
        rel = np.max(np.abs(pdf_snr(g, cfg) / pdf_snr_by_mixing(g, cfg) - 1))
        return rel <= 1e-6, f"max rel err {rel:.2e}"

    def closed_vs_quad():
        worst = 0.0
        for rdb in (0, 15, 30):
            cfg = SystemConfig(rho=10 ** (rdb / 10), L=30, **ring)
            worst = max(worst, abs(effective_rate_closed(cfg).rate
                                   - effective_rate_quadrature(cfg).rate))
        return worst <= 1e-6, f"max abs diff {worst:.2e}"

    def mc_agreement():
        cfg = SystemConfig(rho=10.0, L=40, **ring)
        res = run_mc(McRequest(cfg, samples=samples, seed=1))
        lo, hi = res.ci(2.5758293035489004)
        c = effective_rate_closed(cfg).rate
        return lo <= c <= hi, f"closed {c:.5f} in 99% CI [{lo:.5f}, {hi:.5f}]"

    return [("Meijer G (1+x)^-c identity", g11),
            ("Meijer G Bessel reduction", g02),
            ("cascade CDF/PDF consistency", cascade),
            ("SNR PDF closed form vs mixing integral", mixing),
            ("effective rate closed vs quadrature", closed_vs_quad),
            (f"Monte Carlo agreement ({samples} samples)", mc_agreement)]


def cmd_validate(args) -> int:
    failed = 0
    for name, check in _validation_checks(int(float(args.samples))):
        t0 = time.perf_counter()
        try:
            ok, detail = check()
        except RisRateError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail} ({time.perf_counter() - t0:.1f} s)")
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="risrate", description="Effective rate of surface-aided links with phase and location uncertainty")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_rate = sub.add_parser("rate", help="evaluate one configuration with every method")
    _add_config_flags(p_rate)
    p_rate.set_defaults(func=cmd_rate)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter and write CSV")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--preset", help="ring | fig3 | fig4 | fig5")
    p_sweep.add_argument("--axis", help="rho_db | L | coverage_area | theta | d_RD")
    p_sweep.add_argument("--grid", help="'0,5,10' or linspace(a,b,n) / logspace(a,b,n) / arange(a,b,step)")
    p_sweep.add_argument("--out", help="CSV path (default stdout)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="run the built-in consistency checks")
    p_val.add_argument("--samples", default="1e5", help="Monte Carlo samples for the agreement check")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RisRateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
