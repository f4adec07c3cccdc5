"""Command-line orchestrator: run verification campaigns from a JSON config
and emit deterministic CSV/JSON artifacts.

Subcommands: symbol, star-check, kernel, alpha-sweep, phi-audit,
limit-check, oracle-compare, unitarity.  Exit codes: 0 pass,
1 verification failure, 2 usage/config error.  Identical config and flags
produce byte-identical output; floats are printed with 17 significant
digits.  NCPATH_THREADS caps the worker count for independent kernel
builds.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import phi_engine
from .core import ConfigError, load_config
from .oracle import oracle_compare
from .slicer import SlicingConfig, alpha_sweep, full_kernel, short_time_propagator
from .star import gaussian_packet, potential_operator_kernel, star_apply, \
    star_integral_identity_check
from .weyl import verify_alpha_washout

IDENTITY_SET_VERSION = 1

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return str(value)


def _write_artifact(path, header, rows, footer_rows=()):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    for row in footer_rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_hash(cfg) -> str:
    canonical = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_summary(path, command, cfg, header, rows, extra=None):
    if not path:
        return
    payload = {
        "command": command,
        "identity_set_version": IDENTITY_SET_VERSION,
        "config_sha256": _config_hash(cfg) if cfg is not None else None,
        "columns": list(header),
        "rows": [[_fmt(v) for v in row] for row in rows],
    }
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(args):
    cfg = load_config(args.config)
    return cfg


def _probe(cfg, args=None):
    width = cfg.probe.width
    if args is not None and getattr(args, "probe_width", None) is not None:
        width = args.probe_width  # flag wins over the config key
    return gaussian_packet(cfg.grid, center=cfg.probe.center,
                           width=width, momentum=cfg.probe.momentum)


def _parse_float_list(text):
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _parse_int_list(text):
    return [int(v) for v in text.split(",") if v.strip() != ""]


def _workers(args):
    env = os.environ.get("NCPATH_THREADS")
    if args.workers is not None:
        return max(1, args.workers)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("NCPATH_THREADS: must be an integer")
    return 1


# -- subcommands --------------------------------------------------------------


def cmd_symbol(args) -> int:
    cfg = _load(args)
    alphas = _parse_float_list(args.alphas)
    method = args.method.replace("-", "_")
    report = verify_alpha_washout(cfg.potential, cfg.theta, cfg.grid, alphas,
                                  method=method)
    target = cfg.potential(
        cfg.grid.x_points[None, :, :] + cfg.theta.shift(cfg.grid.k_points)[:, None, :])
    header = ["alpha", "k_index", "x_index", "re", "im", "deviation"]
    rows = []
    for a, sym in zip(report.alphas, report.symbols):
        dev = np.abs(sym.values - target)
        for ki in range(cfg.grid.size):
            for xi in range(cfg.grid.size):
                v = sym.values[ki, xi]
                rows.append((a, ki, xi, v.real, v.imag, dev[ki, xi]))
    footer = [("# max_pairwise_abs", report.max_pairwise_abs, "", "", "", ""),
              ("# max_pairwise_relative", report.max_pairwise_relative, "", "", "", "")]
    _write_artifact(args.out, header, rows, footer)
    _write_summary(args.summary, "symbol", cfg, header, rows,
                   {"max_pairwise_abs": _fmt(report.max_pairwise_abs),
                    "max_pairwise_relative": _fmt(report.max_pairwise_relative),
                    "method": report.method})
    return EXIT_OK


def cmd_star_check(args) -> int:
    cfg = _load(args)
    grid, theta, V = cfg.grid, cfg.theta, cfg.potential
    phi = gaussian_packet(grid, center=cfg.probe.center, width=cfg.probe.width,
                          momentum=cfg.probe.momentum)
    psi = gaussian_packet(grid, width=None if cfg.probe.width is None
                          else 0.9 * cfg.probe.width)
    checks = []
    dev = star_integral_identity_check(phi, psi, theta)
    checks.append(("integral_identity", dev, 1e-8))
    applied = star_apply(V, theta, psi)
    if grid.size <= 4096:
        kern = potential_operator_kernel(V, theta, grid)
        via_kernel = kern.apply(psi)
        checks.append(("kernel_vs_star", float(np.max(np.abs(
            via_kernel.values - applied.values))), 1e-8))
        checks.append(("kernel_hermiticity", kern.hermiticity_deviation(),
                       1e-6 * max(1.0, float(np.max(np.abs(kern.entries))))))
    header = ["check", "value", "threshold", "pass"]
    rows = [(name, value, thr, str(value <= thr).lower()) for name, value, thr in checks]
    _write_artifact(args.out, header, rows)
    _write_summary(args.summary, "star-check", cfg, header, rows)
    return EXIT_OK if all(v <= t for _, v, t in checks) else EXIT_FAIL


def cmd_kernel(args) -> int:
    cfg = _load(args)
    scfg = SlicingConfig(args.m, args.total_time, args.alpha, cfg.params)
    kernel = full_kernel(scfg, cfg.potential, cfg.theta, cfg.grid) if args.compose \
        else short_time_propagator(scfg, cfg.potential, cfg.theta, cfg.grid)
    grid = cfg.grid
    theta_flat = ",".join(_fmt(v) for v in cfg.theta.entries.reshape(-1))
    header_line = (f"{grid.dim},{grid.points_per_axis},{_fmt(grid.box_half_width)},"
                   f"{args.m},{_fmt(args.alpha)},{_fmt(args.total_time)},"
                   f"{_fmt(cfg.params.hbar)},{_fmt(cfg.params.mass)},{theta_flat}")
    lines = [header_line]
    for row in kernel.entries:
        lines.append(" ".join(f"{_fmt(v.real)},{_fmt(v.imag)}" for v in row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_alpha_sweep(args) -> int:
    cfg = _load(args)
    alphas = _parse_float_list(args.alphas)
    m_values = _parse_int_list(args.m_list)
    result = alpha_sweep(cfg.params, args.total_time, alphas, m_values,
                         cfg.potential, cfg.theta, cfg.grid, _probe(cfg, args),
                         workers=_workers(args))
    header = ["m", "alpha_pair", "spread"]
    rows = []
    for m in result.m_values:
        for (i, j), spread in sorted(result.spreads[m].items()):
            rows.append((m, f"{_fmt(alphas[i])}|{_fmt(alphas[j])}", spread))
    footer = [("# slope", result.slope, result.residual)]
    _write_artifact(args.out, header, rows, footer)
    _write_summary(args.summary, "alpha-sweep", cfg, header, rows,
                   {"slope": _fmt(result.slope), "intercept": _fmt(result.intercept),
                    "residual": _fmt(result.residual)})
    return EXIT_OK


def cmd_phi_audit(args) -> int:
    alphas = [Fraction(v) for v in args.alphas.split(",")]
    report = phi_engine.run_phi_audit(args.m, alphas, dim=args.dim,
                                      theta_value=Fraction(args.theta),
                                      total_time=Fraction(args.total_time))
    header = ["identity", "status", "detail"]
    rows = [(r.name, "PASS" if r.passed else "FAIL", r.detail) for r in report.rows]
    for r in report.rows:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    if args.out:
        _write_artifact(args.out, header, rows)
    if args.summary:
        _write_summary(args.summary, "phi-audit", None, header, rows,
                       {"m": args.m, "ok": report.ok})
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_limit_check(args) -> int:
    m_values = _parse_int_list(args.m_list)
    T = Fraction(args.total_time)
    header = ["m", "value", "gap_to_T_squared", "expected_gap", "pass"]
    rows = []
    ok = True
    for m in m_values:
        value, error = phi_engine.midslice_limit_check(m, T)
        expected = T * T / (m + 1)
        good = (value == T * T * Fraction(m, m + 1)) and (error == expected)
        ok = ok and good
        rows.append((m, str(value), str(error), str(expected), str(good).lower()))
    _write_artifact(args.out, header, rows)
    if args.summary:
        _write_summary(args.summary, "limit-check", None, header, rows, {"ok": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle_compare(args) -> int:
    cfg = _load(args)
    m_values = _parse_int_list(args.m_list)
    probe = _probe(cfg, args)
    header = ["m", "l2_error_vs_spectral", "runtime_seconds"]
    rows = []
    for m in m_values:
        t0 = time.perf_counter()
        result = oracle_compare(cfg.potential, cfg.theta, cfg.grid, cfg.params,
                                args.total_time, [m], probe, alpha=args.alpha)
        rows.append((m, result[0][1], time.perf_counter() - t0))
    _write_artifact(args.out, header, rows)
    _write_summary(args.summary, "oracle-compare", cfg, header, rows)
    return EXIT_OK


def cmd_unitarity(args) -> int:
    cfg = _load(args)
    m_values = _parse_int_list(args.m_list)
    probe = _probe(cfg, args)
    header = ["m", "norm_ratio"]
    rows = []
    for m in m_values:
        scfg = SlicingConfig(m, args.total_time, args.alpha, cfg.params)
        kernel = full_kernel(scfg, cfg.potential, cfg.theta, cfg.grid)
        rows.append((m, kernel.apply(probe).norm() / probe.norm()))
    _write_artifact(args.out, header, rows)
    _write_summary(args.summary, "unitarity", cfg, header, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncpath",
        description="Phase-space path integral toolkit for noncommuting coordinates",
    )
    sub = parser.add_subparsers(dest="command")

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="JSON configuration file")
            p.add_argument("--probe-width", type=float, default=None,
                           help="probe packet width; overrides the config key")
        p.add_argument("--out", default=None, help="CSV artifact path (default stdout)")
        p.add_argument("--summary", default=None, help="JSON summary path")

    p = sub.add_parser("symbol", help="ordering-index symbols and washout deviations")
    add_common(p)
    p.add_argument("--alphas", default="-0.4,0,0.4")
    p.add_argument("--method", default="closed-form", choices=["closed-form", "direct"])
    p.set_defaults(func=cmd_symbol)

    p = sub.add_parser("star-check", help="star-product identity checks")
    add_common(p)
    p.set_defaults(func=cmd_star_check)

    p = sub.add_parser("kernel", help="emit one propagator kernel")
    add_common(p)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--total-time", type=float, default=1.0)
    p.add_argument("--compose", action="store_true",
                   help="emit the composed kernel instead of a single slice")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("alpha-sweep", help="ordering spread vs slice count")
    add_common(p)
    p.add_argument("--alphas", default="0.5,-0.5")
    p.add_argument("--m-list", default="4,8,16,32")
    p.add_argument("--total-time", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_alpha_sweep)

    p = sub.add_parser("phi-audit", help="exact source-functional identities")
    add_common(p, needs_config=False)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--alphas", default="-0.5,0,0.5")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--theta", default="1/10")
    p.add_argument("--total-time", default="1")
    p.set_defaults(func=cmd_phi_audit)

    p = sub.add_parser("limit-check", help="surviving midslice coefficient vs T²")
    add_common(p, needs_config=False)
    p.add_argument("--m-list", default="2,10,100,1000")
    p.add_argument("--total-time", default="1")
    p.set_defaults(func=cmd_limit_check)

    p = sub.add_parser("oracle-compare", help="sliced kernel vs spectral propagator")
    add_common(p)
    p.add_argument("--m-list", default="16,32,64")
    p.add_argument("--total-time", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("unitarity", help="probe norm conservation vs slice count")
    add_common(p)
    p.add_argument("--m-list", default="16,32,64")
    p.add_argument("--total-time", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_unitarity)

    return parser


_VALUE_FLAGS = {"--alphas", "--theta", "--m-list", "--total-time", "--alpha", "--m"}


def _merge_value_flags(argv):
    """Join '--alphas -0.5,0,0.5' into '--alphas=-0.5,0,0.5' so argparse does
    not mistake a leading minus sign for an option."""
    out = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            skip = True
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_merge_value_flags(list(argv)))
    if not getattr(args, "command", None):
        parser.print_help()
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
