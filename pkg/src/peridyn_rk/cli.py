"""Command-line driver: ``peridyn-rk <command> [--config FILE] [--key value ...]``.

Commands
--------
converge    convergence study for one horizon/spacing coupling
solve       single manufactured-solution solve
weights     quasi-discrete point set and weights
symbols     positivity scan of the Fourier symbols
truncation  consistency residuals of the discrete operators

Any configuration key can be given as ``--key value`` (dashes or
underscores); boolean keys also accept a bare ``--key``.  Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import contextlib
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import l2_error
from .bench import ManufacturedCase, run_convergence, solve_case, truncation_study
from .config import COMMANDS, parse_config
from .exceptions import ConfigError, PeridynError
from .kernel import RadialKernel
from .quad import build_quadset
from .symbols import stability_scan, state_constants

log = logging.getLogger("peridyn_rk")

_BOOLEAN_KEYS = {"allow_lambda_lt_mu", "timing"}


def _split_overrides(tokens):
    """Turn ``--key value`` / ``--key=value`` / ``--flag`` tokens into a dict."""
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}")
        name = tok[2:]
        if "=" in name:
            name, value = name.split("=", 1)
            i += 1
        elif name.replace("-", "_") in _BOOLEAN_KEYS and (
            i + 1 == len(tokens) or tokens[i + 1].startswith("--")
        ):
            value = "true"
            i += 1
        else:
            if i + 1 == len(tokens):
                raise ConfigError(f"missing value for --{name}", name.replace("-", "_"))
            value = tokens[i + 1]
            i += 2
        out[name.replace("-", "_")] = value
    return out


def _threads():
    raw = os.environ.get("PERIDYN_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"PERIDYN_THREADS must be an integer, got {raw!r}", "PERIDYN_THREADS") from None
    if n < 1:
        raise ConfigError("PERIDYN_THREADS must be at least 1", "PERIDYN_THREADS")
    return n


def _header(cfg, command):
    return [
        f"peridyn-rk {__version__} {command}",
        f"config_hash {cfg.digest()}",
        f"E={cfg.E!r} nu={cfg.nu!r} h_hat={cfg.h_hat!r}",
        "units: lengths in domain units, moduli and body forces in units of E, displacements in domain units",
    ]


def _case(cfg):
    return ManufacturedCase(material=cfg.material())


def _notices(cfg):
    consts = state_constants(cfg.material())
    lines = list(_case(cfg).notices())
    lines.append(
        "state-term constant: operator-derived value {:.6g}, alternative printed form {:.6g} "
        "(ratio {:g}); the solver uses the operator-derived coefficient with computed m = {:.6g}".format(
            consts["operator_constant"], consts["alternative_constant"], consts["ratio"], consts["m"]
        )
    )
    return lines


def _run_converge(cfg, out):
    record = run_convergence(
        cfg.coupling,
        cfg.ladder,
        case=_case(cfg),
        delta=cfg.delta,
        m0=cfg.m0,
        eps1=cfg.epsilon1,
        h_hat=cfg.h_hat,
        reference_factor=cfg.reference_factor,
    )
    path = out / f"converge_{cfg.coupling}.csv"
    record.to_csv(path, _header(cfg, "converge") + [f"reference {record.reference}"], timing=cfg.timing)
    print(f"coupling {cfg.coupling}: errors measured against {record.reference}")
    for e in record.entries:
        rate = "" if np.isnan(e.rate) else f"  rate {e.rate:.3f}"
        print(f"  h_max={e.h_max:<10.6g} delta={e.delta:<10.6g} dofs={e.dofs:<7d} error={e.l2_error:.4e}{rate}")
    print(f"least-squares slope {record.slope:.3f}; monotone: {record.monotone}")
    return path


def _run_solve(cfg, out):
    case = _case(cfg)
    quadset = build_quadset(cfg.epsilon1, case.kernel) if cfg.mode == "quasi" else None
    grid, coeffs, report = solve_case(cfg.h_max, cfg.delta, case, cfg.h_hat, quadset=quadset)
    err = l2_error(grid, coeffs, case.exact)
    path = out / "solution.csv"
    pts = grid.node_points("box")
    values = coeffs.reshape(coeffs.shape[0], -1).T
    with open(path, "w", newline="") as fh:
        for line in _header(cfg, "solve"):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x1", "x2", "c1", "c2"])
        for p, v in zip(pts, values):
            writer.writerow([repr(float(p[0])), repr(float(p[1])), f"{v[0]:.15e}", f"{v[1]:.15e}"])
    print(f"grid {grid.shape}, spacing {tuple(grid.h)}, unknown nodes {grid.n_unknown}")
    print(f"solver {report.method}: residual {report.residual:.3e}, iterations {report.iterations}")
    print(f"L2 error against the manufactured solution: {err:.6e}")
    return path


def _run_weights(cfg, out):
    kernel = RadialKernel.inverse_distance(1.0)
    qs = build_quadset(cfg.epsilon1, kernel)
    path = out / "weights.csv"
    qs.to_csv(path, _header(cfg, "weights"))
    print(f"epsilon1 {cfg.epsilon1}: {len(qs.weights)} points, weight sum {qs.weights.sum():.12g}")
    print(f"smallest weight {qs.weights.min():.6e}")
    return path


def _run_symbols(cfg, out):
    pairs = [(d, tuple(d / cfg.scan_ratio * np.asarray(cfg.h_hat))) for d in cfg.scan_deltas]
    report = stability_scan(pairs, cfg.material(), eps1=cfg.epsilon1, resolution=cfg.resolution)
    path = out / "symbols.csv"
    report.to_csv(path, _header(cfg, "symbols"))
    for s in report.summary:
        print(
            f"  delta={s['delta']:<8.5g} h_max={s['h_max']:<8.5g} min eig: continuous {s['min_eig_S']:.4e} "
            f"collocation {s['min_eig_C']:.4e} quasi {s['min_eig_Cq']:.4e}  c_gen {s['c_gen']:.6f}"
        )
    print(f"all positive: {report.all_positive}; generalized-eigenvalue ratio {report.generalized_ratio:.6f}")
    for note in report.notes:
        print(f"WARNING: {note}")
    return path


def _run_truncation(cfg, out):
    records = truncation_study(
        delta=cfg.delta, ladder=cfg.ladder, case=_case(cfg), m0=cfg.m0, eps1=cfg.epsilon1, h_hat=cfg.h_hat
    )
    path = out / "truncation.csv"
    chunks = []
    for i, record in enumerate(records.values()):
        text = record.to_csv(header_lines=_header(cfg, "truncation") if i == 0 else (), timing=cfg.timing)
        if i > 0:
            text = text.split("\n", 1)[1]
        chunks.append(text)
        print(f"{record.coupling}: residual slope {record.slope:.3f}, rates {np.round(record.rates, 3).tolist()}")
    path.write_text("".join(chunks))
    return path


_RUNNERS = {
    "converge": _run_converge,
    "solve": _run_solve,
    "weights": _run_weights,
    "symbols": _run_symbols,
    "truncation": _run_truncation,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="peridyn-rk",
        description="Reproducing-kernel collocation for the peridynamic Navier equation.",
        epilog="Any configuration key may be passed as --key value.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    parser.add_argument("--verbose", "-v", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None):
    """Entry point; returns the process exit code."""
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text = args.config.read_text() if args.config is not None else ""
        overrides = _split_overrides(rest)
        overrides["command"] = args.command
        cfg = parse_config(text, overrides)
        threads = _threads()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    limiter = contextlib.nullcontext()
    if threads is not None:
        from threadpoolctl import threadpool_limits

        limiter = threadpool_limits(limits=threads)
    try:
        with limiter:
            for line in _notices(cfg):
                print(f"NOTICE: {line}")
            path = _RUNNERS[cfg.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PeridynError as exc:
        print(f"numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
