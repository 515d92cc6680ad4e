"""``normlab`` command line: quantize, norm, bound-check, decompose-check, constants, sweep, verify."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds, dsl
from .config import ConfigError, ExperimentConfig, load_config
from .phase import SubsetE

EXIT_OK, EXIT_CERT, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3, 4


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="INI experiment config")
    p.add_argument("--n", type=int, help="phase-space dimension n (default 1)")
    p.add_argument("--h", type=float, help="semiclassical parameter (default 1)")
    p.add_argument("--symbol-file", metavar="PATH", help="symbol in the expression language")
    p.add_argument("--example", choices=["lattice", "mean-field", "gaussian"], help="builtin example symbol")
    p.add_argument("--potential", choices=sorted(dsl.BUILTIN_POTENTIALS), help="pair potential for the examples")
    p.add_argument("--out", metavar="PATH", help="write the report here")
    p.add_argument("--format", choices=["csv", "json"], help="report format")
    p.add_argument("--quick", action="store_true", help="restrict verify to n = 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normlab", description="Weyl quantization norm bounds, numerically certified.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("quantize", "quantize a symbol and summarize the operator spectrum"),
        ("norm", "operator norm estimate"),
        ("bound-check", "compare the operator norm with the explicit bound"),
        ("decompose-check", "defect of the subset decomposition"),
        ("constants", "print the explicit constants"),
        ("sweep", "config-driven sweep over n and h"),
        ("verify", "run the certificate suites"),
    ]:
        _common(sub.add_parser(name, help=text, description=text))
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig(example="gaussian")
    if args.example:
        cfg.example = args.example
    if args.symbol_file:
        cfg.example, cfg.symbol_file = "file", args.symbol_file
    if args.potential:
        cfg.potential = args.potential
    if args.n is not None:
        cfg.n_values = (args.n,)
    if args.h is not None:
        cfg.h_values = (args.h,)
    if args.out:
        cfg.out = args.out
    if args.format:
        cfg.format = args.format
    return cfg.validate()


def _single(cfg: ExperimentConfig):
    from .sweep import build_case, spatial_grid

    n, h = cfg.n_values[0], cfg.h_values[0]
    return build_case(cfg, n), spatial_grid(cfg, n), n, h


def _print(obj, cfg: ExperimentConfig, out=None) -> None:
    if cfg.format == "json":
        text = json.dumps(obj, indent=2) + "\n"
    else:
        text = "".join(f"{k}: {v}\n" for k, v in obj.items())
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    (out or sys.stdout).write(text)


def cmd_quantize(cfg) -> int:
    from .quantize import weyl_quantize

    case, grid, n, h = _single(cfg)
    A = weyl_quantize(case.F, h, grid)
    B = A.weighted()
    herm = A.hermitian_defect()
    if herm <= 1e-12:
        ev = np.linalg.eigvalsh(B)
        spec = {"min_eigenvalue": float(ev[0]), "max_eigenvalue": float(ev[-1])}
    else:
        sv = np.linalg.svd(B, compute_uv=False)
        spec = {"max_singular_value": float(sv[0]), "min_singular_value": float(sv[-1])}
    _print({"symbol": case.label, "n": n, "h": h, "rows": grid.size, "hermitian_defect": herm, **spec}, cfg)
    return EXIT_OK


def cmd_norm(cfg) -> int:
    from .quantize import operator_norm, weyl_quantize

    case, grid, n, h = _single(cfg)
    _print({"symbol": case.label, "n": n, "h": h, "rows": grid.size, "norm": operator_norm(weyl_quantize(case.F, h, grid))}, cfg)
    return EXIT_OK


def cmd_bound_check(cfg) -> int:
    from .sweep import emit_report, run_sweep, sweep_status

    rows = run_sweep(cfg)
    text = emit_report(rows, cfg.format, cfg.out, cfg.timing)
    sys.stdout.write(text)
    return sweep_status(rows)


def cmd_decompose_check(cfg) -> int:
    from .quantize import decompose_weyl, decomposition_terms, operator_norm
    from .sweep import _scaled

    case, grid, n, h = _single(cfg)
    if n > 2:
        raise ConfigError("decompose-check builds the dual phase grid and supports n <= 2")
    G = _scaled(case.F, h)
    terms = decomposition_terms(G, grid)
    per = {("{" + ",".join(map(str, E)) + "}"): operator_norm(op) for E, op in terms.items()}
    defect = decompose_weyl(G, grid)
    _print({"symbol": case.label, "n": n, "h": h, "term_norms": per, "defect": defect}, cfg)
    return EXIT_OK if defect <= 1e-3 else EXIT_CERT


def cmd_constants(cfg) -> int:
    table = bounds.constants_table()
    if cfg.format == "json":
        _print(table, cfg)
    else:
        _print({k: f"{v:.12g}" for k, v in table.items()}, cfg)
    return EXIT_OK


def cmd_sweep(cfg) -> int:
    from .sweep import emit_report, run_sweep, sweep_status

    rows = run_sweep(cfg)
    text = emit_report(rows, cfg.format, cfg.out, cfg.timing)
    if not cfg.out:
        sys.stdout.write(text)
    return sweep_status(rows)


def cmd_verify(args) -> int:
    from .verify import verify_suite

    code, checks = verify_suite("quick" if args.quick else "full", echo=lambda s: print(s, flush=True))
    failed = [c for c in checks if not c.passed]
    if failed:
        print("failing criteria: " + ", ".join(f"[{c.criterion}] {c.name}" for c in failed))
    else:
        print(f"all {len(checks)} checks passed")
    return code


COMMANDS = {
    "quantize": cmd_quantize,
    "norm": cmd_norm,
    "bound-check": cmd_bound_check,
    "decompose-check": cmd_decompose_check,
    "constants": cmd_constants,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        cfg = _config(args)
        if args.command == "sweep" and not args.config:
            raise ConfigError("sweep needs --config")
        return COMMANDS[args.command](cfg)
    except (ConfigError, dsl.SymbolError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:
        print(f"runtime error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
