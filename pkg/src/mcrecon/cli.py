"""Command-line front end.

Subcommands: reconstruct (samples file to function values), estimate-psd
(samples file to squared-magnitude rows), experiment (config file to an
EMSE table), scheme-info (coefficient table and noise factor). Exit codes:
0 success, 2 bad input, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .harness import (
    config_from_file,
    convergence_sweep,
    run_experiment,
    write_csv,
    write_json,
    write_plot_data,
)
from .interpolate import interpolation_coefficients, mci_coefficients
from .noise import emse_closed_form, emse_factor
from .postfilter import (
    PostFilterDesign,
    apply_post_filter,
    optimal_post_filter,
    select_band,
)
from .prefilter import apply_pre_filter, optimal_pre_filter
from .psd import assemble_d, build_B, estimate_psd
from .regularize import AdmmOptions, RegularizerConfig, build_system, l1_solve, l2_solve
from .schemes import SchemeTag, scheme_band, scheme_bank
from .spectrum import (
    BandIndexSet,
    FourierSpectrum,
    MultichannelSamples,
    SampleGrid,
    synthesize_on_grid,
)

NAMED_SCHEMES = ("F1", "FH2", "FD2")


class CliError(Exception):
    """Carries the process exit code alongside the message."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _numeric(fn, *args, **kwargs):
    """Run a computation; failures become exit-code-3 errors."""
    try:
        return fn(*args, **kwargs)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise CliError(3, str(exc)) from exc


def _entry(value, row: int, col: int) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) for v in value)):
        return complex(value[0], value[1])
    raise CliError(2, f"bad sample at row {row}, column {col}: {value!r}")


def _load_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(2, f"cannot read {path}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(2, f"{path}: invalid JSON at line {exc.lineno}, "
                          f"column {exc.colno}")


def load_samples(path) -> MultichannelSamples:
    """Parse {"samples": [[...], ...]}; entries are numbers or [re, im]."""
    data = _load_json(path)
    rows = data.get("samples") if isinstance(data, dict) else None
    if not isinstance(rows, list) or not rows:
        raise CliError(2, f'{path}: expected a nonempty "samples" list')
    width = len(rows[0]) if isinstance(rows[0], list) else 0
    if width == 0:
        raise CliError(2, f"{path}: row 0 must be a nonempty list")
    values = np.empty((len(rows), width), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != width:
            raise CliError(2, f"{path}: row {i} must hold {width} entries")
        for j, value in enumerate(row):
            values[i, j] = _entry(value, i, j)
    return MultichannelSamples(SampleGrid(width), values)


def _load_spectrum(path) -> FourierSpectrum:
    try:
        return FourierSpectrum.from_json(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(2, f"cannot read {path}: {exc}")
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(2, f"{path}: not a spectrum file ({exc})")


def _parse_window(text: str):
    """--band value: "auto" or "K1,K2"."""
    if text == "auto":
        return None
    parts = text.split(",")
    try:
        k1, k2 = (int(p) for p in parts)
    except ValueError:
        raise CliError(2, f"--band must be auto or K1,K2, got {text!r}")
    if k1 > k2:
        raise CliError(2, f"--band bounds out of order: {text}")
    return BandIndexSet(k1, k2)


def _complex_rows(values: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in values]


def _write_or_print(payload: dict, path, note: str) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
        print(note)
    else:
        sys.stdout.write(text)


def _cmd_reconstruct(args) -> int:
    tag = SchemeTag(args.scheme)
    bank = scheme_bank(tag)
    samples = load_samples(args.samples)
    if samples.M != bank.M:
        raise CliError(2, f"{tag.value} expects {bank.M} channel rows, "
                          f"file has {samples.M}")
    L = samples.grid.L
    ns = bank.M * L
    if args.n_out < ns:
        raise CliError(2, f"n_out must be at least Ns={ns}")
    if args.reg != "none" and args.pre_filter != "none":
        raise CliError(2, "--pre-filter applies to the interpolation core only")
    if args.n1 is None:
        band = scheme_band(tag, L)
    else:
        band = BandIndexSet(args.n1, args.n1 + ns - 1)
    window = _parse_window(args.band)
    truth = _load_spectrum(args.truth) if args.truth else None

    kernel = _numeric(interpolation_coefficients, bank, band)
    if args.reg == "none":
        fed = samples
        if args.pre_filter == "optimal":
            d_hat = assemble_d(samples, band.n_lo).d.reshape(bank.M, L)
            design = _numeric(optimal_pre_filter, d_hat, kernel, args.sigma, L)
            fed = apply_pre_filter(samples, design, band.n_lo)
        spectrum = _numeric(mci_coefficients, fed, kernel)
    else:
        admm = AdmmOptions(rho=args.admm_rho, max_iter=args.admm_iters)
        reg = RegularizerConfig(penalty=args.reg, eta=args.eta,
                                alpha=args.alpha, admm=admm)
        system = _numeric(build_system, bank, band, samples.grid, eta=args.eta)
        solver = l1_solve if args.reg == "l1" else l2_solve
        spectrum = _numeric(solver, system.with_samples(samples), reg,
                            args.sigma)

    if args.post_filter != "none":
        d_eps = assemble_d(samples, band.n_lo)
        estimate = _numeric(estimate_psd, d_eps, build_B(kernel), args.sigma, L)
        if window is None:
            window = _numeric(select_band, estimate, ns)
        if args.post_filter == "dirichlet":
            design = PostFilterDesign.dirichlet(window)
        else:
            psd = _numeric(estimate.restricted, window).as_dict(clamp=True)
            design = _numeric(optimal_post_filter, psd, kernel, args.sigma,
                              L, window)
        spectrum = _numeric(apply_post_filter, spectrum, design)

    values = _numeric(synthesize_on_grid, spectrum, args.n_out)
    nodes = 2 * np.pi * np.arange(args.n_out) / args.n_out
    diagnostics = {
        "scheme": tag.value,
        "ns": ns,
        "band": [band.n_lo, band.n_hi],
        "condition_numbers": [float(c) for c in kernel.conditions],
        "emse_factor": emse_factor(kernel),
        "selected_window": [window.n_lo, window.n_hi] if window else None,
    }
    if truth is not None:
        ref = _numeric(synthesize_on_grid, truth, args.n_out)
        diagnostics["mse_vs_truth"] = float(np.mean(np.abs(values - ref) ** 2))
    payload = {
        "n_out": args.n_out,
        "t": [float(t) for t in nodes],
        "values": _complex_rows(values),
        "diagnostics": diagnostics,
    }
    _write_or_print(payload, args.output,
                    f"wrote {args.n_out} values to {args.output}")
    return 0


def _cmd_estimate_psd(args) -> int:
    tag = SchemeTag(args.scheme)
    bank = scheme_bank(tag)
    samples = load_samples(args.samples)
    if samples.M != bank.M:
        raise CliError(2, f"{tag.value} expects {bank.M} channel rows, "
                          f"file has {samples.M}")
    L = samples.grid.L
    if args.n1 is None:
        band = scheme_band(tag, L)
    else:
        band = BandIndexSet(args.n1, args.n1 + bank.M * L - 1)
    kernel = _numeric(interpolation_coefficients, bank, band)
    d_eps = assemble_d(samples, band.n_lo)
    estimate = _numeric(estimate_psd, d_eps, build_B(kernel), args.sigma, L)
    lines = [json.dumps({"n": int(n), "A_tilde": float(v)})
             for n, v in zip(band.indices(), estimate.values)]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {len(lines)} rows to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_experiment(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise CliError(2, "--threads must be a positive integer")
        os.environ["MCRECON_THREADS"] = str(args.threads)
    try:
        cfg = config_from_file(args.config)
    except OSError as exc:
        raise CliError(2, f"cannot read {args.config}: {exc}")
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(2, f"{args.config}: {exc}")
    cfg = replace(cfg, seed=args.seed)
    if args.sweep and len(cfg.ns_grid) < 5:
        raise CliError(2, "--sweep needs an ns_grid of at least 5 counts")
    runner = convergence_sweep if args.sweep else run_experiment
    result = _numeric(runner, cfg)
    if args.output:
        write_json(result, args.output)
        print(f"wrote {len(result.rows)} rows to {args.output}")
    else:
        sys.stdout.write(json.dumps(result.to_dict(), indent=2) + "\n")
    if args.csv:
        write_csv(result, args.csv)
    if args.plot_dir:
        write_plot_data(result, args.plot_dir, args.plot_stem)
    return 0


def _cmd_scheme_info(args) -> int:
    tag = SchemeTag(args.scheme)
    if args.L < 1:
        raise CliError(2, "L must be a positive integer")
    bank = scheme_bank(tag)
    band = scheme_band(tag, args.L)
    kernel = _numeric(interpolation_coefficients, bank, band)
    ns = bank.M * args.L
    info = {
        "scheme": tag.value,
        "L": args.L,
        "ns": ns,
        "band": [band.n_lo, band.n_hi],
        "channels": [c.kind for c in bank.channels],
        "emse_factor": emse_factor(kernel),
        "emse_factor_closed_form": emse_closed_form(tag, ns),
        "condition_max": float(np.max(kernel.conditions)),
        "r_table": [
            {"n": int(n), "r": _complex_rows(kernel.r[:, i])}
            for i, n in enumerate(band.indices())
        ],
    }
    if args.json:
        sys.stdout.write(json.dumps(info, indent=2) + "\n")
        return 0
    print(f"scheme {info['scheme']}: {bank.M} channel(s) "
          f"({', '.join(info['channels'])}), L={args.L}, Ns={ns}")
    print(f"band: {band.n_lo}..{band.n_hi}")
    print(f"noise factor: {info['emse_factor']:.12g} "
          f"(closed form {info['emse_factor_closed_form']:.12g})")
    print(f"worst channel-matrix condition: {info['condition_max']:.6g}")
    print("n: " + "  ".join(f"r_{m + 1}(n)" for m in range(bank.M)))
    for row in info["r_table"]:
        cells = "  ".join(f"{re:+.6f}{im:+.6f}j" for re, im in row["r"])
        print(f"{row['n']}: {cells}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcrecon",
        description="Multichannel reconstruction of periodic signals "
                    "from noisy samples.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    rec = sub.add_parser("reconstruct",
                         help="reconstruct function values from a samples file")
    rec.add_argument("samples", help="JSON samples file")
    rec.add_argument("--scheme", required=True, choices=NAMED_SCHEMES)
    rec.add_argument("--n-out", required=True, type=int,
                     help="output grid size (at least Ns)")
    rec.add_argument("--output", help="output JSON path (default stdout)")
    rec.add_argument("--n1", type=int,
                     help="band start (default: scheme band)")
    rec.add_argument("--sigma", type=float, default=0.0,
                     help="noise level used by filter and solver design")
    rec.add_argument("--pre-filter", choices=("none", "optimal"),
                     default="none")
    rec.add_argument("--post-filter", choices=("none", "dirichlet", "optimal"),
                     default="none")
    rec.add_argument("--band", default="auto",
                     help='post-filter window: "auto" or K1,K2 '
                          '(write --band=-2,3 for a negative start)')
    rec.add_argument("--reg", choices=("none", "l1", "l2"), default="none",
                     help="replace plain interpolation with a solver")
    rec.add_argument("--eta", type=float, default=1.2)
    rec.add_argument("--alpha", type=float, default=1.0)
    rec.add_argument("--admm-rho", type=float, default=1.0)
    rec.add_argument("--admm-iters", type=int, default=2000)
    rec.add_argument("--truth", help="spectrum JSON for an error estimate")
    rec.set_defaults(handler=_cmd_reconstruct)

    est = sub.add_parser("estimate-psd",
                         help="estimate squared coefficient magnitudes")
    est.add_argument("samples", help="JSON samples file")
    est.add_argument("--scheme", required=True, choices=NAMED_SCHEMES)
    est.add_argument("--sigma", type=float, default=0.0)
    est.add_argument("--n1", type=int,
                     help="band start (default: scheme band)")
    est.add_argument("--output", help="output path (default stdout)")
    est.set_defaults(handler=_cmd_estimate_psd)

    exp = sub.add_parser("experiment", help="run an experiment config file")
    exp.add_argument("config", help="JSON or TOML config file")
    exp.add_argument("--seed", required=True, type=int,
                     help="seed for the noise stream (required)")
    exp.add_argument("--threads", type=int,
                     help="worker threads (default MCRECON_THREADS or cores)")
    exp.add_argument("--sweep", action="store_true",
                     help="check EMSE decrease along the Ns grid")
    exp.add_argument("--output", help="result JSON path (default stdout)")
    exp.add_argument("--csv", help="also write a CSV table")
    exp.add_argument("--plot-dir", help="also write two-column plot files")
    exp.add_argument("--plot-stem", default="emse")
    exp.set_defaults(handler=_cmd_experiment)

    info = sub.add_parser("scheme-info",
                          help="print a scheme's coefficient table")
    info.add_argument("--scheme", required=True, choices=NAMED_SCHEMES)
    info.add_argument("--L", required=True, type=int,
                      help="nodes per channel")
    info.add_argument("--json", action="store_true")
    info.set_defaults(handler=_cmd_scheme_info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
