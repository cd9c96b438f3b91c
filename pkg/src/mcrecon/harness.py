"""Monte-Carlo experiment engine: EMSE/VMSE tables, sweeps, timing.

A pipeline is an ordered list of steps: exactly one reconstruction core
(mci, l1, or l2), optionally preceded by `pre` (sample-domain filter,
mci only) and/or followed by `post` (truncation to a data-selected
frequency window). Filters and windows are re-designed inside every
trial from that trial's own noisy samples. Trials
draw noise deterministically from (seed, trial_index), so results are
bit-identical regardless of the thread count (set MCRECON_THREADS to
override the pool size).
"""

from __future__ import annotations

import json
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .interpolate import interpolation_coefficients, mci_coefficients
from .postfilter import PostFilterDesign, apply_post_filter, select_band
from .prefilter import apply_pre_filter, optimal_pre_filter
from .psd import assemble_d, build_B, estimate_psd
from .regularize import (
    AdmmOptions,
    RegularizerConfig,
    build_system,
    l1_solve,
    l2_solve,
)
from .schemes import ChannelBank, SchemeTag, channel_samples, scheme_band, scheme_bank
from .signals import test_signal
from .spectrum import (
    BandIndexSet,
    FourierSpectrum,
    NoiseModel,
    SampleGrid,
    synthesize_on_grid,
)

PIPELINE_STEPS = ("mci", "pre", "post", "l1", "l2")
_CORES = ("mci", "l1", "l2")


def thread_count() -> int:
    """Worker pool size: MCRECON_THREADS if set, else the CPU count."""
    env = os.environ.get("MCRECON_THREADS", "").strip()
    if env:
        count = int(env)
        if count < 1:
            raise ValueError("MCRECON_THREADS must be a positive integer")
        return count
    return os.cpu_count() or 1


def validate_pipeline(steps: Sequence[str]) -> tuple[str, ...]:
    """Check pipeline structure; returns the normalized tuple.

    Rules: nonempty, no repeats, exactly one core step, `pre` immediately
    before `mci`, `post` last.
    """
    steps = tuple(steps)
    if not steps:
        raise ValueError("pipeline must not be empty")
    for step in steps:
        if step not in PIPELINE_STEPS:
            raise ValueError(f"unknown pipeline step {step!r}")
    if len(set(steps)) != len(steps):
        raise ValueError("pipeline steps must not repeat")
    cores = [s for s in steps if s in _CORES]
    if len(cores) != 1:
        raise ValueError("pipeline needs exactly one of mci, l1, l2")
    if "pre" in steps:
        if "mci" not in steps or steps.index("pre") + 1 != steps.index("mci"):
            raise ValueError("pre must come immediately before mci")
    if "post" in steps and steps[-1] != "post":
        raise ValueError("post must be the last step")
    return steps


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: SchemeTag
    ns_grid: tuple[int, ...]
    sigma: float
    trials: int
    pipeline: tuple[str, ...] = ("mci",)
    signal: str = "phi"
    seed: int = 0
    mse_grid_points: Optional[int] = None
    eta: float = 1.2
    alpha: float = 1.0
    admm: AdmmOptions = AdmmOptions()
    bank: Optional[ChannelBank] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", SchemeTag(self.scheme))
        object.__setattr__(self, "ns_grid", tuple(int(n) for n in self.ns_grid))
        if not self.ns_grid or any(n < 1 for n in self.ns_grid):
            raise ValueError("ns_grid must list positive sample counts")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        object.__setattr__(self, "pipeline", validate_pipeline(self.pipeline))
        if self.scheme is SchemeTag.CUSTOM and self.bank is None:
            raise ValueError("custom schemes need an explicit channel bank")

    def regularizer(self, penalty: str) -> RegularizerConfig:
        return RegularizerConfig(penalty=penalty, eta=self.eta,
                                 alpha=self.alpha, admm=self.admm)

    def quadrature_points(self, ns: int) -> int:
        points = self.mse_grid_points or max(1024, 8 * ns)
        if points < 8 * ns:
            raise ValueError(f"mse_grid_points must be at least 8*Ns = {8 * ns}")
        return points


@dataclass(frozen=True)
class PipelineStats:
    """One table cell: a (Ns, pipeline) aggregate over completed trials."""

    ns: int
    pipeline: tuple[str, ...]
    emse: float
    vmse: float
    std_error: float
    mean_wall_time: float
    trials: int
    failed: int
    failure_messages: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentResult:
    scheme: str
    signal: str
    sigma: float
    seed: int
    rows: tuple[PipelineStats, ...]

    def row(self, ns: int, pipeline: Sequence[str]) -> PipelineStats:
        want = tuple(pipeline)
        for row in self.rows:
            if row.ns == ns and row.pipeline == want:
                return row
        raise KeyError(f"no row for Ns={ns}, pipeline={'+'.join(want)}")

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "signal": self.signal,
            "sigma": self.sigma,
            "seed": self.seed,
            "rows": [
                {
                    "ns": r.ns,
                    "pipeline": "+".join(r.pipeline),
                    "emse": r.emse,
                    "vmse": r.vmse,
                    "std_error": r.std_error,
                    "mean_wall_time": r.mean_wall_time,
                    "trials": r.trials,
                    "failed": r.failed,
                    "failure_messages": list(r.failure_messages),
                }
                for r in self.rows
            ],
        }

    def csv_text(self) -> str:
        lines = ["ns,pipeline,emse,vmse,std_error,mean_wall_time,trials,failed"]
        for r in self.rows:
            lines.append(
                f"{r.ns},{'+'.join(r.pipeline)},{r.emse:.10e},{r.vmse:.10e},"
                f"{r.std_error:.10e},{r.mean_wall_time:.6e},{r.trials},{r.failed}"
            )
        return "\n".join(lines) + "\n"


class _TrialContext:
    """Everything shared across one (config, Ns) batch of trials."""

    def __init__(self, cfg: ExperimentConfig, ns: int):
        if cfg.scheme is SchemeTag.CUSTOM:
            bank = cfg.bank
            if ns % bank.M:
                raise ValueError(f"Ns={ns} is not a multiple of {bank.M} channels")
            band = BandIndexSet.centered(ns)
        else:
            bank = scheme_bank(cfg.scheme)
            if ns % bank.M:
                raise ValueError(f"Ns={ns} must be even for a two-channel scheme")
            band = scheme_band(cfg.scheme, ns // bank.M)
        self.cfg = cfg
        self.ns = ns
        self.bank = bank
        self.band = band
        self.L = ns // bank.M
        self.grid = SampleGrid(self.L)
        self.signal = test_signal(cfg.signal)
        self.noise = NoiseModel(sigma=cfg.sigma, seed=cfg.seed) if cfg.sigma > 0 else None
        self.points = cfg.quadrature_points(ns)
        nodes = 2 * np.pi * np.arange(self.points) / self.points
        if isinstance(self.signal, FourierSpectrum):
            self.truth = synthesize_on_grid(self.signal, self.points)
        else:
            self.truth = self.signal(nodes)
        self.nodes = nodes

        steps = cfg.pipeline
        self.kernel = None
        if "mci" in steps or "post" in steps or "pre" in steps:
            self.kernel = interpolation_coefficients(bank, band)
        self.B = build_B(self.kernel) if "post" in steps else None
        self.system = (build_system(bank, band, self.grid, eta=cfg.eta)
                       if ("l1" in steps or "l2" in steps) else None)

    def reconstruct(self, trial: int) -> np.ndarray:
        """Run the pipeline for one trial; returns values on the mse grid."""
        cfg = self.cfg
        samples = channel_samples(self.signal, self.bank, self.grid,
                                  noise=self.noise, trial=trial)
        steps = cfg.pipeline
        core = next(s for s in steps if s in _CORES)

        if core == "mci":
            fed = samples
            if "pre" in steps:
                d_hat = assemble_d(samples, self.band.n_lo).d.reshape(
                    self.bank.M, self.L)
                design = optimal_pre_filter(d_hat, self.kernel, cfg.sigma, self.L)
                fed = apply_pre_filter(samples, design, self.band.n_lo)
            spectrum = mci_coefficients(fed, self.kernel)
        else:
            solver = l1_solve if core == "l1" else l2_solve
            spectrum = solver(self.system.with_samples(samples),
                              cfg.regularizer(core), cfg.sigma)

        if "post" in steps:
            # window from the original noisy samples, not the core output;
            # the step truncates to it (the weighted filter lives in the
            # postfilter module and the reconstruct CLI)
            d_eps = assemble_d(samples, self.band.n_lo)
            estimate = estimate_psd(d_eps, self.B, cfg.sigma, self.L)
            chosen = select_band(estimate, self.ns)
            spectrum = apply_post_filter(spectrum,
                                         PostFilterDesign.dirichlet(chosen))

        return synthesize_on_grid(spectrum, self.points)

    def mse(self, trial: int) -> float:
        # uniform periodic grid: the trapezoid rule equals the plain mean
        rec = self.reconstruct(trial)
        return float(np.mean(np.abs(rec - self.truth) ** 2))


def run_trial(cfg: ExperimentConfig, ns: int, trial_index: int) -> float:
    """One trial's quadrature MSE. Solver errors propagate to the caller."""
    return _TrialContext(cfg, ns).mse(trial_index)


def _aggregate(cfg: ExperimentConfig, ctx: _TrialContext) -> PipelineStats:
    mses = np.full(cfg.trials, np.nan)
    walls = np.full(cfg.trials, np.nan)
    errors: dict[int, str] = {}

    def one(trial: int) -> None:
        start = time.perf_counter()
        try:
            value = ctx.mse(trial)
        except (ValueError, np.linalg.LinAlgError) as exc:
            errors[trial] = str(exc)
        else:
            if np.isfinite(value):
                mses[trial] = value
            else:
                errors[trial] = "non-finite mse"
        walls[trial] = time.perf_counter() - start

    workers = min(thread_count(), cfg.trials)
    # the filter change is process-global, so set it around the pool,
    # not inside the workers; solver non-convergence is already surfaced
    # through the returned iterate and the failure counters
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        if workers == 1:
            for trial in range(cfg.trials):
                one(trial)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(one, range(cfg.trials)))

    good = mses[np.isfinite(mses)]
    if good.size == 0:
        raise ValueError(
            f"all {cfg.trials} trials failed at Ns={ctx.ns}: "
            + "; ".join(sorted(set(errors.values())))
        )
    emse = float(np.mean(good))
    vmse = float(np.var(good, ddof=1)) if good.size > 1 else 0.0
    messages = tuple(sorted(set(errors.values())))[:5]
    return PipelineStats(
        ns=ctx.ns,
        pipeline=cfg.pipeline,
        emse=emse,
        vmse=vmse,
        std_error=float(np.sqrt(vmse / good.size)),
        mean_wall_time=float(np.mean(walls)),
        trials=int(good.size),
        failed=len(errors),
        failure_messages=messages,
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """All Ns in the grid for the configured pipeline."""
    rows = []
    for ns in cfg.ns_grid:
        ctx = _TrialContext(cfg, ns)
        rows.append(_aggregate(cfg, ctx))
    return ExperimentResult(
        scheme=cfg.scheme.value,
        signal=cfg.signal,
        sigma=cfg.sigma,
        seed=cfg.seed,
        rows=tuple(rows),
    )


def compare_pipelines(cfg: ExperimentConfig,
                      pipelines: Sequence[Sequence[str]]) -> ExperimentResult:
    """Run several pipelines over the same config (same draws per trial)."""
    rows = []
    for pipeline in pipelines:
        sub = replace(cfg, pipeline=tuple(pipeline))
        rows.extend(run_experiment(sub).rows)
    return ExperimentResult(
        scheme=cfg.scheme.value,
        signal=cfg.signal,
        sigma=cfg.sigma,
        seed=cfg.seed,
        rows=tuple(rows),
    )


def convergence_sweep(cfg: ExperimentConfig,
                      pipelines: Optional[Sequence[Sequence[str]]] = None
                      ) -> ExperimentResult:
    """EMSE-vs-Ns series per pipeline over a grid of at least 5 counts.

    Pipelines ending in the post-filter must decrease along the grid
    (within twice the combined standard error); a violation raises.
    """
    if len(cfg.ns_grid) < 5:
        raise ValueError("convergence sweep needs at least 5 Ns values")
    if pipelines is None:
        pipelines = [cfg.pipeline]
    result = compare_pipelines(cfg, pipelines)
    for pipeline in pipelines:
        pipeline = tuple(pipeline)
        if pipeline[-1] != "post":
            continue
        series = [result.row(ns, pipeline) for ns in cfg.ns_grid]
        for a, b in zip(series, series[1:]):
            slack = 2.0 * float(np.hypot(a.std_error, b.std_error))
            if b.emse > a.emse + slack:
                raise ValueError(
                    f"EMSE not decreasing for {'+'.join(pipeline)}: "
                    f"{a.emse:.3e} (Ns={a.ns}) -> {b.emse:.3e} (Ns={b.ns})"
                )
    return result


def timing_report(cfg: ExperimentConfig,
                  pipelines: Optional[Sequence[Sequence[str]]] = None) -> dict:
    """Mean per-trial wall time, keyed (ns, pipeline-name)."""
    if pipelines is None:
        pipelines = [("mci",), ("mci", "post"), ("l2",), ("l1",)]
    result = compare_pipelines(cfg, pipelines)
    return {(row.ns, "+".join(row.pipeline)): row.mean_wall_time
            for row in result.rows}


def config_from_file(path) -> ExperimentConfig:
    """Load an ExperimentConfig from JSON or TOML."""
    from .schemes import bank_from_config

    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ImportError:  # Python < 3.11
            import tomli as tomllib
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    tag, bank = bank_from_config(data.get("scheme", "F1"))
    admm = AdmmOptions(**data.get("admm", {}))
    return ExperimentConfig(
        scheme=tag,
        ns_grid=tuple(data["ns_grid"]),
        sigma=float(data.get("sigma", 0.0)),
        trials=int(data.get("trials", 1)),
        pipeline=tuple(data.get("pipeline", ["mci"])),
        signal=data.get("signal", "phi"),
        seed=int(data.get("seed", 0)),
        mse_grid_points=data.get("mse_grid_points"),
        eta=float(data.get("eta", 1.2)),
        alpha=float(data.get("alpha", 1.0)),
        admm=admm,
        bank=bank if tag is SchemeTag.CUSTOM else None,
    )


def write_json(result: ExperimentResult, path) -> None:
    Path(path).write_text(json.dumps(result.to_dict(), indent=2) + "\n",
                          encoding="utf-8")


def write_csv(result: ExperimentResult, path) -> None:
    Path(path).write_text(result.csv_text(), encoding="utf-8")


def write_plot_data(result: ExperimentResult, directory, stem: str) -> list:
    """One two-column (Ns, EMSE) text file per pipeline; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for pipeline in sorted({row.pipeline for row in result.rows}):
        rows = [r for r in result.rows if r.pipeline == pipeline]
        rows.sort(key=lambda r: r.ns)
        name = directory / f"{stem}_{'_'.join(pipeline)}.txt"
        with open(name, "w", encoding="utf-8") as fh:
            for r in rows:
                fh.write(f"{r.ns} {r.emse:.10e}\n")
        paths.append(name)
    return paths


def write_overlay(cfg: ExperimentConfig, ns: int, directory, stem: str,
                  trial: int = 0) -> list:
    """Signal and reconstruction curves (t vs real part), one file each."""
    ctx = _TrialContext(cfg, ns)
    rec = ctx.reconstruct(trial)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, values in (("signal", ctx.truth), ("reconstruction", rec)):
        out = directory / f"{stem}_{name}.txt"
        with open(out, "w", encoding="utf-8") as fh:
            for t, v in zip(ctx.nodes, values):
                fh.write(f"{t:.10e} {v.real:.10e}\n")
        paths.append(out)
    return paths
