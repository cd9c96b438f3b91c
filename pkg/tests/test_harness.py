import json

import numpy as np
import pytest

from conftest import random_kernel_bank
from mcrecon import (
    ExperimentConfig,
    SchemeTag,
    compare_pipelines,
    config_from_file,
    convergence_sweep,
    emse_closed_form,
    run_experiment,
    run_trial,
    thread_count,
    timing_report,
    validate_pipeline,
    write_csv,
    write_json,
    write_overlay,
    write_plot_data,
)

import mcrecon.harness as harness


def make_cfg(**kw):
    base = dict(scheme=SchemeTag.F1, ns_grid=(12,), sigma=0.0, trials=1,
                signal="testfunc1", seed=20260819)
    base.update(kw)
    return ExperimentConfig(**base)


VALID_PIPELINES = [
    ("mci",),
    ("pre", "mci"),
    ("mci", "post"),
    ("pre", "mci", "post"),
    ("l1",),
    ("l2",),
    ("l1", "post"),
    ("l2", "post"),
]


@pytest.mark.parametrize("steps", VALID_PIPELINES)
def test_validate_pipeline_accepts(steps):
    assert validate_pipeline(list(steps)) == steps


@pytest.mark.parametrize("steps", [
    (),
    ("denoise",),
    ("mci", "mci"),
    ("mci", "l2"),
    ("l1", "l2"),
    ("pre",),
    ("pre", "l2"),
    ("mci", "pre"),
    ("pre", "post", "mci"),
    ("post", "mci"),
])
def test_validate_pipeline_rejects(steps):
    with pytest.raises(ValueError):
        validate_pipeline(steps)


def test_config_validation():
    with pytest.raises(ValueError):
        make_cfg(trials=0)
    with pytest.raises(ValueError):
        make_cfg(sigma=-0.1)
    with pytest.raises(ValueError):
        make_cfg(ns_grid=())
    with pytest.raises(ValueError):
        make_cfg(ns_grid=(12, 0))
    with pytest.raises(ValueError):
        make_cfg(pipeline=("mci", "mci"))
    with pytest.raises(ValueError):
        make_cfg(scheme=SchemeTag.CUSTOM)  # no bank


def test_config_accepts_scheme_names():
    cfg = make_cfg(scheme="FH2")
    assert cfg.scheme is SchemeTag.FH2


def test_quadrature_points_default_and_floor():
    cfg = make_cfg()
    assert cfg.quadrature_points(16) == 1024
    assert cfg.quadrature_points(200) == 1600
    cfg = make_cfg(mse_grid_points=4096)
    assert cfg.quadrature_points(512) == 4096
    with pytest.raises(ValueError):
        cfg.quadrature_points(513)


@pytest.mark.parametrize("tag", [SchemeTag.F1, SchemeTag.FH2, SchemeTag.FD2])
def test_noise_free_bandlimited_signal_is_exact(tag):
    res = run_experiment(make_cfg(scheme=tag))
    assert res.rows[0].emse < 1e-12


def test_noise_free_custom_bank_is_exact():
    bank, _ = random_kernel_bank(7, 2, 6)
    res = run_experiment(make_cfg(scheme=SchemeTag.CUSTOM, bank=bank))
    assert res.rows[0].emse < 1e-12


@pytest.mark.parametrize("tag", [SchemeTag.F1, SchemeTag.FH2, SchemeTag.FD2])
def test_mci_emse_matches_noise_factor(tag):
    """On an in-band signal the EMSE is sigma^2 times the scheme factor."""
    res = run_experiment(make_cfg(scheme=tag, sigma=0.4, trials=400))
    row = res.rows[0]
    expect = 0.4 ** 2 * emse_closed_form(tag, 12)
    assert abs(row.emse - expect) <= 3 * row.std_error
    assert 0 < row.vmse < row.emse ** 2
    assert row.trials == 400
    assert row.failed == 0


def test_narrow_band_misses_out_of_band_content():
    # phiB occupies {-16..16}; Ns=20 covers {-9..10} and Ns=64 covers it all
    low = run_experiment(make_cfg(signal="phiB", ns_grid=(20,)))
    high = run_experiment(make_cfg(signal="phiB", ns_grid=(64,)))
    assert low.rows[0].emse > 1e-2
    assert high.rows[0].emse < 1e-12


def test_corrections_do_not_hurt_at_benign_point():
    """Each denoising pipeline stays within 2 s.e. of plain MCI or below."""
    pipes = [("mci",), ("mci", "post"), ("pre", "mci"), ("l2",), ("l1",)]
    res = compare_pipelines(make_cfg(ns_grid=(16,), sigma=0.1, trials=200),
                            pipes)
    base = res.row(16, ("mci",))
    for steps in pipes[1:]:
        row = res.row(16, steps)
        slack = 2.0 * float(np.hypot(row.std_error, base.std_error))
        assert row.emse <= base.emse + slack, "+".join(steps)


def test_results_identical_across_thread_counts(monkeypatch):
    stats = {}
    for count in ("1", "3"):
        monkeypatch.setenv("MCRECON_THREADS", count)
        assert thread_count() == int(count)
        res = run_experiment(make_cfg(sigma=0.3, trials=8,
                                      pipeline=("mci", "post")))
        stats[count] = (res.rows[0].emse, res.rows[0].vmse)
    assert stats["1"] == stats["3"]


def test_thread_count_rejects_nonpositive(monkeypatch):
    monkeypatch.setenv("MCRECON_THREADS", "0")
    with pytest.raises(ValueError):
        thread_count()


def test_failed_trials_are_excluded_and_counted(monkeypatch):
    real = harness._TrialContext.mse

    def flaky(self, trial):
        if trial % 2:
            raise ValueError("synthetic failure")
        return real(self, trial)

    monkeypatch.setattr(harness._TrialContext, "mse", flaky)
    res = run_experiment(make_cfg(sigma=0.1, trials=6))
    row = res.rows[0]
    assert row.trials == 3
    assert row.failed == 3
    assert row.failure_messages == ("synthetic failure",)
    assert np.isfinite(row.emse)


def test_all_trials_failing_raises(monkeypatch):
    def broken(self, trial):
        raise ValueError("synthetic failure")

    monkeypatch.setattr(harness._TrialContext, "mse", broken)
    with pytest.raises(ValueError, match="failed"):
        run_experiment(make_cfg(sigma=0.1, trials=4))


def test_nonfinite_mse_counts_as_failure(monkeypatch):
    monkeypatch.setattr(harness._TrialContext, "mse",
                        lambda self, trial: float("nan"))
    with pytest.raises(ValueError, match="failed"):
        run_experiment(make_cfg(sigma=0.1, trials=2))


def test_run_trial_returns_mse_and_propagates_errors():
    assert run_trial(make_cfg(sigma=0.1, trials=2), 12, 0) > 0
    with pytest.raises(ValueError):
        run_trial(make_cfg(scheme=SchemeTag.FH2, ns_grid=(13,)), 13, 0)


def test_result_row_lookup_and_serialization():
    cfg = make_cfg(ns_grid=(12, 16), sigma=0.1, trials=3)
    res = compare_pipelines(cfg, [("mci",), ("mci", "post")])
    assert len(res.rows) == 4
    assert res.row(16, ("mci", "post")).ns == 16
    with pytest.raises(KeyError):
        res.row(20, ("mci",))
    data = res.to_dict()
    assert data["scheme"] == "F1"
    assert len(data["rows"]) == 4
    assert data["rows"][0]["pipeline"] == "mci"


def test_convergence_sweep_requires_five_counts():
    with pytest.raises(ValueError):
        convergence_sweep(make_cfg(ns_grid=(8, 12, 16, 20)))


def test_convergence_sweep_post_series_decreases():
    cfg = make_cfg(ns_grid=(8, 16, 32, 64, 128), sigma=0.3, trials=120,
                   pipeline=("mci", "post"))
    res = convergence_sweep(cfg)
    series = [res.row(ns, ("mci", "post")).emse for ns in cfg.ns_grid]
    assert all(a > b for a, b in zip(series, series[1:]))


def test_convergence_sweep_flags_increasing_series(monkeypatch):
    monkeypatch.setattr(harness._TrialContext, "mse",
                        lambda self, trial: float(self.ns))
    cfg = make_cfg(ns_grid=(8, 12, 16, 20, 24), trials=2,
                   pipeline=("mci", "post"))
    with pytest.raises(ValueError, match="not decreasing"):
        convergence_sweep(cfg)


def test_timing_report_covers_default_pipelines():
    rep = timing_report(make_cfg(sigma=0.1, trials=2))
    assert set(rep) == {(12, "mci"), (12, "mci+post"), (12, "l2"), (12, "l1")}
    assert all(v > 0 for v in rep.values())


def test_write_json_and_csv(tmp_path):
    res = run_experiment(make_cfg(sigma=0.1, trials=3,
                                  pipeline=("mci", "post")))
    out = tmp_path / "result.json"
    write_json(res, out)
    data = json.loads(out.read_text())
    assert data["seed"] == 20260819
    assert data["rows"][0]["trials"] == 3

    out = tmp_path / "result.csv"
    write_csv(res, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("ns,pipeline,emse")
    assert len(lines) == 2
    assert lines[1].startswith("12,mci+post,")


def test_write_plot_data_one_file_per_pipeline(tmp_path):
    cfg = make_cfg(ns_grid=(12, 16), sigma=0.1, trials=3)
    res = compare_pipelines(cfg, [("mci",), ("mci", "post")])
    paths = write_plot_data(res, tmp_path, "emse")
    assert [p.name for p in paths] == ["emse_mci.txt", "emse_mci_post.txt"]
    for path in paths:
        rows = [line.split() for line in path.read_text().splitlines()]
        assert [int(r[0]) for r in rows] == [12, 16]
        assert all(float(r[1]) > 0 for r in rows)


def test_write_overlay_curves(tmp_path):
    cfg = make_cfg(sigma=0.1, trials=1)
    paths = write_overlay(cfg, 12, tmp_path, "curve")
    assert [p.name for p in paths] == ["curve_signal.txt",
                                       "curve_reconstruction.txt"]
    for path in paths:
        lines = path.read_text().splitlines()
        assert len(lines) == cfg.quadrature_points(12)
        t, v = map(float, lines[0].split())
        assert t == 0.0 and np.isfinite(v)


CONFIG_FIELDS = dict(scheme="FD2", ns_grid=[12, 24], sigma=0.05, trials=4,
                     pipeline=["mci", "post"], signal="testfunc1", seed=7,
                     eta=1.5, alpha=0.9)


def test_config_from_json_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({**CONFIG_FIELDS,
                                "admm": {"rho": 2.0, "max_iter": 500}}))
    cfg = config_from_file(path)
    assert cfg.scheme is SchemeTag.FD2
    assert cfg.ns_grid == (12, 24)
    assert cfg.sigma == 0.05
    assert cfg.trials == 4
    assert cfg.pipeline == ("mci", "post")
    assert cfg.signal == "testfunc1"
    assert cfg.seed == 7
    assert cfg.eta == 1.5
    assert cfg.alpha == 0.9
    assert cfg.admm.rho == 2.0
    assert cfg.admm.max_iter == 500
    assert cfg.bank is None


def test_config_from_toml_file(tmp_path):
    text = "\n".join([
        'scheme = "FD2"',
        "ns_grid = [12, 24]",
        "sigma = 0.05",
        "trials = 4",
        'pipeline = ["mci", "post"]',
        'signal = "testfunc1"',
        "seed = 7",
        "eta = 1.5",
        "alpha = 0.9",
        "",
        "[admm]",
        "rho = 2.0",
        "max_iter = 500",
    ])
    path = tmp_path / "run.toml"
    path.write_text(text)
    json_path = tmp_path / "run.json"
    json_path.write_text(json.dumps({**CONFIG_FIELDS,
                                     "admm": {"rho": 2.0, "max_iter": 500}}))
    assert config_from_file(path) == config_from_file(json_path)


def test_config_file_defaults(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps({"ns_grid": [12]}))
    cfg = config_from_file(path)
    assert cfg.scheme is SchemeTag.F1
    assert cfg.sigma == 0.0
    assert cfg.trials == 1
    assert cfg.pipeline == ("mci",)
    assert cfg.signal == "phi"
