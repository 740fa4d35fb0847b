"""Sweep orchestration: transparency, determinism, checkpoints, isolation.

All runs here use deliberately tiny Liouvillians (j=1/2, n_max <= 12) and
``delta_nmax=0`` (self-comparison convergence, every eigenvalue kept), so
each cell costs milliseconds and the tests probe plumbing, not physics.
"""

from __future__ import annotations

import shutil
import warnings

import numpy as np
import pytest

from dickechaos.classical import AttractorVerdict, ClassicalState, integrate
from dickechaos.pipelines import (
    GhsVerdictRow,
    RunConfig,
    quantum_verdict,
    run_ad_scan,
    run_classical,
    run_ghs_compare,
    run_lyapunov_map,
    run_ratio_map,
    run_spectrum,
    run_stats,
)
from dickechaos.spectra import converged_eigenvalues
from dickechaos.stats import complex_ratios, ratio_averages, window_ad_scan
from dickechaos.output import read_metadata, read_table, write_table


def tiny_config(tmp_path, **overrides) -> RunConfig:
    base = dict(pipeline="ratio-map", twice_j=1, n_max=8, delta_nmax=0,
                tol_match=1e-6, outdir=str(tmp_path / "run"), cache_dir=None,
                gamma_minus=0.5, gamma_plus=0.7)
    base.update(overrides)
    return RunConfig(**base)


# ---------------------------------------------------------------------------
# RunConfig
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError, match="pipeline"):
        RunConfig(pipeline="spectral-disco")
    with pytest.raises(ValueError, match="jobs"):
        RunConfig(jobs=0)
    with pytest.raises(ValueError, match="unknown config keys"):
        RunConfig.from_dict({"n_maxx": 3})


def test_config_round_trip_and_grid():
    config = RunConfig(pipeline="ratio-map", gamma_minus_grid=(1.0, 2.0),
                       gamma_plus_grid=[0.0, 2.0], n_max=10)
    assert RunConfig.from_dict(config.to_dict()) == config
    assert config.grid() == [(1.0, 0.0), (1.0, 2.0), (2.0, 0.0), (2.0, 2.0)]
    single = RunConfig(gamma_minus=0.3, gamma_plus=0.9)
    assert single.grid() == [(0.3, 0.9)]


def test_config_views(tmp_path):
    config = tiny_config(tmp_path, seed=7, t_settle=11.0)
    params = config.params()
    assert (params.gamma_minus, params.gamma_plus) == (0.5, 0.7)
    assert params.n_max == 8
    assert config.params(1.5, 2.5).gamma_plus == 2.5
    assert config.initial_state() == ClassicalState(0.0, 0.0, 0.001, 0.0, -1.0)
    assert config.protocol().seed == 7
    assert config.protocol().t_settle == 11.0
    assert config.value_cache() is None
    cached = tiny_config(tmp_path, cache_dir="vals")
    assert cached.value_cache() == cached.value_cache().parent / "vals"
    assert str(cached.value_cache().parent) == cached.outdir


# ---------------------------------------------------------------------------
# verdict logic
# ---------------------------------------------------------------------------

def test_quantum_verdict_ad_routes():
    assert quantum_verdict(0.5, 0.5, a2_poisson=9.0, a2_ginue=1.0) == "ginue"
    assert quantum_verdict(0.5, 0.5, a2_poisson=1.0, a2_ginue=9.0) == "poisson"
    assert quantum_verdict(0.5, 0.5, a2_poisson=9.0, a2_ginue=9.0) == "neither"
    # both laws accepted is ambiguous, not a verdict
    assert quantum_verdict(0.5, 0.5, a2_poisson=1.0, a2_ginue=1.0) == "neither"


def test_quantum_verdict_ratio_routes():
    nan = float("nan")
    assert quantum_verdict(0.74, 0.24, nan, nan) == "ginue"
    assert quantum_verdict(2.0 / 3.0, 0.0, nan, nan) == "poisson"
    assert quantum_verdict(0.70, 0.12, nan, nan) == "neither"
    # tolerance is a strict half-width
    assert quantum_verdict(0.74, 0.24 + 0.021, nan, nan) == "neither"
    assert quantum_verdict(0.74, 0.24 + 0.019, nan, nan) == "ginue"


def test_ghs_verdict_row_agreement_table():
    chaotic = AttractorVerdict("chaotic", 0.12)
    cycle = AttractorVerdict("limit_cycle", 0.002)
    sink = AttractorVerdict("fixed_point", None)
    ginue = dict(mean_r=0.74, neg_cos_theta=0.24)
    poisson = dict(mean_r=2.0 / 3.0, neg_cos_theta=0.0)
    nan = float("nan")

    row = GhsVerdictRow.build(1.0, 2.0, 500, a2_poisson=nan, a2_ginue=nan,
                              verdict=chaotic, **ginue)
    assert (row.quantum_verdict, row.agreement) == ("ginue", True)
    row = GhsVerdictRow.build(2.0, 2.0, 500, a2_poisson=nan, a2_ginue=nan,
                              verdict=cycle, **ginue)
    assert (row.quantum_verdict, row.agreement) == ("ginue", False)
    row = GhsVerdictRow.build(1.0, 0.0, 500, a2_poisson=nan, a2_ginue=nan,
                              verdict=sink, **poisson)
    assert (row.quantum_verdict, row.agreement) == ("poisson", True)
    assert np.isnan(row.lyapunov_max)
    row = GhsVerdictRow.build(1.0, 0.0, 500, a2_poisson=nan, a2_ginue=nan,
                              verdict=chaotic, **poisson)
    assert (row.quantum_verdict, row.agreement) == ("poisson", False)


# ---------------------------------------------------------------------------
# grid driver behavior
# ---------------------------------------------------------------------------

def test_spectrum_cell_matches_direct_call(tmp_path):
    config = tiny_config(tmp_path, pipeline="spectrum")
    result = run_spectrum(config)
    assert not result["failures"]
    [path] = result["cells"].values()
    header, columns = read_table(path)
    assert header["n_max"] == 8 and header["tol_match"] == 1e-6
    assert header["cell_gamma_minus"] == 0.5

    spectrum = converged_eigenvalues(config.params(), delta_nmax=0,
                                     tol_match=1e-6, sector=1)
    assert np.array_equal(columns["re"], spectrum.values.real)
    assert np.array_equal(columns["im"], spectrum.values.imag)
    assert np.array_equal(columns["converged"], np.ones(162, dtype=int))


def test_ratio_map_transparency_and_merge(tmp_path):
    config = tiny_config(tmp_path, gamma_minus_grid=(0.5, 0.8),
                         gamma_plus_grid=(0.7,))
    result = run_ratio_map(config)
    assert not result["failures"]
    assert len(result["cells"]) == 2
    _, merged = read_table(result["table"])
    assert list(merged["gamma_minus"]) == [0.5, 0.8]

    spectrum = converged_eigenvalues(config.params(0.8, 0.7), delta_nmax=0,
                                     tol_match=1e-6, sector=1)
    mean_r, neg_cos = ratio_averages(complex_ratios(spectrum.values))
    assert merged["mean_r"][1] == mean_r
    assert merged["neg_cos_theta"][1] == neg_cos
    assert merged["n_converged"][1] == 162

    meta = read_metadata(result["metadata"])
    assert meta["config"]["gamma_minus_grid"] == [0.5, 0.8]
    assert meta["failures"] == {}
    assert "ratio_map.csv" in meta["outputs"]


def test_run_is_deterministic_byte_for_byte(tmp_path):
    config = tiny_config(tmp_path, gamma_minus_grid=(0.5, 0.8))
    first = run_ratio_map(config)
    blobs = {p.name: p.read_bytes()
             for p in list(first["cells"].values()) + [first["table"]]}
    shutil.rmtree(config.outdir)
    second = run_ratio_map(config)
    for path in list(second["cells"].values()) + [second["table"]]:
        assert path.read_bytes() == blobs[path.name]


def test_finished_cells_are_not_recomputed(tmp_path):
    config = tiny_config(tmp_path)
    result = run_ratio_map(config)
    [path] = result["cells"].values()
    header, columns = read_table(path)
    columns["mean_r"] = np.array([99.0])
    write_table(path, columns, header)
    result["table"].unlink()

    again = run_ratio_map(config)
    _, merged = read_table(again["table"])
    assert merged["mean_r"][0] == 99.0  # sentinel survived: cell was reused


def test_cell_failure_is_isolated(tmp_path):
    config = tiny_config(tmp_path, gamma_minus_grid=(0.5, -1.0))
    result = run_ratio_map(config)
    assert len(result["cells"]) == 1
    assert len(result["failures"]) == 1
    [(stem, message)] = result["failures"].items()
    assert "gm" in stem and "ValueError" in message
    _, merged = read_table(result["table"])
    assert list(merged["gamma_minus"]) == [0.5]
    assert read_metadata(result["metadata"])["failures"] != {}


def test_worker_pool_matches_serial(tmp_path):
    serial = tiny_config(tmp_path, gamma_minus_grid=(0.5, 0.8), jobs=1,
                         outdir=str(tmp_path / "serial"))
    pooled = tiny_config(tmp_path, gamma_minus_grid=(0.5, 0.8), jobs=2,
                         outdir=str(tmp_path / "pooled"))
    table_s = run_ratio_map(serial)["table"]
    table_p = run_ratio_map(pooled)["table"]
    # outdir is echoed in headers, so compare the data rows only
    strip = lambda path: [l for l in path.read_text().splitlines()
                          if not l.startswith("#")]
    assert strip(table_s) == strip(table_p)


def test_worker_pool_isolates_failures(tmp_path):
    config = tiny_config(tmp_path, gamma_minus_grid=(0.5, -1.0), jobs=2)
    result = run_ratio_map(config)
    assert len(result["cells"]) == 1
    assert len(result["failures"]) == 1


# ---------------------------------------------------------------------------
# the remaining pipelines
# ---------------------------------------------------------------------------

def test_run_stats_columns(tmp_path):
    config = tiny_config(tmp_path, pipeline="stats")
    result = run_stats(config)
    _, merged = read_table(result["table"])
    assert merged["n_total"][0] == 162
    # 162 eigenvalues cannot satisfy the unfolding precondition (10 k), so
    # the whole-sample AD numbers are reported as nan, not invented
    assert np.isnan(merged["a2_poisson"][0]) and np.isnan(merged["a2_ginue"][0])
    assert 0.0 < merged["mean_r"][0] <= 1.0


def test_ad_scan_transparency(tmp_path):
    config = tiny_config(tmp_path, pipeline="ad-scan", n_max=12,
                         window_size=300, stride=20)
    result = run_ad_scan(config)
    assert not result["failures"]
    [path] = result["cells"].values()
    _, columns = read_table(path)
    assert np.all(columns["threshold"] == 2.5)
    assert np.all(np.diff(columns["center"]) > 0)

    spectrum = converged_eigenvalues(config.params(), delta_nmax=0,
                                     tol_match=1e-6, sector=1)
    centers, a2p, a2g = window_ad_scan(spectrum.values, 300, 20)
    assert np.array_equal(columns["center"], centers)
    assert np.array_equal(columns["a2_poisson"], a2p)
    assert np.array_equal(columns["a2_ginue"], a2g)


def test_ad_scan_window_larger_than_sample_fails_cleanly(tmp_path):
    config = tiny_config(tmp_path, pipeline="ad-scan", window_size=500)
    result = run_ad_scan(config)
    assert not result["cells"]
    [message] = result["failures"].values()
    assert "ValueError" in message


def test_run_classical_trajectory(tmp_path):
    config = tiny_config(tmp_path, pipeline="classical", t_final=5.0,
                         n_samples=11)
    result = run_classical(config)
    [path] = result["cells"].values()
    _, columns = read_table(path)
    assert columns["t"][0] == 0.0 and columns["t"][-1] == 5.0

    grid = np.linspace(0.0, 5.0, 11)
    orbit = integrate(config.initial_state(), config.params(), 5.0,
                      t_eval=grid)
    for i, name in enumerate(("q", "p", "jx", "jy", "jz")):
        assert np.array_equal(columns[name], orbit.states[:, i])


def test_lyapunov_map_fixed_point_cell(tmp_path):
    # start exactly on the weak-coupling sink so classification is instant
    config = tiny_config(tmp_path, pipeline="lyapunov-map", jx0=0.0,
                         gamma_minus=0.3, gamma_plus=0.3,
                         t_transient=1.0, t_settle=5.0)
    result = run_lyapunov_map(config)
    _, merged = read_table(result["table"])
    assert merged["kind"][0] == "fixed_point"
    assert np.isnan(merged["lyapunov_max"][0])


def test_ghs_compare_row_is_consistent(tmp_path):
    config = tiny_config(tmp_path, pipeline="ghs-compare", jx0=0.0,
                         gamma_minus=0.3, gamma_plus=0.3,
                         t_transient=1.0, t_settle=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = run_ghs_compare(config)
    assert not result["failures"]
    _, merged = read_table(result["table"])
    assert merged["classical_kind"][0] == "fixed_point"
    assert merged["quantum_verdict"][0] in ("ginue", "poisson", "neither")
    expected = int((merged["classical_kind"][0] == "chaotic")
                   == (merged["quantum_verdict"][0] == "ginue"))
    assert merged["agreement"][0] == expected
    assert merged["n_converged"][0] == 162
