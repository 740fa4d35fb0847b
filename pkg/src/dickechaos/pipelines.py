"""Sweep orchestration: configs, grids, checkpoints, and figure-ready tables.

Each ``run_*`` entry point loops a per-cell computation over a coupling grid,
checkpoints every finished cell to its own CSV (so interrupted sweeps resume
for free), merges cells into one table with a single writer, and drops a
sibling JSON record of the effective configuration and any per-cell
failures.  A failed cell never aborts the sweep; it is reported and left out
of the merge.

All numbers in the emitted tables come from direct calls into ``spectra``,
``stats`` and ``classical`` — the pipeline adds plumbing, not physics.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import ModelParams
from .classical import (AttractorVerdict, ClassicalState, ClassifyProtocol,
                        classify_attractor, integrate)
from .spectra import converged_eigenvalues
from .stats import (ad_against_references, complex_ratios, ratio_averages,
                    unfold, window_ad_scan, window_ratio_scan)
from .output import read_table, write_metadata, write_table

__all__ = [
    "RunConfig",
    "GhsVerdictRow",
    "POISSON_RATIO_REFERENCE",
    "GINUE_RATIO_REFERENCE",
    "quantum_verdict",
    "run_spectrum",
    "run_stats",
    "run_ratio_map",
    "run_ad_scan",
    "run_lambda_window_scan",
    "run_classical",
    "run_lyapunov_map",
    "run_ghs_compare",
    "PIPELINES",
]

# reference values of the two ratio averages (mean r, mean -cos theta)
POISSON_RATIO_REFERENCE = (2.0 / 3.0, 0.0)
GINUE_RATIO_REFERENCE = (0.74, 0.24)


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a sweep, with defaults matching the library defaults.

    The full config is echoed into each output header, so one file
    suffices to reproduce its run.  Scalar ``gamma_minus``/``gamma_plus``
    define a single cell; nonempty grids override them with a cartesian
    sweep.
    """

    pipeline: str = "spectrum"
    # model
    omega: float = 1.0
    omega0: float = 1.0
    gamma_minus: float = 1.0
    gamma_plus: float = 2.0
    kappa: float = 1.0
    twice_j: int = 2
    n_max: int = 40
    # sweep grids (empty tuple -> single cell from the scalars above)
    gamma_minus_grid: tuple = ()
    gamma_plus_grid: tuple = ()
    # spectrum / convergence
    sector: int = 1
    delta_nmax: int = 10
    tol_match: float = 1e-6
    dim_cap: int = 12000
    # spacing and ratio statistics
    k_neighbors: int = 30
    dedupe_tol: float = 1e-14
    window_size: int = 500
    stride: int = 50
    ad_threshold: float = 2.5
    ratio_tol: float = 0.02
    # classical trajectories and classification
    q0: float = 0.0
    p0: float = 0.0
    jx0: float = 0.001
    jy0: float = 0.0
    jz0: float = -1.0
    t_final: float = 500.0
    n_samples: int = 2001
    t_transient: float = 200.0
    t_settle: float = 2000.0
    eps_fixed_point: float = 1e-5
    chaos_threshold: float = 0.01
    eps_cycle: float = 1e-3
    lyapunov_t_total: float = 2200.0
    lyapunov_t_renorm: float = 1.0
    lyapunov_d0: float = 1e-8
    seed: int = 0
    # orchestration
    jobs: int = 1
    outdir: str = "runs"
    cache_dir: str | None = "spectrum_cache"

    def __post_init__(self) -> None:
        if self.pipeline not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.pipeline!r}; "
                             f"choose from {sorted(PIPELINES)}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        for name in ("gamma_minus_grid", "gamma_plus_grid"):
            object.__setattr__(self, name,
                               tuple(float(g) for g in getattr(self, name)))

    # -- views ------------------------------------------------------------
    def grid(self) -> list:
        """Cells of the sweep as (gamma_minus, gamma_plus) pairs."""
        gms = self.gamma_minus_grid or (self.gamma_minus,)
        gps = self.gamma_plus_grid or (self.gamma_plus,)
        return [(gm, gp) for gm in gms for gp in gps]

    def params(self, gamma_minus=None, gamma_plus=None) -> ModelParams:
        gm = self.gamma_minus if gamma_minus is None else gamma_minus
        gp = self.gamma_plus if gamma_plus is None else gamma_plus
        return ModelParams(omega=self.omega, omega0=self.omega0,
                           gamma_minus=gm, gamma_plus=gp, kappa=self.kappa,
                           twice_j=self.twice_j, n_max=self.n_max)

    def initial_state(self) -> ClassicalState:
        return ClassicalState(self.q0, self.p0, self.jx0, self.jy0, self.jz0)

    def protocol(self) -> ClassifyProtocol:
        return ClassifyProtocol(
            t_transient=self.t_transient, t_settle=self.t_settle,
            eps_fixed_point=self.eps_fixed_point,
            chaos_threshold=self.chaos_threshold, eps_cycle=self.eps_cycle,
            lyapunov_t_total=self.lyapunov_t_total,
            lyapunov_t_renorm=self.lyapunov_t_renorm,
            lyapunov_d0=self.lyapunov_d0, seed=self.seed)

    def value_cache(self):
        if self.cache_dir is None:
            return None
        cache = Path(self.cache_dir)
        return cache if cache.is_absolute() else Path(self.outdir) / cache

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["gamma_minus_grid"] = list(self.gamma_minus_grid)
        out["gamma_plus_grid"] = list(self.gamma_plus_grid)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class GhsVerdictRow:
    """One coupling cell of the quantum-vs-classical comparison."""

    gamma_minus: float
    gamma_plus: float
    n_converged: int
    mean_r: float
    neg_cos_theta: float
    a2_poisson: float
    a2_ginue: float
    quantum_verdict: str          # ginue | poisson | neither
    classical_kind: str           # fixed_point | limit_cycle | chaotic | undetermined
    lyapunov_max: float
    agreement: bool               # chaotic <-> ginue correspondence holds

    @classmethod
    def build(cls, gamma_minus, gamma_plus, n_converged, mean_r,
              neg_cos_theta, a2_poisson, a2_ginue, verdict: AttractorVerdict,
              ad_threshold: float = 2.5,
              ratio_tol: float = 0.02) -> "GhsVerdictRow":
        quantum = quantum_verdict(mean_r, neg_cos_theta, a2_poisson,
                                  a2_ginue, ad_threshold, ratio_tol)
        lyap = np.nan if verdict.lyapunov_max is None else verdict.lyapunov_max
        agreement = (verdict.kind == "chaotic") == (quantum == "ginue")
        return cls(gamma_minus, gamma_plus, n_converged, mean_r,
                   neg_cos_theta, a2_poisson, a2_ginue, quantum,
                   verdict.kind, float(lyap), agreement)


def quantum_verdict(mean_r, neg_cos_theta, a2_poisson, a2_ginue,
                    ad_threshold: float = 2.5,
                    ratio_tol: float = 0.02) -> str:
    """Classify one spectrum as ginue / poisson / neither.

    A law is accepted if its Anderson-Darling statistic over the whole
    converged sample stays below the threshold, or if both ratio averages
    sit within ``ratio_tol`` of the law's reference values.  Spectra that
    match neither law, or ambiguously match both, return "neither".
    """
    def near(reference) -> bool:
        ref_r, ref_c = reference
        return (abs(mean_r - ref_r) < ratio_tol
                and abs(neg_cos_theta - ref_c) < ratio_tol)

    ginue = ((np.isfinite(a2_ginue) and a2_ginue < ad_threshold)
             or near(GINUE_RATIO_REFERENCE))
    poisson = ((np.isfinite(a2_poisson) and a2_poisson < ad_threshold)
               or near(POISSON_RATIO_REFERENCE))
    if ginue and not poisson:
        return "ginue"
    if poisson and not ginue:
        return "poisson"
    return "neither"


# ---------------------------------------------------------------------------
# per-cell computations (top level so worker processes can import them)
# ---------------------------------------------------------------------------

def _converged_values(config: RunConfig, gm: float, gp: float):
    spectrum = converged_eigenvalues(
        config.params(gm, gp), delta_nmax=config.delta_nmax,
        tol_match=config.tol_match, sector=config.sector,
        dim_cap=config.dim_cap, value_cache_dir=config.value_cache())
    return spectrum, spectrum.values[spectrum.converged]

def _whole_sample_stats(config: RunConfig, values) -> dict:
    """Ratio averages plus whole-sample AD numbers (nan when unfoldable)."""
    mean_r, neg_cos = ratio_averages(
        complex_ratios(values, config.dedupe_tol))
    try:
        spacings = np.sort(unfold(values, config.k_neighbors,
                                  config.dedupe_tol).unfolded)
        a2_poisson, a2_ginue = ad_against_references(spacings)
    except ValueError:
        a2_poisson = a2_ginue = np.nan
    return {"mean_r": mean_r, "neg_cos_theta": neg_cos,
            "a2_poisson": a2_poisson, "a2_ginue": a2_ginue}


def _spectrum_cell(config: RunConfig, gm: float, gp: float) -> dict:
    spectrum, _ = _converged_values(config, gm, gp)
    return {"re": spectrum.values.real, "im": spectrum.values.imag,
            "converged": spectrum.converged.astype(int)}


def _stats_cell(config: RunConfig, gm: float, gp: float) -> dict:
    spectrum, values = _converged_values(config, gm, gp)
    row = {"gamma_minus": gm, "gamma_plus": gp,
           "n_total": spectrum.values.size, "n_converged": values.size}
    row.update(_whole_sample_stats(config, values))
    return row


def _ratio_cell(config: RunConfig, gm: float, gp: float) -> dict:
    spectrum, values = _converged_values(config, gm, gp)
    mean_r, neg_cos = ratio_averages(
        complex_ratios(values, config.dedupe_tol))
    return {"gamma_minus": gm, "gamma_plus": gp,
            "n_converged": values.size,
            "mean_r": mean_r, "neg_cos_theta": neg_cos}


def _ad_scan_cell(config: RunConfig, gm: float, gp: float) -> dict:
    _, values = _converged_values(config, gm, gp)
    centers, a2_poisson, a2_ginue = window_ad_scan(
        values, config.window_size, config.stride, config.k_neighbors)
    return {"center": centers, "a2_poisson": a2_poisson,
            "a2_ginue": a2_ginue,
            "threshold": np.full(centers.size, config.ad_threshold)}


def _window_scan_cell(config: RunConfig, gm: float, gp: float) -> dict:
    _, values = _converged_values(config, gm, gp)
    centers, mean_r, neg_cos = window_ratio_scan(
        values, config.window_size, config.stride)
    _, a2_poisson, a2_ginue = window_ad_scan(
        values, config.window_size, config.stride, config.k_neighbors)
    return {"center": centers, "mean_r": mean_r, "neg_cos_theta": neg_cos,
            "a2_poisson": a2_poisson, "a2_ginue": a2_ginue}


def _trajectory_cell(config: RunConfig, gm: float, gp: float) -> dict:
    params = config.params(gm, gp)
    grid = np.linspace(0.0, config.t_final, config.n_samples)
    orbit = integrate(config.initial_state(), params, config.t_final,
                      t_eval=grid)
    q, p, jx, jy, jz = orbit.states.T
    return {"t": orbit.times, "q": q, "p": p, "jx": jx, "jy": jy, "jz": jz}


def _lyapunov_cell(config: RunConfig, gm: float, gp: float) -> dict:
    verdict = classify_attractor(config.initial_state(),
                                 config.params(gm, gp), config.protocol())
    lyap = np.nan if verdict.lyapunov_max is None else verdict.lyapunov_max
    return {"gamma_minus": gm, "gamma_plus": gp, "kind": verdict.kind,
            "lyapunov_max": float(lyap)}


def _ghs_cell(config: RunConfig, gm: float, gp: float) -> dict:
    spectrum, values = _converged_values(config, gm, gp)
    quantum = _whole_sample_stats(config, values)
    verdict = classify_attractor(config.initial_state(),
                                 config.params(gm, gp), config.protocol())
    row = GhsVerdictRow.build(
        gm, gp, values.size, quantum["mean_r"], quantum["neg_cos_theta"],
        quantum["a2_poisson"], quantum["a2_ginue"], verdict,
        config.ad_threshold, config.ratio_tol)
    out = dataclasses.asdict(row)
    out["agreement"] = int(row.agreement)
    return out


# ---------------------------------------------------------------------------
# grid driver: checkpoint per cell, merge with a single writer
# ---------------------------------------------------------------------------

def _tag(value: float) -> str:
    return format(float(value), ".10g").replace("-", "m").replace(".", "p")


def _cell_path(config: RunConfig, prefix: str, gm: float, gp: float) -> Path:
    return Path(config.outdir) / f"{prefix}_gm{_tag(gm)}_gp{_tag(gp)}.csv"


def _cell_header(config: RunConfig, gm: float, gp: float) -> dict:
    header = config.to_dict()
    header["cell_gamma_minus"] = gm
    header["cell_gamma_plus"] = gp
    return header


def _pool_cell(args):
    cell_fn, config_dict, gm, gp = args
    return cell_fn(RunConfig.from_dict(config_dict), gm, gp)


def _run_grid(config: RunConfig, cell_fn, run_name: str, prefix: str,
              merge_name: str | None = None) -> dict:
    """Drive ``cell_fn`` over the coupling grid with resume and merge.

    Returns {"cells": {(gm, gp): path}, "failures": {...}, "table": path
    or None, "metadata": path}.  Finished cells found on disk are reused
    verbatim; computed cells are written before the merge so an interrupt
    never loses work.
    """
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = config.grid()
    paths = {cell: _cell_path(config, prefix, *cell) for cell in grid}

    pending = [cell for cell in grid if not paths[cell].exists()]
    failures: dict = {}
    outcomes = []
    if config.jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_pool_cell,
                                   (cell_fn, config.to_dict(), gm, gp))
                       for gm, gp in pending]
            for cell, future in zip(pending, futures):
                try:
                    outcomes.append((cell, future.result(), None))
                except Exception as err:  # per-cell isolation
                    outcomes.append((cell, None, err))
    else:
        for cell in pending:
            try:
                outcomes.append((cell, cell_fn(config, *cell), None))
            except Exception as err:
                outcomes.append((cell, None, err))

    for cell, columns, err in outcomes:
        if err is not None:
            failures[paths[cell].stem] = f"{type(err).__name__}: {err}"
            continue
        write_table(paths[cell], columns, _cell_header(config, *cell))

    done = {cell: path for cell, path in paths.items() if path.exists()}
    merged = None
    if merge_name is not None and done:
        stacked: dict = {}
        for cell in sorted(done):
            _, columns = read_table(done[cell])
            for name, col in columns.items():
                stacked.setdefault(name, []).append(col)
        merged = outdir / merge_name
        write_table(merged,
                    {n: np.concatenate(cols) for n, cols in stacked.items()},
                    config.to_dict())

    metadata = outdir / f"{run_name}.meta.json"
    write_metadata(metadata, {
        "config": config.to_dict(),
        "outputs": sorted(p.name for p in done.values())
                   + ([merged.name] if merged else []),
        "failures": dict(sorted(failures.items())),
    })
    return {"cells": done, "failures": failures, "table": merged,
            "metadata": metadata}


# ---------------------------------------------------------------------------
# public entry points (one per CLI subcommand)
# ---------------------------------------------------------------------------

def run_spectrum(config: RunConfig) -> dict:
    """Eigenvalues and convergence flags, one file per coupling cell."""
    return _run_grid(config, _spectrum_cell, "spectrum", "spectrum")


def run_stats(config: RunConfig) -> dict:
    """Whole-sample spacing/ratio summary per cell, merged into one table."""
    return _run_grid(config, _stats_cell, "stats", "statscell", "stats.csv")


def run_ratio_map(config: RunConfig) -> dict:
    """Ratio averages over all converged eigenvalues, per coupling cell."""
    return _run_grid(config, _ratio_cell, "ratio_map", "ratiocell",
                     "ratio_map.csv")


def run_ad_scan(config: RunConfig) -> dict:
    """Moving-window Anderson-Darling series against both reference laws."""
    return _run_grid(config, _ad_scan_cell, "ad_scan", "ad_scan")


def run_lambda_window_scan(config: RunConfig) -> dict:
    """Moving-window ratio averages and AD series vs window-center moduli."""
    return _run_grid(config, _window_scan_cell, "window_scan", "window_scan")


def run_classical(config: RunConfig) -> dict:
    """Mean-field trajectory export from the configured initial condition."""
    return _run_grid(config, _trajectory_cell, "classical", "trajectory")


def run_lyapunov_map(config: RunConfig) -> dict:
    """Attractor verdict and leading Lyapunov exponent per coupling cell."""
    return _run_grid(config, _lyapunov_cell, "lyapunov_map", "lyapcell",
                     "lyapunov_map.csv")


def run_ghs_compare(config: RunConfig) -> dict:
    """Quantum statistics vs classical attractor verdict per coupling cell."""
    return _run_grid(config, _ghs_cell, "ghs_compare", "ghscell",
                     "ghs_compare.csv")


PIPELINES = {
    "spectrum": run_spectrum,
    "stats": run_stats,
    "ratio-map": run_ratio_map,
    "ad-scan": run_ad_scan,
    "window-scan": run_lambda_window_scan,
    "classical": run_classical,
    "lyapunov-map": run_lyapunov_map,
    "ghs-compare": run_ghs_compare,
}
