"""Complex Liouvillian spectra and the two-truncation convergence filter.

Finite Fock cutoffs deform the spectrum, and which eigenvalues survive a
cutoff increase is the only practical convergence certificate.  The filter
here diagonalizes one parity block at ``n_max`` and again at
``n_max + delta_nmax``, pairs the two spectra greedily in ascending order of
|lambda| (each partner used at most once), and marks an eigenvalue converged
when its partner sits closer than ``tol_match``.

Everything is dense: the spectra feed bulk statistics, so all eigenvalues of
the block are needed and iterative solvers bring nothing.  A dimension cap
guards against accidentally requesting a matrix that cannot be solved at
desk scale.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .basis import ModelParams
from .liouvillian import build_liouvillian, project_sector

__all__ = [
    "ComplexSpectrum",
    "DEFAULT_DIM_CAP",
    "eigenvalues",
    "sort_by_modulus",
    "sector_eigenvalues",
    "converged_eigenvalues",
    "write_spectrum",
    "read_spectrum",
    "spectrum_cache_name",
    "cached_spectrum",
]

DEFAULT_DIM_CAP = 12000


@dataclass
class ComplexSpectrum:
    """Eigenvalues of one parity block, modulus-sorted, with convergence marks."""

    values: np.ndarray      # complex, ascending |lambda| (ties: Re, then Im)
    converged: np.ndarray   # bool, aligned with values
    params: ModelParams
    sector: int
    delta_nmax: int
    tol_match: float

    def converged_values(self) -> np.ndarray:
        return self.values[self.converged]

    @property
    def n_converged(self) -> int:
        return int(np.count_nonzero(self.converged))


def eigenvalues(matrix, dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """All eigenvalues of a dense or sparse square matrix (LAPACK, dense)."""
    n = matrix.shape[0]
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"matrix must be square, got {matrix.shape}")
    if n > dim_cap:
        raise ValueError(
            f"dimension {n} exceeds the dense-solve cap {dim_cap}; "
            "lower n_max or raise dim_cap explicitly")
    if sp.issparse(matrix):
        # Fill a Fortran-ordered buffer straight from the sparse structure:
        # LAPACK geev consumes it in place, so peak memory stays at one
        # dense copy of the block instead of two.
        coo = matrix.tocoo()
        dense = np.zeros(matrix.shape, dtype=complex, order="F")
        dense[coo.row, coo.col] = coo.data
    else:
        dense = np.asfortranarray(matrix, dtype=complex)
    return sla.eigvals(dense, overwrite_a=True, check_finite=False)


def sort_by_modulus(values: np.ndarray) -> np.ndarray:
    """Ascending |lambda|; exact modulus ties fall back to (Re, Im) order,
    which keeps conjugate partners adjacent and the order deterministic."""
    values = np.asarray(values)
    order = np.lexsort((values.imag, values.real, np.abs(values)))
    return values[order]


def _greedy_pair_distances(small: np.ndarray, big: np.ndarray) -> np.ndarray:
    """For each point of ``small`` (in given order) the distance to its
    nearest not-yet-used point of ``big``."""
    pts = np.column_stack([big.real, big.imag])
    tree = cKDTree(pts)
    used = np.zeros(big.size, dtype=bool)
    out = np.empty(small.size)
    batch = 16
    for i, z in enumerate(small):
        q = (z.real, z.imag)
        k = batch
        while True:
            dists, idx = tree.query(q, k=min(k, big.size))
            dists = np.atleast_1d(dists)
            idx = np.atleast_1d(idx)
            free = ~used[idx]
            if free.any():
                pick = int(np.flatnonzero(free)[0])
                used[idx[pick]] = True
                out[i] = dists[pick]
                break
            if k >= big.size:
                raise RuntimeError("ran out of pairing candidates")
            k *= 4
    return out


def sector_eigenvalues(params: ModelParams, sector: int = +1,
                       dim_cap: int = DEFAULT_DIM_CAP,
                       value_cache_dir=None) -> np.ndarray:
    """Modulus-sorted eigenvalues of one parity block at one cutoff.

    With ``value_cache_dir`` set, raw per-cutoff spectra are checkpointed so
    overlapping convergence pairs (the same cutoff appearing as base of one
    pair and partner of another) are diagonalized once.
    """
    if value_cache_dir is not None:
        path = Path(value_cache_dir) / (
            "values_" + spectrum_cache_name(params, 0, 1.0, sector))
        if path.exists():
            data = np.loadtxt(path, ndmin=2)
            return data[:, 0] + 1j * data[:, 1]
    block, _ = project_sector(build_liouvillian(params), params, sector)
    vals = sort_by_modulus(eigenvalues(block, dim_cap))
    if value_cache_dir is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w") as fh:
            for z in vals:
                fh.write(f"{z.real:.17g} {z.imag:.17g}\n")
        os.replace(tmp, path)
    return vals


def converged_eigenvalues(
    params: ModelParams,
    delta_nmax: int = 10,
    tol_match: float = 1e-6,
    sector: int = +1,
    dim_cap: int = DEFAULT_DIM_CAP,
    value_cache_dir=None,
) -> ComplexSpectrum:
    """Spectrum of one parity block with two-truncation convergence marks.

    ``delta_nmax = 0`` is a diagnostic mode: the run is compared with itself
    and every eigenvalue is trivially converged.
    """
    if delta_nmax < 0:
        raise ValueError(f"delta_nmax must be >= 0, got {delta_nmax}")
    if tol_match <= 0.0:
        raise ValueError(f"tol_match must be positive, got {tol_match}")
    vals = sector_eigenvalues(params, sector, dim_cap, value_cache_dir)
    if delta_nmax == 0:
        mask = np.ones(vals.size, dtype=bool)
    else:
        big_params = params.with_cutoff(params.n_max + delta_nmax)
        big_vals = sector_eigenvalues(big_params, sector, dim_cap,
                                      value_cache_dir)
        mask = _greedy_pair_distances(vals, big_vals) < tol_match
    spectrum = ComplexSpectrum(vals, mask, params, sector, delta_nmax, tol_match)
    if spectrum.n_converged < 100:
        warnings.warn(
            f"only {spectrum.n_converged} converged eigenvalues; spacing and "
            "ratio statistics will be unreliable", stacklevel=2)
    return spectrum


# ---------------------------------------------------------------------------
# plain-text dumps (also the checkpoint format for grid sweeps)
# ---------------------------------------------------------------------------

_HEADER_FIELDS = ("omega", "omega0", "gamma_minus", "gamma_plus", "kappa",
                  "twice_j", "n_max")


def write_spectrum(path, spectrum: ComplexSpectrum) -> None:
    """One eigenvalue per line, ``re im converged``, with a # header that
    pins the model and the convergence protocol."""
    with open(path, "w") as fh:
        for name in _HEADER_FIELDS:
            fh.write(f"# {name} = {getattr(spectrum.params, name)!r}\n")
        fh.write(f"# sector = {spectrum.sector}\n")
        fh.write(f"# delta_nmax = {spectrum.delta_nmax}\n")
        fh.write(f"# tol_match = {spectrum.tol_match!r}\n")
        fh.write("# columns: re im converged\n")
        for z, ok in zip(spectrum.values, spectrum.converged):
            fh.write(f"{z.real:.17g} {z.imag:.17g} {int(ok)}\n")


def read_spectrum(path) -> ComplexSpectrum:
    """Inverse of :func:`write_spectrum`."""
    meta: dict[str, str] = {}
    re_parts: list[float] = []
    im_parts: list[float] = []
    conv: list[bool] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            re_s, im_s, c_s = line.split()
            re_parts.append(float(re_s))
            im_parts.append(float(im_s))
            conv.append(bool(int(c_s)))
    params = ModelParams(
        omega=float(meta["omega"]),
        omega0=float(meta["omega0"]),
        gamma_minus=float(meta["gamma_minus"]),
        gamma_plus=float(meta["gamma_plus"]),
        kappa=float(meta["kappa"]),
        twice_j=int(meta["twice_j"]),
        n_max=int(meta["n_max"]),
    )
    values = np.array(re_parts) + 1j * np.array(im_parts)
    return ComplexSpectrum(
        values=values,
        converged=np.array(conv, dtype=bool),
        params=params,
        sector=int(meta["sector"]),
        delta_nmax=int(meta["delta_nmax"]),
        tol_match=float(meta["tol_match"]),
    )


def spectrum_cache_name(params: ModelParams, delta_nmax: int, tol_match: float,
                        sector: int) -> str:
    """Deterministic file name encoding model and convergence protocol."""
    tag = (f"j{params.twice_j}_n{params.n_max}_d{delta_nmax}"
           f"_gm{params.gamma_minus!r}_gp{params.gamma_plus!r}"
           f"_k{params.kappa!r}_w{params.omega!r}_w0{params.omega0!r}"
           f"_s{'p' if sector == 1 else 'm'}_t{tol_match!r}")
    return "spectrum_" + tag.replace(".", "p").replace("-", "m") + ".txt"


def cached_spectrum(
    cache_dir,
    params: ModelParams,
    delta_nmax: int = 10,
    tol_match: float = 1e-6,
    sector: int = +1,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> ComplexSpectrum:
    """Read the spectrum from ``cache_dir`` or compute and checkpoint it.

    The write is atomic (temp file + rename), so an interrupted sweep never
    leaves a truncated checkpoint behind.
    """
    path = Path(cache_dir) / spectrum_cache_name(params, delta_nmax,
                                                 tol_match, sector)
    if path.exists():
        return read_spectrum(path)
    spectrum = converged_eigenvalues(params, delta_nmax, tol_match, sector,
                                     dim_cap, value_cache_dir=cache_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    write_spectrum(tmp, spectrum)
    os.replace(tmp, path)
    return spectrum
