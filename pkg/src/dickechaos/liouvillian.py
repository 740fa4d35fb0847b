"""Lindblad generator of the anisotropic open Dicke model.

The Hamiltonian couples one bosonic mode to a collective pseudospin with
independent corotating (gamma_minus) and counterrotating (gamma_plus)
strengths,

    H = omega a^dag a + omega0 J_z
        + (gamma_minus/sqrt(N)) (a^dag J_- + a J_+)
        + (gamma_plus /sqrt(N)) (a^dag J_+ + a J_-),       N = 2j,

and photon leakage at rate kappa enters through the single jump operator a:

    d rho/dt = -i [H, rho] + kappa (2 a rho a^dag - a^dag a rho - rho a^dag a).

Two independent constructions of the matrix of this generator are kept on
purpose.  ``build_liouvillian`` assembles it from sparse Kronecker products,

    L = -i (H (x) 1 - 1 (x) H^T) + kappa (2 a (x) a* - n (x) 1 - 1 (x) n^T),

using the row-major operator-space ordering of :mod:`dickechaos.basis`.
``build_liouvillian_tetradic`` evaluates the four-index matrix element

    L[(g',g),(f',f)] = -i (<g'|H|f'> delta_{f g} - <f|H|g> delta_{g' f'})
                       + kappa (2 <g'|a|f'><f|a^dag|g>
                                - <g'|a^dag a|f'> delta_{f g}
                                - <f|a^dag a|g> delta_{g' f'})

label by label.  The two routes must agree entrywise to 1e-12; the test
suite enforces this, so neither may be removed.

Both the Hamiltonian and the dissipator preserve the doubled parity
p_bra * p_ket, so the generator is exactly block diagonal over the two
parity sectors; ``project_sector`` extracts one block and asserts that the
cross blocks hold no stored nonzero at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import FockLabel, LiouvilleLabel, ModelParams, liouville_parities

__all__ = [
    "SectorMap",
    "c_plus",
    "c_minus",
    "hamiltonian_element",
    "annihilator_element",
    "creator_element",
    "number_element",
    "a_adagger_element",
    "liouvillian_element",
    "boson_annihilator",
    "spin_z",
    "spin_raising",
    "build_hamiltonian",
    "annihilator",
    "number_operator",
    "build_liouvillian",
    "build_liouvillian_tetradic",
    "project_sector",
    "trace_functional",
    "write_matrix",
]


# ---------------------------------------------------------------------------
# scalar matrix elements
# ---------------------------------------------------------------------------

def c_plus(twice_j: int, twice_mz: int) -> float:
    """Raising amplitude sqrt(j(j+1) - m_z(m_z+1)), exact in doubled integers."""
    return 0.5 * math.sqrt(twice_j * (twice_j + 2) - twice_mz * (twice_mz + 2))


def c_minus(twice_j: int, twice_mz: int) -> float:
    """Lowering amplitude sqrt(j(j+1) - m_z(m_z-1))."""
    return 0.5 * math.sqrt(twice_j * (twice_j + 2) - twice_mz * (twice_mz - 2))


def _check_labels(bra: FockLabel, ket: FockLabel, params: ModelParams) -> None:
    if bra.twice_j != params.twice_j or ket.twice_j != params.twice_j:
        raise ValueError("label spin length does not match model parameters")
    if bra.n > params.n_max or ket.n > params.n_max:
        raise ValueError("label photon number exceeds the Fock cutoff")


def hamiltonian_element(bra: FockLabel, ket: FockLabel, params: ModelParams) -> float:
    """<bra|H|ket> in closed form.

    Selection rules: the diagonal carries omega n + omega0 m_z; the coupling
    moves m_z by one and n by one simultaneously, with bosonic amplitudes
    gamma_minus sqrt(n) (resp. gamma_plus sqrt(n+1)) on the co- (counter-)
    rotating route for the spin-raising part, mirrored for spin lowering.
    """
    _check_labels(bra, ket, params)
    dn = bra.n - ket.n
    dm = bra.twice_mz - ket.twice_mz
    if dn == 0 and dm == 0:
        return params.omega * ket.n + params.omega0 * ket.m_z
    root_n = math.sqrt(params.n_atoms)
    if dm == 2:
        if dn == -1:
            return params.gamma_minus * math.sqrt(ket.n) \
                * c_plus(ket.twice_j, ket.twice_mz) / root_n
        if dn == 1:
            return params.gamma_plus * math.sqrt(ket.n + 1) \
                * c_plus(ket.twice_j, ket.twice_mz) / root_n
        return 0.0
    if dm == -2:
        if dn == 1:
            return params.gamma_minus * math.sqrt(ket.n + 1) \
                * c_minus(ket.twice_j, ket.twice_mz) / root_n
        if dn == -1:
            return params.gamma_plus * math.sqrt(ket.n) \
                * c_minus(ket.twice_j, ket.twice_mz) / root_n
        return 0.0
    return 0.0


def annihilator_element(bra: FockLabel, ket: FockLabel) -> float:
    """<bra|a|ket> = sqrt(n) on n -> n-1, spin untouched."""
    if bra.twice_mz == ket.twice_mz and bra.n == ket.n - 1:
        return math.sqrt(ket.n)
    return 0.0


def creator_element(bra: FockLabel, ket: FockLabel) -> float:
    """<bra|a^dag|ket> = sqrt(n+1) on n -> n+1, spin untouched."""
    if bra.twice_mz == ket.twice_mz and bra.n == ket.n + 1:
        return math.sqrt(ket.n + 1)
    return 0.0


def number_element(bra: FockLabel, ket: FockLabel) -> float:
    """<bra|a^dag a|ket> = n on the diagonal."""
    if bra == ket:
        return float(ket.n)
    return 0.0


def a_adagger_element(bra: FockLabel, ket: FockLabel) -> float:
    """<bra|a a^dag|ket> = (n+1) on the diagonal.

    Closed form of the untruncated product.  At the cutoff row n = n_max the
    truncated operator product a a^dag instead gives 0, which is why the
    generator is assembled from a, a^dag a and the closed-form elements
    above, never from this product.  Kept for operator-algebra completeness.
    """
    if bra == ket:
        return float(ket.n + 1)
    return 0.0


def liouvillian_element(row: LiouvilleLabel, col: LiouvilleLabel,
                        params: ModelParams) -> complex:
    """Four-index element L[(g',g),(f',f)] of the generator.

    ``row`` is the target pair (g', g) and ``col`` the source pair (f', f).
    """
    gp, g = row.bra, row.ket
    fp, f = col.bra, col.ket
    out = 0.0j
    if g == f:
        out += -1j * hamiltonian_element(gp, fp, params)
    if gp == fp:
        out += 1j * hamiltonian_element(f, g, params)
    out += params.kappa * 2.0 * annihilator_element(gp, fp) * creator_element(f, g)
    if g == f and gp == fp:
        out -= params.kappa * (fp.n + f.n)
    return out


# ---------------------------------------------------------------------------
# sparse operator blocks
# ---------------------------------------------------------------------------

def boson_annihilator(n_max: int) -> sp.csr_matrix:
    """Truncated mode annihilator, (n_max+1) x (n_max+1)."""
    amp = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    return sp.diags(amp, offsets=1, format="csr")


def spin_z(twice_j: int) -> sp.csr_matrix:
    m = (np.arange(twice_j + 1, dtype=float) * 2 - twice_j) / 2.0
    return sp.diags(m, format="csr")


def spin_raising(twice_j: int) -> sp.csr_matrix:
    """J_+ over sublevels k = 0..2j; entry (k+1, k) is c_plus at m_z = k - j."""
    tm = 2 * np.arange(twice_j, dtype=np.int64) - twice_j
    amp = 0.5 * np.sqrt((twice_j * (twice_j + 2) - tm * (tm + 2)).astype(float))
    return sp.diags(amp, offsets=-1, format="csr")


def build_hamiltonian(params: ModelParams) -> sp.csr_matrix:
    """Sparse Hamiltonian over the product basis (photon slow, spin fast)."""
    n_spin = params.twice_j + 1
    a = boson_annihilator(params.n_max)
    adag = a.T.tocsr()
    n_op = sp.diags(np.arange(params.n_max + 1, dtype=float), format="csr")
    i_b = sp.identity(params.n_max + 1, format="csr")
    i_s = sp.identity(n_spin, format="csr")
    jp = spin_raising(params.twice_j)
    jm = jp.T.tocsr()
    root_n = math.sqrt(params.n_atoms)
    h = (params.omega * sp.kron(n_op, i_s)
         + params.omega0 * sp.kron(i_b, spin_z(params.twice_j))
         + (params.gamma_minus / root_n) * (sp.kron(adag, jm) + sp.kron(a, jp))
         + (params.gamma_plus / root_n) * (sp.kron(adag, jp) + sp.kron(a, jm)))
    h = h.tocsr()
    h.eliminate_zeros()
    h.sort_indices()
    return h


def annihilator(params: ModelParams) -> sp.csr_matrix:
    """Jump operator a on the full product space."""
    i_s = sp.identity(params.twice_j + 1, format="csr")
    return sp.kron(boson_annihilator(params.n_max), i_s, format="csr")


def number_operator(params: ModelParams) -> sp.csr_matrix:
    diag = np.repeat(np.arange(params.n_max + 1, dtype=float), params.twice_j + 1)
    return sp.diags(diag, format="csr")


# ---------------------------------------------------------------------------
# generator assembly, route 1: Kronecker products
# ---------------------------------------------------------------------------

def build_liouvillian(params: ModelParams, drop_tol: float = 0.0) -> sp.csr_matrix:
    """Generator matrix over composite indices F, assembled from Kronecker
    products (row-major vectorization: vec(A rho B) = (A (x) B^T) vec(rho)).

    drop_tol = 0 keeps exact structural sparsity; a positive value drops
    entries of smaller magnitude after assembly.
    """
    if drop_tol < 0.0:
        raise ValueError(f"drop_tol must be nonnegative, got {drop_tol}")
    h = build_hamiltonian(params)
    a = annihilator(params)
    n_op = number_operator(params)
    ident = sp.identity(params.dim_hilbert, format="csr")
    lind = (-1j * (sp.kron(h, ident) - sp.kron(ident, h.T))
            + params.kappa * (2.0 * sp.kron(a, a.conjugate())
                              - sp.kron(n_op, ident)
                              - sp.kron(ident, n_op.T)))
    lind = lind.tocsr()
    lind.sum_duplicates()
    if drop_tol > 0.0:
        lind.data[np.abs(lind.data) <= drop_tol] = 0.0
    lind.eliminate_zeros()
    lind.sort_indices()
    return lind


# ---------------------------------------------------------------------------
# generator assembly, route 2: direct tetradic elements
# ---------------------------------------------------------------------------

def _neighbor_labels(lab: FockLabel, n_max: int) -> list[FockLabel]:
    """lab itself plus every label reachable by one H or jump transition."""
    out = [lab]
    for dn, dm in ((-1, 2), (1, 2), (-1, -2), (1, -2), (-1, 0)):
        n = lab.n + dn
        tm = lab.twice_mz + dm
        if 0 <= n <= n_max and abs(tm) <= lab.twice_j:
            out.append(FockLabel(n, tm, lab.twice_j))
    return out


def build_liouvillian_tetradic(params: ModelParams) -> sp.csr_matrix:
    """Reference construction looping the four-index element over all
    selection-rule-allowed entries.  Kept independent of the Kronecker route.
    """
    dim = params.dim_hilbert
    labels = [FockLabel.from_index(f, params.j) for f in range(1, dim + 1)]
    rows: list[int] = []
    cols: list[int] = []
    vals: list[complex] = []
    for fp in labels:
        cands_p = _neighbor_labels(fp, params.n_max)
        for f in labels:
            col = LiouvilleLabel(fp, f)
            col_idx = col.index(params.n_max) - 1
            cands = _neighbor_labels(f, params.n_max)
            seen: set[tuple[int, int]] = set()
            for gp in cands_p:
                for g in cands:
                    key = (gp.f, g.f)
                    if key in seen:
                        continue
                    seen.add(key)
                    val = liouvillian_element(LiouvilleLabel(gp, g), col, params)
                    if val != 0.0:
                        rows.append((gp.f - 1) * dim + (g.f - 1))
                        cols.append(col_idx)
                        vals.append(val)
    dim_l = dim * dim
    out = sp.coo_matrix((vals, (rows, cols)), shape=(dim_l, dim_l)).tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


# ---------------------------------------------------------------------------
# parity blocks, trace functional, dumps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorMap:
    """Where one doubled-parity block lives inside the full operator space."""

    sector: int
    indices: np.ndarray  # 1-based composite indices F, ascending
    dim_liouville: int

    @property
    def dim(self) -> int:
        return self.indices.size


def project_sector(lind: sp.spmatrix, params: ModelParams,
                   sector: int = +1) -> tuple[sp.csr_matrix, SectorMap]:
    """Extract one parity block; cross-sector entries must be absent exactly.

    A single stored nonzero connecting the sectors aborts: that is a
    construction bug, not something to truncate away.
    """
    if sector not in (+1, -1):
        raise ValueError(f"sector must be +1 or -1, got {sector}")
    lpar = liouville_parities(params.j, params.n_max)
    if lind.shape != (lpar.size, lpar.size):
        raise ValueError(f"matrix shape {lind.shape} does not match "
                         f"dim_liouville {lpar.size}")
    keep = np.flatnonzero(lpar == sector)
    drop = np.flatnonzero(lpar == -sector)
    csr = lind.tocsr()
    for rows, cols in ((keep, drop), (drop, keep)):
        cross = csr[rows][:, cols]
        if cross.nnz and np.abs(cross.data).max() > 0.0:
            raise RuntimeError(
                "generator couples the parity sectors: max cross entry "
                f"{np.abs(cross.data).max():.3e}")
    block = csr[keep][:, keep].tocsr()
    block.sort_indices()
    return block, SectorMap(sector, keep + 1, lpar.size)


def trace_functional(dim_hilbert: int) -> np.ndarray:
    """Row vector representing the trace, i.e. vec of the identity.

    Left-multiplying the generator with it must give zero: the evolution is
    trace preserving.
    """
    vec = np.zeros(dim_hilbert * dim_hilbert)
    vec[(np.arange(dim_hilbert)) * dim_hilbert + np.arange(dim_hilbert)] = 1.0
    return vec


def write_matrix(path, matrix: sp.spmatrix) -> None:
    """Text dump: header line ``dim nnz``, then ``row col re im`` per stored
    entry, 1-based, sorted by (row, col).
    """
    coo = matrix.tocoo()
    if coo.shape[0] != coo.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {coo.shape}")
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write(f"{coo.shape[0]} {coo.nnz}\n")
        for i in order:
            val = complex(coo.data[i])
            fh.write(f"{coo.row[i] + 1} {coo.col[i] + 1} "
                     f"{val.real:.17g} {val.imag:.17g}\n")
