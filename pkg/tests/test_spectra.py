"""Spectra: dense solve, modulus ordering, convergence filter, dumps.

Oracle: with both couplings off the generator factorizes and is triangular
with respect to the total-photon grading, so its full eigenvalue set is

    lambda = -kappa (n_bra + n_ket) - i omega (n_bra - n_ket)
             - i omega0 (m_bra - m_ket)

over all label pairs, exactly, even at finite cutoff.
"""

from __future__ import annotations

import numpy as np
import pytest

from dickechaos.basis import (
    FockLabel,
    ModelParams,
    hilbert_dim,
    liouville_parities,
)
from dickechaos.liouvillian import build_liouvillian, project_sector
from dickechaos.spectra import (
    ComplexSpectrum,
    cached_spectrum,
    converged_eigenvalues,
    eigenvalues,
    read_spectrum,
    sort_by_modulus,
    spectrum_cache_name,
    write_spectrum,
)


def decoupled_spectrum(params, sector=None):
    """Closed-form eigenvalues of the gamma = 0 generator."""
    dim = params.dim_hilbert
    labels = [FockLabel.from_index(f, params.j) for f in range(1, dim + 1)]
    lpar = liouville_parities(params.j, params.n_max)
    out = []
    pos = 0
    for bra in labels:
        for ket in labels:
            if sector is None or lpar[pos] == sector:
                out.append(-params.kappa * (bra.n + ket.n)
                           - 1j * params.omega * (bra.n - ket.n)
                           - 1j * params.omega0 * (bra.m_z - ket.m_z))
            pos += 1
    return np.array(out)


def assert_multiset_close(a, b, tol):
    assert a.size == b.size
    order_a = np.lexsort((a.imag, a.real))
    order_b = np.lexsort((b.imag, b.real))
    left = list(b[order_b])
    for z in a[order_a]:
        dists = [abs(z - w) for w in left]
        k = int(np.argmin(dists))
        assert dists[k] <= tol, f"unmatched {z}, best distance {dists[k]}"
        left.pop(k)


def test_eigenvalues_guards():
    with pytest.raises(ValueError, match="square"):
        eigenvalues(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="cap"):
        eigenvalues(np.eye(11), dim_cap=10)
    got = eigenvalues(np.diag([3.0, -1.0, 2.0]))
    assert_multiset_close(got, np.array([3.0, -1.0, 2.0], dtype=complex), 1e-14)


def test_decoupled_full_spectrum_oracle():
    p = ModelParams.from_j(1.0, 0.9, 0.0, 0.0, 0.7, j=0.5, n_max=3)
    lind = build_liouvillian(p)
    got = eigenvalues(lind)
    want = decoupled_spectrum(p)
    assert_multiset_close(got, want, 1e-10)


def test_decoupled_sector_spectrum_oracle():
    p = ModelParams.from_j(1.0, 0.9, 0.0, 0.0, 0.7, j=1, n_max=3)
    block, _ = project_sector(build_liouvillian(p), p, +1)
    got = eigenvalues(block)
    want = decoupled_spectrum(p, sector=+1)
    assert_multiset_close(got, want, 1e-10)


def test_sort_by_modulus_ties_and_order():
    vals = np.array([1.0 + 1.0j, -2.0 + 0.0j, 1.0 - 1.0j, 0.5 + 0.0j])
    got = sort_by_modulus(vals)
    np.testing.assert_array_equal(
        got, np.array([0.5, 1.0 - 1.0j, 1.0 + 1.0j, -2.0]))
    # idempotent and stable
    np.testing.assert_array_equal(sort_by_modulus(got), got)


def test_converged_all_at_gamma_zero():
    # decoupled spectra are cutoff-exact, so every eigenvalue must converge
    p = ModelParams.from_j(1.0, 0.9, 0.0, 0.0, 0.7, j=0.5, n_max=4)
    with pytest.warns(UserWarning, match="unreliable"):
        spec = converged_eigenvalues(p, delta_nmax=3, tol_match=1e-8)
    assert spec.values.size == spec.n_converged
    assert spec.n_converged == 2 * (p.n_max + 1) ** 2
    assert_multiset_close(spec.values, decoupled_spectrum(p, sector=+1), 1e-10)


def test_converged_delta_zero_diagnostic():
    p = ModelParams.from_j(1.0, 1.0, 0.5, 0.5, 1.0, j=0.5, n_max=3)
    with pytest.warns(UserWarning):
        spec = converged_eigenvalues(p, delta_nmax=0)
    assert spec.converged.all()
    with pytest.raises(ValueError):
        converged_eigenvalues(p, delta_nmax=-1)
    with pytest.raises(ValueError):
        converged_eigenvalues(p, delta_nmax=2, tol_match=0.0)


def test_converged_deterministic():
    p = ModelParams.from_j(1.0, 1.0, 1.0, 2.0, 1.0, j=0.5, n_max=6)
    with pytest.warns(UserWarning):
        a = converged_eigenvalues(p, delta_nmax=4)
    with pytest.warns(UserWarning):
        b = converged_eigenvalues(p, delta_nmax=4)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.converged, b.converged)


def test_spectrum_contains_steady_state_and_left_half_plane():
    p = ModelParams.from_j(1.0, 1.0, 1.0, 2.0, 1.0, j=1, n_max=8)
    block, _ = project_sector(build_liouvillian(p), p, +1)
    vals = sort_by_modulus(eigenvalues(block))
    assert abs(vals[0]) < 1e-10          # steady state
    assert vals.real.max() < 1e-10       # no growth anywhere
    # closed under conjugation
    assert_multiset_close(vals, vals.conj(), 1e-9)


def test_spectrum_round_trip(tmp_path):
    p = ModelParams.from_j(1.0, 1.0, 1.0, 2.0, 1.0, j=0.5, n_max=4)
    with pytest.warns(UserWarning):
        spec = converged_eigenvalues(p, delta_nmax=2)
    path = tmp_path / "spec.txt"
    write_spectrum(path, spec)
    back = read_spectrum(path)
    np.testing.assert_array_equal(back.values, spec.values)
    np.testing.assert_array_equal(back.converged, spec.converged)
    assert back.params == spec.params
    assert back.sector == spec.sector
    assert back.delta_nmax == spec.delta_nmax
    assert back.tol_match == spec.tol_match


def test_cached_spectrum_reuses_checkpoint(tmp_path):
    p = ModelParams.from_j(1.0, 1.0, 1.0, 2.0, 1.0, j=0.5, n_max=3)
    with pytest.warns(UserWarning):
        first = cached_spectrum(tmp_path, p, delta_nmax=2)
    name = spectrum_cache_name(p, 2, 1e-6, +1)
    assert (tmp_path / name).exists()
    # poison the checkpoint: a cache hit must return the poisoned values
    poisoned = ComplexSpectrum(first.values + 1.0, first.converged, p, +1, 2, 1e-6)
    write_spectrum(tmp_path / name, poisoned)
    second = cached_spectrum(tmp_path, p, delta_nmax=2)
    np.testing.assert_array_equal(second.values, first.values + 1.0)
