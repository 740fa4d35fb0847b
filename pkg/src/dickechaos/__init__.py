"""Spectral statistics and classical chaos of the open anisotropic Dicke model.

The package builds the Lindblad Liouvillian of the Dicke model with
independent corotating and counterrotating couplings and photon leakage,
diagonalizes its parity sectors with a two-truncation convergence check,
tests the complex-spacing and spectral-ratio statistics of the converged
eigenvalues against the 2D Poisson and GinUE reference laws, integrates the
dissipative mean-field limit with attractor classification and Lyapunov
exponents, and joins the two sides into a per-coupling-cell comparison of
quantum level repulsion with classical chaos.
"""
from .basis import ModelParams, hilbert_dim, parity_counts
from .liouvillian import (build_hamiltonian, build_liouvillian,
                          build_liouvillian_tetradic, project_sector,
                          trace_functional)
from .spectra import (ComplexSpectrum, converged_eigenvalues, eigenvalues,
                      read_spectrum, sector_eigenvalues, sort_by_modulus,
                      write_spectrum)
from .distributions import (cdf_2dp, cdf_ginue, cdf_ginue_scaled,
                            ginibre_eigenvalues, ginue_mean_spacing, p_2dp,
                            p_ginue, p_ginue_scaled, poisson_plane,
                            sample_2dp, sample_ginue)
from .stats import (AD_THRESHOLD, ad_against_references, anderson_darling,
                    complex_ratios, fit_repulsion_exponent, histogram,
                    moving_window_average, nn_spacings, ratio_averages,
                    unfold, window_ad_scan, window_ratio_scan)
from .classical import (AttractorVerdict, ClassicalState, ClassifyProtocol,
                        Trajectory, benettin_exponent, classical_hamiltonian,
                        classify_attractor, critical_coupling_closed,
                        critical_coupling_open, flow, integrate,
                        largest_lyapunov)
from .pipelines import (GINUE_RATIO_REFERENCE, POISSON_RATIO_REFERENCE,
                        GhsVerdictRow, RunConfig, quantum_verdict,
                        run_ad_scan, run_classical, run_ghs_compare,
                        run_lambda_window_scan, run_lyapunov_map,
                        run_ratio_map, run_spectrum, run_stats)

__version__ = "0.1.0"
