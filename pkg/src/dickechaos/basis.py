"""Index bookkeeping for the truncated Dicke Hilbert space and its
operator (Liouville) space.

A single bosonic mode truncated at ``n_max`` photons couples to a collective
pseudospin of length ``j`` built from N = 2j two-level atoms.  Product states
``|n, m_z>`` carry the global 1-based index

    f = (2j + 1) n + (m_z + j) + 1,

so the photon number is the slow index and the spin projection the fast one.
Operator-space indices pair a bra and a ket label row-major,

    F = (f_bra - 1) D_H + f_ket,        D_H = (2j + 1)(n_max + 1).

Half-integer spins are kept exact by storing 2j and 2m_z as integers; all
parity arithmetic is then integer arithmetic.  The hermitian parity
(-1)^(n + m_z + j) splits the Hilbert space in two; its doubled version
p_bra * p_ket splits the Liouville space, and the Lindblad generator never
couples the two blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "FockLabel",
    "LiouvilleLabel",
    "to_twice",
    "hilbert_dim",
    "fock_index",
    "fock_unindex",
    "hilbert_parity",
    "hilbert_parities",
    "parity_counts",
    "liouville_index",
    "liouville_unindex",
    "liouville_parity",
    "liouville_parities",
    "sector_indices",
]


def to_twice(value: float, name: str = "value") -> int:
    """Convert a (half-)integer quantum number to its doubled integer form."""
    doubled = round(2.0 * value)
    if abs(2.0 * value - doubled) > 1e-12:
        raise ValueError(f"{name} must be integer or half-integer, got {value}")
    return int(doubled)


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the anisotropic open Dicke model.

    omega is the field frequency, omega0 the atomic splitting, gamma_minus
    and gamma_plus the corotating and counterrotating coupling strengths,
    kappa the photon leakage rate.  The pseudospin length is stored doubled
    (``twice_j``) so half-integer j stays exact; ``n_max`` is the Fock
    cutoff of the bosonic mode.
    """

    omega: float
    omega0: float
    gamma_minus: float
    gamma_plus: float
    kappa: float
    twice_j: int
    n_max: int

    def __post_init__(self) -> None:
        if not (self.omega > 0.0 and np.isfinite(self.omega)):
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not (self.omega0 > 0.0 and np.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.gamma_minus < 0.0 or self.gamma_plus < 0.0:
            raise ValueError("coupling strengths must be nonnegative")
        if self.kappa < 0.0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        if int(self.twice_j) != self.twice_j or self.twice_j < 1:
            raise ValueError(f"twice_j must be a positive integer, got {self.twice_j}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max}")

    @classmethod
    def from_j(
        cls,
        omega: float,
        omega0: float,
        gamma_minus: float,
        gamma_plus: float,
        kappa: float,
        j: float,
        n_max: int,
    ) -> "ModelParams":
        return cls(omega, omega0, gamma_minus, gamma_plus, kappa,
                   to_twice(j, "j"), n_max)

    @property
    def j(self) -> float:
        return self.twice_j / 2.0

    @property
    def n_atoms(self) -> int:
        """Number of two-level atoms, N = 2j."""
        return self.twice_j

    @property
    def dim_hilbert(self) -> int:
        return (self.twice_j + 1) * (self.n_max + 1)

    @property
    def dim_liouville(self) -> int:
        return self.dim_hilbert ** 2

    @property
    def delta(self) -> float:
        """Coupling anisotropy gamma_plus / gamma_minus."""
        if self.gamma_minus == 0.0:
            raise ZeroDivisionError("delta undefined at gamma_minus = 0")
        return self.gamma_plus / self.gamma_minus

    def with_cutoff(self, n_max: int) -> "ModelParams":
        return ModelParams(self.omega, self.omega0, self.gamma_minus,
                           self.gamma_plus, self.kappa, self.twice_j, n_max)


@dataclass(frozen=True)
class FockLabel:
    """One product state |n, m_z> of the mode-spin basis."""

    n: int
    twice_mz: int
    twice_j: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"photon number must be nonnegative, got {self.n}")
        if abs(self.twice_mz) > self.twice_j:
            raise ValueError(
                f"|m_z| <= j required, got 2m_z={self.twice_mz}, 2j={self.twice_j}")
        if (self.twice_mz - self.twice_j) % 2 != 0:
            raise ValueError("m_z must run from -j to j in integer steps")

    @classmethod
    def from_quantum(cls, n: int, m_z: float, j: float) -> "FockLabel":
        return cls(n, to_twice(m_z, "m_z"), to_twice(j, "j"))

    @classmethod
    def from_index(cls, f: int, j: float) -> "FockLabel":
        twice_j = to_twice(j, "j")
        if f < 1:
            raise ValueError(f"Fock index is 1-based, got {f}")
        n, k = divmod(f - 1, twice_j + 1)
        return cls(n, 2 * k - twice_j, twice_j)

    @property
    def m_z(self) -> float:
        return self.twice_mz / 2.0

    @property
    def j(self) -> float:
        return self.twice_j / 2.0

    @property
    def k(self) -> int:
        """Spin sublevel counted from the bottom, k = m_z + j in 0..2j."""
        return (self.twice_mz + self.twice_j) // 2

    @property
    def f(self) -> int:
        """Global 1-based Hilbert index."""
        return (self.twice_j + 1) * self.n + self.k + 1

    @property
    def parity(self) -> int:
        """Hermitian parity (-1)^(n + m_z + j); the exponent is integer."""
        return 1 if (self.n + self.k) % 2 == 0 else -1


@dataclass(frozen=True)
class LiouvilleLabel:
    """A bra-ket pair labelling one operator-space basis element |bra><ket|."""

    bra: FockLabel
    ket: FockLabel

    def index(self, n_max: int) -> int:
        dim = (self.bra.twice_j + 1) * (n_max + 1)
        return (self.bra.f - 1) * dim + self.ket.f

    @property
    def parity(self) -> int:
        """Doubled parity p_bra * p_ket = (-1)^(n' + m_z' - n - m_z)."""
        return self.bra.parity * self.ket.parity


def hilbert_dim(j: float, n_max: int) -> int:
    """Dimension (2j + 1)(n_max + 1) of the truncated Hilbert space."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return (to_twice(j, "j") + 1) * (n_max + 1)


def fock_index(n: int, m_z: float, j: float) -> int:
    """Global 1-based index f = (2j+1) n + (m_z + j) + 1."""
    return FockLabel.from_quantum(n, m_z, j).f


def fock_unindex(f: int, j: float) -> tuple[int, float]:
    """Inverse of :func:`fock_index`; returns (n, m_z)."""
    label = FockLabel.from_index(f, j)
    return label.n, label.m_z


def hilbert_parity(n: int, m_z: float, j: float) -> int:
    return FockLabel.from_quantum(n, m_z, j).parity


def hilbert_parities(j: float, n_max: int) -> np.ndarray:
    """Parities of all D_H basis states, ordered by the global index f."""
    twice_j = to_twice(j, "j")
    exps = np.add.outer(np.arange(n_max + 1), np.arange(twice_j + 1)) % 2
    return (1 - 2 * exps.ravel()).astype(np.int8)


def parity_counts(j: float, n_max: int) -> tuple[int, int]:
    """Sizes (n_plus, n_minus) of the two Hilbert parity classes."""
    par = hilbert_parities(j, n_max)
    n_plus = int(np.count_nonzero(par == 1))
    return n_plus, par.size - n_plus


def liouville_index(f_bra: int, f_ket: int, dim_hilbert: int) -> int:
    """Composite 1-based index F = (f_bra - 1) D_H + f_ket."""
    for name, f in (("f_bra", f_bra), ("f_ket", f_ket)):
        if not 1 <= f <= dim_hilbert:
            raise ValueError(f"{name} out of range 1..{dim_hilbert}: {f}")
    return (f_bra - 1) * dim_hilbert + f_ket


def liouville_unindex(f_composite: int, dim_hilbert: int) -> tuple[int, int]:
    """Inverse of :func:`liouville_index`; returns (f_bra, f_ket)."""
    if not 1 <= f_composite <= dim_hilbert ** 2:
        raise ValueError(f"composite index out of range: {f_composite}")
    f_bra, rem = divmod(f_composite - 1, dim_hilbert)
    return f_bra + 1, rem + 1


def liouville_parity(f_composite: int, j: float, n_max: int) -> int:
    dim = hilbert_dim(j, n_max)
    f_bra, f_ket = liouville_unindex(f_composite, dim)
    return (FockLabel.from_index(f_bra, j).parity
            * FockLabel.from_index(f_ket, j).parity)


def liouville_parities(j: float, n_max: int) -> np.ndarray:
    """Doubled parities of all D_H^2 operator basis elements, ordered by F."""
    par = hilbert_parities(j, n_max).astype(np.int64)
    return np.outer(par, par).ravel().astype(np.int8)


def sector_indices(j: float, n_max: int, sector: int) -> np.ndarray:
    """1-based composite indices F belonging to one doubled-parity sector."""
    if sector not in (+1, -1):
        raise ValueError(f"sector must be +1 or -1, got {sector}")
    return np.flatnonzero(liouville_parities(j, n_max) == sector) + 1
