"""Mean-field limit: dissipative flow, Lyapunov exponents, attractors.

The five scaled variables are the cavity quadratures (q, p) and the Bloch
vector (Jx, Jy, Jz) with spin normalized per particle, so the flow
conserves the spin norm exactly and, at kappa = 0, the scaled energy

    h = (omega/2)(q^2 + p^2) + omega0 Jz
        + (gamma_- + gamma_+) q Jx - (gamma_- - gamma_+) p Jy.

Neither quantity is renormalized during integration: their drift is a
diagnostic of integrator health, and the invariant suite relies on that.

The coupling combinations (gamma_- - gamma_+) and (gamma_- + gamma_+)
split the flow into rotating and counterrotating channels; the south pole
(0, 0, 0, 0, -1) is an exact fixed point for every parameter set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .basis import ModelParams

__all__ = [
    "ClassicalState",
    "Trajectory",
    "AttractorVerdict",
    "ClassifyProtocol",
    "flow",
    "classical_hamiltonian",
    "integrate",
    "benettin_exponent",
    "largest_lyapunov",
    "classify_attractor",
    "critical_coupling_closed",
    "critical_coupling_open",
]

# drift of the exactly-conserved quantities stays below 1e-9 per 1e3 time
# units at these settings; the looser 1e-10/1e-12 pair does not
_RTOL = 1e-11
_ATOL = 1e-13


@dataclass(frozen=True)
class ClassicalState:
    """Point of the five-dimensional mean-field phase space."""

    q: float
    p: float
    jx: float
    jy: float
    jz: float

    @classmethod
    def from_array(cls, y) -> "ClassicalState":
        q, p, jx, jy, jz = (float(c) for c in y)
        return cls(q, p, jx, jy, jz)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.q, self.p, self.jx, self.jy, self.jz])

    @property
    def spin_norm(self) -> float:
        return float(self.jx**2 + self.jy**2 + self.jz**2)


def _rhs(params: ModelParams):
    om, om0, kap = params.omega, params.omega0, params.kappa
    minus = params.gamma_minus - params.gamma_plus
    plus = params.gamma_minus + params.gamma_plus

    def rhs(t, y):
        q, p, jx, jy, jz = y
        return (
            -kap * q + om * p - minus * jy,
            -kap * p - om * q - plus * jx,
            -om0 * jy - minus * p * jz,
            om0 * jx - plus * q * jz,
            plus * q * jy + minus * p * jx,
        )

    return rhs


def flow(state, params: ModelParams) -> np.ndarray:
    """Time derivative of (q, p, Jx, Jy, Jz)."""
    y = state.array if isinstance(state, ClassicalState) else np.asarray(state, float)
    return np.array(_rhs(params)(0.0, y))


def classical_hamiltonian(state, params: ModelParams) -> float:
    """Scaled energy per particle; conserved along kappa = 0 trajectories."""
    y = state.array if isinstance(state, ClassicalState) else np.asarray(state, float)
    q, p, jx, jy, jz = y
    return float(0.5 * params.omega * (q * q + p * p) + params.omega0 * jz
                 + (params.gamma_minus + params.gamma_plus) * q * jx
                 - (params.gamma_minus - params.gamma_plus) * p * jy)


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution with conservation diagnostics."""

    times: np.ndarray
    states: np.ndarray            # shape (len(times), 5)
    params: ModelParams
    spin_norm_drift: float        # max |J(t).J(t) - J(0).J(0)|
    energy_drift: float | None    # max |h(t) - h(0)|, kappa = 0 runs only

    @property
    def final(self) -> ClassicalState:
        return ClassicalState.from_array(self.states[-1])


def integrate(state0, params: ModelParams, t_final: float,
              t_eval=None, rtol: float = _RTOL, atol: float = _ATOL) -> Trajectory:
    """Adaptive RK integration of the flow with drift diagnostics."""
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    y0 = state0.array if isinstance(state0, ClassicalState) else np.asarray(state0, float)
    sol = solve_ivp(_rhs(params), (0.0, float(t_final)), y0, method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"integration stalled: {sol.message}")
    states = sol.y.T
    norms = np.sum(states[:, 2:] ** 2, axis=1)
    spin_drift = float(np.max(np.abs(norms - norms[0])))
    energy_drift = None
    if params.kappa == 0.0:
        h = np.array([classical_hamiltonian(s, params) for s in states])
        energy_drift = float(np.max(np.abs(h - h[0])))
    return Trajectory(times=sol.t, states=states, params=params,
                      spin_norm_drift=spin_drift, energy_drift=energy_drift)


def _spin_projected(y_ref: np.ndarray, offset: np.ndarray, d0: float) -> np.ndarray:
    """Perturbed point at distance d0 whose spin norm matches the reference."""
    y = y_ref + offset
    norm_ref = np.linalg.norm(y_ref[2:])
    if norm_ref > 0:
        y[2:] *= norm_ref / np.linalg.norm(y[2:])
    gap = y - y_ref
    return y_ref + gap * (d0 / np.linalg.norm(gap))


def benettin_exponent(rhs, y0, t_total: float, t_renorm: float = 1.0,
                      d0: float = 1e-8, t_transient: float = 200.0,
                      perturb=None, renormalize=None, seed: int = 0,
                      rtol: float = _RTOL, atol: float = _ATOL) -> float:
    """Largest Lyapunov exponent by two-trajectory renormalization.

    perturb(y0, d0) builds the initial companion point; renormalize(y_ref,
    offset, d0) rebuilds it after each window.  Both default to a seeded
    random offset of norm d0 with no manifold constraint.
    """
    if t_total <= t_transient:
        raise ValueError("t_total must exceed the transient window")
    y_ref = np.asarray(y0, dtype=float).copy()
    if perturb is None:
        direction = np.random.default_rng(seed).standard_normal(y_ref.size)
        y_pert = y_ref + d0 * direction / np.linalg.norm(direction)
    else:
        y_pert = perturb(y_ref, d0)
    if renormalize is None:
        renormalize = lambda ref, offset, eps: ref + offset * (eps / np.linalg.norm(offset))

    n = y_ref.size
    pair_rhs = lambda t, y: np.concatenate([rhs(t, y[:n]), rhs(t, y[n:])])
    log_sum, t_measured, t_now = 0.0, 0.0, 0.0
    gap_set = np.linalg.norm(y_pert - y_ref)
    while t_now < t_total - 1e-9:
        window = min(t_renorm, t_total - t_now)
        sol = solve_ivp(pair_rhs, (0.0, window), np.concatenate([y_ref, y_pert]),
                        method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"integration stalled: {sol.message}")
        y_ref, y_pert = sol.y[:n, -1], sol.y[n:, -1]
        gap = np.linalg.norm(y_pert - y_ref)
        if not np.isfinite(gap) or gap == 0.0:
            raise RuntimeError("companion trajectory collapsed or escaped")
        t_now += window
        if t_now > t_transient:
            log_sum += np.log(gap / gap_set)
            t_measured += window
        # keep the companion offset resolvable when the reference grows:
        # the gap is set relative to the state scale, never below d0
        eps = d0 * max(1.0, float(np.linalg.norm(y_ref)))
        y_pert = renormalize(y_ref, y_pert - y_ref, eps)
        gap_set = np.linalg.norm(y_pert - y_ref)
    return log_sum / t_measured


def largest_lyapunov(state0, params: ModelParams, t_total: float = 2200.0,
                     t_renorm: float = 1.0, d0: float = 1e-8,
                     t_transient: float = 200.0, seed: int = 0) -> float:
    """Leading exponent of the mean-field flow, spin norm held invariant."""
    y0 = state0.array if isinstance(state0, ClassicalState) else np.asarray(state0, float)

    def perturb(y_ref, eps):
        direction = np.random.default_rng(seed).standard_normal(5)
        return _spin_projected(y_ref, eps * direction / np.linalg.norm(direction), eps)

    return benettin_exponent(_rhs(params), y0, t_total, t_renorm, d0,
                             t_transient, perturb=perturb,
                             renormalize=_spin_projected, seed=seed)


@dataclass(frozen=True)
class ClassifyProtocol:
    """Thresholds and horizons of the attractor classification."""

    t_transient: float = 200.0
    t_settle: float = 2000.0
    eps_fixed_point: float = 1e-5
    chaos_threshold: float = 0.01
    eps_cycle: float = 1e-3
    max_cycle_points: int = 12
    min_crossings: int = 6
    t_section: float = 200.0
    # slow cycles contract at rates ~1e-3, so the section pass may need far
    # more settling than the verdict horizon; extensions are cumulative
    cycle_transient_extensions: tuple = (0.0, 2000.0, 4000.0, 8000.0)
    lyapunov_t_total: float = 2200.0
    lyapunov_t_renorm: float = 1.0
    lyapunov_d0: float = 1e-8
    seed: int = 0


@dataclass(frozen=True)
class AttractorVerdict:
    """Outcome of the long-time classification."""

    kind: str                     # fixed_point | limit_cycle | chaotic | undetermined
    lyapunov_max: float | None
    evidence: dict = field(default_factory=dict)


def _poincare_crossings(state0, params: ModelParams, level: float,
                        t_span: float, rtol: float = _RTOL,
                        atol: float = _ATOL) -> np.ndarray:
    """States on upward crossings of Jz = level, located by solver events."""

    def event(t, y):
        return y[4] - level

    event.direction = 1.0
    y0 = state0.array if isinstance(state0, ClassicalState) else np.asarray(state0, float)
    sol = solve_ivp(_rhs(params), (0.0, float(t_span)), y0, method="DOP853",
                    rtol=rtol, atol=atol, events=[event])
    if not sol.success:
        raise RuntimeError(f"integration stalled: {sol.message}")
    return sol.y_events[0]


def _cluster_count(points: np.ndarray, eps: float) -> int:
    """Greedy cluster count with radius eps; -1 if a point fits no cluster
    yet opening one would exceed the caller's budget (handled outside)."""
    centers: list[np.ndarray] = []
    for pt in points:
        for c in centers:
            if np.linalg.norm(pt - c) < eps:
                break
        else:
            centers.append(pt)
    return len(centers)


def classify_attractor(state0, params: ModelParams,
                       protocol: ClassifyProtocol = ClassifyProtocol()) -> AttractorVerdict:
    """Long-time verdict: sink, limit cycle, chaotic set, or undetermined."""
    settled = integrate(state0, params, protocol.t_transient)
    grid = np.linspace(0.0, protocol.t_settle, max(64, int(protocol.t_settle)))
    orbit = integrate(settled.final, params, protocol.t_settle, t_eval=grid)

    late = orbit.states[3 * len(grid) // 4:]
    speeds = np.linalg.norm([flow(s, params) for s in late], axis=1)
    if speeds.max() < protocol.eps_fixed_point:
        return AttractorVerdict(
            kind="fixed_point", lyapunov_max=None,
            evidence={"late_speed": float(speeds.max()),
                      "eps_fixed_point": protocol.eps_fixed_point})

    lyap = largest_lyapunov(settled.final, params,
                            t_total=protocol.lyapunov_t_total,
                            t_renorm=protocol.lyapunov_t_renorm,
                            d0=protocol.lyapunov_d0,
                            t_transient=0.0, seed=protocol.seed)
    if lyap > protocol.chaos_threshold:
        return AttractorVerdict(
            kind="chaotic", lyapunov_max=lyap,
            evidence={"chaos_threshold": protocol.chaos_threshold})

    level = float(late[:, 4].mean())
    state = orbit.final
    n_crossings, n_clusters, settled_extra = 0, -1, 0.0
    for extension in protocol.cycle_transient_extensions:
        if extension > 0:
            state = integrate(state, params, extension).final
            settled_extra += extension
        crossings = _poincare_crossings(state, params, level,
                                        protocol.t_section)
        tail = crossings[crossings.shape[0] // 2:]
        n_crossings = int(tail.shape[0])
        if n_crossings < protocol.min_crossings:
            continue
        n_clusters = _cluster_count(tail, protocol.eps_cycle)
        if n_clusters <= protocol.max_cycle_points:
            return AttractorVerdict(
                kind="limit_cycle", lyapunov_max=lyap,
                evidence={"section_level": level,
                          "n_crossings": n_crossings,
                          "n_clusters": n_clusters,
                          "eps_cycle": protocol.eps_cycle,
                          "extra_transient": settled_extra})
    return AttractorVerdict(
        kind="undetermined", lyapunov_max=lyap,
        evidence={"n_crossings": n_crossings,
                  "n_clusters": n_clusters,
                  "section_level": level})


def critical_coupling_closed(delta: float, omega: float, omega0: float) -> float:
    """Normal-to-superradiant coupling of the closed system."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if omega <= 0 or omega0 <= 0:
        raise ValueError("mode frequencies must be positive")
    return np.sqrt(omega * omega0) / (1.0 + delta)


def critical_coupling_open(delta: float, omega: float, omega0: float,
                           kappa: float) -> float:
    """Critical coupling with cavity decay.

    Evaluated in the cancellation-free form gamma_c * sqrt(1 + 2 delta v /
    (1 + sqrt(1 - u))) with v = ((1+delta) kappa / (2 delta omega))^2 and
    u = (1-delta)^2 v, algebraically identical to the textbook expression
    but finite and smooth through delta = 1, where it reduces to
    (1/2) sqrt(omega0 (omega^2 + kappa^2) / omega).
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    gamma_closed = critical_coupling_closed(delta, omega, omega0)
    if kappa == 0.0:
        return gamma_closed
    if delta == 0.0:
        raise ValueError("kappa > 0 requires delta > 0 (no counterrotating "
                         "channel to balance the decay)")
    v = ((1.0 + delta) * kappa / (2.0 * delta * omega)) ** 2
    u = (1.0 - delta) ** 2 * v
    if u > 1.0:
        raise ValueError(
            f"out of domain: |1-delta^2| kappa = {abs(1 - delta**2) * kappa:g} "
            f"exceeds 2 delta omega = {2 * delta * omega:g}")
    return gamma_closed * np.sqrt(1.0 + 2.0 * delta * v / (1.0 + np.sqrt(1.0 - u)))
