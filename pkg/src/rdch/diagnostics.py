"""Functionals, dissipation identities, and bound monitors for trajectories.

Everything here is a pure function of simulation states or of the scalar
streams a run records: the energy and entropy functionals, their discrete
dissipation identities, the complementarity defect of the stiff-pressure
limit, and the boundedness monitors used to flag runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dataclass_fields

import numpy as np

from ._stencil import face_lohi, laplacian_values
from .core import Field, ModelParams, StateBundle

__all__ = [
    "NegativeDensity",
    "DegenerateDensity",
    "DENSITY_FLOOR",
    "DiagnosticsRecord",
    "DIAGNOSTICS_COLUMNS",
    "DIAGNOSTICS_SCHEMA",
    "IdentitySeries",
    "BoundsReport",
    "energy",
    "entropy",
    "dissipation",
    "complementarity_residual",
    "energy_identity_residual",
    "entropy_identity_residual",
    "bounds_report",
    "continuous_dependence",
]

DENSITY_FLOOR = 1e-10
DIAGNOSTICS_SCHEMA = "rdch-diagnostics-v1"


class NegativeDensity(ValueError):
    """Entropy of a field with genuinely negative samples is undefined."""


class DegenerateDensity(ValueError):
    """The entropy identity degenerates where the density reaches the floor."""


def _grad_sq_quad(values: np.ndarray, spacings: tuple[float, ...], vol: float) -> float:
    """Quadrature of |grad f|^2 built from face differences.

    This is the Dirichlet form of the mirrored-ghost Laplacian, so its
    variation in f is exactly -2 lap(f) per unit volume; the energy built on
    it dissipates cleanly along the semi-discrete flow.
    """
    total = 0.0
    for axis, h in enumerate(spacings):
        d = np.diff(values, axis=axis) / h
        total += float(np.sum(d * d))
    return vol * total


def _energy_values(n: np.ndarray, w: np.ndarray, mu: np.ndarray,
                   spacings: tuple[float, ...], vol: float, params: ModelParams) -> float:
    bulk = vol * float(np.sum(np.maximum(w, 0.0) ** (params.gamma + 1.0))) / (params.gamma + 1.0)
    grad = 0.5 * params.delta * _grad_sq_quad(w, spacings, vol)
    relax = 0.0
    if params.sigma > 0.0:
        relax = 0.5 * (params.sigma / params.delta) * vol * float(np.sum(mu * mu))
    return bulk + grad + relax


def energy(state: StateBundle, params: ModelParams) -> float:
    """Free energy: pressure bulk term + interface term + relaxation term."""
    g = state.grid
    return _energy_values(state.n.values, state.w.values, state.mu.values,
                          g.spacings, g.cell_volume, params)


def _entropy_values(values: np.ndarray, vol: float) -> float:
    if float(values.min()) < -1e-12:
        raise NegativeDensity(f"min density {values.min():.3e} below -1e-12")
    v = np.maximum(values, 0.0)
    return vol * float(np.sum(np.where(v > 0.0, v * np.log(np.where(v > 0.0, v, 1.0)), 0.0)))


def entropy(n: Field) -> float:
    """Boltzmann entropy of the density with the 0 log 0 = 0 convention."""
    return _entropy_values(n.values, n.grid.cell_volume)


def _mobility_clip(n: np.ndarray, eps: float) -> np.ndarray:
    if eps == 0.0:
        return np.maximum(n, 0.0)
    return np.clip(n, eps, 1.0 / eps)


def _dissipation_values(n: np.ndarray, mu: np.ndarray, spacings: tuple[float, ...],
                        vol: float, eps: float, upwind: bool) -> float:
    """Quadrature of B(n) |grad mu|^2 with the same face mobility as the flux."""
    B = _mobility_clip(n, eps)
    total = 0.0
    for axis, h in enumerate(spacings):
        dmu = np.diff(mu, axis=axis) / h
        lo, hi = face_lohi(B, axis)
        Bf = np.where(dmu > 0.0, hi, lo) if upwind else 0.5 * (lo + hi)
        total += float(np.sum(Bf * dmu * dmu))
    return vol * total


def dissipation(state: StateBundle, params: ModelParams, eps: float = 0.0,
                upwind: bool = True) -> float:
    g = state.grid
    return _dissipation_values(state.n.values, state.mu.values, g.spacings,
                               g.cell_volume, eps, upwind)


def _entropy_bracket_values(w: np.ndarray, mu: np.ndarray, spacings: tuple[float, ...],
                            vol: float, params: ModelParams) -> float:
    """Dissipation bracket of the entropy identity: a sum of weighted squares."""
    lap_w = laplacian_values(w, spacings)
    total = params.delta * float(np.sum(lap_w * lap_w))
    grad_mu_sq = 0.0
    grad_w_weighted = 0.0
    for axis, h in enumerate(spacings):
        dmu = np.diff(mu, axis=axis) / h
        grad_mu_sq += float(np.sum(dmu * dmu))
        dw = np.diff(w, axis=axis) / h
        lo, hi = face_lohi(w, axis)
        w_face = np.maximum(0.5 * (lo + hi), 0.0)
        grad_w_weighted += float(np.sum(w_face ** (params.gamma - 1.0) * dw * dw))
    if params.sigma > 0.0:
        total += (params.sigma / params.delta) * grad_mu_sq
    total += params.gamma * grad_w_weighted
    return vol * total


def _growth_sources(n: np.ndarray, mu: np.ndarray, vol: float,
                    params: ModelParams) -> tuple[float, float]:
    """Energy source int n mu G(mu) and entropy source int n G(mu)(log n + 1)."""
    if params.growth.is_zero:
        return 0.0, 0.0
    G = params.growth(mu)
    s_energy = vol * float(np.sum(n * mu * G))
    if float(n.min()) > DENSITY_FLOOR:
        s_entropy = vol * float(np.sum(n * G * (np.log(n) + 1.0)))
    else:
        s_entropy = math.nan
    return s_energy, s_entropy


def identity_terms(n: np.ndarray, w: np.ndarray, mu: np.ndarray, grid,
                   params: ModelParams, eps: float, upwind: bool) -> tuple[float, ...]:
    """Per-state pieces of the two dissipation identities.

    Returns (E, Phi, D_energy, S_energy, D_entropy, S_entropy); the entropy
    pieces are NaN whenever the density touches the positivity floor.
    """
    vol = grid.cell_volume
    spacings = grid.spacings
    E = _energy_values(n, w, mu, spacings, vol, params)
    D_e = _dissipation_values(n, mu, spacings, vol, eps, upwind)
    s_e, s_phi = _growth_sources(n, mu, vol, params)
    if float(n.min()) > DENSITY_FLOOR:
        Phi = _entropy_values(n, vol)
        D_phi = _entropy_bracket_values(w, mu, spacings, vol, params)
    else:
        Phi = math.nan
        D_phi = math.nan
        s_phi = math.nan
    return E, Phi, D_e, s_e, D_phi, s_phi


@dataclass
class IdentitySeries:
    """Per-step scalars needed to test the energy and entropy identities."""

    t: np.ndarray
    dt: np.ndarray
    energy: np.ndarray
    entropy: np.ndarray
    energy_dissipation: np.ndarray
    energy_source: np.ndarray
    entropy_dissipation: np.ndarray
    entropy_source: np.ndarray
    n_min: np.ndarray

    def energy_residual(self) -> np.ndarray:
        dE = (self.energy[1:] - self.energy[:-1]) / self.dt
        return dE + self.energy_dissipation - self.energy_source

    def entropy_residual(self) -> np.ndarray:
        dS = (self.entropy[1:] - self.entropy[:-1]) / self.dt
        return dS + self.entropy_dissipation - self.entropy_source


def energy_identity_residual(traj) -> np.ndarray:
    """Per-step defect of dE/dt + int B(n)|grad mu|^2 - int n mu G(mu) = 0."""
    if traj.identity is None:
        raise ValueError("trajectory was run without identity tracking")
    return traj.identity.energy_residual()


def entropy_identity_residual(traj) -> np.ndarray:
    """Per-step defect of the entropy identity; densities must stay positive."""
    if traj.identity is None:
        raise ValueError("trajectory was run without identity tracking")
    nmin = float(np.min(traj.identity.n_min))
    if nmin <= DENSITY_FLOOR:
        raise DegenerateDensity(f"density reached {nmin:.3e}, identity degenerates")
    return traj.identity.entropy_residual()


def complementarity_residual(state: StateBundle) -> float:
    """Quadrature of |p (w - 1)|; vanishes in the stiff-pressure limit."""
    g = state.grid
    return g.cell_volume * float(np.sum(np.abs(state.p.values * (state.w.values - 1.0))))


def _pressure_limit(n_max: float, params: ModelParams) -> float:
    """Provable ceiling for max p implied by the relaxation solve at the maximum of w."""
    if params.sigma == 0.0:
        return max(n_max, 0.0) ** params.gamma
    return (params.delta / params.sigma) * max(n_max, 0.0)


@dataclass
class DiagnosticsRecord:
    """One row of per-step scalar diagnostics."""

    step: int
    t: float
    mass: float
    energy: float
    entropy: float
    dissipation: float
    growth_source: float
    pressure_energy: float
    grad_p_l1: float
    complementarity: float
    n_min: float
    n_max: float
    w_min: float
    w_max: float
    mu_min: float
    mu_max: float
    p_min: float
    p_max: float
    elliptic_residual: float
    energy_residual: float
    entropy_residual: float
    nonneg_ok: int
    mass_bound_ok: int
    pressure_bound_ok: int

    def as_row(self) -> list:
        return [getattr(self, f.name) for f in dataclass_fields(self)]


DIAGNOSTICS_COLUMNS = [f.name for f in dataclass_fields(DiagnosticsRecord)]


def make_record(step: int, t: float, n: np.ndarray, w: np.ndarray, mu: np.ndarray,
                p: np.ndarray, grid, params: ModelParams, eps: float, upwind: bool,
                elliptic_residual: float, mass0: float,
                energy_residual: float = math.nan,
                entropy_residual: float = math.nan) -> DiagnosticsRecord:
    vol = grid.cell_volume
    spacings = grid.spacings
    mass = vol * float(np.sum(n))
    n_min, n_max = float(n.min()), float(n.max())
    E = _energy_values(n, w, mu, spacings, vol, params)
    D = _dissipation_values(n, mu, spacings, vol, eps, upwind)
    s_e, _ = _growth_sources(n, mu, vol, params)
    ent = _entropy_values(n, vol) if n_min >= -1e-12 else math.nan
    p_energy = vol * float(np.sum(np.maximum(w, 0.0) ** (params.gamma + 1.0))) / (params.gamma + 1.0)
    grad_p = 0.0
    for axis, h in enumerate(spacings):
        grad_p += float(np.sum(np.abs(np.diff(p, axis=axis)))) / h
    grad_p *= vol
    compl = vol * float(np.sum(np.abs(p * (w - 1.0))))
    p_max = float(p.max())
    sup_g = params.growth.sup_abs()
    mass_cap = mass0 * math.exp(sup_g * t) * (1.0 + 1e-10) + 1e-300
    return DiagnosticsRecord(
        step=step, t=t, mass=mass, energy=E, entropy=ent, dissipation=D,
        growth_source=s_e, pressure_energy=p_energy, grad_p_l1=grad_p,
        complementarity=compl, n_min=n_min, n_max=n_max,
        w_min=float(w.min()), w_max=float(w.max()),
        mu_min=float(mu.min()), mu_max=float(mu.max()),
        p_min=float(p.min()), p_max=p_max,
        elliptic_residual=elliptic_residual,
        energy_residual=energy_residual, entropy_residual=entropy_residual,
        nonneg_ok=int(n_min >= -1e-12),
        mass_bound_ok=int(mass <= mass_cap),
        pressure_bound_ok=int(p_max <= _pressure_limit(n_max, params) + 1e-8),
    )


@dataclass
class BoundsReport:
    """Time-maxima and time-integrals of the quantities the estimates control."""

    sup_n_inf: float
    sup_p_inf: float
    pressure_limit: float
    cumulative_dissipation: float
    sup_pressure_energy: float
    sup_grad_p_l1: float
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def bounds_report(traj, params: ModelParams) -> BoundsReport:
    """Scan a recorded trajectory for the uniform bounds the estimates assert."""
    recs = traj.records
    if not recs:
        raise ValueError("trajectory has no records")
    ts = np.array([r.t for r in recs])
    sup_n = max(r.n_max for r in recs)
    sup_p = max(r.p_max for r in recs)
    diss = np.array([r.dissipation for r in recs])
    cumulative = float(np.trapezoid(diss, ts)) if len(recs) > 1 else 0.0
    limit = _pressure_limit(sup_n, params)
    violations = []
    if not all(r.nonneg_ok for r in recs):
        violations.append("nonnegativity")
    if not all(r.mass_bound_ok for r in recs):
        violations.append("mass_bound")
    if not all(r.pressure_bound_ok for r in recs):
        violations.append("pressure_bound")
    if not math.isfinite(cumulative):
        violations.append("dissipation_integral")
    return BoundsReport(
        sup_n_inf=sup_n,
        sup_p_inf=sup_p,
        pressure_limit=limit,
        cumulative_dissipation=cumulative,
        sup_pressure_energy=max(r.pressure_energy for r in recs),
        sup_grad_p_l1=max(r.grad_p_l1 for r in recs),
        violations=violations,
    )


def continuous_dependence(traj_a, traj_b) -> np.ndarray:
    """L2 distance series between two runs recorded on the same time grid.

    A numerical stand-in for continuous dependence on the data: both runs
    must store density fields at records and share grid and record times.
    """
    if traj_a.record_fields is None or traj_b.record_fields is None:
        raise ValueError("both trajectories must be run with store_fields=True")
    if traj_a.grid != traj_b.grid:
        raise ValueError("trajectories live on different grids")
    ta, tb = traj_a.record_times, traj_b.record_times
    if len(ta) != len(tb) or not np.allclose(ta, tb, rtol=0, atol=1e-12):
        raise ValueError("record times differ; run both with the same fixed dt policy")
    vol = traj_a.grid.cell_volume
    out = np.empty(len(ta))
    for k, (na, nb) in enumerate(zip(traj_a.record_fields, traj_b.record_fields)):
        d = na - nb
        out[k] = math.sqrt(vol * float(np.sum(d * d)))
    return out
