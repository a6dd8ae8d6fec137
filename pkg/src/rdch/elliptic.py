"""Discrete Neumann Laplacian and the nonlinear relaxation solve for w given n.

The relaxed density w satisfies, cellwise on the grid,

    -sigma lap(w) + (sigma/delta) max(0, w)^gamma + w = n,

a monotone system with a symmetric positive definite Newton Jacobian. The
main solver is damped Newton; 1D linear systems go through a direct
tridiagonal solve, 2D ones through Jacobi-preconditioned conjugate
gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg.lapack import dgtsv

from ._stencil import laplacian_values
from .core import Field, ModelParams, pressure_values

__all__ = [
    "EllipticConfig",
    "NonConvergence",
    "neumann_laplacian",
    "solve_w",
    "compute_mu",
    "mu_from_potential",
    "DEFAULT_ELLIPTIC",
]


class NonConvergence(RuntimeError):
    """Raised when an iteration budget is exhausted; carries the final residual."""

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class EllipticConfig:
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    damping: float = 1.0
    linear_tol: float = 1e-12
    linear_max_iter: int = 20000

    def __post_init__(self):
        if self.newton_tol <= 0 or self.linear_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("need at least one Newton iteration")
        if not (0 < self.damping <= 1):
            raise ValueError("damping must lie in (0, 1]")


DEFAULT_ELLIPTIC = EllipticConfig()


def neumann_laplacian(f: Field) -> Field:
    return Field(f.grid, laplacian_values(f.values, f.grid.spacings))


def _stencil_degree(shape: tuple[int, ...], spacings: tuple[float, ...]) -> np.ndarray:
    """Diagonal of -lap with mirrored ghosts: interior cells see 2/h^2 per axis, boundary 1/h^2."""
    deg = np.zeros(shape)
    for axis, h in enumerate(spacings):
        d = np.full(shape[axis], 2.0 / h**2)
        d[0] = d[-1] = 1.0 / h**2
        deg += d.reshape([-1 if a == axis else 1 for a in range(len(shape))])
    return deg


def _lap1d_fast(v: np.ndarray, inv_h2: float) -> np.ndarray:
    """Arithmetic form of the 1D mirrored-ghost Laplacian.

    Same stencil as the flux form but without the telescoping layout; used
    inside Newton residuals where only the value matters, not exact
    cancellation of the cellwise sum.
    """
    out = np.empty_like(v)
    out[1:-1] = v[2:] - 2.0 * v[1:-1] + v[:-2]
    out[0] = v[1] - v[0]
    out[-1] = v[-2] - v[-1]
    out *= inv_h2
    return out


def _solve_tridiag(a_diag: np.ndarray, off: np.ndarray, boundary_deg: np.ndarray,
                   rhs: np.ndarray) -> np.ndarray:
    d = a_diag + boundary_deg
    _, _, _, x, info = dgtsv(off, d, off, rhs)
    if info != 0:
        raise NonConvergence(f"tridiagonal solve failed (LAPACK info={info})")
    return x


def _pcg(apply_op, b: np.ndarray, inv_diag: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    """Jacobi-preconditioned CG; raises if the operator shows nonpositive curvature."""
    x = np.zeros_like(b)
    r = b.copy()
    b_norm = float(np.sqrt(np.vdot(b, b).real))
    if b_norm == 0.0:
        return x
    z = inv_diag * r
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    for it in range(max_iter):
        Ap = apply_op(p)
        pAp = float(np.vdot(p, Ap).real)
        if pAp <= 0.0:
            raise NonConvergence("conjugate gradients met nonpositive curvature", pAp, it)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if float(np.sqrt(np.vdot(r, r).real)) <= tol * b_norm:
            return x
        z = inv_diag * r
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NonConvergence("conjugate gradients exhausted the iteration budget",
                         float(np.sqrt(np.vdot(r, r).real)), max_iter)


_TRIDIAG_CACHE: dict[tuple[int, float, float], tuple[np.ndarray, np.ndarray]] = {}


def _tridiag_workspace(size: int, sig: float, inv_h2: float) -> tuple[np.ndarray, np.ndarray]:
    key = (size, sig, inv_h2)
    entry = _TRIDIAG_CACHE.get(key)
    if entry is None:
        off = np.full(size - 1, -sig * inv_h2)
        boundary_deg = np.full(size, 2.0 * sig * inv_h2)
        boundary_deg[0] = boundary_deg[-1] = sig * inv_h2
        if len(_TRIDIAG_CACHE) > 64:
            _TRIDIAG_CACHE.clear()
        entry = _TRIDIAG_CACHE[key] = (off, boundary_deg)
    return entry


def _newton_w(n: np.ndarray, spacings: tuple[float, ...], params: ModelParams,
              cfg: EllipticConfig, w0: np.ndarray | None = None) -> tuple[np.ndarray, float, int]:
    """Damped Newton on the monotone system; returns (w, residual, iterations)."""
    sig, dlt, gam = params.sigma, params.delta, params.gamma
    coef = sig / dlt
    w = n.copy() if w0 is None else w0.copy()
    one_d = w.ndim == 1
    if one_d:
        h = spacings[0]
        inv_h2 = 1.0 / h**2

        def residual(u: np.ndarray, upos: np.ndarray) -> np.ndarray:
            return u + coef * upos**gam - n - sig * _lap1d_fast(u, inv_h2)

        off, boundary_deg = _tridiag_workspace(w.size, sig, inv_h2)
        deg = None
    else:

        def residual(u: np.ndarray, upos: np.ndarray) -> np.ndarray:
            return u + coef * upos**gam - n - sig * laplacian_values(u, spacings)

        deg = _stencil_degree(w.shape, spacings)
    wpos = np.maximum(w, 0.0)
    F = residual(w, wpos)
    res = float(np.max(np.abs(F)))
    for it in range(cfg.newton_max_iter):
        if res <= cfg.newton_tol:
            return w, res, it
        a_diag = 1.0 + coef * gam * wpos ** (gam - 1.0)
        if one_d:
            step = _solve_tridiag(a_diag, off, boundary_deg, -F)
        else:
            shape = w.shape

            def apply_op(x, _a=a_diag):
                xs = x.reshape(shape)
                return (_a * xs - sig * laplacian_values(xs, spacings)).ravel()

            inv_diag = 1.0 / (a_diag.ravel() + sig * deg.ravel())
            step = _pcg(apply_op, -F.ravel(), inv_diag, cfg.linear_tol,
                        cfg.linear_max_iter).reshape(shape)
        alpha = cfg.damping
        accepted = False
        for _ in range(40):
            trial = w + alpha * step
            tpos = np.maximum(trial, 0.0)
            Ft = residual(trial, tpos)
            rt = float(np.max(np.abs(Ft)))
            if np.isfinite(rt) and (rt <= (1.0 - 1e-4 * alpha) * res or rt <= cfg.newton_tol):
                w, wpos, F, res = trial, tpos, Ft, rt
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise NonConvergence("Newton line search stalled", res, it)
    if res <= cfg.newton_tol:
        return w, res, cfg.newton_max_iter
    raise NonConvergence("Newton iteration budget exhausted", res, cfg.newton_max_iter)


def solve_w(n: Field, params: ModelParams, cfg: EllipticConfig = DEFAULT_ELLIPTIC,
            w0: Field | None = None) -> Field:
    """Solve the relaxation equation for w; for sigma = 0 it degenerates to w = n."""
    if not params.is_relaxed:
        return n.copy()
    w, _, _ = _newton_w(n.values, n.grid.spacings, params, cfg,
                        None if w0 is None else w0.values)
    return Field(n.grid, w)


def elliptic_residual(n: Field, w: Field, params: ModelParams) -> float:
    """Max norm of -sigma lap(w) + (sigma/delta) max(0,w)^gamma + w - n."""
    if not params.is_relaxed:
        return float(np.max(np.abs(w.values - n.values)))
    F = (w.values + (params.sigma / params.delta) * pressure_values(w.values, params.gamma)
         - n.values - params.sigma * laplacian_values(w.values, w.grid.spacings))
    return float(np.max(np.abs(F)))


def compute_mu(n: Field, w: Field, params: ModelParams) -> Field:
    """Potential mu = (delta/sigma)(n - w); for sigma = 0, mu = max(0,n)^gamma - delta lap(n)."""
    if params.is_relaxed:
        vals = (params.delta / params.sigma) * (n.values - w.values)
    else:
        vals = (pressure_values(n.values, params.gamma)
                - params.delta * laplacian_values(n.values, n.grid.spacings))
    return Field(n.grid, vals)


def mu_from_potential(w: Field, params: ModelParams) -> Field:
    """Cross-check evaluation mu = max(0,w)^gamma - delta lap(w)."""
    vals = (pressure_values(w.values, params.gamma)
            - params.delta * laplacian_values(w.values, w.grid.spacings))
    return Field(w.grid, vals)
