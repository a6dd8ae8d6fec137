"""Face-based stencil primitives on cell-centered arrays with zero-flux boundaries."""

from __future__ import annotations

import numpy as np


def axis_slice(ndim: int, axis: int, s) -> tuple:
    idx = [slice(None)] * ndim
    idx[axis] = s
    return tuple(idx)


def div_faces(flux: np.ndarray, axis: int, h: float, out: np.ndarray) -> np.ndarray:
    """Accumulate the divergence of interior-face fluxes along one axis into `out`.

    Boundary faces carry zero flux, so the cellwise sum of the accumulated
    divergence telescopes to zero exactly in floating point arithmetic only up
    to per-cell rounding; the face values themselves cancel pairwise.
    """
    nd = out.ndim
    out[axis_slice(nd, axis, 0)] += flux[axis_slice(nd, axis, 0)] / h
    out[axis_slice(nd, axis, slice(1, -1))] += np.diff(flux, axis=axis) / h
    out[axis_slice(nd, axis, -1)] -= flux[axis_slice(nd, axis, -1)] / h
    return out


def laplacian_values(values: np.ndarray, spacings: tuple[float, ...]) -> np.ndarray:
    """3-point (1D) / 5-point (2D) Laplacian with mirrored ghost cells.

    Written in flux form: interior face gradients divided back by h, boundary
    faces zero. Constants are annihilated and the discrete divergence theorem
    holds.
    """
    out = np.zeros_like(values)
    for axis, h in enumerate(spacings):
        grad = np.diff(values, axis=axis) / h
        div_faces(grad, axis, h, out)
    return out


def face_lohi(values: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Views of the low/high cell values adjacent to each interior face."""
    nd = values.ndim
    lo = values[axis_slice(nd, axis, slice(None, -1))]
    hi = values[axis_slice(nd, axis, slice(1, None))]
    return lo, hi
