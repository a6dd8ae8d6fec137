import json
import os

import numpy as np
import pytest

os.environ.setdefault("MPLBACKEND", "Agg")

DIAG_COLUMNS = [
    "step", "t", "mass", "energy", "entropy", "dissipation", "growth_source",
    "pressure_energy", "grad_p_l1", "complementarity", "n_min", "n_max",
    "w_min", "w_max", "mu_min", "mu_max", "p_min", "p_max",
    "elliptic_residual", "energy_residual", "entropy_residual",
    "nonneg_ok", "mass_bound_ok", "pressure_bound_ok",
]


def write_diagnostics(path, rows=8, energy=None):
    t = np.linspace(0.0, 1.0, rows)
    energy = np.exp(-t) if energy is None else np.asarray(energy)
    table = {name: np.zeros(rows) for name in DIAG_COLUMNS}
    table["step"] = np.arange(rows)
    table["t"] = t
    table["mass"] = np.full(rows, 0.5)
    table["energy"] = energy
    table["entropy"] = -0.1 * np.ones(rows)
    table["complementarity"] = 0.01 * np.exp(-2 * t)
    with open(path, "w") as f:
        f.write(",".join(DIAG_COLUMNS) + "\n")
        for i in range(rows):
            f.write(",".join(format(float(table[c][i]), ".17g")
                             for c in DIAG_COLUMNS) + "\n")
    return table


def write_snapshot_1d(path, cells=32, shift=0.0):
    x = (np.arange(cells) + 0.5) / cells
    n = 0.5 + 0.3 * np.cos(np.pi * x) + shift
    w = 0.9 * n
    mu = n - w
    p = np.maximum(w, 0.0) ** 2
    with open(path, "w") as f:
        f.write("x,n,w,mu,p\n")
        for row in zip(x, n, w, mu, p):
            f.write(",".join(format(v, ".17g") for v in row) + "\n")
    return {"x": x, "n": n, "w": w, "mu": mu, "p": p}


def write_snapshot_2d(path, nx=8, ny=6):
    xs = (np.arange(nx) + 0.5) / nx
    ys = (np.arange(ny) + 0.5) / ny
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    n = 0.5 + 0.2 * np.cos(np.pi * X) * np.cos(np.pi * Y)
    w = 0.9 * n
    mu = n - w
    p = w**2
    with open(path, "w") as f:
        f.write("x,y,n,w,mu,p\n")
        for row in zip(X.ravel(), Y.ravel(), n.ravel(), w.ravel(),
                       mu.ravel(), p.ravel()):
            f.write(",".join(format(v, ".17g") for v in row) + "\n")


def write_sweep_report(path, values, metrics):
    path.write_text(json.dumps({
        "schema": "rdch-report-v1",
        "parameter": "gamma",
        "values": list(values),
        "metrics": metrics,
        "ratios": {},
        "flags": [],
    }))


@pytest.fixture
def run_dir(tmp_path):
    write_diagnostics(tmp_path / "diagnostics.csv")
    write_snapshot_1d(tmp_path / "snapshot_0000.csv")
    return tmp_path
