"""Geodesic spray, nonlinear connection, Berwald/Chern coefficients, geodesics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .engine import PointJets, jet_values
from .jets import Jet
from .metricdef import MetricError, MetricSpec, eval_F_value


@dataclass
class SprayData:
    G: np.ndarray                 # spray coefficients G^i
    N: np.ndarray                 # N^i_j = dG^i/dy^j
    Gammas_berwald: np.ndarray    # G^i_{jk}
    B: np.ndarray                 # Berwald curvature B^i_{jkl}
    Gammas_chern: np.ndarray      # Gamma^i_{jk}


def spray_at(spec: MetricSpec, p, order: int = 6) -> SprayData:
    """Spray and connection coefficients at one point (or PointDir)."""
    x, y = _point(p)
    w = PointJets(spec, x, y, order=order)
    return SprayData(
        G=jet_values(w.G),
        N=jet_values(w.N),
        Gammas_berwald=jet_values(w.berwald_coeffs),
        B=jet_values(w.B),
        Gammas_chern=jet_values(w.chern_coeffs),
    )


def _point(p) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(p, "x"):
        return np.asarray(p.x, dtype=float), np.asarray(p.y, dtype=float)
    x, y = p
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _as_object_array(tensor) -> np.ndarray:
    if isinstance(tensor, Jet):
        arr = np.empty((), dtype=object)
        arr[()] = tensor
        return arr
    rows = [_as_object_array(t) for t in tensor]
    out = np.empty((len(rows),) + rows[0].shape, dtype=object)
    for i, row in enumerate(rows):
        if row.shape:
            out[i] = row
        else:
            out[i] = row[()]
    return out


def covariant_horizontal(w: PointJets, tensor, slot_types: Sequence[str]) -> np.ndarray:
    """T_{...|m} values for a jet tensor: delta/delta x plus Chern corrections.

    slot_types lists 'low' (covariant) or 'up' (contravariant) per index;
    the output carries one extra trailing axis for m.
    """
    T = _as_object_array(tensor)
    if T.ndim != len(slot_types):
        raise ValueError(f"tensor rank {T.ndim} does not match "
                         f"{len(slot_types)} slot types")
    n = w.n
    gamma = jet_values(w.chern_coeffs)
    values = np.vectorize(lambda j: j.value, otypes=[float])(T)
    out = np.zeros(T.shape + (n,))
    for idx in np.ndindex(T.shape if T.ndim else (1,)):
        key = idx if T.ndim else ()
        for m in range(n):
            val = w.hderiv(T[key], m).value
            for slot, variance in enumerate(slot_types):
                a = key[slot]
                swap = list(key)
                for i in range(n):
                    swap[slot] = i
                    if variance == "low":
                        val -= values[tuple(swap)] * gamma[i][a][m]
                    elif variance == "up":
                        val += values[tuple(swap)] * gamma[a][i][m]
                    else:
                        raise ValueError(f"slot type must be 'low' or 'up', "
                                         f"got {variance!r}")
            out[key + (m,)] = val
    return out


def horizontal_derivative(spec: MetricSpec, p, tensor_field: Callable,
                          slot_types: Sequence[str], order: int = 6,
                          vol=None) -> np.ndarray:
    """Covariant horizontal derivative of a tensor field given as jets.

    `tensor_field(workspace)` must return a (nested) structure of jets;
    the result is the float array T_{...|m} with a trailing m axis.
    """
    x, y = _point(p)
    w = PointJets(spec, x, y, order=order, vol=vol)
    return covariant_horizontal(w, tensor_field(w), slot_types)


def spray_direction(w: PointJets, hderivs: np.ndarray) -> np.ndarray:
    """Contract a trailing |m axis with y^m / F."""
    F = w.F.value
    return hderivs @ (w.y / F)


# ---------------------------------------------------------------------------
# Geodesic integration
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray          # (steps+1, n)
    y: np.ndarray
    F: np.ndarray
    exited: bool

    @property
    def F_drift(self) -> float:
        return float(np.abs(self.F - self.F[0]).max())


def _spray_values(spec: MetricSpec, x, y) -> np.ndarray:
    return jet_values(PointJets(spec, x, y, order=2).G)


def geodesic_integrate(spec: MetricSpec, x0, y0, steps: int,
                       dt: float) -> Trajectory:
    """Fixed-step RK4 for xdot = y, ydot = -2G(x, y); aborts at the domain edge."""
    x = np.asarray(x0, dtype=float)
    y = np.asarray(y0, dtype=float)
    ts = [0.0]
    xs = [x.copy()]
    ys = [y.copy()]
    Fs = [eval_F_value(spec, x, y)]
    exited = False

    def rhs(xv, yv):
        return yv, -2.0 * _spray_values(spec, xv, yv)

    for step in range(steps):
        try:
            k1x, k1y = rhs(x, y)
            k2x, k2y = rhs(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y)
            k3x, k3y = rhs(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y)
            k4x, k4y = rhs(x + dt * k3x, y + dt * k3y)
            x = x + dt * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0
            y = y + dt * (k1y + 2 * k2y + 2 * k3y + k4y) / 6.0
            F = eval_F_value(spec, x, y)
        except MetricError:
            exited = True
            break
        ts.append(dt * (step + 1))
        xs.append(x.copy())
        ys.append(y.copy())
        Fs.append(F)

    return Trajectory(t=np.array(ts), x=np.array(xs), y=np.array(ys),
                      F=np.array(Fs), exited=exited)
