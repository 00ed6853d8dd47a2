"""Zeroth pipeline stage: fundamental tensor, Cartan data, distortion, frames."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import PointJets, jet_values
from .jets import JetSpec
from .metricdef import MetricError, MetricSpec, VolumeDensity, eval_F

COND_LIMIT = 1e8  # reject samples where g is this ill-conditioned


class StrongConvexityError(MetricError):
    """The fundamental tensor failed to be (usably) positive definite."""


@dataclass(frozen=True)
class PointDir:
    """A chart point and a nonzero direction."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if np.all(self.y == 0.0):
            raise MetricError("direction must be nonzero")

    def rescaled(self, factor: float) -> "PointDir":
        return PointDir(self.x, self.y * factor)


def on_unit_sphere(spec: MetricSpec, p: PointDir) -> PointDir:
    """Rescale y so that F(x, y) = 1."""
    from .metricdef import eval_F_value

    F = eval_F_value(spec, p.x, p.y)
    return PointDir(p.x, p.y / F)


@dataclass
class Fundamentals:
    F: float
    g: np.ndarray
    g_inv: np.ndarray
    C: np.ndarray          # C_ijk = (1/4)[F^2]_{y^i y^j y^k}
    A: np.ndarray          # A_ijk = F C_ijk
    I: np.ndarray          # mean Cartan I_k = g^{ij} C_ijk
    tau: float
    dtau_dx: np.ndarray
    dtau_dy: np.ndarray


@dataclass
class Frame:
    """g-orthonormal frame at a point: e_n = y/F plus n-1 transverse vectors."""

    e_n: np.ndarray
    basis: np.ndarray       # shape (n-1, n); basis[a][i] = u^i_a
    metric_check: np.ndarray

    @property
    def gram_residual(self) -> float:
        return float(np.abs(self.metric_check - np.eye(len(self.e_n))).max())


def _check_g(g: np.ndarray) -> None:
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= 0.0:
        raise StrongConvexityError(
            f"fundamental tensor not positive definite (min eig {eig[0]:.3e})")
    if eig[-1] / eig[0] > COND_LIMIT:
        raise StrongConvexityError(
            f"fundamental tensor too ill-conditioned (cond {eig[-1]/eig[0]:.2e})")


def metric_tensor_at(spec: MetricSpec, x, y) -> tuple[float, np.ndarray]:
    """(F, g) values only; the light path used by the convexity guard."""
    w = PointJets(spec, x, y, order=2)
    return w.F.value, w.g_values


def fundamentals_at(spec: MetricSpec, vol: VolumeDensity, p: PointDir,
                    order: int = 6) -> Fundamentals:
    """Fundamental tensor, Cartan data, and distortion at one point."""
    w = PointJets(spec, p.x, p.y, order=order, vol=vol)
    return fundamentals_from_workspace(w)


def fundamentals_from_workspace(w: PointJets) -> Fundamentals:
    n = w.n
    g = w.g_values
    _check_g(g)
    F = w.F.value
    C = jet_values(w.cartan)
    g_inv = np.linalg.inv(g)
    I = np.einsum("ij,ijk->k", g_inv, C)
    xs = list(range(n))
    ys = list(range(n, 2 * n))
    return Fundamentals(
        F=F, g=g, g_inv=g_inv, C=C, A=F * C, I=I,
        tau=w.tau.value,
        dtau_dx=np.array(w.tau.gradient(xs)),
        dtau_dy=np.array(w.tau.gradient(ys)),
    )


def adapted_frame(f: Fundamentals, p: PointDir) -> Frame:
    """Deterministic g-orthonormal frame with e_n = y/F.

    The coordinate axis most aligned with y (in g) is dropped; the remaining
    axes are Gram-Schmidt orthonormalized against e_n in ascending index
    order.
    """
    n = len(p.y)
    g = f.g
    e_n = p.y / f.F
    gy = g @ p.y
    score = np.abs(gy) / np.sqrt(np.diag(g) * float(p.y @ gy))
    drop = int(np.argmax(score))

    vectors = [e_n]
    for axis in range(n):
        if axis == drop:
            continue
        v = np.zeros(n)
        v[axis] = 1.0
        for b in vectors:
            v = v - (b @ g @ v) * b
        norm2 = float(v @ g @ v)
        if norm2 <= 0.0:
            raise StrongConvexityError("degenerate Gram-Schmidt step")
        vectors.append(v / np.sqrt(norm2))

    basis = np.array(vectors[1:])
    full = np.vstack([basis, e_n[None, :]])
    metric_check = full @ g @ full.T
    return Frame(e_n=e_n, basis=basis, metric_check=metric_check)


_SCALAR_TAGS = ("tau", "S", "e", "K")


def scalar_jet(w: PointJets, tag: str):
    """Degree-0 scalar on SM as a jet, extended 0-homogeneously."""
    if tag == "tau":
        return w.tau
    if tag == "S":
        return w.S_scalar
    if tag == "e":
        return w.e_scalar
    if tag == "K":
        return w.K_scalar
    raise ValueError(f"unknown scalar tag {tag!r}; choices: {_SCALAR_TAGS}")


def vertical_derivative(spec: MetricSpec, vol: VolumeDensity, p: PointDir,
                        scalar: str, direction: int, order: int = 6,
                        sign: float | None = None) -> float:
    """Frame vertical derivative s*F*u^i_a * d(scalar)/dy^i at p on SM."""
    if sign is None:
        from .curvature import conventions

        sign = conventions(order).frame_sign
    p = on_unit_sphere(spec, p)
    w = PointJets(spec, p.x, p.y, order=order, vol=vol)
    fund = fundamentals_from_workspace(w)
    frame = adapted_frame(fund, p)
    grad = scalar_jet(w, scalar).gradient(list(range(w.n, 2 * w.n)))
    u = frame.basis[direction]
    return sign * fund.F * float(np.dot(u, grad))
