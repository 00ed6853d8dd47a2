"""Shared jet workspace: every tensor of the pipeline at one (x, y).

A :class:`PointJets` lazily evaluates the metric and its derived tensors as
jets at a base point (or a batch of base points), tracking truncation
orders automatically: differentiating drops one order, so a tensor built
from k derivatives of F^2 is valid to ``order - k``.  All heavy quantities
are cached per instance; instances are cheap to create and immutable in
use.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import jets as jt
from .jets import Jet, JetSpec
from .metricdef import MetricError, MetricSpec, VolumeDensity, density, eval_F

SIGMA_ORDER = 3  # x-order of the volume density needed by any identity (<= 2) + 1


def jet_values(tensor) -> np.ndarray:
    """Recursively extract constant terms from nested lists of jets."""
    if isinstance(tensor, Jet):
        return np.asarray(tensor.value)
    return np.array([jet_values(t) for t in tensor])


def jet_det(m: list) -> Jet:
    n = len(m)
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    raise MetricError("jet determinants implemented for n in {2, 3}")


def jet_inv(m: list) -> list:
    n = len(m)
    det = jet_det(m)
    inv_det = det.reciprocal()
    if n == 2:
        return [[m[1][1] * inv_det, -m[0][1] * inv_det],
                [-m[1][0] * inv_det, m[0][0] * inv_det]]
    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != i]
            c = [k for k in range(3) if k != j]
            minor = (m[r[0]][c[0]] * m[r[1]][c[1]]
                     - m[r[0]][c[1]] * m[r[1]][c[0]])
            cof[j][i] = minor * ((-1.0) ** (i + j)) * inv_det
    return cof


class PointJets:
    """All jet-valued tensors of one metric at one evaluation point."""

    def __init__(self, metric: MetricSpec, x, y, order: int = 6,
                 vol: VolumeDensity | None = None):
        self.metric = metric
        self.n = metric.dim
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.order = order
        self.vol = vol
        self.spec = JetSpec(2 * self.n, order)

    # -- coordinates and the metric ----------------------------------------

    @cached_property
    def xjets(self) -> list[Jet]:
        return [Jet.variable(i, self.x[i], self.spec) for i in range(self.n)]

    @cached_property
    def yjets(self) -> list[Jet]:
        return [Jet.variable(self.n + i, self.y[i], self.spec)
                for i in range(self.n)]

    @cached_property
    def F(self) -> Jet:
        return eval_F(self.metric, self.x, self.y, self.spec)

    @cached_property
    def F2(self) -> Jet:
        return self.F * self.F

    def _dx(self, jet: Jet, i: int) -> Jet:
        return jet.partial(i)

    def _dy(self, jet: Jet, i: int) -> Jet:
        return jet.partial(self.n + i)

    # -- fundamental tensor and Cartan data ---------------------------------

    @cached_property
    def g(self) -> list:
        dy = [self._dy(self.F2, i) for i in range(self.n)]
        return [[self._dy(dy[i], j) * 0.5 for j in range(self.n)]
                for i in range(self.n)]

    @cached_property
    def g_values(self) -> np.ndarray:
        return jet_values(self.g)

    @cached_property
    def detg(self) -> Jet:
        return jet_det(self.g)

    @cached_property
    def ginv(self) -> list:
        return jet_inv(self.g)

    @cached_property
    def cartan(self) -> list:
        """C_ijk = (1/4) [F^2]_{y^i y^j y^k}."""
        return [[[self._dy(self.g[i][j], k) * 0.5 for k in range(self.n)]
                 for j in range(self.n)] for i in range(self.n)]

    @cached_property
    def mean_cartan(self) -> list:
        """I_k = g^{ij} C_{ijk} as jets."""
        n = self.n
        out = []
        for k in range(n):
            total = None
            for i in range(n):
                for j in range(n):
                    term = self.ginv[i][j] * self.cartan[i][j][k]
                    total = term if total is None else total + term
            out.append(total)
        return out

    # -- distortion ----------------------------------------------------------

    @cached_property
    def sigma(self) -> Jet:
        if self.vol is None:
            raise MetricError("this quantity needs a volume density")
        return density(self.vol, self.metric, self.x,
                       JetSpec(2 * self.n, min(self.order, SIGMA_ORDER)))

    @cached_property
    def tau(self) -> Jet:
        return jt.log(self.detg) * 0.5 - jt.log(self.sigma)

    # -- spray and connections ----------------------------------------------

    @cached_property
    def G(self) -> list:
        """Spray coefficients G^i = (1/4) g^{il} (y^k [F^2]_{x^k y^l} - [F^2]_{x^l})."""
        n = self.n
        dF2x = [self._dx(self.F2, l) for l in range(n)]
        rhs = []
        for l in range(n):
            total = None
            for k in range(n):
                term = self.yjets[k] * self._dy(dF2x[k], l)
                total = term if total is None else total + term
            rhs.append(total - dF2x[l])
        out = []
        for i in range(n):
            total = None
            for l in range(n):
                term = self.ginv[i][l] * rhs[l]
                total = term if total is None else total + term
            out.append(total * 0.25)
        return out

    @cached_property
    def N(self) -> list:
        """Nonlinear connection N^i_j = dG^i/dy^j."""
        return [[self._dy(self.G[i], j) for j in range(self.n)]
                for i in range(self.n)]

    @cached_property
    def berwald_coeffs(self) -> list:
        """G^i_{jk} = dN^i_j/dy^k."""
        return [[[self._dy(self.N[i][j], k) for k in range(self.n)]
                 for j in range(self.n)] for i in range(self.n)]

    @cached_property
    def B(self) -> list:
        """Berwald curvature B^i_{jkl} = dG^i_{jk}/dy^l."""
        return [[[[self._dy(self.berwald_coeffs[i][j][k], l)
                   for l in range(self.n)] for k in range(self.n)]
                 for j in range(self.n)] for i in range(self.n)]

    def hderiv(self, jet: Jet, m: int) -> Jet:
        """delta/delta x^m = d/dx^m - N^k_m d/dy^k."""
        out = self._dx(jet, m)
        for k in range(self.n):
            out = out - self.N[k][m] * self._dy(jet, k)
        return out

    @cached_property
    def chern_coeffs(self) -> list:
        """Gamma^i_{jk} from delta-derivatives of g."""
        n = self.n
        dg = [[[self.hderiv(self.g[a][b], c) for c in range(n)]
               for b in range(n)] for a in range(n)]
        out = []
        for i in range(n):
            plane = []
            for j in range(n):
                row = []
                for k in range(n):
                    total = None
                    for l in range(n):
                        term = self.ginv[i][l] * (dg[l][j][k] + dg[l][k][j]
                                                  - dg[j][k][l])
                        total = term if total is None else total + term
                    row.append(total * 0.5)
                plane.append(row)
            out.append(plane)
        return out

    # -- distortion-route S-curvature ----------------------------------------

    @cached_property
    def S_big(self) -> Jet:
        """The 1-homogeneous S-curvature: spray derivative of the distortion."""
        total = None
        for k in range(self.n):
            term = self.yjets[k] * self._dx(self.tau, k)
            total = term if total is None else total + term
        for i in range(self.n):
            total = total - 2.0 * self.G[i] * self._dy(self.tau, i)
        return total

    @cached_property
    def S_scalar(self) -> Jet:
        """S = S_big / F, the degree-0 S-curvature."""
        return self.S_big / self.F

    # -- curvature quantities -------------------------------------------------

    @cached_property
    def E(self) -> list:
        """Mean Berwald curvature E_{jk} = (1/2) B^m_{jkm}."""
        n = self.n
        out = []
        for j in range(n):
            row = []
            for k in range(n):
                total = None
                for m in range(n):
                    term = self.B[m][j][k][m]
                    total = term if total is None else total + term
                row.append(total * 0.5)
            out.append(row)
        return out

    @cached_property
    def e_scalar(self) -> Jet:
        """Berwald scalar curvature: 2F g^{jk} E_{jk} (frame normalization)."""
        n = self.n
        total = None
        for j in range(n):
            for k in range(n):
                term = self.ginv[j][k] * self.E[j][k]
                total = term if total is None else total + term
        return 2.0 * self.F * total

    @cached_property
    def y_low(self) -> list:
        """y_m = g_{mj} y^j."""
        out = []
        for m in range(self.n):
            total = None
            for j in range(self.n):
                term = self.g[m][j] * self.yjets[j]
                total = term if total is None else total + term
            out.append(total)
        return out

    @cached_property
    def L(self) -> list:
        """Landsberg curvature L_{jkl} = -(1/2) y_m B^m_{jkl}."""
        n = self.n
        out = []
        for j in range(n):
            plane = []
            for k in range(n):
                row = []
                for l in range(n):
                    total = None
                    for m in range(n):
                        term = self.y_low[m] * self.B[m][j][k][l]
                        total = term if total is None else total + term
                    row.append(total * (-0.5))
                plane.append(row)
            out.append(plane)
        return out

    @cached_property
    def J(self) -> list:
        """Mean Landsberg J_k = g^{jl} L_{jlk}."""
        n = self.n
        out = []
        for k in range(n):
            total = None
            for j in range(n):
                for l in range(n):
                    term = self.ginv[j][l] * self.L[j][l][k]
                    total = term if total is None else total + term
            out.append(total)
        return out

    @cached_property
    def Rspray(self) -> list:
        """Spray curvature R^i_k (Jacobi-operator convention)."""
        n = self.n
        dGx = [[self._dx(self.G[i], j) for j in range(n)] for i in range(n)]
        out = []
        for i in range(n):
            row = []
            for k in range(n):
                total = 2.0 * dGx[i][k]
                for j in range(n):
                    total = total - self.yjets[j] * self._dy(dGx[i][j], k)
                    total = total + 2.0 * self.G[j] * self._dy(self.N[i][j], k)
                    total = total - self.N[i][j] * self.N[j][k]
                row.append(total)
            out.append(row)
        return out

    @cached_property
    def ricci(self) -> Jet:
        total = None
        for m in range(self.n):
            term = self.Rspray[m][m]
            total = term if total is None else total + term
        return total

    @cached_property
    def K_scalar(self) -> Jet:
        """Ricci / ((n - 1) F^2): equals the flag curvature when it is scalar."""
        return self.ricci / ((self.n - 1.0) * self.F2)

    def hh_curvature(self, coeffs: list) -> list:
        """X^i_{jkl} = delta_l Lambda^i_{jk} - delta_k Lambda^i_{jl} + [Lambda, Lambda].

        Raw (unoriented) hh-curvature of a connection sharing the nonlinear
        connection N; the orientation sign is calibrated against the spray
        curvature elsewhere.
        """
        n = self.n
        d = [[[[self.hderiv(coeffs[i][j][k], l) for l in range(n)]
               for k in range(n)] for j in range(n)] for i in range(n)]
        out = []
        for i in range(n):
            cube = []
            for j in range(n):
                plane = []
                for k in range(n):
                    row = []
                    for l in range(n):
                        total = d[i][j][k][l] - d[i][j][l][k]
                        for m in range(n):
                            total = total + coeffs[m][j][k] * coeffs[i][m][l]
                            total = total - coeffs[m][j][l] * coeffs[i][m][k]
                        row.append(total)
                    plane.append(row)
                cube.append(plane)
            out.append(cube)
        return out

    @cached_property
    def hh_chern_raw(self) -> list:
        return self.hh_curvature(self.chern_coeffs)

    @cached_property
    def hh_berwald_raw(self) -> list:
        return self.hh_curvature(self.berwald_coeffs)
