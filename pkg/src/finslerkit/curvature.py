"""Curvature tower: S-curvature, mean Berwald/Berwald-scalar curvature,
Landsberg data, spray/flag curvature, Chern and Berwald hh-curvatures, and
the frame identity terms.

Sign conventions that the defining formulas leave open (the vertical frame
sign, the Landsberg correction sign between the two connections, and the
hh-curvature orientation) are measured once on a non-Berwald calibration
metric and frozen for the process; every report carries the frozen values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .engine import PointJets, jet_values
from .fundamentals import (Frame, PointDir, adapted_frame,
                           fundamentals_from_workspace, on_unit_sphere)
from .metricdef import (MetricError, MetricSpec, VolumeDensity,
                        builtin_metric)


@dataclass(frozen=True)
class Conventions:
    """Frozen sign choices; see module docstring."""

    frame_sign: float       # s in e_abar = s * F * u^i_a d/dy^i
    landsberg_sign: float   # kappa in G^i_jk - Gamma^i_jk = kappa L^i_jk
    curvature_sign: float   # orients hh-curvature so y^j X^i_jkl y^l = +R^i_k

    def as_dict(self) -> dict:
        return {"s": self.frame_sign, "kappa": self.landsberg_sign,
                "curvature_sign": self.curvature_sign}


# ---------------------------------------------------------------------------
# Individual curvature operations
# ---------------------------------------------------------------------------

def s_curvature(spec: MetricSpec, vol: VolumeDensity, p: PointDir,
                route: str = "distortion", order: int = 6) -> float:
    """The 1-homogeneous S-curvature by either of two independent routes."""
    w = PointJets(spec, p.x, p.y, order=order, vol=vol)
    if route == "distortion":
        return float(w.S_big.value)
    if route == "divergence":
        div = 0.0
        for m in range(w.n):
            div += w.N[m][m].value
        sigma = w.sigma
        sv = sigma.value
        for m in range(w.n):
            div -= p.y[m] * sigma.partial(m).value / sv
        return float(div)
    raise ValueError(f"unknown S-curvature route {route!r}")


def e_and_E(spec: MetricSpec, vol: VolumeDensity | None, p: PointDir,
            order: int = 6) -> tuple[np.ndarray, float]:
    """Mean Berwald curvature E_jk = (1/2) B^m_jkm and its scalar trace.

    The Berwald-trace route does not consult the volume density; `vol` is
    accepted for pipeline uniformity.
    """
    w = PointJets(spec, p.x, p.y, order=order, vol=vol)
    return jet_values(w.E), float(w.e_scalar.value)


def landsberg(spec: MetricSpec, p: PointDir,
              order: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Landsberg curvature L_jkl = -(1/2) y_m B^m_jkl and mean J_k."""
    w = PointJets(spec, p.x, p.y, order=order)
    return jet_values(w.L), jet_values(w.J)


@dataclass
class RiemannFlag:
    Rspray: np.ndarray          # R^i_k
    R_low: np.ndarray           # R_ik = g_ij R^j_k
    Ricci: float
    F: float
    g: np.ndarray
    y: np.ndarray
    K_scalar: float             # Ricci / ((n-1) F^2)
    K_value: float | None = None

    def K(self, V) -> float:
        """Flag curvature with flagpole y and transverse V."""
        V = np.asarray(V, dtype=float)
        gy = self.g @ self.y
        h = float(V @ self.g @ V) - float(gy @ V) ** 2 / self.F**2
        if h <= 1e-14 * float(V @ self.g @ V):
            raise MetricError("flag degenerate: V is parallel to y")
        return float(V @ self.R_low @ V) / (self.F**2 * h)


def riemann_flag(spec: MetricSpec, p: PointDir, V=None,
                 order: int = 6) -> RiemannFlag:
    """Spray curvature, Ricci trace, and the flag-curvature evaluator."""
    w = PointJets(spec, p.x, p.y, order=order)
    R = jet_values(w.Rspray)
    g = w.g_values
    out = RiemannFlag(
        Rspray=R, R_low=g @ R, Ricci=float(w.ricci.value), F=w.F.value,
        g=g, y=w.y, K_scalar=float(w.K_scalar.value))
    if V is not None:
        out.K_value = out.K(V)
    return out


def scalar_flag_spread(spec: MetricSpec, p: PointDir, num_flags: int = 64,
                       order: int = 4) -> tuple[float, float]:
    """(mean K, spread of K) over deterministic random transverse flags."""
    rf = riemann_flag(spec, p, order=order)
    rng = np.random.default_rng(2024)
    n = len(p.y)
    values = []
    while len(values) < num_flags:
        V = rng.standard_normal(n)
        gy = rf.g @ rf.y
        h = float(V @ rf.g @ V) - float(gy @ V) ** 2 / rf.F**2
        if h < 1e-8 * float(V @ rf.g @ V):
            continue
        values.append(rf.K(V))
    values = np.array(values)
    return float(values.mean()), float(values.max() - values.min())


@dataclass
class ChernBerwaldHH:
    R_chern: np.ndarray        # R^i_jkl, oriented so y^j R^i_jkl y^l = R^i_k
    R_berwald: np.ndarray
    trR: np.ndarray            # R^m_mkl (antisymmetric)
    trR_berwald: np.ndarray
    Sigma_bar: np.ndarray      # 2 (trR_berwald - trR)
    orientation: float
    spray_match_residual: float


def chern_berwald_hh(spec: MetricSpec, p: PointDir,
                     order: int = 6) -> ChernBerwaldHH:
    """hh-curvature tensors of both connections, traces, and mean stretch."""
    if order < 6:
        raise MetricError("hh-curvatures need jet order >= 6")
    w = PointJets(spec, p.x, p.y, order=order)
    return _hh_from_workspace(w)


def _hh_from_workspace(w: PointJets) -> ChernBerwaldHH:
    Xc = jet_values(w.hh_chern_raw)
    Xb = jet_values(w.hh_berwald_raw)
    R = jet_values(w.Rspray)
    eps, resid = _orient_against_spray(Xc, Xb, R, w.y)
    Rc = eps * Xc
    Rb = eps * Xb
    trR = np.einsum("mmkl->kl", Rc)
    trRb = np.einsum("mmkl->kl", Rb)
    return ChernBerwaldHH(R_chern=Rc, R_berwald=Rb, trR=trR,
                          trR_berwald=trRb, Sigma_bar=2.0 * (trRb - trR),
                          orientation=eps, spray_match_residual=resid)


def _orient_against_spray(Xc, Xb, R, y) -> tuple[float, float]:
    """Pick the orientation making y^j X^i_jkl y^l reproduce +R^i_k.

    Both connections must agree; for Berwald-type metrics (everything
    flat) the orientation defaults to the process-wide frozen value.
    """
    scale = float(np.abs(R).max())
    if scale < 1e-12:
        return conventions().curvature_sign, 0.0
    rc = np.einsum("j,ijkl,l->ik", y, Xc, y)
    rb = np.einsum("j,ijkl,l->ik", y, Xb, y)
    resid_plus = max(np.abs(rc - R).max(), np.abs(rb - R).max())
    resid_minus = max(np.abs(-rc - R).max(), np.abs(-rb - R).max())
    if resid_plus <= resid_minus:
        return 1.0, float(resid_plus / (1.0 + scale))
    return -1.0, float(resid_minus / (1.0 + scale))


# ---------------------------------------------------------------------------
# Convention calibration
# ---------------------------------------------------------------------------

_CALIBRATION_POINTS = (
    (np.array([0.25, 0.40]), np.array([0.30, 1.10])),
    (np.array([-0.30, 0.55]), np.array([1.00, -0.40])),
)


@lru_cache(maxsize=None)
def conventions(order: int = 6) -> Conventions:
    """Measure and freeze the open sign conventions on a non-Berwald metric."""
    metric = builtin_metric("randers-generic")
    vol = VolumeDensity.busemann_hausdorff(512)

    kappa = _calibrate_kappa(metric, order)
    curvature_sign = _calibrate_orientation(metric, order)
    frame_sign = _calibrate_frame_sign(metric, vol, order, kappa,
                                       curvature_sign)
    return Conventions(frame_sign=frame_sign, landsberg_sign=kappa,
                       curvature_sign=curvature_sign)


def _calibrate_kappa(metric: MetricSpec, order: int) -> float:
    """Natural-coordinate shadow of the Berwald = Chern + Landsberg relation."""
    residuals = {1.0: 0.0, -1.0: 0.0}
    for x, y in _CALIBRATION_POINTS:
        w = PointJets(metric, x, y, order=order)
        diff = jet_values(w.berwald_coeffs) - jet_values(w.chern_coeffs)
        L_up = np.einsum("im,mjk->ijk", np.linalg.inv(w.g_values),
                         jet_values(w.L))
        scale = 1.0 + np.abs(L_up).max()
        for sign in residuals:
            residuals[sign] = max(residuals[sign],
                                  np.abs(diff - sign * L_up).max() / scale)
    return _unique_sign(residuals, "Berwald-Chern Landsberg correction")


def _calibrate_orientation(metric: MetricSpec, order: int) -> float:
    residuals = {1.0: 0.0, -1.0: 0.0}
    for x, y in _CALIBRATION_POINTS:
        w = PointJets(metric, x, y, order=order)
        R = jet_values(w.Rspray)
        contraction = np.einsum("j,ijkl,l->ik", y, jet_values(w.hh_chern_raw), y)
        contraction_b = np.einsum("j,ijkl,l->ik", y,
                                  jet_values(w.hh_berwald_raw), y)
        scale = 1.0 + np.abs(R).max()
        for sign in residuals:
            residuals[sign] = max(
                residuals[sign],
                np.abs(sign * contraction - R).max() / scale,
                np.abs(sign * contraction_b - R).max() / scale)
    return _unique_sign(residuals, "hh-curvature orientation")


def _calibrate_frame_sign(metric: MetricSpec, vol: VolumeDensity, order: int,
                          kappa: float, curvature_sign: float) -> float:
    """Fix s by requiring S_,mu + tau_|mu - J_mu = 0 at jet precision."""
    residuals = {-1.0: 0.0, 1.0: 0.0}
    for x, y in _CALIBRATION_POINTS:
        p = on_unit_sphere(metric, PointDir(x, y))
        w = PointJets(metric, p.x, p.y, order=order, vol=vol)
        fund = fundamentals_from_workspace(w)
        frame = adapted_frame(fund, p)
        for sign in residuals:
            conv = Conventions(sign, kappa, curvature_sign)
            terms = _frame_terms(w, frame, conv, want_K=False)
            resid = np.abs(terms.S_vert + terms.tau_h - terms.J_frame).max()
            residuals[sign] = max(residuals[sign], float(resid))
    return _unique_sign(residuals, "vertical frame sign", start=-1.0)


def _unique_sign(residuals: dict, label: str, start: float = 1.0) -> float:
    ordered = sorted(residuals, key=lambda s: (residuals[s], -s * start))
    winner, loser = ordered[0], ordered[-1]
    if residuals[winner] > 1e-6:
        raise MetricError(f"{label}: no sign choice fits "
                          f"(best residual {residuals[winner]:.3e})")
    if residuals[loser] < 10 * residuals[winner] + 1e-9:
        raise MetricError(f"{label}: sign choice not unique "
                          f"({residuals})")
    return winner


# ---------------------------------------------------------------------------
# Frame identity terms
# ---------------------------------------------------------------------------

@dataclass
class FrameTerms:
    """Per-frame-index scalars entering the moving-frame identities."""

    S_vert: np.ndarray        # S_,a
    tau_h: np.ndarray         # tau_|a
    J_frame: np.ndarray       # J_a
    S_h: np.ndarray           # S_|a
    S_vert_spray: np.ndarray  # S_,a|n
    J_spray: np.ndarray       # J_a|n
    trR_an: np.ndarray        # (tr R)_an
    K_vert: np.ndarray | None  # K_,a (scalar-flag gated)
    S: float
    conventions: Conventions


def frame_identity_terms(spec: MetricSpec, vol: VolumeDensity, p: PointDir,
                         want_K: bool = False, order: int = 6) -> FrameTerms:
    """All frame scalars of the identity suite at p (normalized to SM)."""
    p = on_unit_sphere(spec, p)
    if want_K:
        _, spread = scalar_flag_spread(spec, p, order=order)
        rf = riemann_flag(spec, p, order=order)
        if spread > 1e-6 * (1.0 + abs(rf.K_scalar)):
            raise MetricError("flag curvature is not scalar at this point; "
                              "K_,a is gated off")
    w = PointJets(spec, p.x, p.y, order=order, vol=vol)
    fund = fundamentals_from_workspace(w)
    frame = adapted_frame(fund, p)
    return _frame_terms(w, frame, conventions(order), want_K=want_K)


def _frame_terms(w: PointJets, frame: Frame, conv: Conventions,
                 want_K: bool) -> FrameTerms:
    n = w.n
    s = conv.frame_sign
    F = w.F.value
    u = frame.basis                     # (n-1, n)
    yn = w.y / F
    gamma = jet_values(w.chern_coeffs)

    yvars = list(range(n, 2 * n))
    S_jet = w.S_scalar
    S_grad_y = np.array(S_jet.gradient(yvars))
    S_vert = s * F * (u @ S_grad_y)

    tau_dx = np.array([w.hderiv(w.tau, m).value for m in range(n)])
    tau_h = u @ tau_dx

    # components of vertical 1-forms are taken in the coframe dual to the
    # s-oriented vertical frame, so they carry the frame sign as well
    J_val = jet_values(w.J)
    J_frame = s * (u @ J_val)

    S_dx = np.array([w.hderiv(S_jet, m).value for m in range(n)])
    S_h = u @ S_dx

    # T_k = s F dS/dy^k: the vertical covector field behind S_,a
    T = [s * (w.F * w._dy(S_jet, k)) for k in range(n)]
    T_val = np.array([t.value for t in T])
    T_cov = np.zeros((n, n))
    for k in range(n):
        for m in range(n):
            T_cov[k, m] = w.hderiv(T[k], m).value
            T_cov[k, m] -= float(np.dot(T_val, gamma[:, k, m]))
    S_vert_spray = u @ (T_cov @ yn)

    J_cov = np.zeros((n, n))
    J_jets = w.J
    for k in range(n):
        for m in range(n):
            J_cov[k, m] = w.hderiv(J_jets[k], m).value
            J_cov[k, m] -= float(np.dot(J_val, gamma[:, k, m]))
    J_spray = s * (u @ (J_cov @ yn))

    hh = _hh_from_workspace(w)
    trR_an = u @ (hh.trR @ yn)

    K_vert = None
    if want_K:
        K_grad_y = np.array(w.K_scalar.gradient(yvars))
        K_vert = s * F * (u @ K_grad_y)

    return FrameTerms(S_vert=S_vert, tau_h=tau_h, J_frame=J_frame, S_h=S_h,
                      S_vert_spray=S_vert_spray, J_spray=J_spray,
                      trR_an=trR_an, K_vert=K_vert, S=float(S_jet.value),
                      conventions=conv)


# ---------------------------------------------------------------------------
# Everything at once (CLI convenience)
# ---------------------------------------------------------------------------

@dataclass
class CurvatureBundle:
    S_big: float
    S: float
    E: np.ndarray
    e_scalar: float
    L: np.ndarray
    J: np.ndarray
    Rspray: np.ndarray
    R_low: np.ndarray
    Ricci: float
    K_scalar: float
    R_chern: np.ndarray
    R_berwald: np.ndarray
    trR: np.ndarray
    trR_berwald: np.ndarray
    Sigma_bar: np.ndarray
    conventions: Conventions


def curvature_bundle(spec: MetricSpec, vol: VolumeDensity, p: PointDir,
                     order: int = 6) -> CurvatureBundle:
    w = PointJets(spec, p.x, p.y, order=order, vol=vol)
    hh = _hh_from_workspace(w)
    g = w.g_values
    R = jet_values(w.Rspray)
    return CurvatureBundle(
        S_big=float(w.S_big.value), S=float(w.S_scalar.value),
        E=jet_values(w.E), e_scalar=float(w.e_scalar.value),
        L=jet_values(w.L), J=jet_values(w.J),
        Rspray=R, R_low=g @ R, Ricci=float(w.ricci.value),
        K_scalar=float(w.K_scalar.value),
        R_chern=hh.R_chern, R_berwald=hh.R_berwald, trR=hh.trR,
        trR_berwald=hh.trR_berwald, Sigma_bar=hh.Sigma_bar,
        conventions=conventions(order))
