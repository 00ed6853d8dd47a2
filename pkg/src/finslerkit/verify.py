"""Theorem harness: identity residual suites, isotropy classifiers,
scenario checks, and the finite-difference oracle certifying the jets.

Every check is a residual with an explicit scale and tolerance; the suite
aggregates the worst residual per (identity, metric) pair and reports a
deterministic, seedable verdict set.  Scenario checks certify their
hypotheses numerically first and report "not applicable" (never "pass")
when certification fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .engine import PointJets, jet_values
from .fundamentals import (COND_LIMIT, Frame, PointDir, StrongConvexityError,
                           adapted_frame, fundamentals_from_workspace,
                           on_unit_sphere)
from .curvature import (Conventions, chern_berwald_hh, conventions,
                        frame_identity_terms, riemann_flag,
                        scalar_flag_spread, _frame_terms, _hh_from_workspace)
from .metricdef import (Bin, Fn, MetricError, MetricSpec, Num, VolumeDensity,
                        builtin_metric, eval_ast, eval_F_value, parse_metric,
                        sphere_quadrature, ZOO)
from .spray import geodesic_integrate, spray_at

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


# ---------------------------------------------------------------------------
# Deterministic direction sampling
# ---------------------------------------------------------------------------

def directions(dim: int, count: int, rotate: float = 0.0137) -> np.ndarray:
    """Low-discrepancy unit directions, shape (dim, count).

    Golden-angle sequence on the circle; Fibonacci lattice on the sphere.
    The default offset keeps the set clear of coordinate axes, where norms
    like the quartic one lose strong convexity.
    """
    if dim == 2:
        theta = 2 * math.pi * ((np.arange(count) * (GOLDEN - 1.0) + rotate) % 1.0)
        return np.stack([np.cos(theta), np.sin(theta)])
    if dim == 3:
        k = np.arange(count)
        z = 1.0 - (2.0 * k + 1.0) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        theta = 2 * math.pi * ((k * (GOLDEN - 1.0) + rotate) % 1.0)
        return np.stack([r * np.cos(theta), r * np.sin(theta), z])
    raise MetricError("direction sampling supports n in {2, 3}")


# ---------------------------------------------------------------------------
# Verdicts and classifiers
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    kind: str
    decision: bool
    threshold: float
    fitted: dict

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "decision": bool(self.decision),
               "threshold": self.threshold}
        for key, val in sorted(self.fitted.items()):
            if isinstance(val, np.ndarray):
                out[key] = [float(v) for v in val]
            elif isinstance(val, (np.floating, float)):
                out[key] = float(val)
            else:
                out[key] = val
        return out


def classify_e_isotropy(spec: MetricSpec, vol: Optional[VolumeDensity],
                        x, num_dirs: int = 32, threshold: float = 1e-5,
                        order: int = 5) -> Verdict:
    """Isotropy of the Berwald scalar curvature over directions at x."""
    n = spec.dim
    if num_dirs < 2 * (n - 1) + 2:
        raise ValueError(f"need at least {2 * (n - 1) + 2} directions")
    dirs = directions(n, num_dirs)
    w = PointJets(spec, np.asarray(x, dtype=float), dirs, order=order)
    e = np.asarray(w.e_scalar.value)
    spread = float(e.max() - e.min())
    c = float(e.mean())
    return Verdict(kind="e_isotropic",
                   decision=spread <= threshold * (1.0 + abs(c)),
                   threshold=threshold,
                   fitted={"c": c, "spread": spread})


def _fit_S(spec: MetricSpec, vol: VolumeDensity, x, dirs: np.ndarray,
           order: int = 3) -> tuple[float, np.ndarray, float]:
    """Least-squares fit of S_big against (c/(n-1)) F + xi . y over directions."""
    n = spec.dim
    w = PointJets(spec, np.asarray(x, dtype=float), dirs, order=order, vol=vol)
    S = np.asarray(w.S_big.value)
    F = np.asarray(w.F.value)
    A = np.column_stack([F / (n - 1.0)] + [dirs[i] for i in range(n)])
    coef, *_ = np.linalg.lstsq(A, S, rcond=None)
    resid = float(np.abs(A @ coef - S).max() / (1.0 + np.abs(S).max()))
    return float(coef[0]), coef[1:].copy(), resid


def classify_S(spec: MetricSpec, vol: VolumeDensity, x, num_dirs: int = 32,
               threshold: float = 1e-4, order: int = 3,
               fd_step: float = 0.02, fd_tol: float = 1e-4) -> Verdict:
    """Weakly / almost / isotropic S-curvature classification at x.

    Weakly isotropic: the fit S_big = (c/(n-1)) F + xi . y closes over the
    direction sample.  Almost: the fitted xi field is closed (antisymmetric
    difference quotients on an x-stencil vanish).  Isotropic: xi = 0.
    """
    n = spec.dim
    if num_dirs < 2 * (n - 1) + 2:
        raise ValueError(f"need at least {2 * (n - 1) + 2} directions")
    x = np.asarray(x, dtype=float)
    dirs = directions(n, num_dirs)
    c, xi, resid = _fit_S(spec, vol, x, dirs, order)
    weakly = resid <= threshold

    almost = False
    dxi_max = float("nan")
    if weakly:
        grad_xi = np.zeros((n, n))          # grad_xi[i][j] ~ d xi_j / d x_i
        for i in range(n):
            step = np.zeros(n)
            step[i] = fd_step
            _, xi_p, _ = _fit_S(spec, vol, x + step, dirs, order)
            _, xi_m, _ = _fit_S(spec, vol, x - step, dirs, order)
            grad_xi[i] = (xi_p - xi_m) / (2.0 * fd_step)
        anti = grad_xi - grad_xi.T
        dxi_max = float(np.abs(anti).max())
        almost = dxi_max <= fd_tol * (1.0 + float(np.abs(xi).max()))

    isotropic = almost and float(np.abs(xi).max()) <= threshold * (1.0 + abs(c))

    if isotropic:
        kind = "S_isotropic"
    elif almost:
        kind = "S_almost_isotropic"
    else:
        kind = "S_weakly_isotropic"
    return Verdict(kind=kind, decision=weakly, threshold=threshold,
                   fitted={"c": c, "xi": xi, "fit_residual": resid,
                           "weakly": weakly, "almost": almost,
                           "isotropic": isotropic, "dxi_max": dxi_max})


def xi_vertical_crosscheck(spec: MetricSpec, vol: VolumeDensity, x,
                           xi: np.ndarray, num_dirs: int = 2,
                           order: int = 4) -> float:
    """Residual of xi_a = -S_,a at sampled directions (weakly isotropic fits)."""
    n = spec.dim
    conv = conventions()
    worst = 0.0
    for d in directions(n, num_dirs, rotate=0.37).T:
        p = on_unit_sphere(spec, PointDir(x, d))
        w = PointJets(spec, p.x, p.y, order=order, vol=vol)
        fund = fundamentals_from_workspace(w)
        frame = adapted_frame(fund, p)
        grad = np.array(w.S_scalar.gradient(list(range(n, 2 * n))))
        S_vert = conv.frame_sign * fund.F * (frame.basis @ grad)
        xi_frame = frame.basis @ xi
        worst = max(worst, float(np.abs(xi_frame + S_vert).max()))
    return worst


# ---------------------------------------------------------------------------
# Theorem / corollary scenario checks
# ---------------------------------------------------------------------------

@dataclass
class CheckRecord:
    name: str
    residual: float
    tol: float
    passed: bool
    detail: str = ""


@dataclass
class ScenarioReport:
    metric: str
    applicable: bool
    records: list
    verdicts: list
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.applicable and all(r.passed for r in self.records)


def check_theorem1(spec: MetricSpec, vol: VolumeDensity, x_samples,
                   num_dirs: int = 32, tol_c: float = 1e-4,
                   tol_E: float = 1e-5) -> ScenarioReport:
    """The executable iff: e-isotropy and weak S-isotropy verdicts must agree.

    Where both hold, the two fitted c values must match and the mean Berwald
    curvature must be isotropic in frame components.
    """
    if len(x_samples) < 3:
        raise ValueError("theorem 1 check needs at least 3 x-samples")
    records, verdicts = [], []
    for x in x_samples:
        ve = classify_e_isotropy(spec, vol, x, num_dirs)
        vs = classify_S(spec, vol, x, num_dirs)
        agree = ve.decision == vs.fitted["weakly"]
        records.append(CheckRecord(
            name="verdict_agreement", residual=0.0 if agree else 1.0,
            tol=0.5, passed=agree,
            detail=f"x={[float(v) for v in np.round(x, 4)]} e={ve.decision} "
                   f"S={vs.fitted['weakly']}"))
        verdicts.extend([(x, ve), (x, vs)])
        if ve.decision and vs.fitted["weakly"]:
            c_resid = abs(ve.fitted["c"] - vs.fitted["c"]) / (1.0 + abs(ve.fitted["c"]))
            records.append(CheckRecord("c_agreement", c_resid, tol_c,
                                       c_resid <= tol_c))
            records.append(_frame_E_isotropy(spec, vol, x, ve.fitted["c"], tol_E))
            xc = xi_vertical_crosscheck(spec, vol, x, vs.fitted["xi"])
            records.append(CheckRecord("xi_equals_minus_S_vert", xc, 1e-5,
                                       xc <= 1e-5))
    return ScenarioReport(metric=spec.name, applicable=True,
                          records=records, verdicts=verdicts)


def _frame_E_isotropy(spec: MetricSpec, vol: VolumeDensity, x, c: float,
                      tol: float) -> CheckRecord:
    """2F u^i_g u^j_m E_ij = (c/(n-1)) delta_gm at a few directions over x."""
    n = spec.dim
    worst = 0.0
    for d in directions(n, 3, rotate=0.11).T:
        p = on_unit_sphere(spec, PointDir(x, d))
        w = PointJets(spec, p.x, p.y, order=5, vol=vol)
        fund = fundamentals_from_workspace(w)
        frame = adapted_frame(fund, p)
        E = jet_values(w.E)
        M = 2.0 * fund.F * frame.basis @ E @ frame.basis.T
        target = (c / (n - 1.0)) * np.eye(n - 1)
        worst = max(worst, float(np.abs(M - target).max() / (1.0 + abs(c))))
    return CheckRecord("frame_E_isotropy", worst, tol, worst <= tol)


def check_theorem2_cor12(spec: MetricSpec, vol: VolumeDensity, x_samples,
                         num_dirs: int = 32, tol: float = 1e-8,
                         hyp_tol: float = 1e-6) -> ScenarioReport:
    """Constant-e + vanishing-stretch scenario, and the J=0 corollaries.

    Hypotheses (e constant, Sigma_bar = 0, J = 0) are certified numerically;
    on failure the scenario is reported as not applicable.
    """
    n = spec.dim
    records, verdicts = [], []
    c_values = []
    for x in x_samples:
        ve = classify_e_isotropy(spec, vol, x, num_dirs)
        verdicts.append((x, ve))
        if not ve.decision:
            return ScenarioReport(spec.name, False, [], verdicts,
                                  reason="e not isotropic at "
                                         f"x={[float(v) for v in np.round(x, 4)]}")
        c_values.append(ve.fitted["c"])
    e_const_resid = max(abs(c - c_values[0]) for c in c_values)
    if e_const_resid > hyp_tol * (1.0 + abs(c_values[0])):
        return ScenarioReport(spec.name, False, [], verdicts,
                              reason="e is not constant over x")

    hyp_worst = {"Sigma_bar": 0.0, "J": 0.0}
    for x in x_samples[:2]:
        for d in directions(n, 2, rotate=0.23).T:
            p = PointDir(x, d)
            hh = chern_berwald_hh(spec, p)
            hyp_worst["Sigma_bar"] = max(hyp_worst["Sigma_bar"],
                                         float(np.abs(hh.Sigma_bar).max()))
            w = PointJets(spec, p.x, p.y, order=6)
            hyp_worst["J"] = max(hyp_worst["J"],
                                 float(np.abs(jet_values(w.J)).max()))
            records.append(CheckRecord("cor2_trR_zero",
                                       float(np.abs(hh.trR).max()), 1e-6,
                                       float(np.abs(hh.trR).max()) <= 1e-6))
    for name, value in hyp_worst.items():
        if value > hyp_tol:
            return ScenarioReport(spec.name, False, [], verdicts,
                                  reason=f"{name} != 0 ({value:.2e})")

    e_const = c_values[0]
    for x in x_samples:
        vs = classify_S(spec, vol, x, num_dirs)
        verdicts.append((x, vs))
        records.append(CheckRecord(
            "S_almost_isotropic", 0.0 if vs.fitted["almost"] else 1.0, 0.5,
            vs.fitted["almost"], detail=f"x={[float(v) for v in np.round(x, 4)]}"))
        c_resid = abs(vs.fitted["c"] - e_const) / (1.0 + abs(e_const))
        records.append(CheckRecord("c_equals_e", c_resid, 1e-4,
                                   c_resid <= 1e-4))
        if abs(e_const) <= hyp_tol:
            # corollary 1 on a convex chart: S vanishes in this gauge
            s_resid = abs(vs.fitted["c"]) / (n - 1.0) + float(
                np.abs(vs.fitted["xi"]).max())
            records.append(CheckRecord("cor1_S_zero", s_resid, tol,
                                       s_resid <= tol))
        records.append(_frame_E_isotropy(spec, vol, x, e_const, 1e-5))
    return ScenarioReport(spec.name, True, records, verdicts)


def _det_ast(g_exprs, n: int):
    def mul(a, b):
        return Bin("*", a, b)

    def sub(a, b):
        return Bin("-", a, b)

    if n == 2:
        return sub(mul(g_exprs[0][0], g_exprs[1][1]),
                   mul(g_exprs[0][1], g_exprs[1][0]))
    if n == 3:
        def m2(i1, i2, j1, j2):
            return sub(mul(g_exprs[i1][j1], g_exprs[i2][j2]),
                       mul(g_exprs[i1][j2], g_exprs[i2][j1]))
        return sub(Bin("+", mul(g_exprs[0][0], m2(1, 2, 1, 2)),
                       mul(g_exprs[0][2], m2(1, 2, 0, 1))),
                   mul(g_exprs[0][1], m2(1, 2, 0, 2)))
    raise MetricError("determinant ASTs implemented for n in {2, 3}")


def scaled_riemannian_volume(spec: MetricSpec, f_source: str) -> VolumeDensity:
    """sigma = sqrt(det g(x)) * exp(-f): the e^{-f}-rescaled canonical volume."""
    if spec.family != "riemannian":
        raise MetricError("gauge-change test needs a Riemannian metric")
    sigma = Bin("*", Fn("sqrt", _det_ast(spec.g_exprs, spec.dim)),
                Fn("exp", Bin("-", Num(0.0), parse_metric(f_source))))
    return VolumeDensity.user(sigma)


def check_gauge_change(spec: MetricSpec, x_samples, f_source: str = "x1",
                       num_dirs: int = 32, tol: float = 1e-5) -> ScenarioReport:
    """Rescaling the volume by e^{-f} must shift fitted xi by df, keep c."""
    n = spec.dim
    f_ast = parse_metric(f_source)
    vol0 = VolumeDensity.riemannian()
    vol1 = scaled_riemannian_volume(spec, f_source)
    records = []
    h = 1e-4
    dirs = directions(n, num_dirs)
    for x in x_samples:
        x = np.asarray(x, dtype=float)
        c0, xi0, _ = _fit_S(spec, vol0, x, dirs)
        c1, xi1, _ = _fit_S(spec, vol1, x, dirs)
        df = np.zeros(n)
        for i in range(n):
            step = np.zeros(n)
            step[i] = h
            df[i] = (eval_ast(f_ast, list(x + step), [])
                     - eval_ast(f_ast, list(x - step), [])) / (2 * h)
        xi_resid = float(np.abs((xi1 - xi0) - df).max())
        c_resid = abs(c1 - c0)
        records.append(CheckRecord("xi_shift_equals_df", xi_resid, tol,
                                   xi_resid <= tol,
                                   detail=f"x={[float(v) for v in np.round(x, 4)]}"))
        records.append(CheckRecord("c_unchanged", c_resid, tol,
                                   c_resid <= tol))
    return ScenarioReport(spec.name, True, records, [])


def check_corollary3(spec: MetricSpec, vol: VolumeDensity, x_samples,
                     num_dirs: int = 32, tol: float = 1e-4,
                     fd_step: float = 0.02) -> ScenarioReport:
    """Weakly isotropic flag curvature formula, gated on scalar flag curvature."""
    n = spec.dim
    records, verdicts = [], []
    d0 = directions(n, 1, rotate=0.41).T[0]
    for x in x_samples:
        x = np.asarray(x, dtype=float)
        p = PointDir(x, d0)
        K_mean, spread = scalar_flag_spread(spec, p)
        if spread > 1e-6 * (1.0 + abs(K_mean)):
            return ScenarioReport(spec.name, False, [], [],
                                  reason="flag curvature not scalar at "
                                         f"x={[float(v) for v in np.round(x, 4)]}")
        vs = classify_S(spec, vol, x, num_dirs)
        verdicts.append((x, vs))
        if not vs.fitted["weakly"]:
            return ScenarioReport(spec.name, False, [], verdicts,
                                  reason="S not weakly isotropic")

        # c(x) from the e-classifier; dc by central differences
        dc = np.zeros(n)
        for i in range(n):
            step = np.zeros(n)
            step[i] = fd_step
            cp = classify_e_isotropy(spec, vol, x + step, num_dirs).fitted["c"]
            cm = classify_e_isotropy(spec, vol, x - step, num_dirs).fitted["c"]
            dc[i] = (cp - cm) / (2 * fd_step)

        dirs = directions(n, num_dirs)
        w = PointJets(spec, x, dirs, order=4)
        K = np.asarray(w.K_scalar.value)
        F = np.asarray(w.F.value)
        drift = (3.0 / (n**2 - 1.0)) * (dc @ dirs) / F
        sigma_fit = float((K - drift).mean())
        fit_resid = float(np.abs(K - drift - sigma_fit).max() / (1.0 + abs(sigma_fit)))
        weak_K = fit_resid <= tol
        almost_S = bool(vs.fitted["almost"])
        records.append(CheckRecord(
            "K_weakly_isotropic_iff_S_almost",
            0.0 if weak_K == almost_S else 1.0, 0.5, weak_K == almost_S,
            detail=f"x={[float(v) for v in np.round(x, 4)]} K_fit={fit_resid:.2e} "
                   f"sigma={sigma_fit:.6f}"))
        if weak_K:
            records.append(CheckRecord("K_fit_residual", fit_resid, tol,
                                       fit_resid <= tol))
        terms = frame_identity_terms(spec, vol, p, want_K=True)
        j2 = float(np.abs(terms.trR_an + terms.J_spray
                          + (n + 1.0) / 3.0 * terms.K_vert).max())
        records.append(CheckRecord("jacobi_2", j2, 1e-5, j2 <= 1e-5))
    return ScenarioReport(spec.name, True, records, verdicts)


# ---------------------------------------------------------------------------
# Finite-difference oracle (independent of the jet engine)
# ---------------------------------------------------------------------------

def _central(f: Callable, point: np.ndarray, var: int, h: float) -> Callable:
    def deriv(q):
        qp = q.copy()
        qm = q.copy()
        qp[var] += h
        qm[var] -= h
        return (f(qp) - f(qm)) / (2.0 * h)
    return deriv


def _nested_fd(f: Callable, point: np.ndarray, multi, h: float) -> float:
    g = f
    for var, m in enumerate(multi):
        for _ in range(m):
            g = _central(g, point, var, h)
    return g(point)


def richardson_partial(f: Callable, point, multi, h: float) -> float:
    """Mixed partial by nested central differences, Richardson extrapolated."""
    point = np.asarray(point, dtype=float)
    d_h = _nested_fd(f, point, multi, h)
    d_h2 = _nested_fd(f, point, multi, h / 2.0)
    return (4.0 * d_h2 - d_h) / 3.0


def _plain_g(spec: MetricSpec, q: np.ndarray, h: float) -> np.ndarray:
    n = spec.dim

    def F2(qq):
        return eval_F_value(spec, qq[:n], qq[n:]) ** 2

    g = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            multi = [0] * (2 * n)
            multi[n + i] += 1
            multi[n + j] += 1
            g[i, j] = g[j, i] = 0.5 * richardson_partial(F2, q, multi, h)
    return g


def _plain_spray(spec: MetricSpec, q: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Spray coefficients from plain-real F^2 evaluations only."""
    n = spec.dim

    def F2(qq):
        return eval_F_value(spec, qq[:n], qq[n:]) ** 2

    g = _plain_g(spec, q, h)
    rhs = np.zeros(n)
    for l in range(n):
        acc = 0.0
        for k in range(n):
            multi = [0] * (2 * n)
            multi[k] += 1
            multi[n + l] += 1
            acc += q[n + k] * richardson_partial(F2, q, multi, h)
        multi = [0] * (2 * n)
        multi[l] += 1
        rhs[l] = acc - richardson_partial(F2, q, multi, h)
    return 0.25 * np.linalg.solve(g, rhs)


def _plain_sigma(vol: VolumeDensity, spec: MetricSpec, x) -> float:
    n = spec.dim
    x = np.asarray(x, dtype=float)
    if vol.kind == "user":
        return float(eval_ast(vol.sigma_expr, list(x), []))
    if vol.kind == "riemannian":
        g = np.array([[eval_ast(spec.g_exprs[i][j], list(x), [])
                       for j in range(n)] for i in range(n)])
        return float(np.sqrt(np.linalg.det(g)))
    dirs, weights = sphere_quadrature(n, vol.quadrature)
    F = eval_F_value(spec, np.repeat(x[:, None], dirs.shape[1], axis=1), dirs)
    ball = float((F ** (-n) @ weights) / n)
    unit = math.pi if n == 2 else 4.0 * math.pi / 3.0
    return unit / ball


def _plain_S(spec: MetricSpec, vol: VolumeDensity, q: np.ndarray,
             h: float = 1e-3) -> float:
    """Divergence-route S-curvature from plain-real evaluations."""
    n = spec.dim
    div = 0.0
    for m in range(n):
        def Gm(qq, m=m):
            return _plain_spray(spec, qq, h)[m]
        multi = [0] * (2 * n)
        multi[n + m] += 1
        div += richardson_partial(Gm, q, multi, 10 * h)

    def log_sigma(xx):
        return math.log(_plain_sigma(vol, spec, xx))

    for m in range(n):
        multi = [0] * n
        multi[m] += 1
        div -= q[n + m] * richardson_partial(log_sigma, q[:n], multi, h)
    return div


def fd_oracle(spec: MetricSpec, quantity: str, p: PointDir, index,
              component: int = 0, vol: Optional[VolumeDensity] = None,
              h: float = 0.02) -> float:
    """Richardson-extrapolated derivative of F^2, G, or S_big at p.

    `index` is a derivative multi-index over the 2n chart variables
    (x first, then y); total degree at most 3.  The evaluators underneath
    use plain-real arithmetic and share no differentiation code with jets.
    """
    index = tuple(int(m) for m in index)
    if sum(index) > 3:
        raise ValueError("oracle supports derivative order <= 3")
    n = spec.dim
    q = np.concatenate([p.x, p.y])

    if quantity == "F2":
        def f(qq):
            return eval_F_value(spec, qq[:n], qq[n:]) ** 2
    elif quantity == "G":
        def f(qq):
            return _plain_spray(spec, qq)[component]
    elif quantity in ("S", "S_big"):
        if vol is None:
            raise ValueError("the S-curvature oracle needs a volume density")

        def f(qq):
            return _plain_S(spec, vol, qq)
    else:
        raise ValueError(f"unknown oracle quantity {quantity!r}")

    if sum(index) == 0:
        return float(f(q))
    return float(richardson_partial(f, q, index, h))


# ---------------------------------------------------------------------------
# Classical Riemannian control oracle (independent of jets and sprays)
# ---------------------------------------------------------------------------

def classical_gaussian_curvature(spec: MetricSpec, x, h: float = 1e-3) -> float:
    """Gaussian curvature of a 2D Riemannian family from g(x) alone by FD."""
    if spec.family != "riemannian" or spec.dim != 2:
        raise MetricError("classical curvature oracle needs 2D Riemannian")

    def g_at(xv):
        return np.array([[eval_ast(spec.g_exprs[i][j], list(xv), [])
                          for j in range(2)] for i in range(2)])

    def christoffel(xv):
        g = g_at(xv)
        ginv = np.linalg.inv(g)
        dg = np.zeros((2, 2, 2))
        for k in range(2):
            step = np.zeros(2)
            step[k] = h
            dg[:, :, k] = (8 * (g_at(xv + step) - g_at(xv - step))
                           - (g_at(xv + 2 * step) - g_at(xv - 2 * step))) / (12 * h)
        gamma = np.zeros((2, 2, 2))
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    gamma[i, j, k] = 0.5 * sum(
                        ginv[i, l] * (dg[l, j, k] + dg[l, k, j] - dg[j, k, l])
                        for l in range(2))
        return gamma

    x = np.asarray(x, dtype=float)
    dgamma = np.zeros((2, 2, 2, 2))
    for l in range(2):
        step = np.zeros(2)
        step[l] = h
        dgamma[:, :, :, l] = (8 * (christoffel(x + step) - christoffel(x - step))
                              - (christoffel(x + 2 * step)
                                 - christoffel(x - 2 * step))) / (12 * h)
    gamma = christoffel(x)
    # R^i_{jkl} with the orientation that makes K = g(R(e1,e2)e2, e1)/det g
    R = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    R[i, j, k, l] = dgamma[i, j, l, k] - dgamma[i, j, k, l]
                    for m in range(2):
                        R[i, j, k, l] += (gamma[i, m, k] * gamma[m, j, l]
                                          - gamma[i, m, l] * gamma[m, j, k])
    g = g_at(x)
    R_low = np.einsum("im,mjkl->ijkl", g, R)
    return float(R_low[0, 1, 0, 1] / np.linalg.det(g))


def classical_christoffels(spec: MetricSpec, x, h: float = 1e-3) -> np.ndarray:
    """Levi-Civita symbols of a Riemannian family from g(x) by FD."""
    if spec.family != "riemannian":
        raise MetricError("needs a Riemannian metric")
    n = spec.dim

    def g_at(xv):
        return np.array([[eval_ast(spec.g_exprs[i][j], list(xv), [])
                          for j in range(n)] for i in range(n)])

    x = np.asarray(x, dtype=float)
    g = g_at(x)
    ginv = np.linalg.inv(g)
    dg = np.zeros((n, n, n))
    for k in range(n):
        step = np.zeros(n)
        step[k] = h
        dg[:, :, k] = (8 * (g_at(x + step) - g_at(x - step))
                       - (g_at(x + 2 * step) - g_at(x - 2 * step))) / (12 * h)
    gamma = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                gamma[i, j, k] = 0.5 * sum(
                    ginv[i, l] * (dg[l, j, k] + dg[l, k, j] - dg[j, k, l])
                    for l in range(n))
    return gamma


# ---------------------------------------------------------------------------
# Suite runner
# ---------------------------------------------------------------------------

@dataclass
class SuiteConfig:
    metrics: tuple = ZOO
    structure_samples: int = 200
    identity_samples: int = 6
    identity_samples_3d: int = 3
    x_samples: int = 3
    num_dirs: int = 32
    seed: int = 42
    order: int = 6
    tol_override: Optional[float] = None
    volume: Optional[str] = None        # "bh" | "riemannian" | "user:EXPR"
    quadrature: Optional[int] = None


@dataclass
class IdentityResult:
    identity_id: str
    metric: str
    sample_index: int
    x: Optional[list]
    y: Optional[list]
    residual: float
    scale: float
    tol: float
    passed: bool


@dataclass
class IdentityAggregate:
    id: str
    metric: str
    max_residual: float
    tol: float
    passed: bool
    samples: int


@dataclass
class SuiteReport:
    engine_version: str
    conventions: dict
    seed: int
    per_identity: list
    verdicts: list
    skipped: list
    results: list
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "engine_version": self.engine_version,
            "conventions": self.conventions,
            "seed": self.seed,
            "per_identity": [
                {"id": a.id, "metric": a.metric,
                 "max_residual": a.max_residual, "tol": a.tol,
                 "passed": a.passed, "samples": a.samples}
                for a in self.per_identity],
            "verdicts": self.verdicts,
            "skipped": self.skipped,
            "passed": self.passed,
        }

    def to_csv_rows(self) -> list:
        header = ["identity", "metric", "sample", "x", "y",
                  "residual", "scale", "tol", "passed"]
        rows = [header]
        for r in self.results:
            rows.append([
                r.identity_id, r.metric, r.sample_index,
                "" if r.x is None else ";".join(repr(v) for v in r.x),
                "" if r.y is None else ";".join(repr(v) for v in r.y),
                repr(r.residual), repr(r.scale), repr(r.tol),
                int(r.passed)])
        return rows


def default_volume(spec: MetricSpec, quadrature: Optional[int] = None) -> VolumeDensity:
    """Canonical gauge: exact Riemannian density when available, else BH."""
    if spec.family == "riemannian":
        return VolumeDensity.riemannian()
    q = quadrature or (1024 if spec.dim == 2 else 96)
    return VolumeDensity.busemann_hausdorff(q)


def _volume_from_string(name: str, spec: MetricSpec,
                        quadrature: Optional[int]) -> VolumeDensity:
    if name in ("bh", "busemann_hausdorff"):
        q = quadrature or (1024 if spec.dim == 2 else 96)
        return VolumeDensity.busemann_hausdorff(q)
    if name == "riemannian":
        return VolumeDensity.riemannian()
    if name.startswith("user:"):
        return VolumeDensity.user(name[len("user:"):])
    raise MetricError(f"unknown volume {name!r}")


def _is_berwald_flat(spec: MetricSpec) -> bool:
    """Metrics in the zoo that are Riemannian-flat or locally Minkowski."""
    from .metricdef import ast_variables

    if spec.family in ("riemannian", "minkowski"):
        return True
    if spec.family == "randers":
        used = set()
        for row in spec.g_exprs:
            for e in row:
                used |= ast_variables(e)
        for e in spec.beta_exprs:
            used |= ast_variables(e)
        return "x" not in used
    return False


class _Collector:
    def __init__(self, metric: str, tol_override: Optional[float]):
        self.metric = metric
        self.tol_override = tol_override
        self.results: list[IdentityResult] = []
        self.skipped: list[dict] = []

    def add(self, identity_id: str, residual: float, tol: float,
            scale: float = 0.0, sample_index: int = -1,
            p: Optional[PointDir] = None):
        tol = self.tol_override if self.tol_override is not None else tol
        residual = float(residual)
        self.results.append(IdentityResult(
            identity_id=identity_id, metric=self.metric,
            sample_index=sample_index,
            x=None if p is None else [float(v) for v in p.x],
            y=None if p is None else [float(v) for v in p.y],
            residual=residual, scale=float(scale), tol=tol,
            passed=residual <= tol))

    def skip(self, check: str, reason: str):
        self.skipped.append({"check": check, "metric": self.metric,
                             "reason": reason})


def _screened_samples(spec: MetricSpec, rng: np.random.Generator,
                      count: int) -> list:
    """Points with usable fundamental tensor (cond(g) below the limit)."""
    from .fundamentals import metric_tensor_at

    out = []
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        x = spec.domain.sample(rng, spec.dim)
        y = rng.standard_normal(spec.dim)
        y /= np.linalg.norm(y)
        try:
            F, g = metric_tensor_at(spec, x, y)
            eig = np.linalg.eigvalsh(g)
            if F <= 0 or eig[0] <= 0 or eig[-1] / eig[0] > COND_LIMIT:
                continue
        except MetricError:
            continue
        out.append(PointDir(x, y))
    if len(out) < count:
        raise MetricError(f"could not sample {count} usable points "
                          f"on {spec.name}")
    return out


def _sample_batch(spec: MetricSpec, rng: np.random.Generator,
                  count: int) -> tuple[np.ndarray, np.ndarray]:
    pts = _screened_samples(spec, rng, count)
    xs = np.stack([p.x for p in pts], axis=1)
    ys = np.stack([p.y for p in pts], axis=1)
    return xs, ys


def _structure_block(spec: MetricSpec, vol: VolumeDensity, col: _Collector,
                     rng: np.random.Generator, count: int):
    """Acceptance homogeneity & structure suite on a batched sample set."""
    n = spec.dim
    xs, ys = _sample_batch(spec, rng, count)

    w = PointJets(spec, xs, ys, order=5)
    F2 = np.asarray(w.F2.value)
    g = jet_values(w.g)
    gyy = np.einsum("ijb,ib,jb->b", g, ys, ys)
    col.add("structure_gyy_F2", np.abs(gyy - F2).max() / np.abs(F2).max(),
            1e-8, scale=float(np.abs(F2).max()))

    A = np.asarray(w.F.value) * jet_values(w.cartan)
    col.add("structure_Ay", np.abs(np.einsum("ijkb,kb->ijb", A, ys)).max()
            / (1.0 + np.abs(A).max()), 1e-8, scale=float(np.abs(A).max()))

    B = jet_values(w.B)
    col.add("structure_By", np.abs(np.einsum("ijklb,lb->ijkb", B, ys)).max()
            / (1.0 + np.abs(B).max()), 1e-8, scale=float(np.abs(B).max()))

    E = jet_values(w.E)
    col.add("structure_Ey", np.abs(np.einsum("jkb,kb->jb", E, ys)).max()
            / (1.0 + np.abs(E).max()), 1e-8, scale=float(np.abs(E).max()))

    L = jet_values(w.L)
    col.add("structure_Ly", np.abs(np.einsum("jklb,lb->jkb", L, ys)).max()
            / (1.0 + np.abs(L).max()), 1e-8, scale=float(np.abs(L).max()))

    w1 = PointJets(spec, xs, ys, order=3, vol=vol)
    w2 = PointJets(spec, xs, 2.0 * ys, order=3, vol=vol)
    S1 = np.asarray(w1.S_big.value)
    S2 = np.asarray(w2.S_big.value)
    col.add("structure_S_homogeneous",
            np.abs(S2 - 2.0 * S1).max() / (1.0 + np.abs(S1).max()),
            1e-8, scale=float(np.abs(S1).max()))

    for lam in (0.5, 2.0, 7.0):
        Fv = eval_F_value(spec, xs, ys)
        Fl = eval_F_value(spec, xs, lam * ys)
        col.add("homogeneity_F",
                np.abs(Fl - lam * Fv).max() / np.abs(lam * Fv).max(),
                1e-10, scale=float(np.abs(Fv).max()))

    from .metricdef import check_strong_convexity

    guard = check_strong_convexity(spec, list(zip(xs.T, ys.T)))
    col.add("convexity_guard", 0.0 if guard.all_ok else 1.0, 0.5,
            scale=min((r.min_eigenvalue for r in guard.samples), default=0.0))


def _identity_block(spec: MetricSpec, vol: VolumeDensity, col: _Collector,
                    samples: list, order: int, scalar_flag: bool):
    """Per-sample identity residuals sharing one workspace per point."""
    n = spec.dim
    conv = conventions(order)
    sigma_exact = vol.kind in ("riemannian", "user")
    quad_tol = 1e-6 if sigma_exact else 1e-4

    for idx, p0 in enumerate(samples):
        p = on_unit_sphere(spec, p0)
        w = PointJets(spec, p.x, p.y, order=order, vol=vol)
        fund = fundamentals_from_workspace(w)
        frame = adapted_frame(fund, p)

        col.add("dtau_vertical",
                np.abs(fund.dtau_dy - fund.I).max()
                / (1.0 + np.abs(fund.I).max()),
                1e-9, scale=float(np.abs(fund.I).max()), sample_index=idx, p=p)
        col.add("frame_gram", frame.gram_residual, 1e-10, sample_index=idx, p=p)
        frame2 = adapted_frame(fund, p)
        identical = (np.array_equal(frame.basis, frame2.basis)
                     and np.array_equal(frame.e_n, frame2.e_n))
        col.add("frame_reproducible", 0.0 if identical else 1.0, 0.5,
                sample_index=idx, p=p)

        N = jet_values(w.N)
        gam = jet_values(w.chern_coeffs)
        ber = jet_values(w.berwald_coeffs)
        scale_N = 1.0 + np.abs(N).max()
        col.add("shared_nonlinear_connection",
                max(np.abs(np.einsum("j,ijk->ik", p.y, gam) - N).max(),
                    np.abs(np.einsum("j,ijk->ik", p.y, ber) - N).max())
                / scale_N, 1e-9, scale=float(np.abs(N).max()),
                sample_index=idx, p=p)

        L_up = np.einsum("im,mjk->ijk", np.linalg.inv(w.g_values),
                         jet_values(w.L))
        col.add("berwald_chern_landsberg",
                np.abs(ber - gam - conv.landsberg_sign * L_up).max()
                / (1.0 + np.abs(L_up).max()), 1e-8,
                scale=float(np.abs(L_up).max()), sample_index=idx, p=p)

        E = jet_values(w.E)
        hessS = np.zeros((n, n))
        for j in range(n):
            dSj = w._dy(w.S_big, j)
            for k in range(n):
                hessS[j, k] = w._dy(dSj, k).value
        col.add("hessian_S", np.abs(E - 0.5 * hessS).max()
                / (1.0 + np.abs(E).max()), 1e-7,
                scale=float(np.abs(E).max()), sample_index=idx, p=p)

        S_dist = float(w.S_big.value)
        div = sum(N[m][m] for m in range(n))
        sv = w.sigma.value
        for m in range(n):
            div -= p.y[m] * w.sigma.partial(m).value / sv
        col.add("s_route_agreement", abs(S_dist - div) / (1.0 + abs(S_dist)),
                quad_tol, scale=abs(S_dist), sample_index=idx, p=p)

        terms = _frame_terms(w, frame, conv, want_K=scalar_flag)
        col.add("basic_equ_4",
                np.abs(terms.S_vert + terms.tau_h - terms.J_frame).max(),
                1e-7, scale=abs(terms.S), sample_index=idx, p=p)
        col.add("jacobi_I",
                np.abs(terms.S_h + terms.S_vert_spray
                       - terms.J_spray - terms.trR_an).max(),
                quad_tol, scale=abs(terms.S), sample_index=idx, p=p)
        if scalar_flag:
            col.add("jacobi_2",
                    np.abs(terms.trR_an + terms.J_spray
                           + (n + 1.0) / 3.0 * terms.K_vert).max(),
                    1e-5, sample_index=idx, p=p)

        hh = _hh_from_workspace(w)
        col.add("hh_reproduces_spray", hh.spray_match_residual, 1e-8,
                sample_index=idx, p=p)
        col.add("trace_antisymmetry",
                max(np.abs(hh.trR + hh.trR.T).max(),
                    np.abs(hh.trR_berwald + hh.trR_berwald.T).max()),
                1e-12, sample_index=idx, p=p)

        # homogeneity ladder at lambda = 2 on a light workspace
        w2 = PointJets(spec, p.x, 2.0 * p.y, order=5, vol=vol)
        g1, g2 = w.g_values, w2.g_values
        col.add("homogeneity_g", np.abs(g2 - g1).max() / (1.0 + np.abs(g1).max()),
                1e-9, sample_index=idx, p=p)
        C1 = jet_values(w.cartan)
        C2 = jet_values(w2.cartan)
        col.add("homogeneity_C", np.abs(C2 - 0.5 * C1).max()
                / (1.0 + np.abs(C1).max()), 1e-9, sample_index=idx, p=p)
        col.add("homogeneity_tau", abs(w2.tau.value - w.tau.value)
                / (1.0 + abs(w.tau.value)), 1e-9, sample_index=idx, p=p)
        col.add("homogeneity_e", abs(w2.e_scalar.value - w.e_scalar.value)
                / (1.0 + abs(w.e_scalar.value)), 1e-9, sample_index=idx, p=p)
        col.add("homogeneity_K", abs(w2.K_scalar.value - w.K_scalar.value)
                / (1.0 + abs(w.K_scalar.value)), 1e-9, sample_index=idx, p=p)


def _berwald_flat_block(spec: MetricSpec, vol: VolumeDensity, col: _Collector,
                        samples: list, order: int):
    for idx, p in enumerate(samples[:3]):
        w = PointJets(spec, p.x, p.y, order=order, vol=vol)
        for name, value in [("B", jet_values(w.B)), ("L", jet_values(w.L)),
                            ("J", jet_values(w.J)), ("E", jet_values(w.E)),
                            ("e", w.e_scalar.value)]:
            col.add(f"berwald_collapse_{name}", np.abs(value).max(), 1e-9,
                    sample_index=idx, p=p)
        hh = _hh_from_workspace(w)
        col.add("berwald_collapse_Sigma_bar", np.abs(hh.Sigma_bar).max(),
                1e-6, sample_index=idx, p=p)


def _riemannian_reduction_block(spec: MetricSpec, col: _Collector,
                                samples: list, order: int):
    vol = VolumeDensity.riemannian()
    for idx, p in enumerate(samples[:3]):
        w = PointJets(spec, p.x, p.y, order=order, vol=vol)
        A = np.asarray(w.F.value) * jet_values(w.cartan)
        col.add("riemann_A_zero", np.abs(A).max(), 1e-9, sample_index=idx, p=p)
        col.add("riemann_L_zero", np.abs(jet_values(w.L)).max(), 1e-9,
                sample_index=idx, p=p)
        col.add("riemann_J_zero", np.abs(jet_values(w.J)).max(), 1e-9,
                sample_index=idx, p=p)
        col.add("riemann_E_zero", np.abs(jet_values(w.E)).max(), 1e-9,
                sample_index=idx, p=p)
        col.add("riemann_S_zero", abs(w.S_big.value), 1e-8,
                sample_index=idx, p=p)
        hh = _hh_from_workspace(w)
        col.add("riemann_Sigma_bar_zero", np.abs(hh.Sigma_bar).max(), 1e-6,
                sample_index=idx, p=p)
        if spec.dim == 2:
            K_cl = classical_gaussian_curvature(spec, p.x)
            col.add("riemann_K_classical",
                    abs(w.K_scalar.value - K_cl) / (1.0 + abs(K_cl)), 1e-8,
                    scale=K_cl, sample_index=idx, p=p)
        gam_cl = classical_christoffels(spec, p.x)
        gam = jet_values(w.chern_coeffs)
        col.add("riemann_christoffel_classical",
                np.abs(gam - gam_cl).max() / (1.0 + np.abs(gam_cl).max()),
                1e-8, sample_index=idx, p=p)


def _funk_block(spec: MetricSpec, vol: VolumeDensity, col: _Collector,
                samples: list, order: int):
    n = spec.dim
    target_S = (n + 1.0) / 2.0
    target_e = (n - 1.0) * (n + 1.0) / 2.0
    for idx, p in enumerate(samples):
        w = PointJets(spec, p.x, p.y, order=order, vol=vol)
        F = w.F.value
        col.add("funk_S_constant", abs(w.S_big.value / F - target_S), 1e-4,
                scale=target_S, sample_index=idx, p=p)
        col.add("funk_e_value", abs(w.e_scalar.value - target_e), 1e-5,
                scale=target_e, sample_index=idx, p=p)
        K_mean, spread = scalar_flag_spread(spec, p, num_flags=64)
        col.add("funk_K_constant", abs(K_mean + 0.25), 1e-6,
                scale=0.25, sample_index=idx, p=p)
        col.add("funk_K_flag_independent", spread, 1e-6, sample_index=idx, p=p)
        hh = _hh_from_workspace(w)
        col.add("trace_equation_funk", np.abs(hh.trR_berwald).max(), 1e-5,
                sample_index=idx, p=p)
    x = samples[0].x
    dirs = directions(n, max(64, 2 * (n - 1) + 2))
    we = PointJets(spec, x, dirs, order=5)
    e = np.asarray(we.e_scalar.value)
    col.add("funk_e_direction_spread", float(e.max() - e.min()), 1e-5,
            scale=target_e)


def _geodesic_block(spec: MetricSpec, col: _Collector, samples: list):
    p = samples[0]
    F0 = eval_F_value(spec, p.x, p.y)
    traj = geodesic_integrate(spec, p.x, p.y / F0, steps=200, dt=1e-3)
    col.add("geodesic_F_conservation", traj.F_drift / (1.0 + traj.F[0]),
            1e-8, scale=float(traj.F[0]), sample_index=0, p=p)


def _oracle_block(spec: MetricSpec, vol: VolumeDensity, col: _Collector,
                  samples: list, order: int):
    """Jets vs Richardson finite differences on F^2, G, and S_big."""
    n = spec.dim
    p = on_unit_sphere(spec, samples[0])
    w = PointJets(spec, p.x, p.y, order=order, vol=vol)

    def jet_partial(jet, index):
        out = jet
        for var, m in enumerate(index):
            for _ in range(m):
                out = out.partial(var)
        return out.value

    indices = []
    for a in range(2 * n):
        idx = [0] * (2 * n)
        idx[a] = 1
        indices.append(tuple(idx))
    for a in range(2 * n):
        for b in range(a, 2 * n):
            idx = [0] * (2 * n)
            idx[a] += 1
            idx[b] += 1
            indices.append(tuple(idx))
    idx3 = [0] * (2 * n)
    idx3[n] += 2
    idx3[n + 1] += 1
    indices.append(tuple(idx3))

    worst = 0.0
    for index in indices:
        fd = fd_oracle(spec, "F2", p, index)
        jet = jet_partial(w.F2, index)
        worst = max(worst, abs(fd - jet) / (1.0 + abs(jet)))
    col.add("oracle_F2", worst, 1e-5, sample_index=0, p=p)

    worst = 0.0
    for comp in range(n):
        for var in range(2 * n):
            index = [0] * (2 * n)
            index[var] = 1
            fd = fd_oracle(spec, "G", p, index, component=comp)
            jet = jet_partial(w.G[comp], tuple(index))
            worst = max(worst, abs(fd - jet) / (1.0 + abs(jet)))
        index = [0] * (2 * n)
        index[n] = 2
        fd = fd_oracle(spec, "G", p, index, component=comp)
        jet = jet_partial(w.G[comp], tuple(index))
        worst = max(worst, abs(fd - jet) / (1.0 + abs(jet)))
    col.add("oracle_G", worst, 1e-5, sample_index=0, p=p)

    worst = 0.0
    for var in range(n, 2 * n):
        index = [0] * (2 * n)
        index[var] = 1
        fd = fd_oracle(spec, "S_big", p, index, vol=vol)
        jet = jet_partial(w.S_big, tuple(index))
        worst = max(worst, abs(fd - jet) / (1.0 + abs(jet)))
    col.add("oracle_S", worst, 1e-4, sample_index=0, p=p)


def run_suite(config: SuiteConfig) -> SuiteReport:
    """Execute the full identity and theorem suite over the metric list."""
    conv = conventions(config.order)
    all_results: list[IdentityResult] = []
    all_skipped: list[dict] = []
    verdict_records: list[dict] = []

    for metric_idx, name in enumerate(config.metrics):
        spec = builtin_metric(name) if isinstance(name, str) else name
        vol = (default_volume(spec, config.quadrature) if config.volume is None
               else _volume_from_string(config.volume, spec, config.quadrature))
        rng = np.random.default_rng([config.seed, metric_idx])
        col = _Collector(spec.name, config.tol_override)

        n_id = (config.identity_samples if spec.dim == 2
                else config.identity_samples_3d)
        id_samples = _screened_samples(spec, rng, n_id)
        x_samples = [spec.domain.sample(rng, spec.dim)
                     for _ in range(config.x_samples)]

        _structure_block(spec, vol, col, rng, config.structure_samples)

        p0 = id_samples[0]
        _, flag_spread = scalar_flag_spread(spec, p0)
        rf = riemann_flag(spec, p0)
        scalar_flag = flag_spread <= 1e-6 * (1.0 + abs(rf.K_scalar))
        if not scalar_flag:
            col.skip("jacobi_2", "flag curvature is not scalar")

        _identity_block(spec, vol, col, id_samples, config.order, scalar_flag)

        if _is_berwald_flat(spec):
            _berwald_flat_block(spec, vol, col, id_samples, config.order)
        if spec.family == "riemannian":
            _riemannian_reduction_block(spec, col, id_samples, config.order)
        if spec.family == "funk":
            _funk_block(spec, vol, col, id_samples, config.order)

        _geodesic_block(spec, col, id_samples)
        _oracle_block(spec, vol, col, id_samples, config.order)

        t1 = check_theorem1(spec, vol, x_samples, config.num_dirs)
        for rec in t1.records:
            col.add(f"theorem1_{rec.name}", rec.residual, rec.tol)
        for x, v in t1.verdicts:
            verdict_records.append({"metric": spec.name,
                                    "x": [float(xv) for xv in x],
                                    **v.as_dict()})

        t2 = check_theorem2_cor12(spec, vol, x_samples, config.num_dirs)
        if t2.applicable:
            for rec in t2.records:
                col.add(f"theorem2_{rec.name}", rec.residual, rec.tol)
        else:
            col.skip("theorem2_cor12", t2.reason)

        if spec.family == "riemannian":
            gauge = check_gauge_change(spec, x_samples[:2])
            for rec in gauge.records:
                col.add(f"gauge_{rec.name}", rec.residual, rec.tol)

        c3 = check_corollary3(spec, vol, x_samples[:2], config.num_dirs)
        if c3.applicable:
            for rec in c3.records:
                col.add(f"cor3_{rec.name}", rec.residual, rec.tol)
        else:
            col.skip("corollary3", c3.reason)

        all_results.extend(col.results)
        all_skipped.extend(col.skipped)

    aggregates: dict[tuple, IdentityAggregate] = {}
    for r in all_results:
        key = (r.identity_id, r.metric)
        agg = aggregates.get(key)
        if agg is None:
            aggregates[key] = IdentityAggregate(
                id=r.identity_id, metric=r.metric, max_residual=r.residual,
                tol=r.tol, passed=r.passed, samples=1)
        else:
            agg.max_residual = max(agg.max_residual, r.residual)
            agg.passed = agg.passed and r.passed
            agg.samples += 1

    ordered = [aggregates[k] for k in sorted(aggregates)]
    return SuiteReport(
        engine_version=__version__,
        conventions=conv.as_dict(),
        seed=config.seed,
        per_identity=ordered,
        verdicts=verdict_records,
        skipped=sorted(all_skipped, key=lambda d: (d["metric"], d["check"])),
        results=all_results,
        passed=all(a.passed for a in ordered),
    )
