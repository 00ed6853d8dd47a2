"""Metric definitions: expression language, built-in families, volume densities.

A metric is described declaratively (a built-in family or a parsed
``F(x, y)`` expression) and evaluated over plain floats or jets through one
shared AST walker.  Volume densities (Busemann-Hausdorff by quadrature,
Riemannian, or a user expression) are evaluated the same way, as jets in
the base-point variables only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import jets
from .jets import Jet, JetSpec


class MetricError(ValueError):
    """Domain violation or ill-posed metric evaluation."""


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# ---------------------------------------------------------------------------
# Expression AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str   # "x" or "y"
    index: int  # 0-based


@dataclass(frozen=True)
class Neg:
    arg: "ExprNode"


@dataclass(frozen=True)
class Bin:
    op: str     # + - * / ^
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Fn:
    name: str   # sqrt exp log sin cos
    arg: "ExprNode"


ExprNode = Num | Var | Neg | Bin | Fn

_FUNCTIONS = {"sqrt": jets.sqrt, "exp": jets.exp, "log": jets.log,
              "sin": jets.sin, "cos": jets.cos}


def eval_ast(node: ExprNode, xvals: Sequence, yvals: Sequence):
    """Evaluate an AST over floats or jets (any type with arithmetic)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        vals = xvals if node.kind == "x" else yvals
        if node.index >= len(vals):
            raise MetricError(f"variable {node.kind}{node.index + 1} exceeds "
                              f"dimension {len(vals)}")
        return vals[node.index]
    if isinstance(node, Neg):
        return -eval_ast(node.arg, xvals, yvals)
    if isinstance(node, Fn):
        return _FUNCTIONS[node.name](eval_ast(node.arg, xvals, yvals))
    left = eval_ast(node.left, xvals, yvals)
    right = eval_ast(node.right, xvals, yvals)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return left / right
    if node.op == "^":
        exponent = _constant_exponent(node.right, right)
        return jets.power(left, exponent)
    raise MetricError(f"unknown operator {node.op!r}")


def _constant_exponent(node: ExprNode, value) -> float:
    if isinstance(value, Jet):
        raise MetricError("exponents must be constant expressions")
    return float(value)


def ast_variables(node: ExprNode) -> set[str]:
    """Set of variable kinds ('x', 'y') appearing in the tree."""
    if isinstance(node, Var):
        return {node.kind}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return ast_variables(node.arg)
    if isinstance(node, Fn):
        return ast_variables(node.arg)
    return ast_variables(node.left) | ast_variables(node.right)


def ast_max_index(node: ExprNode) -> int:
    """Largest 0-based variable index used (or -1)."""
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Num):
        return -1
    if isinstance(node, Neg):
        return ast_max_index(node.arg)
    if isinstance(node, Fn):
        return ast_max_index(node.arg)
    return max(ast_max_index(node.left), ast_max_index(node.right))


# ---------------------------------------------------------------------------
# Parser: standard precedence, ^ right-associative and tighter than unary -
# ---------------------------------------------------------------------------

@dataclass
class _Token:
    kind: str   # num ident op lpar rpar end
    text: str
    offset: int


def _lex(source: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_e = False
            while j < n and (source[j].isdigit() or source[j] == "."
                             or source[j] in "eE"
                             or (source[j] in "+-" and j > i
                                 and source[j - 1] in "eE")):
                if source[j] in "eE":
                    if seen_e:
                        break
                    seen_e = True
                j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ParseError(f"bad numeric literal {text!r}", i) from None
            tokens.append(_Token("num", text, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], i))
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lpar", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rpar", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {what}", tok.offset)
        return self.advance()

    def parse_expr(self) -> ExprNode:
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.parse_term())
        return node

    def parse_term(self) -> ExprNode:
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Bin(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> ExprNode:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> ExprNode:
        base = self.parse_atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            # right-associative; exponent may carry a unary sign
            return Bin("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> ExprNode:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "lpar":
            self.advance()
            node = self.parse_expr()
            self.expect("rpar", "')'")
            return node
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in _FUNCTIONS:
                self.expect("lpar", f"'(' after {name}")
                arg = self.parse_expr()
                self.expect("rpar", "')'")
                return Fn(name, arg)
            var = _parse_var_name(name)
            if var is None:
                raise ParseError(f"unknown identifier {name!r}", tok.offset)
            return Var(*var)
        raise ParseError("expected a number, variable, or '('", tok.offset)


def _parse_var_name(name: str) -> Optional[tuple[str, int]]:
    if len(name) >= 2 and name[0] in "xy" and name[1:].isdigit():
        idx = int(name[1:])
        if idx >= 1:
            return name[0], idx - 1
    return None


def parse_metric(source: str) -> ExprNode:
    """Parse an F(x, y) expression into an AST."""
    parser = _Parser(_lex(source))
    node = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "end":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.offset)
    return node


# ---------------------------------------------------------------------------
# Domains and metric families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Region of x-space the metric is defined on."""

    kind: str = "box"                       # "box" | "ball"
    bounds: tuple = ((-1.0, 1.0), (-1.0, 1.0))
    radius: float = 1.0

    def contains(self, x) -> bool:
        x = np.atleast_2d(np.asarray(x, dtype=float).T).T  # (n,) or (n,B)
        if self.kind == "ball":
            return bool(np.all(np.sum(x * x, axis=0) < self.radius**2))
        for i, (lo, hi) in enumerate(self.bounds[: x.shape[0]]):
            if np.any(x[i] < lo) or np.any(x[i] > hi):
                return False
        return True

    def sample(self, rng: np.random.Generator, dim: int,
               margin: float = 0.15) -> np.ndarray:
        if self.kind == "ball":
            while True:
                x = rng.uniform(-1.0, 1.0, size=dim) * self.radius * (1 - margin)
                if np.dot(x, x) < (self.radius * (1 - margin)) ** 2:
                    return x
        lo = np.array([b[0] for b in self.bounds[:dim]])
        hi = np.array([b[1] for b in self.bounds[:dim]])
        pad = margin * (hi - lo) / 2
        return rng.uniform(lo + pad, hi - pad)


def _box(dim: int, half: float) -> Domain:
    return Domain("box", tuple((-half, half) for _ in range(dim)))


@dataclass(frozen=True)
class MetricSpec:
    """A Finsler metric family on a coordinate chart."""

    dim: int
    family: str                                  # riemannian randers minkowski funk expression
    g_exprs: tuple = ()                          # n x n ASTs (riemannian / randers alpha)
    beta_exprs: tuple = ()                       # n ASTs (randers)
    expr: Optional[ExprNode] = None              # minkowski / expression
    domain: Domain = field(default_factory=Domain)
    name: str = ""

    def __post_init__(self):
        if self.dim < 2:
            raise MetricError("dimension must be >= 2")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def riemannian(g_exprs, dim: int, domain: Domain | None = None,
                   name: str = "riemannian") -> "MetricSpec":
        g = _expr_matrix(g_exprs, dim, allow_y=False)
        return MetricSpec(dim, "riemannian", g_exprs=g,
                          domain=domain or _box(dim, 1.0), name=name)

    @staticmethod
    def randers(alpha_exprs, beta_exprs, dim: int,
                domain: Domain | None = None, name: str = "randers") -> "MetricSpec":
        a = _expr_matrix(alpha_exprs, dim, allow_y=False)
        b = tuple(_as_ast(e, dim, allow_y=False) for e in beta_exprs)
        if len(b) != dim:
            raise MetricError("beta must have one component per dimension")
        return MetricSpec(dim, "randers", g_exprs=a, beta_exprs=b,
                          domain=domain or _box(dim, 1.0), name=name)

    @staticmethod
    def minkowski(expr, dim: int, domain: Domain | None = None,
                  name: str = "minkowski") -> "MetricSpec":
        ast = _as_ast(expr, dim, allow_y=True)
        if "x" in ast_variables(ast):
            raise MetricError("a Minkowski norm may not depend on x")
        return MetricSpec(dim, "minkowski", expr=ast,
                          domain=domain or _box(dim, 1.0), name=name)

    @staticmethod
    def funk(dim: int, name: str = "funk") -> "MetricSpec":
        return MetricSpec(dim, "funk", domain=Domain("ball", radius=1.0),
                          name=name)

    @staticmethod
    def expression(expr, dim: int, domain: Domain | None = None,
                   name: str = "expression") -> "MetricSpec":
        ast = _as_ast(expr, dim, allow_y=True)
        return MetricSpec(dim, "expression", expr=ast,
                          domain=domain or _box(dim, 1.0), name=name)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, xvals: Sequence, yvals: Sequence):
        """F(x, y) over floats or jets; the single shared formula path."""
        n = self.dim
        if self.family == "riemannian":
            return jets.sqrt(_quadratic(self.g_exprs, xvals, yvals, n))
        if self.family == "randers":
            alpha = jets.sqrt(_quadratic(self.g_exprs, xvals, yvals, n))
            beta = eval_ast(self.beta_exprs[0], xvals, yvals) * yvals[0]
            for i in range(1, n):
                beta = beta + eval_ast(self.beta_exprs[i], xvals, yvals) * yvals[i]
            return alpha + beta
        if self.family in ("minkowski", "expression"):
            return eval_ast(self.expr, xvals, yvals)
        if self.family == "funk":
            xx = _dot(xvals, xvals)
            yy = _dot(yvals, yvals)
            xy = _dot(xvals, yvals)
            root = jets.sqrt(yy - (xx * yy - xy * xy))
            return (root + xy) / (1.0 - xx)
        raise MetricError(f"unknown metric family {self.family!r}")


def _as_ast(expr, dim: int, allow_y: bool) -> ExprNode:
    ast = parse_metric(expr) if isinstance(expr, str) else expr
    if ast_max_index(ast) >= dim:
        raise MetricError(f"expression uses a variable beyond dimension {dim}")
    if not allow_y and "y" in ast_variables(ast):
        raise MetricError("expression must depend on x only")
    return ast


def _expr_matrix(entries, dim: int, allow_y: bool) -> tuple:
    rows = tuple(tuple(_as_ast(e, dim, allow_y) for e in row) for row in entries)
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise MetricError(f"expected a {dim}x{dim} matrix of expressions")
    return rows


def _quadratic(g_exprs, xvals, yvals, n: int):
    total = None
    for i in range(n):
        for j in range(n):
            term = eval_ast(g_exprs[i][j], xvals, yvals) * yvals[i] * yvals[j]
            total = term if total is None else total + term
    return total


def _dot(a, b):
    total = a[0] * b[0]
    for i in range(1, len(a)):
        total = total + a[i] * b[i]
    return total


# ---------------------------------------------------------------------------
# Metric evaluation entry points
# ---------------------------------------------------------------------------

def seed_point(x, y, jet_spec: JetSpec) -> tuple[list[Jet], list[Jet]]:
    """Seed the 2n chart variables (x first, then y) as jet variables."""
    n = jet_spec.num_vars // 2
    xs = [Jet.variable(i, np.asarray(x[i], dtype=float), jet_spec)
          for i in range(n)]
    ys = [Jet.variable(n + i, np.asarray(y[i], dtype=float), jet_spec)
          for i in range(n)]
    return xs, ys


def _check_point(spec: MetricSpec, x, y) -> None:
    y = np.asarray(y, dtype=float)
    if np.any(np.sum(np.atleast_2d(y.T).T ** 2, axis=0) == 0.0):
        raise MetricError("F is not smooth at y = 0")
    if not spec.domain.contains(x):
        raise MetricError(f"x outside the metric domain ({spec.domain.kind})")


def eval_F(spec: MetricSpec, x, y, jet_spec: JetSpec) -> Jet:
    """Jet of F at (x, y), seeded in all 2n variables."""
    if jet_spec.num_vars != 2 * spec.dim:
        raise MetricError(f"jet spec needs {2 * spec.dim} variables")
    _check_point(spec, x, y)
    xs, ys = seed_point(x, y, jet_spec)
    return spec.evaluate(xs, ys)


def eval_F_value(spec: MetricSpec, x, y) -> float | np.ndarray:
    """Plain-float F(x, y); shares the formulas but no jet machinery."""
    _check_point(spec, x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = spec.evaluate(list(x), list(y))
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


# ---------------------------------------------------------------------------
# Volume densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VolumeDensity:
    """Choice of volume-form density sigma(x)."""

    kind: str = "busemann_hausdorff"   # | "riemannian" | "user"
    sigma_expr: Optional[ExprNode] = None
    quadrature: Optional[int] = None   # angular points per dimension

    @staticmethod
    def busemann_hausdorff(quadrature: int | None = None) -> "VolumeDensity":
        return VolumeDensity("busemann_hausdorff", quadrature=quadrature)

    @staticmethod
    def riemannian() -> "VolumeDensity":
        return VolumeDensity("riemannian")

    @staticmethod
    def user(expr) -> "VolumeDensity":
        ast = parse_metric(expr) if isinstance(expr, str) else expr
        if "y" in ast_variables(ast):
            raise MetricError("a volume density may only depend on x")
        return VolumeDensity("user", sigma_expr=ast)


_UNIT_BALL_VOLUME = {2: math.pi, 3: 4.0 * math.pi / 3.0}


def density(vol: VolumeDensity, spec: MetricSpec, x, jet_spec: JetSpec) -> Jet:
    """sigma(x) as a jet in the x variables (y-partials all zero)."""
    n = spec.dim
    if jet_spec.num_vars != 2 * n:
        raise MetricError(f"jet spec needs {2 * n} variables")
    xs = [Jet.variable(i, np.asarray(x[i], dtype=float), jet_spec)
          for i in range(n)]

    if vol.kind == "user":
        out = eval_ast(vol.sigma_expr, xs, [])
        if not isinstance(out, Jet):
            out = Jet.constant(out, jet_spec)
        return _require_positive(out)

    if vol.kind == "riemannian":
        if spec.family != "riemannian":
            raise MetricError("riemannian volume requires a Riemannian metric")
        det = _expr_det(spec.g_exprs, xs, n)
        if not isinstance(det, Jet):
            det = Jet.constant(det, jet_spec)
        return _require_positive(jets.sqrt(det))

    if vol.kind == "busemann_hausdorff":
        return _require_positive(_bh_density(vol, spec, x, xs, jet_spec))

    raise MetricError(f"unknown volume kind {vol.kind!r}")


def _require_positive(sigma: Jet) -> Jet:
    v = np.asarray(sigma.coeffs[0])
    if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
        raise MetricError("volume density must be positive and finite")
    return sigma


def _expr_det(g_exprs, xs, n: int):
    g = [[eval_ast(g_exprs[i][j], xs, []) for j in range(n)] for i in range(n)]
    if n == 2:
        return g[0][0] * g[1][1] - g[0][1] * g[1][0]
    if n == 3:
        return (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))
    raise MetricError("determinants implemented for n in {2, 3}")


def sphere_quadrature(dim: int, points: int | None,
                      offset: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Direction nodes (dim, Q) and weights for integration over S^{n-1}.

    n=2: trapezoid rule on the circle (spectrally accurate for smooth
    integrands).  n=3: product Gauss-Legendre (polar) x trapezoid
    (azimuthal).  The weights integrate the round measure, total 2*pi
    resp. 4*pi.
    """
    if dim == 2:
        q = points or 2048
        theta = 2 * math.pi * (np.arange(q) + offset) / q
        dirs = np.stack([np.cos(theta), np.sin(theta)])
        weights = np.full(q, 2 * math.pi / q)
        return dirs, weights
    if dim == 3:
        q_az = points or 96
        q_pol = max(4, (points or 96) // 2)
        u, w_pol = np.polynomial.legendre.leggauss(q_pol)
        phi = 2 * math.pi * (np.arange(q_az) + offset) / q_az
        su = np.sqrt(1.0 - u**2)
        dirs = np.stack([
            np.outer(su, np.cos(phi)).ravel(),
            np.outer(su, np.sin(phi)).ravel(),
            np.outer(u, np.ones(q_az)).ravel(),
        ])
        weights = np.outer(w_pol, np.full(q_az, 2 * math.pi / q_az)).ravel()
        return dirs, weights
    raise MetricError("Busemann-Hausdorff quadrature supports n in {2, 3}")


def _bh_density(vol: VolumeDensity, spec: MetricSpec, x, xs: list[Jet],
                jet_spec: JetSpec) -> Jet:
    """vol(Euclidean unit ball) / vol{y : F(x, y) < 1} via r(d) = 1/F(x, d)."""
    n = spec.dim
    dirs, weights = sphere_quadrature(n, vol.quadrature)
    x_arr = np.asarray(x, dtype=float)
    batch = x_arr.ndim == 2
    n_x = x_arr.shape[1] if batch else 1

    total = None
    chunk = max(1, 65536 // max(1, n_x))
    for start in range(0, dirs.shape[1], chunk):
        d = dirs[:, start:start + chunk]
        w = weights[start:start + chunk]
        q = d.shape[1]
        if batch:
            xs_blk = [Jet.variable(i, np.repeat(x_arr[i], q), jet_spec)
                      for i in range(n)]
            ys_blk = [Jet.constant(np.tile(d[i], n_x), jet_spec)
                      for i in range(n)]
            w_blk = np.tile(w, n_x)
        else:
            xs_blk = [Jet.variable(i, np.full(q, x_arr[i]), jet_spec)
                      for i in range(n)]
            ys_blk = [Jet.constant(d[i], jet_spec) for i in range(n)]
            w_blk = w
        f = spec.evaluate(xs_blk, ys_blk)
        fv = np.asarray(f.coeffs[0])
        if np.any(~np.isfinite(fv)) or np.any(fv <= 0.0):
            raise MetricError("nonpositive radius in Busemann-Hausdorff "
                              "quadrature (metric not positive on sphere)")
        rn = f._int_pow(-n)
        if batch:
            contrib = (rn.coeffs.reshape(jet_spec.size, n_x, q)
                       * w.reshape(1, 1, q)).sum(axis=2)
        else:
            contrib = rn.coeffs @ w_blk
        total = contrib if total is None else total + contrib

    ball = Jet(jet_spec, total / n)
    return _UNIT_BALL_VOLUME[n] / ball


# ---------------------------------------------------------------------------
# Strong-convexity guard
# ---------------------------------------------------------------------------

@dataclass
class ConvexitySample:
    x: np.ndarray
    y: np.ndarray
    F: float
    min_eigenvalue: float
    ok: bool


@dataclass
class ConvexityReport:
    samples: list
    all_ok: bool


def check_strong_convexity(spec: MetricSpec, samples) -> ConvexityReport:
    """Minimum eigenvalue of g at each sample; flags non-convex points."""
    from .fundamentals import metric_tensor_at

    records = []
    for x, y in samples:
        try:
            F, g = metric_tensor_at(spec, x, y)
            eig = float(np.linalg.eigvalsh(g).min())
            ok = eig > 0.0 and F > 0.0
        except (MetricError, ValueError) as err:
            F, eig, ok = float("nan"), float("nan"), False
            records.append(ConvexitySample(np.asarray(x), np.asarray(y),
                                           F, eig, ok))
            continue
        records.append(ConvexitySample(np.asarray(x, dtype=float),
                                       np.asarray(y, dtype=float),
                                       F, eig, ok))
    return ConvexityReport(records, all(r.ok for r in records))


# ---------------------------------------------------------------------------
# Built-in metric zoo and config loading
# ---------------------------------------------------------------------------

def builtin_metric(name: str) -> MetricSpec:
    """Named metrics used throughout the verification suite."""
    key = name.lower().replace("_", "-")
    if key == "euclidean":
        return MetricSpec.riemannian([["1", "0"], ["0", "1"]], 2,
                                     domain=_box(2, 1.0), name="euclidean")
    if key == "sphere":
        # round 2-sphere in the stereographic chart, curvature +1
        conf = "4/(1+x1^2+x2^2)^2"
        return MetricSpec.riemannian([[conf, "0"], ["0", conf]], 2,
                                     domain=_box(2, 1.0), name="sphere")
    if key in ("quartic-minkowski", "quartic"):
        return MetricSpec.minkowski("(y1^4+y2^4)^0.25", 2,
                                    domain=_box(2, 1.0),
                                    name="quartic-minkowski")
    if key == "randers-berwald":
        return MetricSpec.randers([["1", "0"], ["0", "1"]], ["0.3", "0"], 2,
                                  domain=_box(2, 1.0), name="randers-berwald")
    if key == "randers-generic":
        return MetricSpec.randers([["1", "0"], ["0", "1"]],
                                  ["0.3*x2", "0"], 2,
                                  domain=_box(2, 0.8), name="randers-generic")
    if key == "funk2":
        return MetricSpec.funk(2, name="funk2")
    if key == "funk3":
        return MetricSpec.funk(3, name="funk3")
    raise MetricError(f"unknown builtin metric {name!r}; choices: "
                      "euclidean, sphere, quartic-minkowski, randers-berwald, "
                      "randers-generic, funk2, funk3")


ZOO = ("euclidean", "sphere", "quartic-minkowski", "randers-berwald",
       "randers-generic", "funk2", "funk3")


def load_metric_config(path: str | Path) -> tuple[MetricSpec, VolumeDensity]:
    """Load a metric + volume choice from a JSON config file."""
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    return metric_from_config(raw)


def metric_from_config(raw: dict) -> tuple[MetricSpec, VolumeDensity]:
    if "builtin" in raw:
        spec = builtin_metric(raw["builtin"])
    else:
        dim = int(raw["dimension"])
        family = raw["family"]
        domain = None
        if "domain" in raw:
            domain = Domain("box", tuple(tuple(map(float, b))
                                         for b in raw["domain"]))
        name = raw.get("name", family)
        if family == "riemannian":
            spec = MetricSpec.riemannian(raw["g"], dim, domain, name)
        elif family == "randers":
            spec = MetricSpec.randers(raw["alpha"], raw["beta"], dim,
                                      domain, name)
        elif family == "minkowski":
            spec = MetricSpec.minkowski(raw["expression"], dim, domain, name)
        elif family == "funk":
            spec = MetricSpec.funk(dim, name)
        elif family == "expression":
            spec = MetricSpec.expression(raw["expression"], dim, domain, name)
        else:
            raise MetricError(f"unknown family {family!r}")
    vol = volume_from_config(raw.get("volume", {}))
    return spec, vol


def volume_from_config(raw: dict) -> VolumeDensity:
    kind = raw.get("kind", "bh")
    quad = raw.get("quadrature_points")
    if kind in ("bh", "busemann_hausdorff"):
        return VolumeDensity.busemann_hausdorff(quad)
    if kind == "riemannian":
        return VolumeDensity.riemannian()
    if kind == "user":
        return VolumeDensity.user(raw["sigma"])
    if kind.startswith("user:"):
        return VolumeDensity.user(kind[len("user:"):])
    raise MetricError(f"unknown volume kind {kind!r}")
