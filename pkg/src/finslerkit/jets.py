"""Truncated multivariate Taylor-jet arithmetic.

A :class:`Jet` stores the Taylor coefficients of a smooth scalar at a base
point, truncated at a total degree: the entry for multi-index ``m`` holds
``partial^m f / m!``.  Sums, products, quotients and compositions with
analytic functions propagate whole truncated expansions, so every mixed
partial of a composite expression is exact to machine rounding.

Coefficients may carry a trailing batch axis, in which case a single Jet
represents the same expression expanded at many base points simultaneously.
All operations are pure; jets are never mutated in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "JetSpec",
    "Jet",
    "seed_variable",
    "arith",
    "elementary",
    "extract_partial",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "power",
]


def n_coeffs(num_vars: int, order: int) -> int:
    """Number of multi-indices with |m| <= order in num_vars variables."""
    return math.comb(num_vars + order, order)


class _Tables:
    """Precomputed index tables for one (num_vars, order) pair.

    Multi-indices are stored in graded lexicographic order, so the indices
    of degree <= k form a prefix of the full table; truncating a jet is a
    slice.  The multiplication table lists every coefficient pair whose
    degrees sum to at most `order`, sorted by destination index so that the
    truncated Cauchy product is one gather-multiply-reduceat pass.
    """

    def __init__(self, num_vars: int, order: int):
        self.num_vars = num_vars
        self.order = order

        exps = []
        for deg in range(order + 1):
            exps.extend(sorted(_compositions(deg, num_vars)))
        self.exponents = np.array(exps, dtype=np.int64)
        self.size = len(exps)
        self.degrees = self.exponents.sum(axis=1)

        # Mixed-radix keys: component-wise sums of valid pairs never carry.
        radix = order + 1
        weights = radix ** np.arange(num_vars, dtype=np.int64)
        self._weights = weights
        keys = self.exponents @ weights
        lookup = np.full(radix**num_vars, -1, dtype=np.int64)
        lookup[keys] = np.arange(self.size)
        self._keys = keys
        self._lookup = lookup

        ia_parts, ib_parts = [], []
        for d1 in range(order + 1):
            sel = np.nonzero(self.degrees == d1)[0]
            limit = n_coeffs(num_vars, order - d1)
            ia_parts.append(np.repeat(sel, limit))
            ib_parts.append(np.tile(np.arange(limit), len(sel)))
        ia = np.concatenate(ia_parts)
        ib = np.concatenate(ib_parts)
        dst = lookup[keys[ia] + keys[ib]]
        sort = np.argsort(dst, kind="stable")
        self.mul_ia = ia[sort]
        self.mul_ib = ib[sort]
        dst = dst[sort]
        self.mul_seg = np.searchsorted(dst, np.arange(self.size))

        # partial-derivative shift tables: target layouts are prefixes of
        # the (order-1) table, so one gather produces the derivative jet.
        self.shift_src = []
        self.shift_mult = []
        if order >= 1:
            tgt = n_coeffs(num_vars, order - 1)
            for var in range(num_vars):
                src = lookup[keys[:tgt] + weights[var]]
                self.shift_src.append(src)
                self.shift_mult.append(self.exponents[:tgt, var] + 1.0)

        fact = np.ones(self.size)
        for var in range(num_vars):
            col = self.exponents[:, var]
            fact *= np.array([math.factorial(int(e)) for e in col])
        self.factorials = fact

    def index_of(self, multi: Sequence[int]) -> int:
        key = int(np.dot(np.asarray(multi, dtype=np.int64), self._weights))
        idx = int(self._lookup[key])
        if idx < 0:
            raise ValueError(f"multi-index {tuple(multi)} not in table")
        return idx


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


_TABLE_CACHE: dict[tuple[int, int], _Tables] = {}


def _tables(num_vars: int, order: int) -> _Tables:
    key = (num_vars, order)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = _Tables(num_vars, order)
    return _TABLE_CACHE[key]


@dataclass(frozen=True)
class JetSpec:
    """Shape of a jet: number of variables and truncation order."""

    num_vars: int
    max_order: int = 6

    def __post_init__(self):
        # order-0 specs arise internally as fully differentiated constants;
        # user-constructed jets should start at order >= 1
        if self.max_order < 0:
            raise ValueError("max_order must be >= 1")
        if self.num_vars < 2 or self.num_vars % 2 != 0:
            raise ValueError("num_vars must be even and >= 2")

    @property
    def tables(self) -> _Tables:
        return _tables(self.num_vars, self.max_order)

    @property
    def size(self) -> int:
        return n_coeffs(self.num_vars, self.max_order)


class Jet:
    """A truncated Taylor expansion; coefficients indexed by multi-index.

    ``coeffs`` has shape ``(size,)`` or ``(size, batch)``.
    """

    __slots__ = ("spec", "coeffs")
    __array_ufunc__ = None  # keep numpy from broadcasting over us

    def __init__(self, spec: JetSpec, coeffs: np.ndarray):
        self.spec = spec
        self.coeffs = coeffs

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value, spec: JetSpec) -> "Jet":
        value = np.asarray(value, dtype=float)
        shape = (spec.size,) if value.ndim == 0 else (spec.size,) + value.shape
        coeffs = np.zeros(shape)
        coeffs[0] = value
        return cls(spec, coeffs)

    @classmethod
    def variable(cls, index: int, value, spec: JetSpec) -> "Jet":
        if not 0 <= index < spec.num_vars:
            raise ValueError(f"variable index {index} out of range "
                             f"(num_vars={spec.num_vars})")
        jet = cls.constant(value, spec)
        unit = spec.tables.index_of(tuple(int(i == index)
                                          for i in range(spec.num_vars)))
        jet.coeffs[unit] = 1.0
        return jet

    # -- basic views -------------------------------------------------------

    @property
    def order(self) -> int:
        return self.spec.max_order

    @property
    def value(self):
        """Constant term: the function value at the base point."""
        v = self.coeffs[0]
        return float(v) if np.ndim(v) == 0 else np.array(v)

    def truncated(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError("cannot raise truncation order of a jet")
        spec = JetSpec(self.spec.num_vars, order)
        return Jet(spec, self.coeffs[: spec.size])

    def partial(self, var: int) -> "Jet":
        """Jet of the partial derivative w.r.t. variable `var`, one order lower."""
        if self.order < 1:
            raise ValueError("jet truncation order exhausted; "
                             "increase max_order")
        if not 0 <= var < self.spec.num_vars:
            raise ValueError(f"variable index {var} out of range")
        t = self.spec.tables
        spec = JetSpec(self.spec.num_vars, self.order - 1)
        coeffs = self.coeffs[t.shift_src[var]]
        mult = t.shift_mult[var]
        if self.coeffs.ndim == 2:
            mult = mult[:, None]
        return Jet(spec, coeffs * mult)

    def gradient(self, variables: Sequence[int]) -> list:
        """Values of first partials w.r.t. the listed variables."""
        t = self.spec.tables
        out = []
        for var in variables:
            unit = tuple(int(i == var) for i in range(self.spec.num_vars))
            v = self.coeffs[t.index_of(unit)]
            out.append(float(v) if np.ndim(v) == 0 else np.array(v))
        return out

    def __repr__(self):
        batch = "" if self.coeffs.ndim == 1 else f", batch={self.coeffs.shape[1]}"
        return (f"Jet(num_vars={self.spec.num_vars}, order={self.order}, "
                f"value={np.asarray(self.coeffs[0])!r}{batch})")

    # -- arithmetic --------------------------------------------------------

    def _align(self, other) -> tuple["Jet", "Jet"]:
        if not isinstance(other, Jet):
            raise TypeError(f"cannot combine Jet with {type(other).__name__}")
        if other.spec.num_vars != self.spec.num_vars:
            raise ValueError("jet spec mismatch: "
                             f"{self.spec.num_vars} vs {other.spec.num_vars} variables")
        order = min(self.order, other.order)
        return self.truncated(order), other.truncated(order)

    @staticmethod
    def _is_scalar(v) -> bool:
        return isinstance(v, (int, float, np.floating, np.integer)) or (
            isinstance(v, np.ndarray) and v.ndim <= 1)

    def _lift(self, v) -> "Jet":
        return Jet.constant(v, self.spec)

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.spec, _bcast(a.coeffs, b.coeffs, np.add))
        if self._is_scalar(other):
            coeffs = _promote(self.coeffs, np.asarray(other, dtype=float))
            coeffs[0] += other
            return Jet(self.spec, coeffs)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.spec, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.spec, _bcast(a.coeffs, b.coeffs, np.subtract))
        if self._is_scalar(other):
            return self + (-np.asarray(other, dtype=float))
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            t = a.spec.tables
            prod = _bcast(a.coeffs[t.mul_ia], b.coeffs[t.mul_ib], np.multiply)
            return Jet(a.spec, np.add.reduceat(prod, t.mul_seg, axis=0))
        if self._is_scalar(other):
            scale = np.asarray(other, dtype=float)
            if scale.ndim == 0 or self.coeffs.ndim == 2:
                return Jet(self.spec, self.coeffs * scale)
            return Jet(self.spec, self.coeffs[:, None] * scale[None, :])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return a * b.reciprocal()
        if self._is_scalar(other):
            return self * (1.0 / np.asarray(other, dtype=float))
        return NotImplemented

    def __rtruediv__(self, other):
        if self._is_scalar(other):
            return self.reciprocal() * other
        return NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            raise TypeError("jet exponents are not supported; "
                            "exponent must be a constant")
        r = float(exponent)
        if r == round(r):
            return self._int_pow(int(round(r)))
        c = self._domain_value("pow", positive=True)
        return self._compose(_pow_series(c, r, self.order))

    def _int_pow(self, k: int) -> "Jet":
        if k < 0:
            return self.reciprocal()._int_pow(-k)
        result = Jet.constant(np.ones(self.coeffs.shape[1:]), self.spec) \
            if self.coeffs.ndim == 2 else Jet.constant(1.0, self.spec)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def reciprocal(self) -> "Jet":
        c = np.asarray(self.coeffs[0])
        if np.any(c == 0.0):
            raise ZeroDivisionError("division by a jet with zero constant term")
        return self._compose(_recip_series(c, self.order))

    # -- composition with univariate series --------------------------------

    def _domain_value(self, fn: str, positive: bool) -> np.ndarray:
        c = np.asarray(self.coeffs[0])
        if positive and np.any(c <= 0.0):
            raise ValueError(f"{fn} requires a positive constant term, "
                             f"got {c.min() if c.ndim else float(c)}")
        return c

    def _compose(self, series: np.ndarray) -> "Jet":
        """Evaluate sum_k series[k] * (self - self.value)^k by Horner."""
        h = Jet(self.spec, self.coeffs.copy())
        h.coeffs[0] = 0.0
        result = Jet.constant(series[-1], self.spec)
        for k in range(len(series) - 2, -1, -1):
            result = result * h
            coeffs = _promote(result.coeffs, np.asarray(series[k]))
            coeffs[0] += series[k]
            result = Jet(self.spec, coeffs)
        return result


def _promote(coeffs: np.ndarray, value: np.ndarray) -> np.ndarray:
    """Copy of `coeffs`, broadcast against a possibly-batched constant."""
    if value.ndim > 0 and coeffs.ndim == 1:
        return np.repeat(coeffs[:, None], value.shape[0], axis=1)
    return coeffs.copy()


def _bcast(a: np.ndarray, b: np.ndarray, op) -> np.ndarray:
    if a.ndim < b.ndim:
        a = a[:, None]
    elif b.ndim < a.ndim:
        b = b[:, None]
    return op(a, b)


# -- univariate Taylor coefficient tables ----------------------------------

def _recip_series(c, order: int) -> np.ndarray:
    coef = [1.0 / c]
    for _ in range(order):
        coef.append(-coef[-1] / c)
    return np.array(coef)


def _pow_series(c, r: float, order: int) -> np.ndarray:
    coef = [np.power(c, r)]
    binom = 1.0
    for k in range(1, order + 1):
        binom *= (r - k + 1) / k
        coef.append(binom * np.power(c, r - k))
    return np.array(coef)


def _exp_series(c, order: int) -> np.ndarray:
    base = np.exp(c)
    return np.array([base / math.factorial(k) for k in range(order + 1)])


def _log_series(c, order: int) -> np.ndarray:
    coef = [np.log(c)]
    for k in range(1, order + 1):
        coef.append((-1.0) ** (k + 1) / (k * np.power(c, float(k))))
    return np.array(coef)


def _sin_series(c, order: int) -> np.ndarray:
    return np.array([np.sin(c + k * math.pi / 2) / math.factorial(k)
                     for k in range(order + 1)])


def _cos_series(c, order: int) -> np.ndarray:
    return np.array([np.cos(c + k * math.pi / 2) / math.factorial(k)
                     for k in range(order + 1)])


# -- spec-level operations --------------------------------------------------

def seed_variable(index: int, value, spec: JetSpec) -> Jet:
    """Jet of the coordinate function `index` with the given base value."""
    return Jet.variable(index, value, spec)


def arith(a: Jet, b: Jet, op: str) -> Jet:
    """Binary arithmetic on jets sharing one spec."""
    if a.spec != b.spec:
        raise ValueError(f"jet spec mismatch: {a.spec} vs {b.spec}")
    try:
        return {"add": a.__add__, "sub": a.__sub__,
                "mul": a.__mul__, "div": a.__truediv__}[op](b)
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None


def elementary(a: Jet, fn: str, r: float | None = None) -> Jet:
    """Compose a jet with an elementary analytic function."""
    if fn == "pow":
        if r is None:
            raise ValueError("pow requires an exponent")
        return a**r
    table = {"sqrt": sqrt, "exp": exp, "log": log, "sin": sin, "cos": cos}
    if fn not in table:
        raise ValueError(f"unknown elementary function {fn!r}")
    return table[fn](a)


def extract_partial(a: Jet, multi_index: Sequence[int]) -> float | np.ndarray:
    """Mixed partial derivative partial^m f at the base point."""
    multi = tuple(int(m) for m in multi_index)
    if len(multi) != a.spec.num_vars:
        raise ValueError(f"multi-index length {len(multi)} != "
                         f"num_vars {a.spec.num_vars}")
    if any(m < 0 for m in multi):
        raise ValueError("multi-index entries must be nonnegative")
    if sum(multi) > a.order:
        raise ValueError(f"total degree {sum(multi)} exceeds "
                         f"truncation order {a.order}")
    t = a.spec.tables
    idx = t.index_of(multi)
    v = a.coeffs[idx] * t.factorials[idx]
    return float(v) if np.ndim(v) == 0 else np.array(v)


# -- float/jet dispatching elementary functions ------------------------------

def sqrt(v):
    if isinstance(v, Jet):
        c = v._domain_value("sqrt", positive=True)
        return v._compose(_pow_series(c, 0.5, v.order))
    return np.sqrt(v)


def exp(v):
    if isinstance(v, Jet):
        return v._compose(_exp_series(np.asarray(v.coeffs[0]), v.order))
    return np.exp(v)


def log(v):
    if isinstance(v, Jet):
        c = v._domain_value("log", positive=True)
        return v._compose(_log_series(c, v.order))
    return np.log(v)


def sin(v):
    if isinstance(v, Jet):
        return v._compose(_sin_series(np.asarray(v.coeffs[0]), v.order))
    return np.sin(v)


def cos(v):
    if isinstance(v, Jet):
        return v._compose(_cos_series(np.asarray(v.coeffs[0]), v.order))
    return np.cos(v)


def power(v, r):
    if isinstance(v, Jet):
        return v**r
    return np.power(v, r)
