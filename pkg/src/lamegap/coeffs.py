"""Exact arithmetic in the field of rational functions of the Lame parameters.

Coefficients throughout the symbolic layer are elements of Q(lam, mu): ratios
of integer-coefficient polynomials in the two formal Lame parameters.  All
arithmetic is exact (Python integers), every value is kept in a canonical
reduced form, and equality is representation-independent.

Canonical form of a ratio num/den:

* gcd(num, den) over Z[lam, mu] is a unit,
* the pair carries no common integer content,
* den has a positive leading coefficient under graded lexicographic order
  with lam > mu.

Text rendering uses ``l`` for lam and ``m`` for mu, e.g.
``((2*l + 3*m)) / (3*(l + 2*m))``; :func:`parse` accepts the same grammar.
"""

from __future__ import annotations

import ast
import math
from fractions import Fraction
from typing import Mapping

__all__ = [
    "ParamPoly",
    "RationalCoeff",
    "CoeffError",
    "CoeffDivisionError",
    "CoeffPoleError",
    "LAM",
    "MU",
    "ONE",
    "ZERO",
    "parse",
]


class CoeffError(ValueError):
    """Base error for coefficient-field operations."""


class CoeffDivisionError(CoeffError, ZeroDivisionError):
    """Division by the zero coefficient."""


class CoeffPoleError(CoeffError, ZeroDivisionError):
    """Evaluation at a point where the denominator vanishes."""


def _grlex_key(expo: tuple[int, int]) -> tuple[int, int, int]:
    i, j = expo
    return (i + j, i, j)


class ParamPoly:
    """Polynomial in (lam, mu) with integer coefficients.

    Stored as a mapping ``(deg_lam, deg_mu) -> int`` with no zero entries.
    Instances are immutable and hashable.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], int] | None = None):
        clean: dict[tuple[int, int], int] = {}
        if terms:
            for (i, j), c in terms.items():
                if c:
                    if i < 0 or j < 0:
                        raise CoeffError("negative exponent in ParamPoly")
                    clean[(int(i), int(j))] = int(c)
        self._terms = clean
        self._hash: int | None = None

    # -- constructors -------------------------------------------------

    @classmethod
    def const(cls, c: int) -> "ParamPoly":
        return cls({(0, 0): int(c)})

    @classmethod
    def lam(cls) -> "ParamPoly":
        return cls({(1, 0): 1})

    @classmethod
    def mu(cls) -> "ParamPoly":
        return cls({(0, 1): 1})

    # -- basic protocol -----------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, int], int]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParamPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"ParamPoly({self.render()})"

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "ParamPoly") -> "ParamPoly":
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return ParamPoly(out)

    def __neg__(self) -> "ParamPoly":
        return ParamPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "ParamPoly") -> "ParamPoly":
        return self + (-other)

    def __mul__(self, other: "ParamPoly") -> "ParamPoly":
        out: dict[tuple[int, int], int] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                k = (i1 + i2, j1 + j2)
                s = out.get(k, 0) + c1 * c2
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return ParamPoly(out)

    def __pow__(self, n: int) -> "ParamPoly":
        if n < 0:
            raise CoeffError("negative power of ParamPoly")
        result = ParamPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: int) -> "ParamPoly":
        if c == 0:
            return ParamPoly()
        return ParamPoly({k: c * v for k, v in self._terms.items()})

    # -- structure -----------------------------------------------------

    def leading(self) -> tuple[tuple[int, int], int]:
        """Leading (exponent, coefficient) under grlex with lam > mu."""
        if not self._terms:
            raise CoeffError("zero polynomial has no leading term")
        k = max(self._terms, key=_grlex_key)
        return k, self._terms[k]

    def content(self) -> int:
        """Integer content carrying the sign of the leading coefficient."""
        if not self._terms:
            return 0
        g = 0
        for c in self._terms.values():
            g = math.gcd(g, abs(c))
        _, lead = self.leading()
        return g if lead > 0 else -g

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(i + j for i, j in self._terms)

    def evaluate(self, lam: Fraction, mu: Fraction) -> Fraction:
        acc = Fraction(0)
        for (i, j), c in self._terms.items():
            acc += c * lam**i * mu**j
        return acc

    def exact_div(self, d: "ParamPoly") -> "ParamPoly":
        """Exact polynomial division; raises if d does not divide self."""
        if d.is_zero():
            raise CoeffDivisionError("division by zero polynomial")
        if self.is_zero():
            return ParamPoly()
        rem = dict(self._terms)
        out: dict[tuple[int, int], int] = {}
        (dk, dc) = d.leading()
        while rem:
            rk = max(rem, key=_grlex_key)
            rc = rem[rk]
            qi, qj = rk[0] - dk[0], rk[1] - dk[1]
            if qi < 0 or qj < 0 or rc % dc:
                raise CoeffError("exact_div: not divisible")
            qc = rc // dc
            out[(qi, qj)] = qc
            for (i, j), c in d._terms.items():
                k = (i + qi, j + qj)
                s = rem.get(k, 0) - qc * c
                if s:
                    rem[k] = s
                else:
                    rem.pop(k, None)
        return ParamPoly(out)

    def derivative(self, var: int) -> "ParamPoly":
        """d/d(lam) for var=0, d/d(mu) for var=1 (used in tests only)."""
        out: dict[tuple[int, int], int] = {}
        for (i, j), c in self._terms.items():
            e = (i, j)[var]
            if e:
                k = (i - 1, j) if var == 0 else (i, j - 1)
                out[k] = out.get(k, 0) + c * e
        return ParamPoly(out)

    # -- rendering -----------------------------------------------------

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts: list[str] = []
        for (i, j) in sorted(self._terms, key=_grlex_key, reverse=True):
            c = self._terms[(i, j)]
            mono: list[str] = []
            if abs(c) != 1 or (i == 0 and j == 0):
                mono.append(str(abs(c)))
            if i:
                mono.append("l" if i == 1 else f"l**{i}")
            if j:
                mono.append("m" if j == 1 else f"m**{j}")
            body = "*".join(mono)
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)


# ---------------------------------------------------------------------------
# Polynomial gcd over Z[lam, mu] via primitive PRS, recursing on variables.
# Polynomials are small (degrees rarely exceed ~10), so the primitive PRS is
# entirely adequate; no factorization is attempted.
# ---------------------------------------------------------------------------


def _uni_from(p: ParamPoly, main: int) -> dict[int, dict[int, int]]:
    """View p as univariate in variable `main` with Z[other] coefficients."""
    out: dict[int, dict[int, int]] = {}
    for (i, j), c in p.terms.items():
        e = (i, j)[main]
        o = (i, j)[1 - main]
        out.setdefault(e, {})[o] = c
    return out


def _uni_to(coeffs: dict[int, dict[int, int]], main: int) -> ParamPoly:
    terms: dict[tuple[int, int], int] = {}
    for e, inner in coeffs.items():
        for o, c in inner.items():
            key = (e, o) if main == 0 else (o, e)
            terms[key] = c
    return ParamPoly(terms)


def _z_poly_gcd(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    """gcd in Z[x] of dense-dict univariate integer polynomials."""

    def content(p: dict[int, int]) -> int:
        g = 0
        for c in p.values():
            g = math.gcd(g, abs(c))
        return g

    def primitive(p: dict[int, int]) -> dict[int, int]:
        g = content(p)
        return {e: c // g for e, c in p.items()} if g else {}

    def degree(p: dict[int, int]) -> int:
        return max(p) if p else -1

    def pseudo_rem(f: dict[int, int], g: dict[int, int]) -> dict[int, int]:
        dg = degree(g)
        lg = g[dg]
        r = dict(f)
        while r and degree(r) >= dg:
            dr = degree(r)
            lr = r[dr]
            # r <- lg*r - lr * x^(dr-dg) * g
            new: dict[int, int] = {e: lg * c for e, c in r.items()}
            for e, c in g.items():
                k = e + dr - dg
                s = new.get(k, 0) - lr * c
                if s:
                    new[k] = s
                else:
                    new.pop(k, None)
            r = new
        return r

    if not a:
        return dict(b)
    if not b:
        return dict(a)
    ca, cb = content(a), content(b)
    f, g = primitive(a), primitive(b)
    if degree(f) < degree(g):
        f, g = g, f
    while g:
        r = primitive(pseudo_rem(f, g))
        f, g = g, r
    out = {e: c * math.gcd(ca, cb) for e, c in f.items()}
    if out[degree(out)] < 0:
        out = {e: -c for e, c in out.items()}
    return out


def poly_gcd(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    """gcd over Z[lam, mu], positive leading coefficient under grlex."""
    if a.is_zero():
        g = b
    elif b.is_zero():
        g = a
    else:
        ua, ub = _uni_from(a, 0), _uni_from(b, 0)

        def content_poly(u: dict[int, dict[int, int]]) -> dict[int, int]:
            g: dict[int, int] = {}
            for inner in u.values():
                g = _z_poly_gcd(g, inner)
            return g

        def mul_uni(p: dict[int, int], q: dict[int, int]) -> dict[int, int]:
            out: dict[int, int] = {}
            for e1, c1 in p.items():
                for e2, c2 in q.items():
                    k = e1 + e2
                    s = out.get(k, 0) + c1 * c2
                    if s:
                        out[k] = s
                    else:
                        out.pop(k, None)
            return out

        ca, cb = content_poly(ua), content_poly(ub)
        cont = _z_poly_gcd(ca, cb)
        pa = _mu_primitive(ua, ca)
        pb = _mu_primitive(ub, cb)
        prim = _lam_prs(pa, pb)
        g = _uni_to({e: inner for e, inner in prim.items()}, 0) * _uni_to({0: cont}, 0)
    if g.is_zero():
        return g
    _, lead = g.leading()
    return g.scale(-1) if lead < 0 else g


def _mu_primitive(
    u: dict[int, dict[int, int]], cont: dict[int, int]
) -> dict[int, dict[int, int]]:
    if not cont:
        return {}
    out: dict[int, dict[int, int]] = {}
    for e, inner in u.items():
        out[e] = _exact_uni_div(inner, cont)
    return out


def _exact_uni_div(f: dict[int, int], d: dict[int, int]) -> dict[int, int]:
    dd = max(d)
    ld = d[dd]
    r = dict(f)
    out: dict[int, int] = {}
    while r:
        dr = max(r)
        lr = r[dr]
        if dr < dd or lr % ld:
            raise CoeffError("exact univariate division failed")
        q = lr // ld
        out[dr - dd] = q
        for e, c in d.items():
            k = e + dr - dd
            s = r.get(k, 0) - q * c
            if s:
                r[k] = s
            else:
                r.pop(k, None)
    return out


def _lam_prs(
    f: dict[int, dict[int, int]], g: dict[int, dict[int, int]]
) -> dict[int, dict[int, int]]:
    """Primitive PRS in lam over Z[mu]; both inputs mu-primitive."""

    def degree(p: dict[int, dict[int, int]]) -> int:
        return max(p) if p else -1

    def mul_c(p: dict[int, dict[int, int]], c: dict[int, int]):
        out: dict[int, dict[int, int]] = {}
        for e, inner in p.items():
            acc: dict[int, int] = {}
            for e1, c1 in inner.items():
                for e2, c2 in c.items():
                    k = e1 + e2
                    s = acc.get(k, 0) + c1 * c2
                    if s:
                        acc[k] = s
                    else:
                        acc.pop(k, None)
            if acc:
                out[e] = acc
        return out

    def sub(p, q):
        out = {e: dict(inner) for e, inner in p.items()}
        for e, inner in q.items():
            acc = out.setdefault(e, {})
            for k, c in inner.items():
                s = acc.get(k, 0) - c
                if s:
                    acc[k] = s
                else:
                    acc.pop(k, None)
            if not acc:
                out.pop(e)
        return out

    def shift(p, k):
        return {e + k: inner for e, inner in p.items()}

    def primitive(p):
        cont: dict[int, int] = {}
        for inner in p.values():
            cont = _z_poly_gcd(cont, inner)
        if not cont:
            return {}
        return _mu_primitive(p, cont)

    if degree(f) < degree(g):
        f, g = g, f
    while g:
        # pseudo-division of f by g in lam
        dg = degree(g)
        lg = g[dg]
        r = f
        while r and degree(r) >= dg:
            dr = degree(r)
            lr = r[dr]
            r = sub(mul_c(r, lg), shift(mul_c(g, lr), dr - dg))
        f, g = g, primitive(r)
    return primitive(f)


class RationalCoeff:
    """Reduced ratio of ParamPoly's; the scalar field of the term algebra.

    Immutable; arithmetic returns new values in canonical form, so exact
    equality of representations coincides with mathematical equality.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: ParamPoly, den: ParamPoly | None = None, *, _reduced: bool = False):
        if den is None:
            den = ParamPoly.const(1)
        if den.is_zero():
            raise CoeffDivisionError("zero denominator")
        if not _reduced:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den
        self._hash: int | None = None

    # -- constructors -------------------------------------------------

    @classmethod
    def from_int(cls, c: int) -> "RationalCoeff":
        return cls(ParamPoly.const(c), ParamPoly.const(1), _reduced=True)

    @classmethod
    def from_fraction(cls, q: Fraction | int) -> "RationalCoeff":
        q = Fraction(q)
        return cls(ParamPoly.const(q.numerator), ParamPoly.const(q.denominator))

    # -- protocol -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = RationalCoeff.from_int(other)
        if not isinstance(other, RationalCoeff):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self) -> str:
        return f"RationalCoeff({self.render()})"

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "RationalCoeff") -> "RationalCoeff":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.den == other.den:
            return RationalCoeff(self.num + other.num, self.den)
        return RationalCoeff(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "RationalCoeff":
        return RationalCoeff(-self.num, self.den, _reduced=True)

    def __sub__(self, other: "RationalCoeff") -> "RationalCoeff":
        return self + (-other)

    def __mul__(self, other: "RationalCoeff") -> "RationalCoeff":
        if self.is_zero() or other.is_zero():
            return ZERO
        # cross-reduce to keep intermediate sizes down
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num.exact_div(g1) if not _is_one(g1) else self.num
        d2 = other.den.exact_div(g1) if not _is_one(g1) else other.den
        n2 = other.num.exact_div(g2) if not _is_one(g2) else other.num
        d1 = self.den.exact_div(g2) if not _is_one(g2) else self.den
        return RationalCoeff(n1 * n2, d1 * d2)

    def __truediv__(self, other: "RationalCoeff") -> "RationalCoeff":
        if other.is_zero():
            raise CoeffDivisionError("division by zero coefficient")
        return self * RationalCoeff(other.den, other.num)

    def inv(self) -> "RationalCoeff":
        if self.is_zero():
            raise CoeffDivisionError("inverse of zero coefficient")
        return RationalCoeff(self.den, self.num)

    def scale(self, q: Fraction | int) -> "RationalCoeff":
        return self * RationalCoeff.from_fraction(Fraction(q))

    # -- evaluation / rendering ------------------------------------------

    def evaluate(self, lam: Fraction | int, mu: Fraction | int) -> Fraction:
        lam, mu = Fraction(lam), Fraction(mu)
        d = self.den.evaluate(lam, mu)
        if d == 0:
            raise CoeffPoleError(f"denominator vanishes at (lam={lam}, mu={mu})")
        return self.num.evaluate(lam, mu) / d

    def render(self) -> str:
        num = self.num.render()
        if self.den == ParamPoly.const(1):
            return num
        c = abs(self.den.content())
        prim = self.den.exact_div(ParamPoly.const(c)) if c != 1 else self.den
        if c != 1 and not _is_one(prim):
            den = f"{c}*({prim.render()})"
        elif c != 1:
            den = str(c)
        else:
            den = f"({prim.render()})" if len(prim.terms) > 1 else prim.render()
        return f"(({num})) / ({den})"


def _is_one(p: ParamPoly) -> bool:
    return p.terms == {(0, 0): 1}


def _reduce(num: ParamPoly, den: ParamPoly) -> tuple[ParamPoly, ParamPoly]:
    if num.is_zero():
        return ParamPoly(), ParamPoly.const(1)
    g = poly_gcd(num, den)
    if not _is_one(g):
        num = num.exact_div(g)
        den = den.exact_div(g)
    _, lead = den.leading()
    if lead < 0:
        num, den = -num, -den
    return num, den


# Shared constants for the formal parameters.
LAM = RationalCoeff(ParamPoly.lam())
MU = RationalCoeff(ParamPoly.mu())
ONE = RationalCoeff.from_int(1)
ZERO = RationalCoeff.from_int(0)


# ---------------------------------------------------------------------------
# Parsing of the rendering grammar (Python expression syntax over l, m).
# ---------------------------------------------------------------------------


def parse(text: str) -> RationalCoeff:
    """Parse a coefficient expression such as ``(2*l + 3*m) / (3*(l + 2*m))``."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise CoeffError(f"cannot parse coefficient {text!r}: {exc}") from exc
    return _from_ast(tree.body)


def _from_ast(node: ast.AST) -> RationalCoeff:
    if isinstance(node, ast.BinOp):
        left, right = _from_ast(node.left), _from_ast(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            return left / right
        if isinstance(node.op, ast.Pow):
            if not (
                isinstance(node.right, ast.Constant)
                and isinstance(node.right.value, int)
                and node.right.value >= 0
            ):
                raise CoeffError("only nonnegative integer powers are allowed")
            n = node.right.value
            out = ONE
            for _ in range(n):
                out = out * left
            return out
        raise CoeffError(f"unsupported operator {ast.dump(node.op)}")
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            return -_from_ast(node.operand)
        if isinstance(node.op, ast.UAdd):
            return _from_ast(node.operand)
        raise CoeffError("unsupported unary operator")
    if isinstance(node, ast.Constant):
        if isinstance(node.value, int):
            return RationalCoeff.from_int(node.value)
        raise CoeffError("only integer literals are allowed")
    if isinstance(node, ast.Name):
        if node.id == "l":
            return LAM
        if node.id == "m":
            return MU
        raise CoeffError(f"unknown symbol {node.id!r} (expected l or m)")
    raise CoeffError(f"unsupported syntax node {type(node).__name__}")
