"""Exact arithmetic in towers of real quadratic extensions of the rationals.

A value lives in a field Q(sqrt(d1))(sqrt(d2))...(sqrt(dk)) where each
radicand d_j is a positive element of the preceding level that is not a
square there.  This is enough for everything the toolkit computes
exactly: table entries, Gram eigenvalues, eigenvector coordinates and
square roots of non-negative values.

Internally a level-k value is a nested pair tree of `Fraction`s: the
level-k representation is ``(lo, hi)`` meaning ``lo + hi*sqrt(dk)`` with
``lo``/``hi`` level-(k-1) representations, and the level-0 representation
is a plain ``Fraction``.  Flattening the tree yields the 2^k rational
coordinates over the multiplicative basis of square-root products.

Every operation is pure; values are immutable and safe to share.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Union

RationalLike = Union[int, Fraction]


# ---------------------------------------------------------------------------
# representation-level helpers (nested pair trees of Fractions)

_F0 = Fraction(0)
_F1 = Fraction(1)


def _zero(level: int):
    rep = _F0
    for lvl in range(level):
        rep = (rep, _zero(lvl))
    return rep


def _lift(rep, frm: int, to: int):
    """Embed a level-`frm` representation into level `to` (lo part, zero hi)."""
    for lvl in range(frm, to):
        rep = (rep, _zero(lvl))
    return rep


def _is_zero(rep, level: int) -> bool:
    if level == 0:
        return rep == 0
    return _is_zero(rep[0], level - 1) and _is_zero(rep[1], level - 1)


def _add(a, b, level: int):
    if level == 0:
        return a + b
    return (_add(a[0], b[0], level - 1), _add(a[1], b[1], level - 1))


def _neg(a, level: int):
    if level == 0:
        return -a
    return (_neg(a[0], level - 1), _neg(a[1], level - 1))


def _sub(a, b, level: int):
    return _add(a, _neg(b, level), level)


def _scale(a, q: Fraction, level: int):
    if level == 0:
        return a * q
    return (_scale(a[0], q, level - 1), _scale(a[1], q, level - 1))


def _mul(a, b, rads, level: int):
    """Multiply two level-`level` representations.

    `rads[j]` is the radicand of level j+1 lifted to a level-j
    representation, so the product of the two sqrt parts can be folded
    back by one more recursive multiplication.
    """
    if level == 0:
        return a * b
    lo1, hi1 = a
    lo2, hi2 = b
    ll = _mul(lo1, lo2, rads, level - 1)
    hh = _mul(hi1, hi2, rads, level - 1)
    lo = _add(ll, _mul(hh, rads[level - 1], rads, level - 1), level - 1)
    hi = _add(_mul(lo1, hi2, rads, level - 1), _mul(hi1, lo2, rads, level - 1), level - 1)
    return (lo, hi)


def _inv(a, rads, level: int):
    if level == 0:
        if a == 0:
            raise ZeroDivisionError("division by zero")
        return 1 / a
    lo, hi = a
    if _is_zero(hi, level - 1):
        return (_inv(lo, rads, level - 1), _zero(level - 1))
    # 1/(lo + hi*sqrt(d)) = (lo - hi*sqrt(d)) / (lo^2 - hi^2*d); the
    # denominator is nonzero because d is a verified non-square.
    d = rads[level - 1]
    denom = _sub(_mul(lo, lo, rads, level - 1),
                 _mul(_mul(hi, hi, rads, level - 1), d, rads, level - 1), level - 1)
    if _is_zero(denom, level - 1):
        raise ZeroDivisionError("division by zero")
    inv_denom = _inv(denom, rads, level - 1)
    return (_mul(lo, inv_denom, rads, level - 1),
            _neg(_mul(hi, inv_denom, rads, level - 1), level - 1))


def _sqrt_fraction(q: Fraction):
    if q < 0:
        return None
    pn, pd = q.numerator, q.denominator
    rn, rd = isqrt(pn), isqrt(pd)
    if rn * rn == pn and rd * rd == pd:
        return Fraction(rn, rd)
    return None


def _sqrt(a, rads, level: int):
    """A level-`level` representation r with r*r == a, or None."""
    if level == 0:
        return _sqrt_fraction(a)
    lo, hi = a
    d = rads[level - 1]
    if _is_zero(hi, level - 1):
        r = _sqrt(lo, rads, level - 1)
        if r is not None:
            return (r, _zero(level - 1))
        # a may be d times a square: sqrt(a) = sqrt(a/d)*sqrt(d)
        q = _mul(lo, _inv(d, rads, level - 1), rads, level - 1)
        r = _sqrt(q, rads, level - 1)
        if r is not None:
            return (_zero(level - 1), r)
        return None
    # a = lo + hi*sqrt(d), hi != 0: any root u + v*sqrt(d) has u, v != 0,
    # u^2 = (lo +/- w)/2 with w^2 = lo^2 - d*hi^2 and v = hi/(2u).
    delta = _sub(_mul(lo, lo, rads, level - 1),
                 _mul(_mul(hi, hi, rads, level - 1), d, rads, level - 1), level - 1)
    w = _sqrt(delta, rads, level - 1)
    if w is None:
        return None
    for s in (w, _neg(w, level - 1)):
        u2 = _scale(_add(lo, s, level - 1), Fraction(1, 2), level - 1)
        u = _sqrt(u2, rads, level - 1)
        if u is not None and not _is_zero(u, level - 1):
            v = _mul(_scale(hi, Fraction(1, 2), level - 1), _inv(u, rads, level - 1),
                     rads, level - 1)
            return (u, v)
    return None


def _sqrt_interval(a: Fraction, b: Fraction, prec: int):
    """Rational bounds on sqrt over [max(a,0), b]."""
    if a < 0:
        a = _F0
    s = 1 << prec
    lo_int = isqrt((a.numerator * s * s) // a.denominator)
    num = b.numerator * s * s
    hi_int = isqrt(-(-num // b.denominator)) + 1
    return Fraction(lo_int, s), Fraction(hi_int, s)


def _flatten(rep, level: int, out, mask: int):
    if level == 0:
        if rep:
            out[mask] = rep
        return
    _flatten(rep[0], level - 1, out, mask)
    _flatten(rep[1], level - 1, out, mask | (1 << (level - 1)))


# ---------------------------------------------------------------------------


class TowerScalar:
    """An exact real number in a tower of quadratic extensions of Q.

    The tower is the ordered tuple of adjoined radicands; each radicand
    is itself a TowerScalar over a prefix of the tower.  Rationals have
    an empty tower.  Construct rationals directly, and radical values
    through :func:`adjoin_sqrt` or arithmetic.
    """

    __slots__ = ("_tower", "_rep")

    def __init__(self, value: RationalLike = 0):
        if isinstance(value, TowerScalar):
            self._tower = value._tower
            self._rep = value._rep
            return
        if not isinstance(value, (int, Fraction)):
            raise TypeError(f"cannot build a TowerScalar from {type(value).__name__}")
        self._tower = ()
        self._rep = Fraction(value)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def _make(cls, tower, rep) -> "TowerScalar":
        # canonical form: drop trailing radicals with zero coordinates
        level = len(tower)
        while level > 0 and _is_zero(rep[1], level - 1):
            rep = rep[0]
            level -= 1
        obj = object.__new__(cls)
        obj._tower = tower[:level]
        obj._rep = rep
        return obj

    @classmethod
    def from_fraction(cls, q: RationalLike) -> "TowerScalar":
        return cls(q)

    # -- basic structure -----------------------------------------------------

    @property
    def tower(self) -> tuple["TowerScalar", ...]:
        """The adjoined radicands, innermost first."""
        return self._tower

    @property
    def level(self) -> int:
        return len(self._tower)

    @property
    def coords(self) -> tuple[Fraction, ...]:
        """2^k rational coordinates over the square-root product basis."""
        out = {}
        _flatten(self._rep, self.level, out, 0)
        return tuple(out.get(m, _F0) for m in range(1 << self.level))

    def is_zero(self) -> bool:
        return _is_zero(self._rep, self.level)

    def is_rational(self) -> bool:
        return self.level == 0

    def as_fraction(self) -> Fraction:
        if self.level != 0:
            raise ValueError(f"{self} is not rational")
        return self._rep

    def _rads(self):
        return tuple(_lift(r._rep, r.level, j) for j, r in enumerate(self._tower))

    # -- tower alignment -----------------------------------------------------

    def _struct_eq(self, other: "TowerScalar") -> bool:
        if self is other:
            return True
        if self._rep != other._rep:
            return False
        return _towers_struct_eq(self._tower, other._tower)

    def _common(self, other: "TowerScalar"):
        if _towers_prefix(self._tower, other._tower):
            rep = _lift(self._rep, self.level, other.level)
            return other._tower, rep, other._rep
        if _towers_prefix(other._tower, self._tower):
            rep = _lift(other._rep, other.level, self.level)
            return self._tower, self._rep, rep
        tower, rep2 = _merge_into(self._tower, other)
        rep1 = _lift(self._rep, self.level, len(tower))
        return tower, rep1, rep2

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _coerce(value):
        if isinstance(value, TowerScalar):
            return value
        if isinstance(value, (int, Fraction)):
            return TowerScalar(value)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        tower, a, b = self._common(o)
        return TowerScalar._make(tower, _add(a, b, len(tower)))

    __radd__ = __add__

    def __neg__(self):
        return TowerScalar._make(self._tower, _neg(self._rep, self.level))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        tower, a, b = self._common(o)
        rads = tuple(_lift(r._rep, r.level, j) for j, r in enumerate(tower))
        return TowerScalar._make(tower, _mul(a, b, rads, len(tower)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero")
        tower, a, b = self._common(o)
        rads = tuple(_lift(r._rep, r.level, j) for j, r in enumerate(tower))
        return TowerScalar._make(tower, _mul(a, _inv(b, rads, len(tower)), rads, len(tower)))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return (TowerScalar(1) / self) ** (-exponent)
        result = TowerScalar(1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- comparisons ---------------------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self._struct_eq(o):
            return True
        return (self - o).is_zero()

    def __ne__(self, other):
        r = self.__eq__(other)
        return NotImplemented if r is NotImplemented else not r

    __hash__ = None  # exact values from different towers compare by value

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __le__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() >= 0

    def __bool__(self):
        return not self.is_zero()

    # -- sign and intervals --------------------------------------------------

    def interval(self, prec: int) -> tuple[Fraction, Fraction]:
        """Rational bounds [lo, hi] containing the value; width shrinks as
        `prec` grows."""
        return _interval(self._rep, self._tower, self.level, prec)

    def sign(self) -> int:
        """Exact sign in {-1, 0, +1}.

        Zero is decided structurally from the canonical coordinates; a
        nonzero value is bounded away from zero, so interval refinement
        at doubling precision terminates.
        """
        if self.is_zero():
            return 0
        if self.level == 0:
            return -1 if self._rep < 0 else 1
        prec = 16
        while True:
            lo, hi = self.interval(prec)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2

    def abs(self) -> "TowerScalar":
        return -self if self.sign() < 0 else self

    def __abs__(self):
        return self.abs()

    # -- serialization -------------------------------------------------------

    def to_text(self) -> str:
        """Render in the scalar grammar: terms ``rat`` or ``rat*sqrt(...)``
        joined by ``+``, with nested ``sqrt`` for higher tower levels."""
        parts = []
        coords = self.coords
        for mask in range(len(coords)):
            coeff = coords[mask]
            if not coeff:
                continue
            if mask == 0:
                parts.append(str(coeff))
            else:
                rad = TowerScalar(1)
                for j in range(self.level):
                    if mask >> j & 1:
                        rad = rad * self._tower[j]
                parts.append(f"{coeff}*sqrt({rad.to_text()})")
        return "+".join(parts) if parts else "0"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"TowerScalar({self.to_text()!r})"


def _towers_struct_eq(t1, t2) -> bool:
    if len(t1) != len(t2):
        return False
    return all(a._struct_eq(b) for a, b in zip(t1, t2))


def _towers_prefix(t1, t2) -> bool:
    """True when t1 is a structural prefix of t2."""
    if len(t1) > len(t2):
        return False
    return all(a._struct_eq(b) for a, b in zip(t1, t2[: len(t1)]))


def _merge_into(base_tower, value: TowerScalar):
    """Re-express `value` over an extension of `base_tower`.

    Returns ``(tower, rep)`` where `tower` extends `base_tower` and `rep`
    is `value` at the final level.  Each radicand of the value's own
    tower is mapped either onto a square root already present in the
    merged tower or onto a freshly adjoined level.
    """
    merged = list(base_tower)
    sqrt_of: list[TowerScalar] = []  # sqrt of value.tower[j] inside merged tower

    def express(rep, level: int) -> TowerScalar:
        if level == 0:
            return TowerScalar(rep)
        lo = express(rep[0], level - 1)
        hi = express(rep[1], level - 1)
        return lo + hi * sqrt_of[level - 1]

    for rad in value._tower:
        rad_m = express(rad._rep, rad.level)
        # lift into the full merged tower before root finding
        tower = tuple(merged)
        rep = _lift(rad_m._rep, rad_m.level, len(tower))
        rads = tuple(_lift(r._rep, r.level, j) for j, r in enumerate(tower))
        root = _sqrt(rep, rads, len(tower))
        if root is not None:
            r = TowerScalar._make(tower, root)
            sqrt_of.append(r.abs())
        else:
            merged.append(TowerScalar._make(tower, rep))
            new_rep = (_zero(len(tower)), _lift(_F1, 0, len(tower)))
            sqrt_of.append(TowerScalar._make(tuple(merged), new_rep))

    result = express(value._rep, value.level)
    tower = tuple(merged)
    return tower, _lift(result._rep, result.level, len(tower))


def _interval(rep, tower, level: int, prec: int):
    if level == 0:
        return rep, rep
    llo, lhi = _interval(rep[0], tower, level - 1, prec)
    hlo, hhi = _interval(rep[1], tower, level - 1, prec)
    rad = tower[level - 1]
    dlo, dhi = _interval(rad._rep, rad._tower, rad.level, prec)
    slo, shi = _sqrt_interval(dlo, dhi, prec)
    prods = (hlo * slo, hlo * shi, hhi * slo, hhi * shi)
    return llo + min(prods), lhi + max(prods)


# ---------------------------------------------------------------------------
# module-level operations


ZERO = TowerScalar(0)
ONE = TowerScalar(1)


def scalar(value: RationalLike | str | TowerScalar) -> TowerScalar:
    """Coerce an int, Fraction, grammar string or TowerScalar to a value."""
    if isinstance(value, str):
        return parse_scalar(value)
    return TowerScalar(value)


def sign(x: TowerScalar) -> int:
    return scalar(x).sign()


def adjoin_sqrt(x: TowerScalar | RationalLike) -> TowerScalar:
    """The non-negative square root of x, extending the tower only when
    x is not already a square at its level."""
    x = scalar(x)
    s = x.sign()
    if s < 0:
        raise ValueError("adjoin_sqrt requires a non-negative value")
    if s == 0:
        return TowerScalar(0)
    rads = x._rads()
    root = _sqrt(x._rep, rads, x.level)
    if root is not None:
        r = TowerScalar._make(x._tower, root)
        return r.abs()
    new_tower = x._tower + (x,)
    rep = (_zero(x.level), _lift(_F1, 0, x.level))
    return TowerScalar._make(new_tower, rep)


def rational_content(values: Iterable[TowerScalar]) -> Fraction:
    """gcd of all rational coordinates across `values` (0 if all zero).

    Dividing by the content normalizes a vector to coprime integer
    coordinates, which keeps printed witnesses tidy.
    """
    num = 0
    den = 1
    for v in values:
        for c in scalar(v).coords:
            if c:
                num = gcd(num, abs(c.numerator))
                den = den * c.denominator // gcd(den, c.denominator)
    return Fraction(num, den) if num else _F0


# ---------------------------------------------------------------------------
# text grammar:  scalar ::= term ("+" term)*
#                term   ::= rat | rat "*sqrt(" scalar ")"
#                rat    ::= ["-"] int ["/" posint]


class ScalarParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def parse_scalar(text: str) -> TowerScalar:
    value, pos = _parse_sum(text, 0)
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise ScalarParseError("unexpected trailing input", pos)
    return value


def _skip_ws(s: str, i: int) -> int:
    while i < len(s) and s[i].isspace():
        i += 1
    return i


def _parse_sum(s: str, i: int):
    total, i = _parse_term(s, i)
    while True:
        j = _skip_ws(s, i)
        if j < len(s) and s[j] == "+":
            term, i = _parse_term(s, j + 1)
            total = total + term
        else:
            return total, i


def _parse_term(s: str, i: int):
    coeff, i = _parse_rat(s, i)
    j = _skip_ws(s, i)
    if s.startswith("*sqrt(", j):
        inner, i = _parse_sum(s, j + len("*sqrt("))
        i = _skip_ws(s, i)
        if i >= len(s) or s[i] != ")":
            raise ScalarParseError("expected ')'", i)
        return TowerScalar(coeff) * adjoin_sqrt(inner), i + 1
    return TowerScalar(coeff), i


def _parse_rat(s: str, i: int):
    i = _skip_ws(s, i)
    start = i
    if i < len(s) and s[i] == "-":
        i += 1
    digits = i
    while i < len(s) and s[i].isdigit():
        i += 1
    if i == digits:
        raise ScalarParseError("expected a rational", start)
    num = int(s[start:i])
    if i < len(s) and s[i] == "/":
        i += 1
        dstart = i
        while i < len(s) and s[i].isdigit():
            i += 1
        if i == dstart:
            raise ScalarParseError("expected a positive denominator", dstart)
        den = int(s[dstart:i])
        if den == 0:
            raise ScalarParseError("zero denominator", dstart)
        return Fraction(num, den), i
    return Fraction(num), i
