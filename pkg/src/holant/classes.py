"""Membership tests for the tractable function classes and the support
conditions feeding the classifier.

Covered here: the affine class (GF(2)-affine support, constant magnitude,
sign pattern a quadratic GF(2) polynomial), the product type (tensor
closure of functions supported on a complementary pair), the tensor
closure of arity-<=2 functions, parity and adjacency of supports, input
partitions, block-rank-one matrices and vector representations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .scalar import TowerScalar, adjoin_sqrt
from .signature import Factorization, MatrixView, Signature


# ---------------------------------------------------------------------------
# small GF(2) helpers on bitmask-encoded vectors


def gf2_reduce(vectors: Sequence[int]) -> list[int]:
    """Reduced basis of the span; each basis vector has a unique leading bit."""
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    # back-substitute to make leading bits unique below the pivot
    for i in range(len(basis)):
        for j in range(i):
            if basis[j] & (1 << basis[i].bit_length() - 1):
                basis[j] ^= basis[i]
    return basis


def gf2_solve(rows: list[tuple[int, int]], width: int) -> Optional[int]:
    """Solve a GF(2) system given as (coefficient mask, rhs bit) rows.

    Returns one solution as a bitmask over `width` unknowns (free
    unknowns set to 0), or None when inconsistent.
    """
    system = [(m, r) for m, r in rows]
    pivots: list[tuple[int, int, int]] = []  # (pivot bit, mask, rhs)
    for mask, rhs in system:
        for pb, pm, pr in pivots:
            if mask >> pb & 1:
                mask ^= pm
                rhs ^= pr
        if mask == 0:
            if rhs:
                return None
            continue
        pb = mask.bit_length() - 1
        pivots.append((pb, mask, rhs))
    solution = 0
    for pb, mask, rhs in sorted(pivots):
        acc = rhs
        rest = mask & ~(1 << pb)
        while rest:
            b = rest & -rest
            if solution & b:
                acc ^= 1
            rest ^= b
        if acc:
            solution |= 1 << pb
    return solution


def gf2_nullspace(vectors: Sequence[int], width: int) -> list[int]:
    """Basis of {a : a . v = 0 for all v} over GF(2)^width."""
    basis = gf2_reduce(vectors)
    pivot_bits = {b.bit_length() - 1 for b in basis}
    out = []
    for fb in range(width):
        if fb in pivot_bits:
            continue
        a = 1 << fb
        # the basis is reduced, so each pivot coordinate is fixed by the
        # single basis vector owning it
        for b in basis:
            if (b >> fb) & 1:
                a |= 1 << (b.bit_length() - 1)
        out.append(a)
    return out


# ---------------------------------------------------------------------------
# affine class


@dataclass
class AffineWitness:
    """f restricted to its support equals magnitude * (-1)^q.

    The support is offset + span(basis) over GF(2); q is a quadratic
    polynomial in the free coordinates (the bits of x - offset at the
    basis leading positions).  `sign_poly` lists the monomials of q with
    coefficient 1: () is the constant term, (i,) linear, (i, j) mixed.
    The identically-zero signature gets the trivial witness with
    offset None.
    """

    offset: Optional[int]
    basis: tuple[int, ...]
    magnitude: TowerScalar
    sign_poly: tuple[tuple[int, ...], ...]
    arity: int

    def dimension(self) -> int:
        return len(self.basis)

    def free_coordinates(self, x: int) -> tuple[int, ...]:
        d = x ^ self.offset
        return tuple((d >> (b.bit_length() - 1)) & 1 for b in self.basis)

    def sign_at(self, x: int) -> int:
        t = self.free_coordinates(x)
        acc = 0
        for mono in self.sign_poly:
            term = 1
            for i in mono:
                term &= t[i]
            acc ^= term
        return -1 if acc else 1

    def support(self) -> tuple[int, ...]:
        if self.offset is None:
            return ()
        points = {self.offset}
        for b in self.basis:
            points |= {p ^ b for p in points}
        return tuple(sorted(points))

    def value_at(self, x: int) -> TowerScalar:
        return self.magnitude * self.sign_at(x)


def is_affine(f: Signature) -> Optional[AffineWitness]:
    """Witness that f is affine, or None.

    Checks that the support is a GF(2) affine subspace, that |f| is a
    constant there, and that the sign pattern is reproduced by some
    quadratic GF(2) polynomial over the free support coordinates (the
    zero polynomial whenever f is non-negative).
    """
    supp = f.support()
    if not supp:
        return AffineWitness(None, (), TowerScalar(0), (), f.arity)
    x0 = supp[0]
    basis = gf2_reduce([x ^ x0 for x in supp])
    if len(supp) != 1 << len(basis):
        return None
    magnitude = f.value(x0).abs()
    for x in supp[1:]:
        if not f.value(x).abs() == magnitude:
            return None
    # fit signs with a quadratic polynomial in the free coordinates
    r = len(basis)
    monomials: list[tuple[int, ...]] = [()]
    monomials += [(i,) for i in range(r)]
    monomials += [(i, j) for i in range(r) for j in range(i + 1, r)]
    rows = []
    leading = [b.bit_length() - 1 for b in basis]
    for x in supp:
        d = x ^ x0
        t = [(d >> lb) & 1 for lb in leading]
        mask = 0
        for k, mono in enumerate(monomials):
            val = 1
            for i in mono:
                val &= t[i]
            if val:
                mask |= 1 << k
        rhs = 1 if f.value(x).sign() < 0 else 0
        rows.append((mask, rhs))
    solution = gf2_solve(rows, len(monomials))
    if solution is None:
        return None
    poly = tuple(m for k, m in enumerate(monomials) if solution >> k & 1)
    return AffineWitness(x0, tuple(basis), magnitude, poly, f.arity)


# ---------------------------------------------------------------------------
# product type and the binary tensor closure


def _complementary_pair_support(sig: Signature) -> bool:
    supp = sig.support()
    if len(supp) == 1:
        return True
    if len(supp) == 2:
        full = (1 << sig.arity) - 1
        return supp[0] ^ supp[1] == full
    return False


def is_product_type(f: Signature) -> Optional[Factorization]:
    """The irreducible factorization when every factor is supported on a
    single point or a complementary pair; None otherwise."""
    if f.is_zero():
        return Factorization(
            TowerScalar(1),
            [(Signature([0, 0]), (p,)) for p in range(1, f.arity + 1)],
            f.arity,
        )
    fac = f.factorize()
    for sig, _pos in fac.factors:
        if not _complementary_pair_support(sig):
            return None
    return fac


def is_tensor_closure_T(f: Signature) -> bool:
    """True when every irreducible factor has arity at most 2."""
    if f.is_zero():
        return True
    if f.arity <= 2:
        return True
    return all(a <= 2 for a in f.factorize().factor_arities())


# ---------------------------------------------------------------------------
# support conditions


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


def parity(f: Signature) -> Optional[Parity]:
    """Parity of the support: EVEN/ODD when confined to one weight class,
    None when mixed."""
    supp = f.support()
    if not supp:
        raise ValueError("parity is undefined for the identically-zero signature")
    weights = {x.bit_count() & 1 for x in supp}
    if weights == {0}:
        return Parity.EVEN
    if weights == {1}:
        return Parity.ODD
    return None


def adjacency(f: Signature) -> bool:
    """True when two support elements differ in exactly one bit."""
    supp = set(f.support())
    n = f.arity
    for x in supp:
        for k in range(n):
            if x ^ (1 << k) in supp:
                return True
    return False


@dataclass
class InputPartition:
    """Equivalence classes of input positions under the vanishing
    relations: positions i, j are tied when f vanishes off x_i = x_j
    (tag 'E') or off x_i != x_j (tag 'N')."""

    arity: int
    classes: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]  # (members, parities)

    def class_of(self, i: int) -> int:
        for k, (members, _) in enumerate(self.classes):
            if i in members:
                return k
        raise ValueError(f"position {i} out of range")

    def tag(self, i: int, j: int) -> Optional[str]:
        for members, parities in self.classes:
            if i in members and j in members:
                pi = parities[members.index(i)]
                pj = parities[members.index(j)]
                return "E" if pi == pj else "N"
        return None


def input_partition(f: Signature) -> InputPartition:
    if f.is_zero():
        raise ValueError("input partition is undefined for the zero signature")
    n = f.arity
    supp = f.support()
    # pair (i,j) is E/N when the support never separates/joins bits i, j
    related: dict[tuple[int, int], str] = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            bi, bj = n - i, n - j
            same = all(((x >> bi) & 1) == ((x >> bj) & 1) for x in supp)
            diff = all(((x >> bi) & 1) != ((x >> bj) & 1) for x in supp)
            if same:
                related[(i, j)] = "E"
            elif diff:
                related[(i, j)] = "N"
    parent = list(range(n + 1))
    offset = [0] * (n + 1)  # parity relative to the root

    def root_and_parity(i: int) -> tuple[int, int]:
        par = 0
        while parent[i] != i:
            par ^= offset[i]
            i = parent[i]
        return i, par

    for (i, j), tag in related.items():
        ri, pi = root_and_parity(i)
        rj, pj = root_and_parity(j)
        want = 0 if tag == "E" else 1
        if ri != rj:
            parent[rj] = ri
            offset[rj] = pi ^ pj ^ want
        else:
            # a nonzero signature cannot carry contradictory tags
            assert pi ^ pj == want, "inconsistent input relations"
    groups: dict[int, list[int]] = {}
    for i in range(1, n + 1):
        r, _ = root_and_parity(i)
        groups.setdefault(r, []).append(i)
    classes = []
    for r in sorted(groups):
        members = tuple(sorted(groups[r]))
        base_root, base_par = root_and_parity(members[0])
        parities = []
        for m in members:
            _, pm = root_and_parity(m)
            parities.append(pm ^ base_par)
        classes.append((members, tuple(parities)))
    return InputPartition(n, tuple(classes))


# ---------------------------------------------------------------------------
# block-rank-one


def _rows_dependent(u, v) -> bool:
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            if not (u[i] * v[j] == u[j] * v[i]):
                return False
    return True


def _rows_orthogonal(u, v) -> bool:
    acc = TowerScalar(0)
    for a, b in zip(u, v):
        acc = acc + a * b
    return acc.is_zero()


def block_rank_one(m: MatrixView) -> Optional[tuple[int, int]]:
    """None when every two rows are dependent or orthogonal; otherwise the
    lexicographically first offending row pair."""
    rows = m.rows
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if _rows_dependent(rows[i], rows[j]):
                continue
            if _rows_orthogonal(rows[i], rows[j]):
                continue
            return (i, j)
    return None


def signature_block_rank_one(f: Signature) -> bool:
    """Block-rank-one for a function: arity 1, or the view splitting off
    the last input passes the matrix test."""
    if f.arity <= 1:
        return True
    return block_rank_one(f.leading_view(f.arity - 1)) is None


# ---------------------------------------------------------------------------
# vector representations


def vector_representation(f: Signature) -> Optional[list[Signature]]:
    result, _reason = explain_vector_representation(f)
    return result


def explain_vector_representation(f: Signature):
    """Unary factors (s_1, ..., s_n) with f(x) = prod s_i(x_i) on the
    support, or (None, reason).

    The attempt is gated on every prefix marginal being block-rank-one
    (the hypothesis under which a representation is guaranteed); the
    factors are then recovered by eliminating the multiplicative system
    of the support over rational exponents, realizing half-integral
    exponents through square roots, and the result is re-verified
    pointwise before it is returned.
    """
    if not f.is_nonnegative():
        raise ValueError("vector representations are defined for non-negative signatures")
    if f.is_zero():
        raise ValueError("vector representation is undefined for the zero signature")
    n = f.arity
    for t in range(1, n + 1):
        if not signature_block_rank_one(f.marginal(t)):
            return None, f"prefix marginal of width {t} is not block-rank-one"

    supp = f.support()
    var_index: dict[tuple[int, int], int] = {}
    for x in supp:
        for p in range(1, n + 1):
            key = (p, (x >> (n - p)) & 1)
            if key not in var_index:
                var_index[key] = len(var_index)
    nvars = len(var_index)

    # rows: rational coefficients per variable, rhs as exponents over the
    # support values (the system is solved in the exponent lattice)
    rows: list[tuple[list[Fraction], dict[int, Fraction]]] = []
    for x in supp:
        coeffs = [Fraction(0)] * nvars
        for p in range(1, n + 1):
            coeffs[var_index[(p, (x >> (n - p)) & 1)]] += 1
        rows.append((coeffs, {x: Fraction(1)}))

    pivots: dict[int, tuple[list[Fraction], dict[int, Fraction]]] = {}
    for coeffs, rhs in rows:
        for col, (pc, pr) in pivots.items():
            c = coeffs[col]
            if c:
                for k in range(nvars):
                    coeffs[k] -= c * pc[k]
                for x, e in pr.items():
                    rhs[x] = rhs.get(x, Fraction(0)) - c * e
        col = next((k for k in range(nvars) if coeffs[k]), None)
        if col is None:
            if not _exponent_product_is_one(f, rhs):
                return None, "the support values admit no multiplicative splitting"
            continue
        c = coeffs[col]
        coeffs = [v / c for v in coeffs]
        rhs = {x: e / c for x, e in rhs.items()}
        for pcol, (pc, pr) in pivots.items():
            d = pc[col]
            if d:
                for k in range(nvars):
                    pc[k] -= d * coeffs[k]
                for x, e in rhs.items():
                    pr[x] = pr.get(x, Fraction(0)) - d * e
        pivots[col] = (coeffs, rhs)

    values: dict[int, TowerScalar] = {}
    for col in range(nvars):
        if col in pivots:
            _, rhs = pivots[col]
            val = _exponent_product(f, rhs)
            if val is None:
                return None, "a factor would need a root of order above 2^k"
            values[col] = val
        else:
            values[col] = TowerScalar(1)

    unaries = []
    for p in range(1, n + 1):
        pair = []
        for bit in (0, 1):
            key = (p, bit)
            pair.append(values[var_index[key]] if key in var_index else TowerScalar(0))
        unaries.append(Signature(pair))

    for x in supp:
        prod = TowerScalar(1)
        for p in range(1, n + 1):
            prod = prod * unaries[p - 1].value((x >> (n - p)) & 1)
        if not prod == f.value(x):
            return None, "candidate factors failed pointwise verification"
    return unaries, "verified"


def _exponent_lcm(exponents: dict[int, Fraction]) -> int:
    lcm = 1
    for e in exponents.values():
        if e:
            lcm = lcm * e.denominator // gcd(lcm, e.denominator)
    return lcm


def _exponent_product_is_one(f: Signature, exponents: dict[int, Fraction]) -> bool:
    # x > 0 and x^m = 1 imply x = 1, so clearing denominators is sound
    lcm = _exponent_lcm(exponents)
    prod = TowerScalar(1)
    for x, e in exponents.items():
        prod = prod * f.value(x) ** int(e * lcm)
    return prod == 1


def _exponent_product(f: Signature, exponents: dict[int, Fraction]) -> Optional[TowerScalar]:
    lcm = _exponent_lcm(exponents)
    if lcm & (lcm - 1):
        return None  # an odd prime in a denominator: not reachable by square roots
    prod = TowerScalar(1)
    for x, e in exponents.items():
        prod = prod * f.value(x) ** int(e * lcm)
    while lcm > 1:
        prod = adjoin_sqrt(prod)
        lcm >>= 1
    return prod
