"""Constraint functions on Boolean variables as dense value tables.

A signature of arity n stores all 2^n values indexed lexicographically
with x1 as the most significant bit.  The module covers the structural
toolbox: tensor products, input permutation, pinning, unary derivatives,
edge contraction, matrix views, marginals, supports, Gram matrices and
irreducible tensor factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .scalar import TowerScalar, parse_scalar, scalar

# Dense tables are 2^n entries; gadget work needs arity 8, leave headroom.
ARITY_CAP = 16


def _coerce_value(v) -> TowerScalar:
    if isinstance(v, TowerScalar):
        return v
    if isinstance(v, str):
        return parse_scalar(v)
    return TowerScalar(v)


class Signature:
    """An arity-n function {0,1}^n -> reals as a table of TowerScalars."""

    __slots__ = ("_arity", "_values")

    def __init__(self, values: Sequence, arity: int | None = None):
        vals = tuple(_coerce_value(v) for v in values)
        n = (len(vals) - 1).bit_length() if vals else 0
        if len(vals) != 1 << n:
            raise ValueError(f"table length {len(vals)} is not a power of two")
        if arity is not None and arity != n:
            raise ValueError(f"arity {arity} does not match table length {len(vals)}")
        if n > ARITY_CAP:
            raise ValueError(f"arity {n} exceeds the cap {ARITY_CAP}")
        self._arity = n
        self._values = vals

    # -- constructors ----------------------------------------------------

    @classmethod
    def symmetric(cls, weights: Sequence) -> "Signature":
        """[f0, ..., fn]: every input of Hamming weight k gets value fk."""
        ws = [_coerce_value(w) for w in weights]
        n = len(ws) - 1
        return cls([ws[x.bit_count()] for x in range(1 << n)])

    @classmethod
    def equality(cls, n: int) -> "Signature":
        vals = [0] * (1 << n)
        vals[0] = 1
        vals[-1] = 1
        return cls(vals)

    @classmethod
    def disequality(cls) -> "Signature":
        return cls([0, 1, 1, 0])

    @classmethod
    def unary(cls, a, b) -> "Signature":
        return cls([a, b])

    @classmethod
    def from_matrix(cls, rows) -> "Signature":
        """Binary signature f(x1, x2) = rows[x1][x2]."""
        return cls([rows[0][0], rows[0][1], rows[1][0], rows[1][1]])

    # -- basics ----------------------------------------------------------

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def values(self) -> tuple[TowerScalar, ...]:
        return self._values

    def value(self, index: int) -> TowerScalar:
        return self._values[index]

    def value_at(self, bits: Sequence[int]) -> TowerScalar:
        idx = 0
        for b in bits:
            idx = (idx << 1) | (b & 1)
        return self._values[idx]

    def __eq__(self, other):
        if not isinstance(other, Signature):
            return NotImplemented
        return self._arity == other._arity and all(
            a == b for a, b in zip(self._values, other._values)
        )

    __hash__ = None

    def __repr__(self):
        return f"Signature({[v.to_text() for v in self._values]})"

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self._values)

    def is_nonnegative(self) -> bool:
        return all(v.sign() >= 0 for v in self._values)

    def scaled(self, c) -> "Signature":
        c = _coerce_value(c)
        return Signature([c * v for v in self._values])

    def add(self, other: "Signature") -> "Signature":
        if other.arity != self._arity:
            raise ValueError("arity mismatch")
        return Signature([a + b for a, b in zip(self._values, other._values)])

    def pointwise_product(self, other: "Signature") -> "Signature":
        if other.arity != self._arity:
            raise ValueError("arity mismatch")
        return Signature([a * b for a, b in zip(self._values, other._values)])

    def scalar_value(self) -> TowerScalar:
        if self._arity != 0:
            raise ValueError("not a scalar signature")
        return self._values[0]

    # -- structural operations --------------------------------------------

    def tensor(self, other: "Signature") -> "Signature":
        """(f (x) g)(x, y) = f(x) g(y); arity adds."""
        r, s = self._arity, other._arity
        if r + s > ARITY_CAP:
            raise ValueError(f"tensor arity {r + s} exceeds the cap {ARITY_CAP}")
        out = []
        for x in range(1 << r):
            fx = self._values[x]
            for y in range(1 << s):
                out.append(fx * other._values[y])
        return Signature(out)

    def permute(self, perm: Sequence[int]) -> "Signature":
        """f_pi with f_pi(x1..xn) = f(x_pi(1), ..., x_pi(n)); pi is 1-based."""
        n = self._arity
        if sorted(perm) != list(range(1, n + 1)):
            raise ValueError(f"{perm} is not a permutation of 1..{n}")
        out = []
        for x in range(1 << n):
            bits = [(x >> (n - k)) & 1 for k in range(1, n + 1)]
            out.append(self.value_at([bits[p - 1] for p in perm]))
        return Signature(out)

    def pin(self, i: int, c: int) -> "Signature":
        """Fix input i to the bit c; arity drops by one."""
        n = self._arity
        if n == 0:
            raise ValueError("cannot pin a scalar signature")
        if not 1 <= i <= n:
            raise ValueError(f"position {i} out of range 1..{n}")
        shift = n - i
        out = []
        for x in range(1 << (n - 1)):
            high = (x >> shift) << (shift + 1)
            low = x & ((1 << shift) - 1)
            out.append(self._values[high | ((c & 1) << shift) | low])
        return Signature(out)

    def derive(self, positions: Iterable[int], u: "Signature") -> "Signature":
        """Contract a copy of the unary u onto each listed input."""
        pos = sorted(set(positions))
        n = self._arity
        if u.arity != 1:
            raise ValueError("derivative needs a unary signature")
        if any(p < 1 or p > n for p in pos):
            raise ValueError("position out of range")
        if len(pos) >= n:
            raise ValueError("derivative must leave at least one input free")
        f = self
        for p in reversed(pos):
            f = f.pin(p, 0).scaled(u.value(0)).add(f.pin(p, 1).scaled(u.value(1)))
        return f

    def connect(self, i: int, j: int) -> "Signature":
        """Join inputs i and j by an edge: sum over x_i = x_j."""
        if i == j:
            raise ValueError("cannot connect a position to itself")
        if self._arity < 2:
            raise ValueError("connect needs arity >= 2")
        a, b = min(i, j), max(i, j)
        g0 = self.pin(b, 0).pin(a, 0)
        g1 = self.pin(b, 1).pin(a, 1)
        return g0.add(g1)

    def marginal(self, t: int) -> "Signature":
        """Sum out inputs t+1..n, keeping the first t."""
        n = self._arity
        if not 1 <= t <= n:
            raise ValueError(f"t={t} out of range 1..{n}")
        tail = n - t
        out = []
        for x in range(1 << t):
            base = x << tail
            acc = TowerScalar(0)
            for y in range(1 << tail):
                acc = acc + self._values[base | y]
            out.append(acc)
        return Signature(out)

    def support(self) -> tuple[int, ...]:
        """Indices (lexicographic bit masks) of the nonzero entries."""
        return tuple(x for x, v in enumerate(self._values) if not v.is_zero())

    def support_strings(self) -> tuple[str, ...]:
        n = self._arity
        return tuple(format(x, f"0{n}b") if n else "" for x in self.support())

    # -- matrix views ------------------------------------------------------

    def matrix_view(self, row_positions: Iterable[int]) -> "MatrixView":
        """Rows indexed by assignments of `row_positions` (sorted, MSB
        first), columns by the remaining positions."""
        n = self._arity
        rows_pos = tuple(sorted(set(row_positions)))
        if not rows_pos or any(p < 1 or p > n for p in rows_pos):
            raise ValueError("row positions must be a nonempty subset of 1..n")
        cols_pos = tuple(p for p in range(1, n + 1) if p not in rows_pos)
        r, c = len(rows_pos), len(cols_pos)
        place = {}
        for k, p in enumerate(rows_pos):
            place[p] = (True, r - 1 - k)
        for k, p in enumerate(cols_pos):
            place[p] = (False, c - 1 - k)
        rows = []
        for x in range(1 << r):
            row = []
            for y in range(1 << c):
                idx = 0
                for p in range(1, n + 1):
                    from_rows, shift = place[p]
                    bit = (x >> shift) & 1 if from_rows else (y >> shift) & 1
                    idx = (idx << 1) | bit
                row.append(self._values[idx])
            rows.append(tuple(row))
        return MatrixView(tuple(rows), rows_pos)

    def leading_view(self, r: int) -> "MatrixView":
        """The 2^r x 2^(n-r) view with the first r inputs as rows."""
        return self.matrix_view(range(1, r + 1))

    def gram(self, i: int) -> "MatrixView":
        """The 2x2 matrix M_i M_i^T of row inner products, pivoting on
        input i."""
        if self._arity < 1:
            raise ValueError("gram needs arity >= 1")
        m = self.matrix_view([i])
        return m.times_transpose()

    def gram_pair(self, i: int, j: int) -> "MatrixView":
        """The 4x4 matrix of inner products of the four (x_i, x_j) pins."""
        if i == j:
            raise ValueError("gram_pair needs two distinct positions")
        if self._arity < 2:
            raise ValueError("gram_pair needs arity >= 2")
        a, b = min(i, j), max(i, j)
        m = self.matrix_view([a, b])
        return m.times_transpose()

    # -- factorization -----------------------------------------------------

    def factorize(self) -> "Factorization":
        """Split into irreducible tensor factors over a position partition.

        Factors are normalized so their first nonzero entry is 1; the
        removed constant is returned as the factorization scale (it is
        the signature's first nonzero value, hence positive for
        non-negative signatures).
        """
        if self.is_zero():
            raise ValueError("cannot factorize the identically-zero signature")
        scale = TowerScalar(1)
        factors: list[tuple[Signature, tuple[int, ...]]] = []

        def split(sig: Signature, positions: tuple[int, ...]):
            nonlocal scale
            n = sig.arity
            if n == 0:
                scale = scale * sig.scalar_value()
                return
            # each bipartition once: the row side always keeps position n
            for mask in range((1 << (n - 1)) - 1):
                rows_local = [k + 1 for k in range(n - 1) if (mask >> k) & 1]
                rows_local.append(n)
                view = sig.matrix_view(rows_local)
                fac = view.rank_one_split()
                if fac is None:
                    continue
                g, h = fac
                rows_set = set(rows_local)
                cols_local = [p for p in range(1, n + 1) if p not in rows_set]
                split(g, tuple(positions[p - 1] for p in rows_local))
                split(h, tuple(positions[p - 1] for p in cols_local))
                return
            # irreducible: normalize the first nonzero entry to 1
            first = next(v for v in sig.values if not v.is_zero())
            scale = scale * first
            factors.append((sig.scaled(1 / first), positions))

        split(self, tuple(range(1, self._arity + 1)))
        factors.sort(key=lambda item: item[1])
        return Factorization(scale, factors, self._arity)


class MatrixView:
    """A 2D reshape of a signature table (or a derived exact matrix)."""

    __slots__ = ("rows", "row_positions")

    def __init__(self, rows, row_positions: tuple[int, ...] | None = None):
        self.rows = tuple(tuple(_coerce_value(v) for v in row) for row in rows)
        self.row_positions = row_positions

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def entry(self, i: int, j: int) -> TowerScalar:
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, MatrixView):
            return NotImplemented
        return self.rows == other.rows

    __hash__ = None

    def __repr__(self):
        return f"MatrixView({[[v.to_text() for v in row] for row in self.rows]})"

    def transpose(self) -> "MatrixView":
        return MatrixView(tuple(zip(*self.rows)))

    def times_transpose(self) -> "MatrixView":
        """M M^T: inner products of the rows."""
        out = []
        for u in self.rows:
            out.append(tuple(_dot(u, v) for v in self.rows))
        return MatrixView(tuple(out), self.row_positions)

    def transpose_times(self) -> "MatrixView":
        """M^T M: inner products of the columns."""
        cols = list(zip(*self.rows))
        out = []
        for u in cols:
            out.append(tuple(_dot(u, v) for v in cols))
        return MatrixView(tuple(out))

    def is_rank_at_most_one(self) -> bool:
        pivot = None
        for i, row in enumerate(self.rows):
            for j, v in enumerate(row):
                if not v.is_zero():
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            return True
        pi, pj = pivot
        pv = self.rows[pi][pj]
        for i, row in enumerate(self.rows):
            for j, v in enumerate(row):
                if not (v * pv == self.rows[i][pj] * self.rows[pi][j]):
                    return False
        return True

    def rank_one_split(self):
        """For a rank-<=1 nonzero view, signatures (g, h) with
        entry(x, y) = g(x) h(y) and h's pivot entry normalized so the
        product reproduces the table; None when rank exceeds one."""
        if not self.is_rank_at_most_one():
            return None
        pivot = None
        for i, row in enumerate(self.rows):
            for j, v in enumerate(row):
                if not v.is_zero():
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            return None
        pi, pj = pivot
        pv = self.rows[pi][pj]
        g = Signature([self.rows[i][pj] for i in range(self.nrows)])
        h = Signature([self.rows[pi][j] / pv for j in range(self.ncols)])
        return g, h

    def to_text_rows(self) -> list[list[str]]:
        return [[v.to_text() for v in row] for row in self.rows]


def _dot(u, v) -> TowerScalar:
    acc = TowerScalar(0)
    for a, b in zip(u, v):
        acc = acc + a * b
    return acc


def mat_mul(a: MatrixView, b: MatrixView) -> MatrixView:
    bt = list(zip(*b.rows))
    return MatrixView(tuple(tuple(_dot(row, col) for col in bt) for row in a.rows))


@dataclass
class Factorization:
    """Irreducible tensor factorization: scale * (x) factors, with each
    factor attached to its original input positions."""

    scale: TowerScalar
    factors: list[tuple[Signature, tuple[int, ...]]]
    arity: int

    def reassemble(self) -> Signature:
        n = self.arity
        out = []
        for x in range(1 << n):
            bits = [(x >> (n - k)) & 1 for k in range(1, n + 1)]
            acc = self.scale
            for sig, pos in self.factors:
                acc = acc * sig.value_at([bits[p - 1] for p in pos])
            out.append(acc)
        return Signature(out)

    def factor_arities(self) -> list[int]:
        return [sig.arity for sig, _ in self.factors]


# -- JSON-shaped signature files -------------------------------------------


def signature_to_obj(sig: Signature, name: str | None = None) -> dict:
    obj: dict = {}
    if name:
        obj["name"] = name
    obj["arity"] = sig.arity
    obj["values"] = [v.to_text() for v in sig.values]
    return obj


def signature_from_obj(obj: dict) -> Signature:
    if "symmetric" in obj:
        return Signature.symmetric([parse_scalar(s) for s in obj["symmetric"]])
    if "values" not in obj:
        raise ValueError("signature object needs 'values' or 'symmetric'")
    sig = Signature([parse_scalar(s) for s in obj["values"]])
    if "arity" in obj and obj["arity"] != sig.arity:
        raise ValueError(
            f"declared arity {obj['arity']} does not match {len(obj['values'])} values"
        )
    return sig
