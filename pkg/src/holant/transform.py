"""Holographic transformations and the search for an orthogonal change of
basis that lands a signature set in the product type.

Candidate bases come from the eigenvectors of realizable symmetric 2x2
matrices: the Gram matrices of the single-pivot views and the corner
blocks of the pair Gram matrices.  Eigenvectors are kept unnormalized
(columns exactly orthogonal but not unit length); dividing out the
column norms would only multiply the transformed signatures by an
invertible diagonal, which the product type absorbs, so the membership
test is unaffected and every value stays in a small radical tower.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .classes import is_product_type
from .scalar import TowerScalar, adjoin_sqrt, rational_content, scalar
from .signature import Factorization, MatrixView, Signature

Matrix2 = tuple[tuple[TowerScalar, TowerScalar], tuple[TowerScalar, TowerScalar]]


def _as_matrix(rows) -> Matrix2:
    return (
        (scalar(rows[0][0]), scalar(rows[0][1])),
        (scalar(rows[1][0]), scalar(rows[1][1])),
    )


IDENTITY: Matrix2 = _as_matrix([[1, 0], [0, 1]])


@dataclass
class OrthoCandidate:
    """An unnormalized orthogonal-column 2x2 matrix and where it came from."""

    matrix: Matrix2
    provenance: str

    def columns(self):
        m = self.matrix
        return (m[0][0], m[1][0]), (m[0][1], m[1][1])

    def transposed(self) -> Matrix2:
        m = self.matrix
        return ((m[0][0], m[1][0]), (m[0][1], m[1][1]))

    def column_dot(self) -> TowerScalar:
        c1, c2 = self.columns()
        return c1[0] * c2[0] + c1[1] * c2[1]

    def determinant(self) -> TowerScalar:
        m = self.matrix
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]

    def is_identity(self) -> bool:
        m = self.matrix
        return (
            m[0][0] == 1 and m[1][1] == 1 and m[0][1].is_zero() and m[1][0].is_zero()
        )

    def to_text_rows(self) -> list[list[str]]:
        return [[v.to_text() for v in row] for row in self.matrix]


def apply(t, f: Signature) -> Signature:
    """The transformed signature T^(tensor n) f, with f a column vector."""
    rows = _as_matrix(t)
    n = f.arity
    values = list(f.values)
    # contract one input at a time
    for p in range(n):
        shift = n - 1 - p
        out = [None] * len(values)
        for x in range(len(values)):
            if (x >> shift) & 1:
                continue
            lo = values[x]
            hi = values[x | (1 << shift)]
            out[x] = rows[0][0] * lo + rows[0][1] * hi
            out[x | (1 << shift)] = rows[1][0] * lo + rows[1][1] * hi
        values = out
    return Signature(values)


def matrix_multiply(a, b) -> Matrix2:
    a = _as_matrix(a)
    b = _as_matrix(b)
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(2)), TowerScalar(0)) for j in range(2))
        for i in range(2)
    )


def matrix_transpose(m) -> Matrix2:
    m = _as_matrix(m)
    return ((m[0][0], m[1][0]), (m[0][1], m[1][1]))


def matrix_inverse(m) -> Matrix2:
    m = _as_matrix(m)
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if det.is_zero():
        raise ZeroDivisionError("singular matrix")
    return (
        (m[1][1] / det, -m[0][1] / det),
        (-m[1][0] / det, m[0][0] / det),
    )


def _canonical_column(col):
    """Scale to coprime integer coordinates where possible and make the
    first nonzero coordinate positive."""
    col = tuple(scalar(v) for v in col)
    c = rational_content(col)
    if c:
        col = tuple(v / c for v in col)
    lead = next((v for v in col if not v.is_zero()), None)
    if lead is not None and lead.sign() < 0:
        col = tuple(-v for v in col)
    return col


def _column_key_eq(a, b) -> bool:
    # projective equality of canonicalized columns
    return a[0] == b[0] and a[1] == b[1]


def _candidate_from_symmetric(a, b, c, provenance: str) -> Optional[OrthoCandidate]:
    """Unnormalized eigenbasis of [[a, b], [b, c]] when the eigenvalues are
    distinct; None for scalar matrices (no direction information)."""
    if b.is_zero():
        # distinct diagonal entries pin the standard basis, which the
        # identity candidate already covers
        return None
    disc = (a - c) * (a - c) + 4 * b * b
    root = adjoin_sqrt(disc)
    lam1 = (a + c + root) / 2
    lam2 = (a + c - root) / 2
    col1 = _canonical_column((b, lam1 - a))
    col2 = _canonical_column((b, lam2 - a))
    matrix = ((col1[0], col2[0]), (col1[1], col2[1]))
    return OrthoCandidate(matrix, provenance)


def ortho_candidates(signatures: Sequence[Signature]) -> list[OrthoCandidate]:
    """Orthogonal-column candidates harvested from the Gram spectra of the
    given signatures; the identity always comes first, duplicates (up to
    column scaling, order and sign) are removed."""
    out = [OrthoCandidate(IDENTITY, "identity")]

    def push(cand: Optional[OrthoCandidate]):
        if cand is None:
            return
        assert cand.column_dot().is_zero()
        c_new = tuple(sorted(cand.columns(), key=_sort_key))
        for seen in out:
            c_old = tuple(sorted(seen.columns(), key=_sort_key))
            if (_column_key_eq(c_new[0], c_old[0]) and _column_key_eq(c_new[1], c_old[1])):
                return
        out.append(cand)

    for k, f in enumerate(signatures):
        if f.is_zero() or f.arity == 0:
            continue
        for i in range(1, f.arity + 1):
            g = f.gram(i)
            push(_candidate_from_symmetric(
                g.entry(0, 0), g.entry(0, 1), g.entry(1, 1), f"gram(f{k},{i})"))
        # pair Grams only when the pins are genuine vectors; for arity 2
        # they collapse to rank-one outer products with no new direction
        if f.arity >= 3:
            for i in range(1, f.arity + 1):
                for j in range(i + 1, f.arity + 1):
                    b = f.gram_pair(i, j)
                    push(_candidate_from_symmetric(
                        b.entry(0, 0), b.entry(0, 3), b.entry(3, 3),
                        f"pair_gram(f{k},{i},{j}).outer"))
                    push(_candidate_from_symmetric(
                        b.entry(1, 1), b.entry(1, 2), b.entry(2, 2),
                        f"pair_gram(f{k},{i},{j}).inner"))
    return out


def _sort_key(col):
    # deterministic order on canonicalized exact columns
    def key_scalar(v: TowerScalar):
        return (v.level, tuple((c.numerator, c.denominator) for c in v.coords))

    return (key_scalar(col[0]), key_scalar(col[1]))


def transformable_to_P(signatures: Sequence[Signature]) -> Optional[OrthoCandidate]:
    """The first candidate V whose transpose maps every signature into the
    product type; V's columns are orthogonal, so V is an orthogonal
    matrix times an invertible diagonal, and the diagonal is irrelevant
    to product-type membership."""
    for cand in ortho_candidates(signatures):
        vt = cand.transposed()
        if all(is_product_type(apply(vt, f)) is not None for f in signatures):
            return cand
    return None


def matrix_to_obj(m) -> dict:
    m = _as_matrix(m)
    return {"rows": [[v.to_text() for v in row] for row in m]}


def matrix_from_obj(obj: dict) -> Matrix2:
    rows = obj["rows"]
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValueError("matrix file must contain 2x2 rows")
    return _as_matrix(rows)
