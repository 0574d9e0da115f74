"""Named gadget constructions used as closed-form oracles.

Each gadget is assembled as a signature grid and evaluated by the
generic contraction path; the closed-form expressions the outputs are
checked against live in the test suite and the CLI report, never here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .scalar import TowerScalar, scalar
from .signature import MatrixView, Signature
from .evaluate import SignatureGrid, eval_contract
from .transform import apply


def _match_pattern(f: Signature, pattern: dict[int, TowerScalar | None]) -> bool:
    """pattern maps index -> required value (None = unconstrained); all
    other indices must be zero."""
    for x, v in enumerate(f.values):
        if x in pattern:
            want = pattern[x]
            if want is not None and not (v == want):
                return False
        elif not v.is_zero():
            return False
    return True


def triangle(f: Signature, alpha) -> Signature:
    """The three-vertex cyclic gadget on diag(1, alpha)-twisted copies of
    a ternary f supported on {000, 011, 101, 110}.

    Each vertex keeps input 1 dangling; input 2 of every vertex meets
    input 3 of the next one around the cycle.  The output is symmetric
    of arity 3.
    """
    if f.arity != 3:
        raise ValueError("triangle needs a ternary signature")
    if not _match_pattern(f, {0b000: None, 0b011: None, 0b101: None, 0b110: None}):
        raise ValueError(
            "triangle needs support inside {000, 011, 101, 110} "
            f"(got support {f.support_strings()})"
        )
    alpha = scalar(alpha)
    f_a = apply([[1, 0], [0, alpha]], f)
    grid = SignatureGrid(
        [f_a, f_a, f_a],
        edges=[((0, 2), (1, 3)), ((1, 2), (2, 3)), ((2, 2), (0, 3))],
        dangling=[(0, 1), (1, 1), (2, 1)],
    )
    return eval_contract(grid)


# Frozen K4 wiring reproducing the documented closed forms; found by
# exhausting slot assignments against the formulas and validated on
# random rational inputs.  Edge ids: 0:(0,1) 1:(0,2) 2:(0,3) 3:(1,2)
# 4:(1,3) 5:(2,3); vertex slots listed for inputs 1..4.
_TET_EDGES = [
    ((0, 2), (1, 3)),  # edge 0
    ((0, 3), (2, 2)),  # edge 1
    ((0, 4), (3, 4)),  # edge 2
    ((1, 4), (2, 4)),  # edge 3
    ((1, 2), (3, 3)),  # edge 4
    ((2, 3), (3, 2)),  # edge 5
]
_TET_DANGLING = [(0, 1), (3, 1), (1, 1), (2, 1)]


def tetrahedron(f: Signature) -> Signature:
    """The four-vertex complete gadget on an arity-4 f whose matrix is
    [[1,0,0,a],[0,b,c,0],[0,c,b,0],[a,0,0,1]], one dangling input per
    vertex; the output matrix has the redundant [[x,0,0,y],[0,z,z,0],
    [0,z,z,0],[y,0,0,x]] shape."""
    a, b, c = tetrahedron_parameters(f)
    grid = SignatureGrid([f, f, f, f], edges=list(_TET_EDGES), dangling=list(_TET_DANGLING))
    return eval_contract(grid)


def tetrahedron_parameters(f: Signature) -> tuple[TowerScalar, TowerScalar, TowerScalar]:
    """(a, b, c) of the required input pattern; raises on mismatch."""
    if f.arity != 4:
        raise ValueError("tetrahedron needs an arity-4 signature")
    v = f.values
    one = TowerScalar(1)
    a, b, c = v[0b0011], v[0b0101], v[0b0110]
    pattern = {
        0b0000: one, 0b1111: one,
        0b0011: a, 0b1100: a,
        0b0101: b, 0b1010: b,
        0b0110: c, 0b1001: c,
    }
    if not _match_pattern(f, pattern):
        raise ValueError(
            "tetrahedron needs the matrix pattern [[1,0,0,a],[0,b,c,0],"
            "[0,c,b,0],[a,0,0,1]]"
        )
    return a, b, c


@dataclass
class CompressedMatrix:
    """The 3x3 reduction of a redundant 4x4 matrix (equal middle rows and
    equal middle columns): the middle pair is averaged on the row side
    and summed on the column side."""

    rows: tuple[tuple[TowerScalar, ...], ...]

    def entry(self, i: int, j: int) -> TowerScalar:
        return self.rows[i][j]

    def det(self) -> TowerScalar:
        r = self.rows
        return (
            r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
        )

    def transpose(self) -> "CompressedMatrix":
        return CompressedMatrix(tuple(zip(*self.rows)))

    def to_text_rows(self) -> list[list[str]]:
        return [[v.to_text() for v in row] for row in self.rows]


def compress(m: MatrixView) -> CompressedMatrix:
    """AMB for a redundant 4x4 matrix M, with A averaging the middle rows
    and B summing the middle columns."""
    if m.nrows != 4 or m.ncols != 4:
        raise ValueError("compress needs a 4x4 matrix")
    r = m.rows
    for j in range(4):
        if not (r[1][j] == r[2][j]):
            raise ValueError(
                f"middle rows differ in column {j}: "
                f"{r[1][j].to_text()} vs {r[2][j].to_text()}"
            )
    for i in range(4):
        if not (r[i][1] == r[i][2]):
            raise ValueError(
                f"middle columns differ in row {i}: "
                f"{r[i][1].to_text()} vs {r[i][2].to_text()}"
            )
    half = TowerScalar(1) / 2
    def row_combo(i):
        return r[i] if i != 1 else tuple(half * (r[1][j] + r[2][j]) for j in range(4))
    out = []
    for i in (0, 1, 3):
        src = row_combo(i)
        out.append((src[0], src[1] + src[2], src[3]))
    return CompressedMatrix(tuple(out))


def vandermonde_demo(alpha, beta, g: Signature, n: int):
    """The unary family diag(alpha, beta)^s g for s = 0..n together with
    the exact pairwise-independence check that makes the family usable
    for interpolation (true iff no two members are linearly dependent)."""
    alpha = scalar(alpha)
    beta = scalar(beta)
    if alpha.is_zero() or beta.is_zero():
        raise ValueError("the diagonal entries must be nonzero")
    if g.arity != 1:
        raise ValueError("vandermonde_demo needs a unary signature")
    a, b = g.value(0), g.value(1)
    if a.is_zero() or b.is_zero():
        raise ValueError("the seed unary must have nonzero entries")
    sigs = []
    pa, pb = TowerScalar(1), TowerScalar(1)
    for _ in range(n + 1):
        sigs.append(Signature([a * pa, b * pb]))
        pa = pa * alpha
        pb = pb * beta
    nonsingular = True
    for s in range(len(sigs)):
        for t in range(s + 1, len(sigs)):
            det = sigs[s].value(0) * sigs[t].value(1) - sigs[t].value(0) * sigs[s].value(1)
            if det.is_zero():
                nonsingular = False
    return sigs, nonsingular


def can_interpolate_eq4(f: Signature) -> bool:
    """True when the middle of the 2+2 matrix view vanishes and the
    remaining corner 2x2 block is nonsingular."""
    if f.arity != 4:
        return False
    m = f.matrix_view([1, 2])
    for i in range(4):
        for j in range(4):
            if i in (0, 3) and j in (0, 3):
                continue
            if not m.entry(i, j).is_zero():
                return False
    a, b = m.entry(0, 0), m.entry(0, 3)
    c, d = m.entry(3, 0), m.entry(3, 3)
    return not (a * d - b * c).is_zero()
