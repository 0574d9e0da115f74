"""The tractability classifier and the block-rank-one diagnostics.

A finite set of non-negative signatures is polynomial-time tractable
exactly when it lies in the binary tensor closure, in the affine class,
or in an orthogonal transform of the product type; otherwise the
counting problem is #P-hard.  The three memberships are decided exactly;
the orthogonal-transform search runs over the eigenbasis candidates
harvested from realizable Gram matrices.

When every Gram matrix of every irreducible factor is a scalar multiple
of the identity, no candidate is pinned and exhausting the list does not
by itself rule out an exotic basis; the verdict then carries an explicit
caveat instead of claiming a proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from typing import Iterator, Optional, Sequence

from .classes import block_rank_one, is_affine, is_product_type, is_tensor_closure_T
from .evaluate import SignatureGrid, eval_brute
from .scalar import TowerScalar
from .signature import Signature
from .transform import OrthoCandidate, transformable_to_P

HARD_PROVEN = "proven-by-theorem"
HARD_CAVEAT = "no-candidate-passed; candidate set possibly incomplete"


@dataclass
class BlockRankViolation:
    """A realizable witness against the block-rank-one condition.

    `grid` is the gate whose squared function, marginalized over the
    variables in `summed` and reshaped with `row_vars` against
    `col_vars`, has the non-orthogonal independent `row_pair`.  The rows
    recorded for display are those of the gate function itself (for
    non-negative values, squaring preserves both row dependence and row
    orthogonality, so the same pair witnesses both).
    """

    grid: SignatureGrid
    summed: tuple[int, ...]
    row_vars: tuple[int, ...]
    col_vars: tuple[int, ...]
    row_pair: tuple[int, int]
    rows: tuple[tuple[TowerScalar, ...], tuple[TowerScalar, ...]]

    @property
    def t(self) -> int:
        return len(self.row_vars) + len(self.col_vars)

    @property
    def r(self) -> int:
        return len(self.row_vars)


@dataclass
class BalanceViolation:
    permutation: tuple[int, ...]
    r: int
    row_pair: tuple[int, int]


@dataclass
class Verdict:
    """Outcome of the dichotomy test with membership flags.

    tractable <=> at least one membership holds.  `product_transform`
    holds the orthogonal-column witness when the set maps into the
    product type.  For hard sets `hardness_note` distinguishes the
    proven case from exhaustion of a possibly-incomplete candidate
    list.
    """

    outcome: str  # "tractable" | "hard"
    tensor_closure: bool
    affine: bool
    product_transform: Optional[OrthoCandidate]
    hardness_note: Optional[str] = None
    violation: Optional[BlockRankViolation] = None

    @property
    def tractable(self) -> bool:
        return self.outcome == "tractable"

    def memberships(self) -> list[str]:
        out = []
        if self.tensor_closure:
            out.append("tensor")
        if self.affine:
            out.append("affine")
        if self.product_transform is not None:
            out.append("product")
        return out


def classify(
    signatures: Sequence[Signature],
    *,
    violation_budget: Optional[tuple[int, int]] = None,
) -> Verdict:
    """Decide the dichotomy for a finite set of non-negative signatures.

    With `violation_budget` = (max vertices, max dangling), a hard
    verdict additionally carries the first block-rank-one violation
    found within that gate budget.
    """
    signatures = list(signatures)
    if not signatures:
        raise ValueError("classify needs at least one signature")
    for k, f in enumerate(signatures):
        if not f.is_nonnegative():
            raise ValueError(
                f"signature {k} has a negative value; the dichotomy covers "
                "non-negative real weights only"
            )
    tensor = all(is_tensor_closure_T(f) for f in signatures)
    affine = all(is_affine(f) is not None for f in signatures)
    transform = transformable_to_P(signatures)
    if tensor or affine or transform is not None:
        return Verdict("tractable", tensor, affine, transform)
    note = HARD_PROVEN if _candidates_pinned(signatures) else HARD_CAVEAT
    violation = None
    if violation_budget is not None:
        violation = search_blockrank_violation(signatures, *violation_budget)
    return Verdict("hard", False, False, None, note, violation)


def csp_classify(signatures: Sequence[Signature]) -> str:
    """The unrestricted-occurrence counting-CSP verdict: tractable exactly
    when the set is wholly affine or wholly product type."""
    signatures = list(signatures)
    for f in signatures:
        if not f.is_nonnegative():
            raise ValueError("the CSP verdict covers non-negative weights only")
    if all(is_affine(f) is not None for f in signatures):
        return "tractable"
    if all(is_product_type(f) is not None for f in signatures):
        return "tractable"
    return "hard"


def _candidates_pinned(signatures: Sequence[Signature]) -> bool:
    """True when some irreducible factor of arity >= 2 has a non-scalar
    Gram matrix.

    An orthogonal basis change conjugates every such Gram matrix, and a
    product-type image forces the conjugated matrix diagonal; a
    non-scalar symmetric matrix is diagonalized only by its own
    eigenbasis (up to order and sign), which the candidate list
    contains.  Exhausting the list is then a proof.
    """
    for f in signatures:
        if f.is_zero():
            continue
        for piece, _pos in f.factorize().factors:
            if piece.arity < 2:
                continue
            for i in range(1, piece.arity + 1):
                g = piece.gram(i)
                if not g.entry(0, 1).is_zero():
                    return True
                if not (g.entry(0, 0) == g.entry(1, 1)):
                    return True
    return False


# ---------------------------------------------------------------------------
# bounded search for block-rank-one violations


def search_blockrank_violation(
    signatures: Sequence[Signature],
    max_vertices: int,
    max_dangling: int,
) -> Optional[BlockRankViolation]:
    """First violation of the block-rank-one condition among small gates.

    Gates are enumerated by vertex count and canonical wiring over the
    given set (the bare signatures included); each gate function g is
    squared pointwise (the squared function is realizable as the
    closed doubling of the gate, and its marginals are exactly what the
    condition constrains), then every split of the dangling variables
    into summed / row / column groups is tested.
    """
    signatures = list(signatures)
    for f in signatures:
        if not f.is_nonnegative():
            raise ValueError("the witness search covers non-negative signatures only")
    for grid in _enumerate_gates(signatures, max_vertices, max_dangling):
        g = eval_brute(grid)
        found = _violation_in_function(g)
        if found is not None:
            summed, row_vars, col_vars, pair, rows = found
            return BlockRankViolation(grid, summed, row_vars, col_vars, pair, rows)
    return None


def _violation_in_function(g: Signature):
    """Scan the squared function's marginal reshapes for a row pair that
    is neither dependent nor orthogonal."""
    d = g.arity
    if d < 2:
        return None
    h = g.pointwise_product(g)
    positions = list(range(1, d + 1))
    # summed groups by size, then the row set among the remainder
    for s_size in range(0, d - 1):
        for summed in combinations(positions, s_size):
            rest = [p for p in positions if p not in summed]
            marg = _sum_out(h, summed)
            marg_g = _sum_out(g, summed) if s_size == 0 else None
            for r_size in range(1, len(rest)):
                for rows_rel in combinations(range(len(rest)), r_size):
                    row_vars = tuple(rest[i] for i in rows_rel)
                    col_vars = tuple(p for p in rest if p not in row_vars)
                    view = marg.matrix_view(
                        [rest.index(p) + 1 for p in row_vars]
                    )
                    pair = block_rank_one(view)
                    if pair is None:
                        continue
                    # display rows from the unsquared function when the
                    # view was not marginalized
                    if marg_g is not None:
                        gview = marg_g.matrix_view(
                            [rest.index(p) + 1 for p in row_vars]
                        )
                        rows = (gview.rows[pair[0]], gview.rows[pair[1]])
                    else:
                        rows = (view.rows[pair[0]], view.rows[pair[1]])
                    return tuple(summed), row_vars, col_vars, pair, rows
    return None


def _sum_out(f: Signature, positions) -> Signature:
    g = f
    for p in sorted(positions, reverse=True):
        g = g.pin(p, 0).add(g.pin(p, 1))
    return g


def _enumerate_gates(
    signatures: Sequence[Signature], max_vertices: int, max_dangling: int
) -> Iterator[SignatureGrid]:
    names = [f"f{k}" for k in range(len(signatures))]
    for nv in range(1, max_vertices + 1):
        for combo in combinations_with_replacement(range(len(signatures)), nv):
            sigs = [signatures[k] for k in combo]
            slots = [
                (v, s) for v, sig in enumerate(sigs) for s in range(1, sig.arity + 1)
            ]
            for edges, dangling in _pairings(slots, max_dangling):
                if not dangling:
                    continue  # closed gates realize scalars
                yield SignatureGrid(
                    sigs, edges, dangling, [names[k] for k in combo]
                )


def _pairings(slots, max_dangling: int):
    """All (edge list, dangling list) splits of the slots, each slot used
    once, dangling kept in slot order; canonical recursive order."""
    out: list[tuple[list, list]] = []

    def rec(remaining: tuple, edges: tuple, dangling: tuple):
        if len(dangling) > max_dangling:
            return
        if not remaining:
            out.append((list(edges), list(dangling)))
            return
        first, rest = remaining[0], remaining[1:]
        # first slot dangles
        rec(rest, edges, dangling + (first,))
        # or pairs with a later slot
        for k in range(len(rest)):
            rec(
                rest[:k] + rest[k + 1 :],
                edges + ((first, rest[k]),),
                dangling,
            )

    rec(tuple(slots), (), ())
    return out


# ---------------------------------------------------------------------------
# single-function balance slice


def check_balance(f: Signature) -> Optional[BalanceViolation]:
    """Scan every row/column split of the full table (all input
    permutations up to row-set symmetry) for a block-rank-one failure.

    This is the single-function slice of the balance property; gates
    over the function can only add more constraints.
    """
    if not f.is_nonnegative():
        raise ValueError("check_balance covers non-negative signatures only")
    n = f.arity
    positions = list(range(1, n + 1))
    for r in range(1, n):
        for rows in combinations(positions, r):
            view = f.matrix_view(rows)
            pair = block_rank_one(view)
            if pair is not None:
                perm = tuple(rows) + tuple(p for p in positions if p not in rows)
                return BalanceViolation(perm, r, pair)
    return None
