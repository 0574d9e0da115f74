"""Signature grids and exact Holant evaluation.

A grid is a multigraph whose vertices carry signatures; edges are Boolean
variables joining two vertex slots, and unmatched slots are dangling
edges that turn the grid into a gate realizing a function of them.

Evaluation paths: a brute-force sum over all edge assignments, a greedy
pairwise contraction that computes the same value, and three
polynomial-time solvers for grids whose signatures all lie in one of the
tractable classes (affine, product type, tensor closure of binary).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .classes import (
    gf2_nullspace,
    is_affine,
    is_product_type,
    is_tensor_closure_T,
)
from .scalar import TowerScalar
from .signature import Signature, signature_from_obj, signature_to_obj

DEFAULT_EDGE_CAP = 24
DEFAULT_ARITY_CAP = 16

Endpoint = tuple[int, int]  # (vertex index, 1-based slot)


class GridError(ValueError):
    pass


@dataclass
class SignatureGrid:
    """Vertices with signatures, edges as slot pairs, dangling slots in
    external input order."""

    vertices: list[Signature]
    edges: list[tuple[Endpoint, Endpoint]]
    dangling: list[Endpoint] = field(default_factory=list)
    names: list[str] | None = None

    def __post_init__(self):
        used: set[Endpoint] = set()
        for (a, b) in self.edges:
            for ep in (a, b):
                self._check_endpoint(ep)
                if ep in used:
                    raise GridError(f"slot {ep} used more than once")
                used.add(ep)
        for ep in self.dangling:
            self._check_endpoint(ep)
            if ep in used:
                raise GridError(f"slot {ep} used more than once")
            used.add(ep)
        for v, sig in enumerate(self.vertices):
            for s in range(1, sig.arity + 1):
                if (v, s) not in used:
                    raise GridError(f"slot ({v}, {s}) is not wired")
        total = sum(sig.arity for sig in self.vertices)
        if len(used) != total:
            raise GridError("slot count mismatch")

    def _check_endpoint(self, ep: Endpoint):
        v, s = ep
        if not 0 <= v < len(self.vertices):
            raise GridError(f"vertex {v} out of range")
        if not 1 <= s <= self.vertices[v].arity:
            raise GridError(f"slot {s} out of range for vertex {v}")

    @property
    def closed(self) -> bool:
        return not self.dangling

    def vertex_name(self, v: int) -> str:
        if self.names and self.names[v]:
            return self.names[v]
        return f"v{v}"


# ---------------------------------------------------------------------------
# brute force


def eval_brute(grid: SignatureGrid, *, edge_cap: int = DEFAULT_EDGE_CAP) -> Signature:
    """Sum over all assignments of the internal edges; the result is a
    scalar signature for closed grids, else the dangling-edge function."""
    m = len(grid.edges)
    d = len(grid.dangling)
    if m > edge_cap:
        raise GridError(
            f"{m} internal edges exceed the brute-force cap {edge_cap}; use eval_contract"
        )
    # variable order: internal edges first, then dangling
    var_of: dict[Endpoint, int] = {}
    for e, (a, b) in enumerate(grid.edges):
        var_of[a] = e
        var_of[b] = e
    for k, ep in enumerate(grid.dangling):
        var_of[ep] = m + k
    slots = []
    for v, sig in enumerate(grid.vertices):
        slots.append([var_of[(v, s)] for s in range(1, sig.arity + 1)])
    total_vars = m + d
    out = [TowerScalar(0)] * (1 << d)
    for assign in range(1 << total_vars):
        prod = TowerScalar(1)
        for v, sig in enumerate(grid.vertices):
            idx = 0
            for var in slots[v]:
                idx = (idx << 1) | ((assign >> var) & 1)
            prod = prod * sig.value(idx)
            if prod.is_zero():
                break
        if prod.is_zero():
            continue
        y = 0
        for k in range(d):
            y = (y << 1) | ((assign >> (m + k)) & 1)
        out[y] = out[y] + prod
    return Signature(out)


# ---------------------------------------------------------------------------
# pairwise contraction


def eval_contract(grid: SignatureGrid, *, arity_cap: int = DEFAULT_ARITY_CAP) -> Signature:
    """Same value as eval_brute, computed by greedily merging vertex
    clusters; each merge tensors two clusters and contracts the edges
    between them, the pair chosen to minimize the merged arity."""
    clusters: dict[int, tuple[Signature, list[Endpoint]]] = {}
    for v, sig in enumerate(grid.vertices):
        clusters[v] = (sig, [(v, s) for s in range(1, sig.arity + 1)])
    owner: dict[Endpoint, int] = {}
    for v in clusters:
        for ep in clusters[v][1]:
            owner[ep] = v
    pending = {e: pair for e, pair in enumerate(grid.edges)}

    def contract_internal(cid: int):
        sig, terms = clusters[cid]
        changed = True
        while changed:
            changed = False
            for e, (a, b) in list(pending.items()):
                if owner[a] == cid and owner[b] == cid:
                    pa, pb = terms.index(a) + 1, terms.index(b) + 1
                    sig = sig.connect(pa, pb)
                    for ep in sorted((a, b), key=terms.index, reverse=True):
                        terms.remove(ep)
                    del pending[e]
                    changed = True
        clusters[cid] = (sig, terms)

    for cid in list(clusters):
        contract_internal(cid)

    while pending:
        # choose the merge minimizing the resulting arity
        best = None
        for e, (a, b) in pending.items():
            ca, cb = owner[a], owner[b]
            na = len(clusters[ca][1])
            nb = len(clusters[cb][1])
            links = sum(
                1 for (x, y) in pending.values() if {owner[x], owner[y]} == {ca, cb}
            )
            score = (na + nb - 2 * links, min(ca, cb), max(ca, cb))
            if best is None or score < best[0]:
                best = (score, ca, cb)
        _, ca, cb = best
        sa, ta = clusters[ca]
        sb, tb = clusters[cb]
        if sa.arity + sb.arity > arity_cap:
            raise GridError(
                f"contraction of clusters {ca} and {cb} needs arity "
                f"{sa.arity + sb.arity}, above the cap {arity_cap}"
            )
        merged = sa.tensor(sb)
        terms = ta + tb
        keep = min(ca, cb)
        drop = max(ca, cb)
        for ep in terms:
            owner[ep] = keep
        clusters[keep] = (merged, terms)
        del clusters[drop]
        contract_internal(keep)

    # tensor the remaining disconnected clusters in id order
    cids = sorted(clusters)
    sig, terms = clusters[cids[0]]
    for cid in cids[1:]:
        s2, t2 = clusters[cid]
        if sig.arity + s2.arity > arity_cap:
            raise GridError("final tensor exceeds the arity cap")
        sig = sig.tensor(s2)
        terms = terms + t2
    if not grid.dangling:
        return sig
    # reorder: output position k carries the terminal grid.dangling[k], so
    # raw argument j must read the output bit holding terms[j]
    perm = [grid.dangling.index(ep) + 1 for ep in terms]
    return sig.permute(perm)


# ---------------------------------------------------------------------------
# affine solver


def eval_affine(grid: SignatureGrid) -> Signature:
    """Holant of a closed grid of affine signatures with trivial sign
    polynomials: the product of the magnitudes times 2^(solution space
    dimension) of the combined GF(2) system over the edge variables."""
    if not grid.closed:
        raise GridError("eval_affine needs a closed grid")
    m = len(grid.edges)
    var_of: dict[Endpoint, int] = {}
    for e, (a, b) in enumerate(grid.edges):
        var_of[a] = e
        var_of[b] = e
    magnitude = TowerScalar(1)
    rows: list[tuple[int, int]] = []
    for v, sig in enumerate(grid.vertices):
        w = is_affine(sig)
        if w is None or w.sign_poly:
            raise GridError(
                f"vertex {grid.vertex_name(v)} is not non-negative affine"
            )
        if w.offset is None:
            return Signature([0])  # an identically-zero vertex kills the sum
        magnitude = magnitude * w.magnitude
        n = sig.arity
        # local support = offset + span(basis); constraints are the
        # orthogonal complement evaluated on the edge variables
        for alpha in gf2_nullspace(w.basis, n):
            mask = 0
            for k in range(n):
                if (alpha >> k) & 1:
                    # local bit k is input position n - k
                    mask ^= 1 << var_of[(v, n - k)]
            const = (alpha & w.offset).bit_count() & 1
            rows.append((mask, const))
    # GF(2) elimination for rank and consistency
    pivots: list[tuple[int, int, int]] = []
    for mask, rhs in rows:
        for pb, pm, pr in pivots:
            if (mask >> pb) & 1:
                mask ^= pm
                rhs ^= pr
        if mask == 0:
            if rhs:
                return Signature([0])
            continue
        pivots.append((mask.bit_length() - 1, mask, rhs))
    dim = m - len(pivots)
    return Signature([magnitude * TowerScalar(2) ** dim])


# ---------------------------------------------------------------------------
# product-type solver


def eval_product(grid: SignatureGrid) -> Signature:
    """Holant of a closed grid of product-type signatures via a parity
    union-find over the edge variables: each connected component is
    either contradictory (contributing 0) or leaves one free flip bit
    whose two settings are weighted by the component's factors."""
    if not grid.closed:
        raise GridError("eval_product needs a closed grid")
    m = len(grid.edges)
    var_of: dict[Endpoint, int] = {}
    for e, (a, b) in enumerate(grid.edges):
        var_of[a] = e
        var_of[b] = e

    scale = TowerScalar(1)
    # factors as (vars, u bits per var, weight at u, weight at complement)
    factor_records: list[tuple[list[int], list[int], TowerScalar, TowerScalar]] = []
    for v, sig in enumerate(grid.vertices):
        fac = is_product_type(sig)
        if fac is None:
            raise GridError(f"vertex {grid.vertex_name(v)} is not product type")
        if sig.is_zero():
            return Signature([0])
        scale = scale * fac.scale
        n = sig.arity
        for piece, positions in fac.factors:
            supp = piece.support()
            k = piece.arity
            u = supp[0]
            w_u = piece.value(u)
            ubar = u ^ ((1 << k) - 1)
            w_ubar = piece.value(ubar) if len(supp) == 2 else TowerScalar(0)
            # map factor positions to edge variables, merging repeats
            var_bits: dict[int, int] = {}
            ok = True
            dead = False
            for idx, p in enumerate(positions):
                var = var_of[(v, p)]
                bit = (u >> (k - 1 - idx)) & 1
                if var in var_bits and var_bits[var] != bit:
                    # u and its complement both clash on a repeated variable
                    dead = True
                var_bits[var] = bit
            if dead:
                return Signature([0])
            factor_records.append(
                (list(var_bits.keys()), list(var_bits.values()), w_u, w_ubar)
            )

    parent = list(range(m))
    par = [0] * m

    def root(x: int) -> tuple[int, int]:
        p = 0
        while parent[x] != x:
            p ^= par[x]
            x = parent[x]
        return x, p

    contradictory: set[int] = set()
    for fvars, fbits, _wu, _wubar in factor_records:
        a = fvars[0]
        for b, bit_a, bit_b in zip(fvars[1:], [fbits[0]] * (len(fvars) - 1), fbits[1:]):
            ra, pa = root(a)
            rb, pb = root(b)
            want = bit_a ^ bit_b  # x_a xor x_b on the support
            if ra == rb:
                if pa ^ pb != want:
                    contradictory.add(ra)
            else:
                parent[rb] = ra
                par[rb] = pa ^ pb ^ want
    # refresh contradiction marks to the final roots
    contradictory = {root(x)[0] for x in contradictory}

    component_weights: dict[int, list[tuple[int, TowerScalar, TowerScalar]]] = {}
    for fvars, fbits, wu, wubar in factor_records:
        r, p = root(fvars[0])
        # with the component flip bit t, variable value is t xor parity;
        # the factor takes its u branch when that matches the u bit
        delta = p ^ fbits[0]
        component_weights.setdefault(r, []).append((delta, wu, wubar))

    total = scale
    for r, items in sorted(component_weights.items()):
        if r in contradictory:
            return Signature([0])
        contrib = TowerScalar(0)
        for t in (0, 1):
            term = TowerScalar(1)
            for delta, wu, wubar in items:
                term = term * (wu if t == delta else wubar)
                if term.is_zero():
                    break
            contrib = contrib + term
        if contrib.is_zero():
            return Signature([0])
        total = total * contrib
    return Signature([total])


# ---------------------------------------------------------------------------
# binary (tensor closure) solver


def eval_binary(grid: SignatureGrid) -> Signature:
    """Holant of a closed grid whose signatures split into arity-<=2
    factors: the factor graph is a union of paths and cycles, evaluated
    as vector-matrix chains and matrix traces."""
    if not grid.closed:
        raise GridError("eval_binary needs a closed grid")
    scale = TowerScalar(1)
    nodes: list[tuple[Signature, list[Endpoint]]] = []
    for v, sig in enumerate(grid.vertices):
        if not is_tensor_closure_T(sig):
            raise GridError(
                f"vertex {grid.vertex_name(v)} does not split into binary factors"
            )
        if sig.is_zero():
            return Signature([0])
        if sig.arity == 0:
            scale = scale * sig.scalar_value()
            continue
        fac = sig.factorize()
        scale = scale * fac.scale
        for piece, positions in fac.factors:
            nodes.append((piece, [(v, p) for p in positions]))

    # port lookup: each endpoint belongs to one node
    port_of: dict[Endpoint, tuple[int, int]] = {}
    for k, (_piece, eps) in enumerate(nodes):
        for i, ep in enumerate(eps):
            port_of[ep] = (k, i)
    neighbor: dict[tuple[int, int], tuple[int, int]] = {}
    for (a, b) in grid.edges:
        neighbor[port_of[a]] = port_of[b]
        neighbor[port_of[b]] = port_of[a]

    visited = [False] * len(nodes)
    total = scale

    def matrix_of(k: int, entry_port: int):
        piece, _ = nodes[k]
        # rows indexed by the entry port, columns by the exit port
        if entry_port == 0:
            return [[piece.value(0), piece.value(1)], [piece.value(2), piece.value(3)]]
        return [[piece.value(0), piece.value(2)], [piece.value(1), piece.value(3)]]

    # paths: start from unary nodes
    for start in range(len(nodes)):
        if visited[start] or nodes[start][0].arity != 1:
            continue
        visited[start] = True
        vec = [nodes[start][0].value(0), nodes[start][0].value(1)]
        k, port = neighbor[(start, 0)]
        while nodes[k][0].arity == 2:
            visited[k] = True
            mat = matrix_of(k, port)
            vec = [
                vec[0] * mat[0][0] + vec[1] * mat[1][0],
                vec[0] * mat[0][1] + vec[1] * mat[1][1],
            ]
            k, port = neighbor[(k, 1 - port)]
        visited[k] = True
        u = nodes[k][0]
        total = total * (vec[0] * u.value(0) + vec[1] * u.value(1))

    # cycles: whatever remains is binary nodes closed into loops
    for start in range(len(nodes)):
        if visited[start]:
            continue
        visited[start] = True
        mat = matrix_of(start, 0)
        k, port = neighbor[(start, 1)]
        while k != start:
            visited[k] = True
            nxt = matrix_of(k, port)
            mat = [
                [
                    mat[0][0] * nxt[0][0] + mat[0][1] * nxt[1][0],
                    mat[0][0] * nxt[0][1] + mat[0][1] * nxt[1][1],
                ],
                [
                    mat[1][0] * nxt[0][0] + mat[1][1] * nxt[1][0],
                    mat[1][0] * nxt[0][1] + mat[1][1] * nxt[1][1],
                ],
            ]
            k, port = neighbor[(k, 1 - port)]
        assert port == 0, "cycle closed through the wrong port"
        total = total * (mat[0][0] + mat[1][1])
    return Signature([total])


# ---------------------------------------------------------------------------
# dispatcher


def eval_auto(grid: SignatureGrid) -> tuple[Signature, str]:
    """Pick the class solver the grid qualifies for, falling back to
    contraction; returns (value, method tag)."""
    if not grid.closed:
        return eval_contract(grid), "contract"
    sigs = grid.vertices
    if all(
        (w := is_affine(s)) is not None and not w.sign_poly for s in sigs
    ):
        return eval_affine(grid), "affine"
    if all(is_product_type(s) is not None for s in sigs):
        return eval_product(grid), "product"
    if all(is_tensor_closure_T(s) for s in sigs):
        return eval_binary(grid), "binary"
    return eval_contract(grid), "contract"


EVAL_METHODS = {
    "auto": None,
    "brute": eval_brute,
    "contract": eval_contract,
    "affine": eval_affine,
    "product": eval_product,
    "binary": eval_binary,
}


# ---------------------------------------------------------------------------
# grid files


def grid_to_obj(grid: SignatureGrid) -> dict:
    names = grid.names or [f"s{v}" for v in range(len(grid.vertices))]
    catalog: dict[str, Signature] = {}
    vertex_names = []
    for name, sig in zip(names, grid.vertices):
        if name in catalog and not (catalog[name] == sig):
            raise GridError(f"two different signatures share the name {name!r}")
        catalog[name] = sig
        vertex_names.append(name)
    return {
        "signatures": {
            name: signature_to_obj(sig) for name, sig in catalog.items()
        },
        "vertices": [{"sig": name} for name in vertex_names],
        "edges": [[list(a), list(b)] for (a, b) in grid.edges],
        "dangling": [list(ep) for ep in grid.dangling],
    }


def grid_from_obj(obj: dict) -> SignatureGrid:
    catalog = {
        name: signature_from_obj(sobj) for name, sobj in obj["signatures"].items()
    }
    vertices = []
    names = []
    for ventry in obj["vertices"]:
        name = ventry["sig"]
        if name not in catalog:
            raise GridError(f"vertex signature {name!r} is not defined")
        vertices.append(catalog[name])
        names.append(name)
    edges = [
        ((int(a[0]), int(a[1])), (int(b[0]), int(b[1]))) for a, b in obj.get("edges", [])
    ]
    dangling = [(int(ep[0]), int(ep[1])) for ep in obj.get("dangling", [])]
    return SignatureGrid(vertices, edges, dangling, names)
