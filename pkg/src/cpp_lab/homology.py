"""Relative (co)homology of percolation pairs, V_gamma, and area oracles.

For a percolation pair (P2, P1) of dimensions (i+1, i) the relative
cochain group below degree i vanishes, so H^i(P2, P1) coincides with the
space of relative cocycles: cochains vanishing on the open cells of P1
whose coboundary vanishes on the open cells of P2.  All ranks are
computed by Gaussian elimination over GF(q).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import gfq
from .complexes import Chain, PercSubcomplex
from .errors import BudgetExceeded, DimensionMismatch


@dataclass(frozen=True)
class RelPair:
    """A percolation pair (P2, P1) of dimensions (i+1, i)."""

    P2: PercSubcomplex
    P1: PercSubcomplex

    def __post_init__(self):
        if self.P1.complex is not self.P2.complex:
            raise DimensionMismatch("pair subcomplexes live on different complexes")
        if self.P2.dim != self.P1.dim + 1:
            raise DimensionMismatch(
                f"pair dims must be (i+1, i), got ({self.P2.dim}, {self.P1.dim})")

    @property
    def complex(self):
        return self.P2.complex

    @property
    def i(self) -> int:
        return self.P1.dim


@dataclass(frozen=True)
class CocycleSpace:
    pair: RelPair
    basis: np.ndarray  # shape (dim, n_i)
    dim: int


def cocycle_matrix(pair: RelPair, q: int) -> np.ndarray:
    """Constraint matrix whose kernel is Z^i(P2, P1): one identity row per
    open i-cell of P1, one coboundary row per open (i+1)-cell of P2."""
    X = pair.complex
    i = pair.i
    n_i = X.num_cells(i)
    rows = []
    for e in pair.P1.open_ids():
        r = np.zeros(n_i, dtype=np.int64)
        r[e] = 1
        rows.append(r)
    if X.num_cells(i + 1):
        delta = X.boundary_matrix(i + 1, q).T  # rows: (i+1)-cells, cols: i-cells
        for s in pair.P2.open_ids():
            rows.append(delta[s])
    if not rows:
        return np.zeros((0, n_i), dtype=np.int64)
    return np.vstack(rows)


def relative_cocycle_space(pair: RelPair, q: int) -> CocycleSpace:
    """Basis of the compatible cochains Z^i(P2, P1) over GF(q)."""
    gfq.require_prime(q)
    basis = gfq.kernel_basis(cocycle_matrix(pair, q), q)
    return CocycleSpace(pair=pair, basis=basis, dim=basis.shape[0])


def _face_masks(X, j: int) -> list[int]:
    """GF(2) boundary rows of j-cells as bit masks over (j-1)-cell ids.

    Cached on the complex instance so the cache lives exactly as long as
    the complex does.
    """
    cache = getattr(X, "_face_mask_cache", None)
    if cache is None:
        cache = {}
        X._face_mask_cache = cache
    masks = cache.get(j)
    if masks is None:
        faces, _ = X.incidence(j)
        masks = []
        for row in faces:
            m = 0
            for f in row:
                m ^= 1 << int(f)
            masks.append(m)
        cache[j] = masks
    return masks


def _pair_rank_gf2(X, i: int, bits2: int, bits1: int) -> int:
    """Rank of the cocycle constraint system over GF(2)."""
    n_i = X.num_cells(i)
    closed = ((1 << n_i) - 1) & ~bits1
    masks = _face_masks(X, i + 1) if i + 1 <= X.d else []
    rows = []
    b2 = bits2
    while b2:
        s = (b2 & -b2).bit_length() - 1
        rows.append(masks[s] & closed)
        b2 &= b2 - 1
    return bits1.bit_count() + gfq.gf2_rank_bits(rows)


def pair_cocycle_dim(X, i: int, q: int, bits2: int, bits1: int) -> int:
    """dim Z^i(P2, P1) for the pair given as bitsets; equals b_i(P2, P1)."""
    n_i = X.num_cells(i)
    if q == 2:
        return n_i - _pair_rank_gf2(X, i, bits2, bits1)
    n_next = X.num_cells(i + 1)
    closed = [e for e in range(n_i) if not (bits1 >> e) & 1]
    open2 = [s for s in range(n_next) if (bits2 >> s) & 1]
    if not open2 or not closed:
        return len(closed)
    delta = X.boundary_matrix(i + 1, q).T
    sub = delta[np.ix_(open2, closed)]
    return len(closed) - gfq.rank(sub, q)


def _restricted_delta(X, j: int, q: int, dom_ids, cod_ids) -> np.ndarray:
    """Coboundary C^j -> C^(j+1) restricted to column ids dom_ids and row
    ids cod_ids."""
    if j + 1 > X.d or not len(dom_ids) or not len(cod_ids):
        return np.zeros((len(cod_ids), len(dom_ids)), dtype=np.int64)
    delta = X.boundary_matrix(j + 1, q).T
    return delta[np.ix_(list(cod_ids), list(dom_ids))]


def subcomplex_cohomology_rank(X, s_cells: dict[int, set[int] | None],
                               a_cells: dict[int, set[int] | None],
                               j: int, q: int) -> int:
    """rank H^j(S, A) for explicit subcomplexes S >= A of X.

    Cells per dimension are given as sets of ids, with None meaning all
    cells of X in that dimension and a missing key meaning none.
    """
    gfq.require_prime(q)

    def level(cells: dict, k: int) -> set[int]:
        if k not in cells:
            return set()
        v = cells[k]
        return set(range(X.num_cells(k))) if v is None else set(v)

    def rel_ids(k: int) -> list[int]:
        return sorted(level(s_cells, k) - level(a_cells, k))

    dom = rel_ids(j)
    up = _restricted_delta(X, j, q, dom, rel_ids(j + 1))
    z_dim = len(dom) - gfq.rank(up, q)
    down = _restricted_delta(X, j - 1, q, rel_ids(j - 1), dom) if j >= 1 else \
        np.zeros((len(dom), 0), dtype=np.int64)
    return z_dim - gfq.rank(down, q)


def _pair_levels(pair: RelPair) -> tuple[dict, dict]:
    i = pair.i
    s: dict[int, set[int] | None] = {k: None for k in range(i + 1)}
    s[i + 1] = set(pair.P2.open_ids())
    a: dict[int, set[int] | None] = {k: None for k in range(i)}
    a[i] = set(pair.P1.open_ids())
    return s, a


def rel_betti(pair: RelPair, j: int, q: int) -> int:
    """Relative Betti number b_j(P2, P1) over GF(q)."""
    i = pair.i
    if j < i or j > i + 1:
        return 0
    if j == i:
        return pair_cocycle_dim(pair.complex, i, q, pair.P2.bits, pair.P1.bits)
    s, a = _pair_levels(pair)
    return subcomplex_cohomology_rank(pair.complex, s, a, j, q)


def betti(obj, j: int, q: int) -> int:
    """Absolute Betti number of a complex or a percolation subcomplex."""
    if isinstance(obj, PercSubcomplex):
        X = obj.complex
        s: dict[int, set[int] | None] = {k: None for k in range(obj.dim)}
        s[obj.dim] = set(obj.open_ids())
    else:
        X = obj
        s = {k: None for k in range(X.d + 1)}
    return subcomplex_cohomology_rank(X, s, {}, j, q)


def v_gamma(pair: RelPair, gamma: Chain, q: int) -> bool:
    """Whether gamma is null-homologous rel P1 using (i+1)-chains in P2.

    Equivalent to solvability of [boundary | P1-inclusion] x = gamma, i.e.
    gamma lying in the row space of the cocycle constraint matrix.
    """
    X = pair.complex
    i = pair.i
    if gamma.dim != i or gamma.q != q:
        raise DimensionMismatch("gamma has wrong dimension or modulus")
    if q == 2:
        n_i = X.num_cells(i)
        closed = ((1 << n_i) - 1) & ~pair.P1.bits
        masks = _face_masks(X, i + 1) if i + 1 <= X.d else []
        rows = [masks[s] & closed for s in pair.P2.open_ids()]
        gbits = 0
        for idx, c in gamma.coeffs:
            if c % 2:
                gbits |= 1 << idx
        return gfq.gf2_residual_bits(gfq.gf2_ref_bits(rows), gbits & closed) == 0
    mat = cocycle_matrix(pair, q)
    red = gfq.rref(mat, q)
    res = gfq.reduce_vector(red, gamma.vector(X.num_cells(i)), q)
    return not res.any()


def euler_characteristic(obj) -> int:
    """Alternating sum of cell counts of a complex, subcomplex, or pair."""
    if isinstance(obj, RelPair):
        i = obj.i
        n_i = obj.complex.num_cells(i)
        return (-1) ** i * (n_i - obj.P1.count) + (-1) ** (i + 1) * obj.P2.count
    if isinstance(obj, PercSubcomplex):
        X = obj.complex
        total = sum((-1) ** j * X.num_cells(j) for j in range(obj.dim))
        return total + (-1) ** obj.dim * obj.count
    return sum((-1) ** j * n for j, n in enumerate(obj.cell_counts()))


def min_area(gamma: Chain, X, q: int, budget: int = 1_000_000) -> int | None:
    """Minimal plaquette count of a 2-chain tau with boundary gamma.

    Exhaustive search over 2-cell subsets in increasing cardinality; exact
    but exponential, intended as a test oracle only.  Returns None when no
    bounding chain exists in the ambient complex; raises BudgetExceeded
    after examining `budget` candidate subsets.
    """
    if gamma.dim != 1:
        raise DimensionMismatch("min_area expects a 1-chain")
    if not gamma.coeffs:
        return 0
    n1 = X.num_cells(1)
    n2 = X.num_cells(2)
    gvec = gamma.vector(n1)
    bmat = X.boundary_matrix(2, q)
    if gfq.solve(bmat, gvec, q) is None:
        return None
    examined = 0
    for k in range(1, n2 + 1):
        for subset in itertools.combinations(range(n2), k):
            examined += 1
            if examined > budget:
                raise BudgetExceeded(f"min_area examined {budget} subsets")
            if gfq.solve(bmat[:, list(subset)], gvec, q) is not None:
                return k
    return None
