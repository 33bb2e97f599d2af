"""Exact linear algebra over the prime field GF(q).

Matrices are dense numpy int64 arrays with entries reduced mod q; q is
validated once per model (see `require_prime`), not per element.  A
bit-packed GF(2) path (rows as python ints) backs the hot loops of the
sampler and the pair-enumeration oracles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonPrimeModulus, ZeroInverse


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def require_prime(q: int) -> int:
    if not is_prime(q):
        raise NonPrimeModulus(f"q = {q} is not prime")
    return q


def fq_inv(a: int, q: int) -> int:
    """Multiplicative inverse of a in GF(q), q prime."""
    a %= q
    if a == 0:
        raise ZeroInverse("0 has no inverse in GF(q)")
    # Fermat: a^(q-2) = a^(-1) for prime q.
    return pow(a, q - 2, q)


def asarray_mod(mat, q: int) -> np.ndarray:
    m = np.asarray(mat, dtype=np.int64)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {m.shape}")
    return m % q


@dataclass(frozen=True)
class RrefResult:
    matrix: np.ndarray
    rank: int
    pivot_cols: tuple[int, ...]


def rref(mat, q: int) -> RrefResult:
    """Reduced row echelon form over GF(q) with row swaps for pivoting."""
    m = asarray_mod(mat, q).copy()
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        inv = fq_inv(int(m[r, c]), q)
        if inv != 1:
            m[r] = (m[r] * inv) % q
        others = np.nonzero(m[:, c])[0]
        others = others[others != r]
        if others.size:
            m[others] = (m[others] - np.outer(m[others, c], m[r])) % q
        pivots.append(c)
        r += 1
    return RrefResult(matrix=m, rank=len(pivots), pivot_cols=tuple(pivots))


def rank(mat, q: int) -> int:
    return rref(mat, q).rank


def kernel_basis(mat, q: int) -> np.ndarray:
    """Basis of {v : mat @ v = 0 mod q}, shape (cols - rank, cols)."""
    red = rref(mat, q)
    cols = red.matrix.shape[1]
    pivset = set(red.pivot_cols)
    free = [c for c in range(cols) if c not in pivset]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for r, pc in enumerate(red.pivot_cols):
            basis[k, pc] = (-int(red.matrix[r, fc])) % q
    return basis


def reduce_vector(red: RrefResult, vec, q: int) -> np.ndarray:
    """Residual of a row vector after elimination against RREF rows.

    Zero residual iff vec lies in the row space of the reduced matrix.
    """
    v = np.asarray(vec, dtype=np.int64) % q
    if v.shape != (red.matrix.shape[1],):
        raise DimensionMismatch(f"vector length {v.shape} vs {red.matrix.shape[1]} columns")
    v = v.copy()
    for r, pc in enumerate(red.pivot_cols):
        if v[pc]:
            v = (v - v[pc] * red.matrix[r]) % q
    return v


def solve(mat, b, q: int) -> np.ndarray | None:
    """One solution of mat @ x = b over GF(q), or None if inconsistent.

    Free variables are set to 0.
    """
    m = asarray_mod(mat, q)
    bv = np.asarray(b, dtype=np.int64) % q
    if bv.shape != (m.shape[0],):
        raise DimensionMismatch(f"rhs length {bv.shape} vs {m.shape[0]} rows")
    aug = np.concatenate([m, bv[:, None]], axis=1)
    red = rref(aug, q)
    n = m.shape[1]
    if n in red.pivot_cols:
        return None
    x = np.zeros(n, dtype=np.int64)
    for r, pc in enumerate(red.pivot_cols):
        x[pc] = red.matrix[r, n]
    return x


# ---------------------------------------------------------------------------
# GF(2) bit-packed rows: column j of a row is bit j of a python int.
# ---------------------------------------------------------------------------

def gf2_rref_bits(rows) -> dict[int, int]:
    """Fully reduced echelon form of GF(2) rows given as ints.

    Returns {pivot_col: row}; every pivot column appears in exactly one
    returned row.  Pivot of a row is its lowest set bit.
    """
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            low = (row & -row).bit_length() - 1
            hit = pivots.get(low)
            if hit is None:
                pivots[low] = row
                break
            row ^= hit
    # back-substitute so each pivot column is cleared from the other rows
    for c in sorted(pivots, reverse=True):
        r = pivots[c]
        for c2, r2 in pivots.items():
            if c2 != c and (r2 >> c) & 1:
                pivots[c2] = r2 ^ r
    return pivots


def gf2_ref_bits(rows) -> dict[int, int]:
    """Row echelon form (not reduced): {pivot_col: row}, pivot = lowest bit."""
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            low = (row & -row).bit_length() - 1
            hit = pivots.get(low)
            if hit is None:
                pivots[low] = row
                break
            row ^= hit
    return pivots


def gf2_rank_bits(rows) -> int:
    return len(gf2_ref_bits(rows))


def gf2_residual_bits(pivots: dict[int, int], vec: int) -> int:
    """Reduce vec against reduced rows; 0 iff vec is in their span."""
    while vec:
        low = (vec & -vec).bit_length() - 1
        hit = pivots.get(low)
        if hit is None:
            return vec
        vec ^= hit
    return 0


def gf2_kernel_basis_bits(pivots: dict[int, int], ncols: int) -> list[int]:
    """Kernel basis (as bit rows) of the matrix whose RREF is `pivots`."""
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = 1 << fc
        for pc, row in pivots.items():
            if (row >> fc) & 1:
                v |= 1 << pc
        basis.append(v)
    return basis


def gf2_kernel_sample(pivots: dict[int, int], ncols: int, rng,
                      col_mask: int | None = None) -> int:
    """Uniform sample from the kernel of a GF(2) matrix in echelon form.

    Equivalent to drawing uniform coefficients for a kernel basis: free
    coordinates are i.i.d. fair bits, pivots follow by back-substitution
    in decreasing column order (a row's pivot is its lowest set bit, so
    every other coordinate it touches is solved before it).  Columns
    outside col_mask are pinned to zero instead of being free.
    """
    if col_mask is None:
        col_mask = (1 << ncols) - 1
    free = [c for c in range(ncols) if (col_mask >> c) & 1 and c not in pivots]
    x = 0
    if free:
        draws = rng.integers(0, 2, size=len(free))
        for c, bit in zip(free, draws):
            if bit:
                x |= 1 << c
    for pc in sorted(pivots, reverse=True):
        if ((pivots[pc] & x).bit_count()) & 1:
            x |= 1 << pc
    return x


def bits_to_vector(bits: int, n: int) -> np.ndarray:
    """Unpack an int bitset into a 0/1 vector of length n (bit j -> index j)."""
    raw = bits.to_bytes((n + 7) // 8 or 1, "little")
    arr = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return arr[:n].astype(np.int64)


def vector_to_bits(vec) -> int:
    """Pack a vector's odd entries into an int bitset (index j -> bit j)."""
    arr = (np.asarray(vec, dtype=np.int64) % 2).astype(np.uint8)
    packed = np.packbits(arr, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")
