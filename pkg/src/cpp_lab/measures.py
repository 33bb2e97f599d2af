"""Exact weights and small-instance enumeration oracles.

Three coupled measures on a finite cell complex X with prime q:

  * mu    -- spin measure on i-cochains, weight (1+k1)^#{f=0} (1+k2)^#{df=0}
  * rho   -- percolation pair measure, weight k2^|P2| k1^|P1| r^{b_i(P2,P1)}
             (r = q is the plain model; other r give the auxiliary model)
  * kappa -- the coupling on (f, P2, P1)

All oracle arithmetic is exact: parameters are rationals in the
k = p/(1-p) coordinates, and p = 1 (infinite k) is carried as k = None,
which forces the corresponding cells open.  Floating point appears only
in Wilson phases for q > 3.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import gfq, homology
from .complexes import Chain, PercSubcomplex, graph_complex
from .errors import DegenerateParameter, TooLarge, ValidationError

DEFAULT_STATE_GUARD = 1 << 26

KRat = Fraction | None  # None encodes k = infinity, i.e. p = 1


def _as_k(value, name: str) -> KRat:
    if value is None:
        return None
    k = Fraction(value)
    if k < 0:
        raise ValidationError(f"{name} must be >= 0, got {k}")
    return k


@dataclass(frozen=True)
class ModelParams:
    """Model parameters in the k = p/(1-p) = e^beta - 1 coordinates."""

    q: int
    i: int
    k2: KRat
    k1: KRat
    r: Fraction | None = None

    def __post_init__(self):
        gfq.require_prime(self.q)
        if self.i < 0:
            raise ValidationError(f"i must be >= 0, got {self.i}")
        object.__setattr__(self, "k2", _as_k(self.k2, "k2"))
        object.__setattr__(self, "k1", _as_k(self.k1, "k1"))
        r = Fraction(self.q) if self.r is None else Fraction(self.r)
        if r < 0:
            raise ValidationError(f"r must be >= 0, got {r}")
        object.__setattr__(self, "r", r)

    @classmethod
    def from_p(cls, q: int, i: int, p2, p1, r=None) -> "ModelParams":
        def to_k(p, name):
            p = Fraction(p)
            if not 0 <= p <= 1:
                raise ValidationError(f"{name} must be in [0,1], got {p}")
            return None if p == 1 else p / (1 - p)

        return cls(q=q, i=i, k2=to_k(p2, "p2"), k1=to_k(p1, "p1"), r=r)

    @property
    def p2(self) -> Fraction:
        return Fraction(1) if self.k2 is None else self.k2 / (1 + self.k2)

    @property
    def p1(self) -> Fraction:
        return Fraction(1) if self.k1 is None else self.k1 / (1 + self.k1)

    @property
    def is_plain(self) -> bool:
        return self.r == self.q


def delta_cochain(f, X, j: int, q: int) -> np.ndarray:
    """Coboundary values (df)(sigma) = f(boundary sigma) on all (j+1)-cells."""
    if j + 1 > X.d:
        return np.zeros(0, dtype=np.int64)
    faces, signs = X.incidence(j + 1)
    if faces.shape[1] == 0:
        return np.zeros(faces.shape[0], dtype=np.int64)
    fv = np.asarray(f, dtype=np.int64)
    return (fv[faces] * signs).sum(axis=1) % q


def mu_weight(f, params: ModelParams, X) -> Fraction:
    """Unnormalized spin weight, proportional to exp(-H(f))."""
    if params.k2 is None or params.k1 is None:
        raise DegenerateParameter("mu is not defined at p = 1 (infinite k)")
    fv = np.asarray(f, dtype=np.int64) % params.q
    z1 = int((fv == 0).sum())
    z2 = int((delta_cochain(fv, X, params.i, params.q) == 0).sum())
    return (1 + params.k1) ** z1 * (1 + params.k2) ** z2


def cpp_weight(P2: PercSubcomplex, P1: PercSubcomplex, params: ModelParams, X) -> Fraction:
    """Unnormalized percolation-pair weight k2^|P2| k1^|P1| r^b.

    With k = None (p = 1) the weight is zero unless the corresponding
    subcomplex is full, matching the p-coordinate form of the measure.
    """
    n2 = X.num_cells(params.i + 1)
    n1 = X.num_cells(params.i)
    if params.k2 is None:
        w2 = Fraction(1 if P2.count == n2 else 0)
    else:
        w2 = params.k2 ** P2.count
    if params.k1 is None:
        w1 = Fraction(1 if P1.count == n1 else 0)
    else:
        w1 = params.k1 ** P1.count
    if w2 == 0 or w1 == 0:
        return Fraction(0)
    b = homology.pair_cocycle_dim(X, params.i, params.q, P2.bits, P1.bits)
    return w2 * w1 * params.r ** b


def _site_factor(k: KRat, is_open: bool, indicator: bool) -> Fraction:
    # closed cell: factor 1 for finite k, (1-p) = 0 at p = 1
    if k is None:
        return Fraction(1 if (is_open and indicator) else 0)
    if not is_open:
        return Fraction(1)
    return k if indicator else Fraction(0)


def kappa_weight(f, P2: PercSubcomplex, P1: PercSubcomplex, params: ModelParams, X) -> Fraction:
    """Coupling weight; zero iff some open cell violates its constraint."""
    fv = np.asarray(f, dtype=np.int64) % params.q
    df = delta_cochain(fv, X, params.i, params.q)
    w = Fraction(1)
    for e in range(X.num_cells(params.i)):
        w *= _site_factor(params.k1, P1.has(e), fv[e] == 0)
        if w == 0:
            return w
    for s in range(X.num_cells(params.i + 1)):
        w *= _site_factor(params.k2, P2.has(s), df[s] == 0)
        if w == 0:
            return w
    return w


def kappa_gauge_weight(f, g, P2: PercSubcomplex, P1: PercSubcomplex,
                       params: ModelParams, X) -> Fraction:
    """General-gauge coupling weight: the edge constraint is f = dg."""
    q = params.q
    fv = np.asarray(f, dtype=np.int64) % q
    gv = np.asarray(g, dtype=np.int64) % q
    dg = delta_cochain(gv, X, params.i - 1, q) if params.i >= 1 else np.zeros_like(fv)
    df = delta_cochain(fv, X, params.i, q)
    w = Fraction(1)
    for e in range(X.num_cells(params.i)):
        w *= _site_factor(params.k1, P1.has(e), fv[e] == dg[e])
        if w == 0:
            return w
    for s in range(X.num_cells(params.i + 1)):
        w *= _site_factor(params.k2, P2.has(s), df[s] == 0)
        if w == 0:
            return w
    return w


# ---------------------------------------------------------------------------
# Exact distributions
# ---------------------------------------------------------------------------

@dataclass
class Dist:
    """An exact finite distribution: configuration -> rational weight > 0."""

    entries: dict
    total: Fraction

    @classmethod
    def from_weights(cls, weights: dict) -> "Dist":
        entries = {k: Fraction(w) for k, w in weights.items() if w}
        total = sum(entries.values(), Fraction(0))
        if total <= 0:
            raise ValidationError("distribution has zero total weight")
        return cls(entries=entries, total=total)

    def prob(self, key) -> Fraction:
        return self.entries.get(key, Fraction(0)) / self.total

    def normalized(self) -> dict:
        return {k: w / self.total for k, w in self.entries.items()}

    def marginal(self, project: Callable) -> "Dist":
        acc: dict = {}
        for k, w in self.entries.items():
            pk = project(k)
            acc[pk] = acc.get(pk, Fraction(0)) + w
        return Dist(entries=acc, total=self.total)

    def expectation(self, fn: Callable) -> Fraction:
        return sum((w * Fraction(fn(k)) for k, w in self.entries.items()),
                   Fraction(0)) / self.total

    def event_prob(self, pred: Callable) -> Fraction:
        return sum((w for k, w in self.entries.items() if pred(k)),
                   Fraction(0)) / self.total

    def max_discrepancy(self, other: "Dist", key_map: Callable = lambda k: k) -> Fraction:
        mine = {key_map(k): v for k, v in self.normalized().items()}
        theirs = other.normalized()
        worst = Fraction(0)
        for k in set(mine) | set(theirs):
            d = abs(mine.get(k, Fraction(0)) - theirs.get(k, Fraction(0)))
            worst = max(worst, d)
        return worst

    def csv_rows(self, key_str: Callable = repr) -> list[tuple[str, int, int]]:
        rows = []
        for k in sorted(self.entries, key=key_str):
            w = self.entries[k]
            rows.append((key_str(k), w.numerator, w.denominator))
        return rows

    def to_json(self, key_str: Callable = repr) -> dict:
        return {
            "total": {"num": self.total.numerator, "den": self.total.denominator},
            "entries": [
                {"config": cid, "num": n, "den": d} for cid, n, d in self.csv_rows(key_str)
            ],
        }


def _guard(states: int, max_states: int) -> None:
    if states > max_states:
        raise TooLarge(states, max_states)


def all_cochains(n: int, q: int, max_states: int = DEFAULT_STATE_GUARD) -> np.ndarray:
    """All q^n cochains as an array of digits, first cell most significant."""
    count = q ** n
    _guard(count, max_states)
    out = np.empty((count, n), dtype=np.int64)
    ar = np.arange(count)
    for k in range(n):
        out[:, n - 1 - k] = (ar // q ** k) % q
    return out


def mu_class_data(params: ModelParams, X,
                  gammas: Sequence[Chain] = (),
                  max_states: int = DEFAULT_STATE_GUARD):
    """Per-cochain zero counts and loop pairings for the full spin space.

    Returns (F, z1, z2, gvals) with F the (q^n, n) cochain table, z1/z2 the
    numbers of vanishing spins/plaquette sums, and gvals one residue array
    per requested chain.
    """
    q, i = params.q, params.i
    n_i = X.num_cells(i)
    F = all_cochains(n_i, q, max_states)
    z1 = (F == 0).sum(axis=1)
    if i + 1 <= X.d and X.num_cells(i + 1):
        faces, signs = X.incidence(i + 1)
        dF = np.einsum("mjk,jk->mj", F[:, faces], signs) % q
        z2 = (dF == 0).sum(axis=1)
    else:
        z2 = np.zeros(len(F), dtype=np.int64)
    gvals = [(F @ g.vector(n_i)) % q for g in gammas]
    return F, z1, z2, gvals


def _mu_weight_table(params: ModelParams, X) -> list[list[Fraction]]:
    n1 = X.num_cells(params.i)
    n2 = X.num_cells(params.i + 1)
    if params.k1 is None or params.k2 is None:
        raise DegenerateParameter("mu is not defined at p = 1")
    a = 1 + params.k1
    b = 1 + params.k2
    return [[a ** z1 * b ** z2 for z2 in range(n2 + 1)] for z1 in range(n1 + 1)]


def enumerate_mu(params: ModelParams, X,
                 max_states: int = DEFAULT_STATE_GUARD) -> Dist:
    """Exact spin distribution; keys are cochain tuples."""
    F, z1, z2, _ = mu_class_data(params, X, (), max_states)
    table = _mu_weight_table(params, X)
    weights = {
        tuple(int(v) for v in row): table[int(a)][int(b)]
        for row, a, b in zip(F, z1, z2)
    }
    return Dist.from_weights(weights)


def _instance_cache(X, name: str) -> dict:
    cache = getattr(X, name, None)
    if cache is None:
        cache = {}
        setattr(X, name, cache)
    return cache


def pair_betti_table(X, i: int, q: int,
                     max_states: int = DEFAULT_STATE_GUARD) -> np.ndarray:
    """b_i(P2, P1) for every pair, indexed by (bits2 << n1) | bits1."""
    cache = _instance_cache(X, "_pair_table_cache")
    cached = cache.get((i, q))
    if cached is not None:
        return cached
    n1 = X.num_cells(i)
    n2 = X.num_cells(i + 1)
    _guard(1 << (n1 + n2), max_states)
    out = np.zeros(1 << (n1 + n2), dtype=np.int16)
    for bits2 in range(1 << n2):
        base = bits2 << n1
        for bits1 in range(1 << n1):
            out[base | bits1] = homology.pair_cocycle_dim(X, i, q, bits2, bits1)
    cache[(i, q)] = out
    return out


def vgamma_table(X, i: int, q: int, gamma: Chain,
                 max_states: int = DEFAULT_STATE_GUARD) -> np.ndarray:
    """V_gamma indicator for every pair, indexed like pair_betti_table."""
    cache = _instance_cache(X, "_vgamma_cache")
    key = (i, q, gamma.coeffs)
    cached = cache.get(key)
    if cached is not None:
        return cached
    n1 = X.num_cells(i)
    n2 = X.num_cells(i + 1)
    _guard(1 << (n1 + n2), max_states)
    out = np.zeros(1 << (n1 + n2), dtype=bool)
    for bits2 in range(1 << n2):
        base = bits2 << n1
        for bits1 in range(1 << n1):
            pair = homology.RelPair(PercSubcomplex(X, i + 1, bits2),
                                    PercSubcomplex(X, i, bits1))
            out[base | bits1] = homology.v_gamma(pair, gamma, q)
    cache[key] = out
    return out


def _k_pow_factors(k: KRat, n: int) -> list[Fraction | None]:
    """k^c for c = 0..n, or the p = 1 convention (only the full state counts)."""
    if k is None:
        return [Fraction(0)] * n + [Fraction(1)]
    return [k ** c for c in range(n + 1)]


def enumerate_rho(params: ModelParams, X,
                  max_states: int = DEFAULT_STATE_GUARD) -> Dist:
    """Exact pair distribution; keys are (bits2, bits1)."""
    i, q = params.i, params.q
    n1 = X.num_cells(i)
    n2 = X.num_cells(i + 1)
    table = pair_betti_table(X, i, q, max_states)
    w2 = _k_pow_factors(params.k2, n2)
    w1 = _k_pow_factors(params.k1, n1)
    rpow = [params.r ** b for b in range(n1 + 1)]
    weights = {}
    for bits2 in range(1 << n2):
        f2 = w2[bits2.bit_count()]
        if f2 == 0:
            continue
        base = bits2 << n1
        for bits1 in range(1 << n1):
            f1 = w1[bits1.bit_count()]
            if f1 == 0:
                continue
            weights[(bits2, bits1)] = f2 * f1 * rpow[int(table[base | bits1])]
    return Dist.from_weights(weights)


def _finite_k(params: ModelParams, what: str) -> tuple[Fraction, Fraction]:
    if params.k2 is None or params.k1 is None:
        raise DegenerateParameter(f"{what} requires finite k (p < 1)")
    return params.k2, params.k1


def enumerate_kappa(params: ModelParams, X,
                    max_states: int = DEFAULT_STATE_GUARD) -> Dist:
    """Exact coupling distribution on (f, P2, P1).

    Keys are (f tuple, bits2, bits1); only states of positive weight are
    stored, but the guard applies to the full product space.
    """
    if not params.is_plain:
        raise ValidationError("the coupling is defined for the plain model r = q")
    k2, k1 = _finite_k(params, "kappa enumeration")
    q, i = params.q, params.i
    n1 = X.num_cells(i)
    n2 = X.num_cells(i + 1)
    _guard(q ** n1 << (n1 + n2), max_states)
    F, _, _, _ = mu_class_data(params, X, (), max_states)
    pw1 = [k1 ** c for c in range(n1 + 1)]
    pw2 = [k2 ** c for c in range(n2 + 1)]
    weights = {}
    for row in F:
        fkey = tuple(int(v) for v in row)
        zmask1 = _zero_mask(row)
        zmask2 = _zero_mask(delta_cochain(row, X, i, q))
        for bits1 in _submasks(zmask1):
            wf1 = pw1[bits1.bit_count()]
            for bits2 in _submasks(zmask2):
                weights[(fkey, bits2, bits1)] = wf1 * pw2[bits2.bit_count()]
    return Dist.from_weights(weights)


def _zero_mask(values) -> int:
    mask = 0
    for idx, v in enumerate(values):
        if int(v) == 0:
            mask |= 1 << idx
    return mask


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def kappa_marginals(params: ModelParams, X,
                    max_states: int = DEFAULT_STATE_GUARD) -> tuple[Dist, Dist]:
    """Exact marginals of the coupling, streamed without materializing it.

    Walks every positive-weight (f, P2, P1) state once, accumulating the
    f-marginal and the (P2, P1)-marginal with integer-scaled exact weights.
    Returns (spin marginal, pair marginal).
    """
    if not params.is_plain:
        raise ValidationError("the coupling is defined for the plain model r = q")
    k2, k1 = _finite_k(params, "kappa marginalization")
    q, i = params.q, params.i
    n1 = X.num_cells(i)
    n2 = X.num_cells(i + 1)
    F, z1, z2, _ = mu_class_data(params, X, (), max_states)
    # workload = number of positive-weight coupling states
    work = int(sum(1 << int(a + b) for a, b in zip(z1, z2)))
    _guard(work, max_states)
    # integer weights scaled by den(k1)^n1 den(k2)^n2
    pw1 = [k1.numerator ** c * k1.denominator ** (n1 - c) for c in range(n1 + 1)]
    pw2 = [k2.numerator ** c * k2.denominator ** (n2 - c) for c in range(n2 + 1)]
    marg_f: dict = {}
    marg_pair: dict = {}
    for row in F:
        zmask1 = _zero_mask(row)
        zmask2 = _zero_mask(delta_cochain(row, X, i, q))
        tot_f = 0
        for bits1 in _submasks(zmask1):
            w1 = pw1[bits1.bit_count()]
            for bits2 in _submasks(zmask2):
                w = w1 * pw2[bits2.bit_count()]
                tot_f += w
                pk = (bits2, bits1)
                prev = marg_pair.get(pk)
                marg_pair[pk] = w if prev is None else prev + w
        marg_f[tuple(int(v) for v in row)] = tot_f
    return Dist.from_weights(marg_f), Dist.from_weights(marg_pair)


# ---------------------------------------------------------------------------
# Wilson expectations and the identity E_mu[W_gamma] = rho(V_gamma)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WilsonResult:
    lhs: complex                 # E_mu[W_gamma], floating point
    rhs: Fraction                # rho(V_gamma), exact
    lhs_exact: Fraction | None   # exact value when the phases are rational (q <= 3)

    @property
    def abs_difference(self) -> float:
        return abs(self.lhs - complex(float(self.rhs), 0.0))


def wilson_class_sums(params: ModelParams, X, gamma: Chain,
                      max_states: int = DEFAULT_STATE_GUARD) -> list[Fraction]:
    """A_c = sum of mu-weights of cochains with f(gamma) = c, for c in Z_q."""
    q = params.q
    _, z1, z2, gvals = mu_class_data(params, X, (gamma,), max_states)
    gv = gvals[0]
    n1 = X.num_cells(params.i)
    n2 = X.num_cells(params.i + 1)
    enc = (z1 * (n2 + 1) + z2) * q + gv
    counts = np.bincount(enc, minlength=(n1 + 1) * (n2 + 1) * q)
    table = _mu_weight_table(params, X)
    sums = [Fraction(0)] * q
    for a in range(n1 + 1):
        for b in range(n2 + 1):
            base = (a * (n2 + 1) + b) * q
            for c in range(q):
                n = int(counts[base + c])
                if n:
                    sums[c] += n * table[a][b]
    return sums


def wilson_expectation_exact(sums: Sequence[Fraction], q: int) -> Fraction | None:
    """Exact E[W] when the q-th roots of unity have rational real part."""
    total = sum(sums, Fraction(0))
    if q == 2:
        return (sums[0] - sums[1]) / total
    if q == 3:
        return (sums[0] - (sums[1] + sums[2]) / 2) / total
    return None


def exact_wilson(params: ModelParams, X, gamma: Chain,
                 max_states: int = DEFAULT_STATE_GUARD) -> WilsonResult:
    """Both sides of the Wilson identity, from full enumeration."""
    q = params.q
    sums = wilson_class_sums(params, X, gamma, max_states)
    total = sum(sums, Fraction(0))
    lhs = sum(float(a / total) * cmath.exp(2j * cmath.pi * c / q)
              for c, a in enumerate(sums))
    lhs_exact = wilson_expectation_exact(sums, q)
    if lhs_exact is not None:
        lhs = complex(float(lhs_exact), 0.0)

    rho = enumerate_rho(params, X, max_states)
    flags = vgamma_table(X, params.i, q, gamma, max_states)
    n1 = X.num_cells(params.i)
    num = sum((w for (b2, b1), w in rho.entries.items() if flags[(b2 << n1) | b1]),
              Fraction(0))
    return WilsonResult(lhs=lhs, rhs=num / rho.total, lhs_exact=lhs_exact)


# ---------------------------------------------------------------------------
# Ghost vertex equivalence (i = 0)
# ---------------------------------------------------------------------------

def ghost_vertex_check(params: ModelParams, n_vertices: int,
                       edges: Sequence[tuple[int, int]],
                       max_states: int = DEFAULT_STATE_GUARD) -> bool:
    """Exact equivalence of the i=0 coupling with the ghost-vertex coupling.

    Builds G' by joining every vertex to a ghost vertex g, maps each
    (f, P2, P1) state to (f extended by f(g)=0, P2 + ghost edges of P1),
    and verifies the coupling weights agree exactly on all states.
    """
    if params.i != 0:
        raise ValidationError("the ghost construction applies to i = 0 only")
    k2, k1 = _finite_k(params, "ghost check")
    q = params.q
    G = graph_complex(n_vertices, edges)
    ne = len(edges)
    _guard((q ** n_vertices) << (n_vertices + ne), max_states)

    ghost_edges = list(edges) + [(v, n_vertices) for v in range(n_vertices)]
    Gp = graph_complex(n_vertices + 1, ghost_edges)
    k_by_edge = [k2] * ne + [k1] * n_vertices

    for f in itertools.product(range(q), repeat=n_vertices):
        fv = np.array(f, dtype=np.int64)
        fpv = np.concatenate([fv, [0]])
        dfp = delta_cochain(fpv, Gp, 0, q)
        for bits2 in range(1 << ne):
            for bits1 in range(1 << n_vertices):
                P2 = PercSubcomplex(G, 1, bits2)
                P1 = PercSubcomplex(G, 0, bits1)
                w = kappa_weight(fv, P2, P1, params, G)
                pbits = bits2 | (bits1 << ne)
                wp = Fraction(1)
                for e in range(ne + n_vertices):
                    wp *= _site_factor(k_by_edge[e], bool((pbits >> e) & 1),
                                       int(dfp[e]) == 0)
                    if wp == 0:
                        break
                if w != wp:
                    return False
    return True


# ---------------------------------------------------------------------------
# Reference distributions and conditionals used by verification suites
# ---------------------------------------------------------------------------

def bernoulli_bits_dist(n: int, p: Fraction) -> Dist:
    """Independent open/closed cells: weight p^|bits| (1-p)^(n-|bits|)."""
    p = Fraction(p)
    weights = {}
    for bits in range(1 << n):
        c = bits.bit_count()
        w = p ** c * (1 - p) ** (n - c)
        if w:
            weights[bits] = w
    return Dist.from_weights(weights)


def prcm_dist(X, j: int, q: int, p: Fraction,
              coefficient_q: int | None = None,
              max_states: int = DEFAULT_STATE_GUARD) -> Dist:
    """The j-dimensional plaquette random cluster model on X.

    Weight p^|P| (1-p)^(n-|P|) * |H^(j-1)(P; Z_q)|; coefficient_q = 1 gives
    Bernoulli percolation.
    """
    p = Fraction(p)
    n = X.num_cells(j)
    _guard(1 << n, max_states)
    cq = q if coefficient_q is None else coefficient_q
    weights = {}
    for bits in range(1 << n):
        c = bits.bit_count()
        w = p ** c * (1 - p) ** (n - c)
        if w == 0:
            continue
        if cq != 1:
            P = PercSubcomplex(X, j, bits)
            w *= Fraction(cq) ** homology.betti(P, j - 1, q)
        weights[bits] = w
    return Dist.from_weights(weights)


def one_point_conditional(params: ModelParams, X, bits2: int, bits1: int,
                          dim_offset: int, cell: int) -> Fraction:
    """P(cell open | everything else) under rho/rho-hat from exact weights.

    dim_offset 0 conditions an i-cell of P1, 1 an (i+1)-cell of P2.
    """
    i = params.i
    if dim_offset == 0:
        on = PercSubcomplex(X, i, bits1 | (1 << cell))
        off = PercSubcomplex(X, i, bits1 & ~(1 << cell))
        P2 = PercSubcomplex(X, i + 1, bits2)
        w_on = cpp_weight(P2, on, params, X)
        w_off = cpp_weight(P2, off, params, X)
    else:
        on = PercSubcomplex(X, i + 1, bits2 | (1 << cell))
        off = PercSubcomplex(X, i + 1, bits2 & ~(1 << cell))
        P1 = PercSubcomplex(X, i, bits1)
        w_on = cpp_weight(on, P1, params, X)
        w_off = cpp_weight(off, P1, params, X)
    return w_on / (w_on + w_off)
