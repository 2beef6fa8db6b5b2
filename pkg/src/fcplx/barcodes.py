"""Canonical-form decomposition, boundary depth and the exact
bottleneck distance for filtered complexes.

Every filtered complex decomposes, by a level-preserving invertible
change of basis, into one-generator summands (infinite bars) and
two-generator summands d(y) = x (finite bars [ell(x), ell(y)) tagged
with the degree of x).  The reduction is a filtration-aware Gaussian
elimination: generators are processed in increasing (level, input
order) and the pivot of a column is its maximal entry in that same
order, which both pins the barcode and yields the change-of-basis
witness.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .f2linalg import F2SparseMatrix, F2Vector, invert
from .rationals import POS_INF, fmt_scalar, is_finite
from .complexes import (
    FilteredChainMap,
    FilteredComplex,
    Generator,
    direct_sum,
    is_nullhomotopic_within,
    make_complex,
    zero_complex,
)


class Bar(NamedTuple):
    degree: int
    lo: Fraction
    hi: Fraction  # POS_INF for infinite bars

    def length(self):
        if self.hi == POS_INF:
            return POS_INF
        return self.hi - self.lo

    def is_finite(self):
        return self.hi != POS_INF


class Barcode:
    """Finite multiset of bars; equality is multiset equality."""

    __slots__ = ("bars",)

    def __init__(self, bars=()):
        object.__setattr__(
            self, "bars", tuple(sorted(Bar(*b) for b in bars))
        )

    def __setattr__(self, name, value):
        raise AttributeError("Barcode is immutable")

    def __eq__(self, other):
        return isinstance(other, Barcode) and self.bars == other.bars

    def __hash__(self):
        return hash(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def __len__(self):
        return len(self.bars)

    def __repr__(self):
        return f"Barcode({list(self.bars)})"

    def finite(self):
        return tuple(b for b in self.bars if b.is_finite())

    def infinite(self):
        return tuple(b for b in self.bars if not b.is_finite())

    def union(self, other):
        return Barcode(self.bars + other.bars)

    def shifted(self, r):
        r = Fraction(r)
        return Barcode(
            Bar(b.degree, b.lo + r, b.hi if b.hi == POS_INF else b.hi + r)
            for b in self.bars
        )

    def degree_translated(self, k):
        """Barcode of T^k applied to the underlying complex."""
        return Barcode(Bar(b.degree - k, b.lo, b.hi) for b in self.bars)

    def without_zero_length(self):
        return Barcode(b for b in self.bars if b.length() != 0)


def barcode_to_text(B: Barcode) -> str:
    lines = []
    for b in B.bars:
        hi = "inf" if b.hi == POS_INF else fmt_scalar(b.hi)
        lines.append(f"bar {b.degree} {fmt_scalar(b.lo)} {hi}")
    return "\n".join(lines) + ("\n" if lines else "")


class CanonicalFormWitness:
    """Change of basis taking the input basis to a canonical one.

    `matrix` column j holds the j-th new basis vector in the original
    coordinates; conjugating the differential by it gives the canonical
    shape (each paired generator maps exactly to its partner, all other
    generators map to zero).  `pairs` lists (x_index, y_index) with
    d(new y) = new x.
    """

    __slots__ = ("complex", "matrix", "pairs", "unpaired")

    def __init__(self, complex, matrix, pairs, unpaired):
        object.__setattr__(self, "complex", complex)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "pairs", tuple(pairs))
        object.__setattr__(self, "unpaired", tuple(unpaired))

    def __setattr__(self, name, value):
        raise AttributeError("CanonicalFormWitness is immutable")

    def conjugated_differential(self) -> F2SparseMatrix:
        U = self.matrix
        D = self.complex.diff_matrix()
        return invert(U).matmul(D).matmul(U)

    def check(self) -> bool:
        """Witness invariants: invertible, level-preserving, canonical."""
        X = self.complex
        for j in range(X.n):
            col = self.matrix.column(j)
            if X.level_of(col) != X.gens[j].ell:
                return False
        try:
            Dp = self.conjugated_differential()
        except ValueError:
            return False
        expect = {y: x for x, y in self.pairs}
        for j in range(X.n):
            want = F2Vector([expect[j]]) if j in expect else F2Vector()
            if Dp.column(j) != want:
                return False
        return True


def canonical_form(X: FilteredComplex):
    """Barcode plus change-of-basis witness for a valid complex."""
    problems = X.validate()
    if problems:
        raise ValueError("invalid complex: " + "; ".join(problems))
    n = X.n
    order = sorted(range(n), key=lambda i: (X.gens[i].ell, i))
    pos = {orig: p for p, orig in enumerate(order)}

    def to_pos(vec: F2Vector) -> int:
        m = 0
        for i in vec:
            m |= 1 << pos[i]
        return m

    def to_orig(mask: int) -> F2Vector:
        m = 0
        while mask:
            low = mask & -mask
            m |= 1 << order[low.bit_length() - 1]
            mask ^= low
        return F2Vector(mask=m)

    cols = [to_pos(X.diff[order[p]]) for p in range(n)]
    track = [1 << p for p in range(n)]
    owner = {}
    for p in range(n):
        c, t = cols[p], track[p]
        while c:
            piv = c.bit_length() - 1
            k = owner.get(piv)
            if k is None:
                owner[piv] = p
                break
            c ^= cols[k]
            t ^= track[k]
        cols[p], track[p] = c, t

    bars = []
    pairs = []
    unpaired = []
    new_basis = [None] * n
    pivot_rows = set(owner)
    for p in range(n):
        if cols[p]:
            piv = cols[p].bit_length() - 1
            x_orig, y_orig = order[piv], order[p]
            pairs.append((x_orig, y_orig))
            new_basis[y_orig] = to_orig(track[p])
            new_basis[x_orig] = to_orig(cols[p])
            bars.append(
                Bar(X.gens[x_orig].degree, X.gens[x_orig].ell,
                    X.gens[y_orig].ell)
            )
        elif p not in pivot_rows:
            g = order[p]
            unpaired.append(g)
            new_basis[g] = to_orig(track[p])
            bars.append(Bar(X.gens[g].degree, X.gens[g].ell, POS_INF))
    witness = CanonicalFormWitness(
        X, F2SparseMatrix(new_basis, n), pairs, unpaired
    )
    return Barcode(bars), witness


def barcode(X: FilteredComplex) -> Barcode:
    return canonical_form(X)[0]


def from_barcode(B: Barcode) -> FilteredComplex:
    """A concrete complex realizing a barcode, one summand per bar."""
    triples = []
    boundaries = {}
    for k, b in enumerate(sorted(B, key=lambda b: (b.degree, b.lo, b.hi))):
        if b.hi == POS_INF:
            triples.append((f"i{k}", b.degree, b.lo))
        else:
            triples.append((f"x{k}", b.degree, b.lo))
            triples.append((f"y{k}", b.degree - 1, b.hi))
            boundaries[f"y{k}"] = [f"x{k}"]
    return make_complex(triples, boundaries)


def boundary_depth(obj):
    """Length of the longest finite bar; 0 when there is none."""
    B = obj if isinstance(obj, Barcode) else barcode(obj)
    depth = Fraction(0)
    for b in B.finite():
        if b.length() > depth:
            depth = b.length()
    return depth


def is_r_acyclic(X, r, want_witness=False):
    """No infinite bars and depth <= r; optionally the nullhomotopy of
    the identity that witnesses it."""
    r = Fraction(r)
    if r < 0:
        raise ValueError("acyclicity threshold must be >= 0")
    B = barcode(X)
    ok = not B.infinite() and boundary_depth(B) <= r
    if not want_witness:
        return ok
    if not ok:
        return False, None
    h = is_nullhomotopic_within(FilteredChainMap.identity(X), r)
    return True, h


def persistence_rank(X, r, s, degree) -> int:
    """Rank of the structure map H^degree(level <= r) -> H^degree(<= s)."""
    r, s = Fraction(r), Fraction(s)
    if s < r:
        raise ValueError("persistence_rank needs r <= s")
    B = barcode(X)
    return sum(
        1 for b in B if b.degree == degree and b.lo <= r and b.hi > s
    )


def interval_structure_map(degree, lo, hi, r):
    """Persistence-module view of a single bar: is the map shifting the
    parameter down by r the zero map (r-torsion)?"""
    r = Fraction(r)
    if r < 0:
        raise ValueError("r must be >= 0")
    length = POS_INF if hi == POS_INF else Fraction(hi) - Fraction(lo)
    return {
        "degree": degree,
        "length": length,
        "torsion": is_finite(length) and r >= length,
    }


# ----------------------------------------------------------------------
# bottleneck distance


class BottleneckWitness(NamedTuple):
    value: object
    matched: tuple      # pairs (bar in B1, bar in B2)
    short1: tuple
    short2: tuple


def _short_threshold(b: Bar, rule):
    # level at which the bar may be discarded as short
    if rule == "half":
        return 2 * b.length()
    if rule == "double":
        return Fraction(b.length(), 2)
    raise ValueError(f"unknown short rule {rule!r}")


def _finite_pair_cost(a: Bar, b: Bar):
    return max(abs(a.lo - b.lo), abs(a.hi - b.hi))


def _perfect_matching(nl, nr, edges):
    """Maximum bipartite matching; returns pair list if perfect."""
    adj = [[] for _ in range(nl)]
    for i, j in edges:
        adj[i].append(j)
    match_r = [-1] * nr
    match_l = [-1] * nl

    def augment(i, seen):
        for j in adj[i]:
            if seen[j]:
                continue
            seen[j] = True
            if match_r[j] == -1 or augment(match_r[j], seen):
                match_r[j] = i
                match_l[i] = j
                return True
        return False

    size = 0
    for i in range(nl):
        if augment(i, [False] * nr):
            size += 1
    if size != nl or nl != nr:
        return None
    return [(i, match_l[i]) for i in range(nl)]


def _degree_feasible(fin1, fin2, inf1, inf2, tau, rule):
    """Matching test within one degree; returns witness data or None."""
    if len(inf1) != len(inf2):
        return None
    inf_edges = [
        (i, j)
        for i in range(len(inf1))
        for j in range(len(inf2))
        if abs(inf1[i].lo - inf2[j].lo) <= tau
    ]
    inf_match = _perfect_matching(len(inf1), len(inf2), inf_edges)
    if inf_match is None:
        return None
    # extended graph: left = fin1 + diagonal copies of fin2,
    # right = fin2 + diagonal copies of fin1; diagonal-diagonal always ok
    n1, n2 = len(fin1), len(fin2)
    edges = []
    for i in range(n1):
        for j in range(n2):
            if _finite_pair_cost(fin1[i], fin2[j]) <= tau:
                edges.append((i, j))
        if _short_threshold(fin1[i], rule) <= tau:
            edges.append((i, n2 + i))
    for j in range(n2):
        if _short_threshold(fin2[j], rule) <= tau:
            edges.append((n1 + j, j))
    for j in range(n2):
        for i in range(n1):
            edges.append((n1 + j, n2 + i))
    fin_match = _perfect_matching(n1 + n2, n2 + n1, edges)
    if fin_match is None:
        return None
    matched, short1, short2 = [], [], []
    for i, j in fin_match:
        if i < n1 and j < n2:
            matched.append((fin1[i], fin2[j]))
        elif i < n1:
            short1.append(fin1[i])
        elif j < n2:
            short2.append(fin2[j])
    matched.extend((inf1[i], inf2[j]) for i, j in inf_match)
    return matched, short1, short2


def _split_by_degree(B: Barcode):
    out = {}
    for b in B:
        out.setdefault(b.degree, ([], []))[0 if b.is_finite() else 1].append(b)
    return out


def bottleneck(B1: Barcode, B2: Barcode, rule="half"):
    """Exact bottleneck distance with matching witness.

    rule="half" is the strict convention implemented by default: a bar
    may be dropped as short at tolerance tau only if twice its length is
    at most tau.  rule="double" allows dropping bars of length up to
    2*tau (the common convention, for cross-tool comparison).
    Bars are only ever matched within equal degree.
    """
    d1, d2 = _split_by_degree(B1), _split_by_degree(B2)
    degrees = sorted(set(d1) | set(d2))
    for deg in degrees:
        if len(d1.get(deg, ((), ()))[1]) != len(d2.get(deg, ((), ()))[1]):
            return POS_INF, BottleneckWitness(POS_INF, (), (), ())
    candidates = {Fraction(0)}
    for deg in degrees:
        fin1, inf1 = d1.get(deg, ([], []))
        fin2, inf2 = d2.get(deg, ([], []))
        for a in fin1:
            candidates.add(_short_threshold(a, rule))
            for b in fin2:
                candidates.add(abs(a.lo - b.lo))
                candidates.add(abs(a.hi - b.hi))
        for b in fin2:
            candidates.add(_short_threshold(b, rule))
        for a in inf1:
            for b in inf2:
                candidates.add(abs(a.lo - b.lo))

    def feasible(tau):
        matched, s1, s2 = [], [], []
        for deg in degrees:
            fin1, inf1 = d1.get(deg, ([], []))
            fin2, inf2 = d2.get(deg, ([], []))
            got = _degree_feasible(fin1, fin2, inf1, inf2, tau, rule)
            if got is None:
                return None
            matched.extend(got[0])
            s1.extend(got[1])
            s2.extend(got[2])
        return matched, s1, s2

    grid = sorted(candidates)
    lo, hi = 0, len(grid) - 1
    if feasible(grid[hi]) is None:
        raise AssertionError("bottleneck candidate grid is incomplete")
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(grid[mid]) is None:
            lo = mid + 1
        else:
            hi = mid
    tau = grid[lo]
    matched, s1, s2 = feasible(tau)
    return tau, BottleneckWitness(tau, tuple(matched), tuple(s1), tuple(s2))


# ----------------------------------------------------------------------
# assorted helpers on top of the canonical form


def complexes_barcode_equal(X, Y) -> bool:
    return barcode(X) == barcode(Y)


def sum_complexes(parts):
    """Iterated direct sum, dropping zero summands."""
    total = zero_complex()
    for p in parts:
        total = direct_sum(total, p).complex
    return total
