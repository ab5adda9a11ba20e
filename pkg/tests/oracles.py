"""Independent oracles for the test suite.

Nothing here imports the package; each oracle recomputes a quantity by the
most direct method available (brute force over vertex permutations, point
counts over finite fields, sympy for linear algebra).
"""

import itertools
from fractions import Fraction
from math import factorial

import sympy


# ------------------------------------------------------------ stable graphs
def _key(genera, legs, edges, perm):
    """Relabel vertices by ``perm`` (old -> new) and return a comparable tuple."""
    V = len(genera)
    g2 = [0] * V
    for v in range(V):
        g2[perm[v]] = genera[v]
    l2 = tuple(perm[x] for x in legs)
    e2 = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges))
    return tuple(g2), l2, e2


def canonical_key(genera, legs, edges):
    """Lexicographically least relabeling: brute force over all vertex permutations."""
    V = len(genera)
    return min(_key(genera, legs, edges, p) for p in itertools.permutations(range(V)))


def _connected(V, edges):
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for a, b in edges:
            for x, y in ((a, b), (b, a)):
                if x == v and y not in seen:
                    seen.add(y)
                    stack.append(y)
    return len(seen) == V


def brute_force_graphs(g, n):
    """All stable graphs of type (g, n) as canonical keys ``(genera, leg vertices, edges)``.

    Leg ``i`` sits on vertex ``legs[i - 1]``.  Every vertex count, genus vector,
    leg placement and edge multiset is tried, so this is slow but obviously complete.
    """
    out = set()
    max_v = max(1, 2 * g - 2 + n)
    for V in range(1, max_v + 1):
        pairs = [(a, b) for a in range(V) for b in range(a, V)]
        for genera in itertools.product(range(g + 1), repeat=V):
            h1 = g - sum(genera)
            if h1 < 0:
                continue
            E = V - 1 + h1
            for legs in itertools.product(range(V), repeat=n):
                for edges in itertools.combinations_with_replacement(pairs, E):
                    val = [0] * V
                    for x in legs:
                        val[x] += 1
                    for a, b in edges:
                        val[a] += 1
                        val[b] += 1
                    if any(2 * genera[v] - 2 + val[v] <= 0 for v in range(V)):
                        continue
                    if not _connected(V, edges):
                        continue
                    out.add(canonical_key(genera, legs, edges))
    return out


def automorphism_count(genera, legs, edges):
    """|Aut| on half-edges: vertex symmetries times parallel-edge swaps and loop flips."""
    V = len(genera)
    base = _key(genera, legs, edges, list(range(V)))
    sym = sum(1 for p in itertools.permutations(range(V)) if _key(genera, legs, edges, p) == base)
    mult = {}
    for e in edges:
        e = tuple(sorted(e))
        mult[e] = mult.get(e, 0) + 1
    extra = 1
    for (a, b), m in mult.items():
        extra *= factorial(m)
        if a == b:
            extra *= 2 ** m
    return sym * extra


def graph_key(G):
    """Oracle key of a package ``StableGraph``, read off its public fields."""
    legs = [None] * G.n_legs
    for h, lab in enumerate(G.leg_label):
        if lab:
            legs[lab - 1] = G.half_vertex[h]
    edges = [(G.half_vertex[a], G.half_vertex[b]) for a, b in G.edges]
    return canonical_key(list(G.genera), legs, edges)


# ----------------------------------------------------- point counts, genus 0
def open_m0n_points(m, q):
    """|M_{0,m}(F_q)| = (q - 2)(q - 3)...(q - m + 2): distinct points of P^1 up to PGL_2."""
    out = 1
    for j in range(2, m - 1):
        out *= q - j
    return out


def mbar0n_poincare(n):
    """Betti numbers of Mbar_{0,n} from point counts over its (rigid, genus-0) strata.

    Each stratum is a product of open M_{0,m}; the point count is a polynomial in
    q whose coefficients are the even Betti numbers (the variety is pure Tate).
    """
    q = sympy.Symbol("q")
    total = 0
    for genera, legs, edges in brute_force_graphs(0, n):
        term = 1
        for v in range(len(genera)):
            val = sum(1 for x in legs if x == v) + sum((a == v) + (b == v) for a, b in edges)
            term *= open_m0n_points(val, q)
        total += term
    poly = sympy.Poly(sympy.expand(total), q)
    coeffs = poly.all_coeffs()[::-1]
    return [int(c) for c in coeffs]


def open_m0n_betti(n):
    """Betti numbers of M_{0,n}: the product (1 + 2t)(1 + 3t)...(1 + (n-2)t)."""
    t = sympy.Symbol("t")
    p = sympy.Integer(1)
    for j in range(2, n - 1):
        p *= 1 + j * t
    return [int(c) for c in sympy.Poly(sympy.expand(p), t).all_coeffs()[::-1]]


# ------------------------------------------------------------- linear algebra
def sympy_rank(vectors, width):
    if not vectors:
        return 0
    rows = [[sympy.Rational(v.get(j, 0).numerator, v.get(j, 0).denominator) if j in v else 0
             for j in range(width)] for v in vectors]
    return sympy.Matrix(rows).rank()


def cohomology_dims(A, top):
    """``dim H^q`` by ranks of the differential matrices, computed with sympy."""
    dims = []
    for q in range(top + 1):
        cur = A.space.by_degree(q)
        prev = A.space.by_degree(q - 1) if q > 0 else []
        rank_out = sympy_rank([A.d_basis(i) for i in cur], len(A))
        rank_in = sympy_rank([A.d_basis(i) for i in prev], len(A))
        dims.append(len(cur) - rank_out - rank_in)
    return dims


def in_span(target, vectors, width):
    return sympy_rank(vectors + [target], width) == sympy_rank(vectors, width)


# ---------------------------------------------------------- free algebras
def polynomial_dims(degrees, top, odd=()):
    """Dimensions of a free graded-commutative algebra by the generating function."""
    dims = [0] * (top + 1)
    dims[0] = 1
    for d in degrees:
        if d in odd or d % 2:
            new = dims[:]
            for q in range(top + 1 - d):
                new[q + d] += dims[q]
            dims = new
        else:
            for q in range(d, top + 1):
                dims[q] += dims[q - d]
    return dims


def as_fraction(x):
    return Fraction(x)
