"""Cohomology ring tables of compactified moduli spaces.

A :class:`RingTable` is the cohomology ring of ``Mbar_{g,n}`` (or of any
space given by a file) with, for each boundary divisor, the restriction map
to the divisor and the Gysin map back.  A boundary divisor is named by the
canonical code of its one-edge stable graph; its cohomology is the tensor
product of the vertex tables, taken in the canonical vertex order, with the
points of each vertex labeled legs-first then the edge half (see
:meth:`StableGraph.local_labels`).

Genus-0 tables also record every boundary divisor class and, per basis
element, a word in divisors.  That is enough to transport a table along a
relabeling of the marked points.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .dga import CDGA, cdga_from_dict, cdga_to_dict, dumps, verify_cdga
from .graphs import StableGraph, enumerate_graphs, graph_from_vertices
from .linalg import Echelon, apply_map, fmt_scalar, parse_scalar, vec_add, vec_iadd


class TableError(ValueError):
    pass


# ------------------------------------------------------------------ tensors
class Tensor:
    """Graded tensor product of complete zero-differential algebras."""

    def __init__(self, factors, label=""):
        self.factors = list(factors)
        if self.factors:
            tuples = list(itertools.product(*[range(len(F)) for F in self.factors]))
        else:
            tuples = [()]
        deg = [sum(F.degrees[i] for F, i in zip(self.factors, t)) for t in tuples]
        order = sorted(range(len(tuples)), key=lambda k: (deg[k], tuples[k]))
        self.tuples = [tuples[k] for k in order]
        self.degrees = [deg[k] for k in order]
        self.index = {t: k for k, t in enumerate(self.tuples)}
        if len(self.factors) == 1:
            self.names = list(self.factors[0].names)
        elif not self.factors:
            self.names = ["1"]
        else:
            self.names = ["|".join(F.names[i] for F, i in zip(self.factors, t)) for t in self.tuples]
        self.top = max(self.degrees)
        self.label = label
        self._algebra = None

    def __len__(self):
        return len(self.tuples)

    def koszul(self, s, t):
        """Sign of moving the factors of ``t`` past those of ``s`` in ``s * t``."""
        sign = 0
        for i in range(len(s)):
            if self.factors[i].degrees[s[i]] % 2:
                for j in range(i):
                    sign += self.factors[j].degrees[t[j]] % 2
        return -1 if sign % 2 else 1

    def product_basis(self, a, b):
        s, t = self.tuples[a], self.tuples[b]
        terms = [((), Fraction(self.koszul(s, t)))]
        for F, i, j in zip(self.factors, s, t):
            p = F.product_basis(i, j)
            if not p:
                return {}
            terms = [(u + (k,), c * x) for u, c in terms for k, x in p.items()]
        out = {}
        for u, c in terms:
            vec_iadd(out, {self.index[u]: c})
        return out

    @property
    def algebra(self):
        if self._algebra is None:
            prods = {}
            n = len(self)
            for a in range(n):
                for b in range(n):
                    if self.degrees[a] + self.degrees[b] <= self.top:
                        p = self.product_basis(a, b)
                        if p:
                            prods[a, b] = p
            self._algebra = CDGA(self.names, self.degrees, prods, {}, k_max=self.top,
                                 unit=self.index[tuple(F.unit for F in self.factors)],
                                 complete=True, label=self.label)
        return self._algebra

    def mul(self, x, y):
        return self.algebra.mul(x, y)

    def pure(self, vectors):
        """The pure tensor of per-factor vectors."""
        terms = [((), Fraction(1))]
        for v in vectors:
            terms = [(u + (k,), c * x) for u, c in terms for k, x in v.items()]
        out = {}
        for u, c in terms:
            vec_iadd(out, {self.index[u]: c})
        return out

    def kron(self, maps, target):
        """Tensor product of degree-even factor maps, as a map into ``target``."""
        out = {}
        for a, t in enumerate(self.tuples):
            out[a] = target.pure([m.get(i, {}) for m, i in zip(maps, t)])
        return out

    def permute(self, perm, target):
        """Reorder factors: factor ``k`` of ``target`` is factor ``perm[k]`` of self."""
        out = {}
        for a, t in enumerate(self.tuples):
            u = tuple(t[p] for p in perm)
            odd = [self.factors[p].degrees[t[p]] % 2 for p in perm]
            sign = 0
            for x in range(len(perm)):
                for y in range(x + 1, len(perm)):
                    if perm[x] > perm[y] and odd[x] and odd[y]:
                        sign += 1
            out[a] = {target.index[u]: Fraction(-1 if sign % 2 else 1)}
        return out


def identity_map(n):
    return {i: {i: Fraction(1)} for i in range(n)}


# --------------------------------------------------------------- divisors
def divisor_key(S, n):
    """Normalise a genus-0 boundary divisor ``D_S = D_{S^c}`` on ``n`` points."""
    S = frozenset(S)
    C = frozenset(range(1, n + 1)) - S
    if not (2 <= len(S) <= n - 2):
        raise TableError(f"{sorted(S)} does not index a boundary divisor of Mbar_0,{n}")
    if len(S) < len(C) or (len(S) == len(C) and 1 in S):
        return tuple(sorted(S))
    return tuple(sorted(C))


def divisor_name(key):
    return "D_" + ".".join(str(x) for x in key)


def all_divisors(n):
    keys = set()
    for r in range(2, n - 1):
        for S in itertools.combinations(range(1, n + 1), r):
            keys.add(divisor_key(S, n))
    return sorted(keys, key=lambda k: (len(k), k))


def compatible(S, T, n):
    S, T = set(S), set(T)
    full = set(range(1, n + 1))
    return S <= T or T <= S or not (S & T) or (S | T) == full


def divisor_graph(key, n):
    rest = [i for i in range(1, n + 1) if i not in key]
    return graph_from_vertices([(0, list(key)), (0, rest)], [(0, 1)])


# ---------------------------------------------------------------- the table
@dataclass
class BoundaryMap:
    graph: StableGraph           # canonical one-edge graph
    sources: tuple               # table ids of its vertices, canonical order
    restriction: dict            # table index -> vec over source tensor
    gysin: dict                  # source tensor index -> vec over table


@dataclass
class RingTable:
    ident: str
    algebra: CDGA
    g: int = None
    n: int = None
    boundary: dict = field(default_factory=dict)   # code -> BoundaryMap
    divisors: dict = None        # divisor key -> vec (genus 0)
    words: list = None           # per basis element: tuple of divisor keys
    symmetric: bool = False      # point relabelings act trivially
    compact: bool = True
    notes: str = ""

    @property
    def names(self):
        return self.algebra.names

    @property
    def degrees(self):
        return self.algebra.degrees

    def __len__(self):
        return len(self.algebra)

    def betti(self):
        return self.algebra.dimensions()

    @property
    def top_degree(self):
        return max(self.degrees)

    def relabel(self, perm):
        """Map ``H(self)`` with points labeled one way to the relabeled copy.

        ``perm[i]`` is the new label of old point ``i``.  Divisor class
        ``D_S`` goes to ``D_{perm(S)}``.
        """
        n = self.n
        if all(perm[i] == i for i in perm) or self.symmetric:
            return identity_map(len(self))
        if self.words is None or self.divisors is None:
            raise TableError(f"table {self.ident} cannot be relabeled (no divisor words)")
        A = self.algebra
        out = {}
        for i, word in enumerate(self.words):
            v = A.one()
            for key in word:
                v = A.mul(v, self.divisors[divisor_key([perm[x] for x in key], n)])
            out[i] = v
        return out

    def boundary_for(self, graph):
        code = graph.canonical_code()
        try:
            return self.boundary[code]
        except KeyError:
            raise TableError(f"table {self.ident} has no boundary data for {graph.describe()}") from None


def point_id(g, n):
    return f"{g},{n}"


# ------------------------------------------------------------- serialization
def _map_to_list(m, src_names, tgt_names):
    return [[src_names[i], tgt_names[k], fmt_scalar(c)] for i in sorted(m) for k, c in sorted(m[i].items())]


def _map_from_list(rows, src_index, tgt_index):
    out = {}
    for a, b, c in rows:
        try:
            vec_iadd(out.setdefault(src_index[a], {}), {tgt_index[b]: parse_scalar(c)})
        except KeyError as e:
            raise TableError(f"unknown basis element {e.args[0]!r} in map") from None
    return {k: v for k, v in out.items() if v}


def table_to_dict(T, resolve=None):
    d = {
        "kind": "ring-table",
        "id": T.ident,
        "g": T.g,
        "n": T.n,
        "compact": T.compact,
        "symmetric": T.symmetric,
        "notes": T.notes,
        "algebra": cdga_to_dict(T.algebra),
    }
    if T.words is not None:
        d["words"] = [[divisor_name(k) for k in w] for w in T.words]
    if T.divisors is not None:
        d["divisors"] = {divisor_name(k): {T.names[i]: fmt_scalar(c) for i, c in sorted(v.items())}
                         for k, v in sorted(T.divisors.items())}
    bs = []
    for code in sorted(T.boundary):
        b = T.boundary[code]
        src = source_tensor(b, resolve)
        bs.append({
            "code": code.decode(),
            "graph": b.graph.to_dict(),
            "sources": list(b.sources),
            "restriction": _map_to_list(b.restriction, T.names, src.names),
            "gysin": _map_to_list(b.gysin, src.names, T.names),
        })
    d["boundary"] = bs
    return d


def _parse_divisor_name(s):
    if not s.startswith("D_"):
        raise TableError(f"bad divisor name {s!r}")
    return tuple(int(x) for x in s[2:].split("."))


def table_from_dict(data, resolve=None):
    if data.get("kind", "ring-table") != "ring-table":
        raise TableError(f"not a ring table: kind {data.get('kind')!r}")
    try:
        A = cdga_from_dict(data["algebra"])
        T = RingTable(ident=str(data["id"]), algebra=A, g=data.get("g"), n=data.get("n"),
                      symmetric=bool(data.get("symmetric", False)), compact=bool(data.get("compact", True)),
                      notes=data.get("notes", ""))
    except KeyError as e:
        raise TableError(f"missing field {e.args[0]!r}") from None
    idx = {nm: i for i, nm in enumerate(A.names)}
    if "divisors" in data:
        T.divisors = {}
        for name, v in data["divisors"].items():
            T.divisors[_parse_divisor_name(name)] = {idx[k]: parse_scalar(c) for k, c in v.items()}
    if "words" in data:
        T.words = [tuple(_parse_divisor_name(x) for x in w) for w in data["words"]]
    for b in data.get("boundary", []):
        G = StableGraph.from_dict(b["graph"])
        code = G.canonical_code()
        if code.decode() != b["code"]:
            raise TableError(f"boundary code {b['code']!r} does not match its graph ({code.decode()})")
        bm = BoundaryMap(G, tuple(b["sources"]), {}, {})
        src = source_tensor(bm, resolve)
        sidx = {nm: i for i, nm in enumerate(src.names)}
        bm.restriction = _map_from_list(b["restriction"], idx, sidx)
        bm.gysin = _map_from_list(b["gysin"], sidx, idx)
        T.boundary[code] = bm
    return T


def save_table(T, path, resolve=None):
    with open(path, "w") as f:
        f.write(dumps(table_to_dict(T, resolve)))


def table_json(T, resolve=None):
    return dumps(table_to_dict(T, resolve))


# ----------------------------------------------------------------- builtins
BUILTIN = {(0, 3): "m0_3.json", (0, 4): "m0_4.json", (0, 5): "m0_5.json", (1, 1): "m1_1.json"}


@lru_cache(maxsize=None)
def _builtin_text(fname):
    return resources.files("rationalmoduli").joinpath("data").joinpath(fname).read_text()


_builtin_cache = {}


def builtin_table(g, n):
    """Shipped exact table for ``(g, n)`` in {(0,3), (0,4), (0,5), (1,1)}."""
    key = (g, n)
    if key not in BUILTIN:
        raise TableError(
            f"no built-in table for ({g},{n}); use keel_ring(n) for genus 0 or load_table(path)")
    if key not in _builtin_cache:
        _builtin_cache[key] = table_from_dict(json.loads(_builtin_text(BUILTIN[key])), _builtin_resolve)
    return _builtin_cache[key]


def _builtin_resolve(ident):
    g, n = (int(x) for x in ident.split(","))
    return builtin_table(g, n)


def source_tensor(b, resolve=None):
    resolve = resolve or _builtin_resolve
    return _tensor_of(tuple(resolve(s) for s in b.sources))


_tensor_cache = {}


def _tensor_of(tables):
    key = tuple(id(t) for t in tables)
    hit = _tensor_cache.get(key)
    if hit is None or hit[0] != tables:
        hit = (tables, Tensor([t.algebra for t in tables], label="(x)".join(t.ident for t in tables)))
        _tensor_cache[key] = hit
    return hit[1]


def tensor_ring(tables, k_max=None):
    """Graded tensor product of ring tables (Koszul signs), as a RingTable."""
    t = Tensor([T.algebra for T in tables])
    A = t.algebra
    if k_max is not None and t.top > k_max:
        from .dga import DegreeOverflow
        raise DegreeOverflow(f"tensor product reaches degree {t.top} > k_max={k_max}")
    return RingTable(ident="(x)".join(T.ident for T in tables) or "pt", algebra=A)


# --------------------------------------------------------------- Keel rings
def _psi_last(m):
    """psi at the last point of Mbar_0,m as a sum of divisor keys."""
    if m < 4:
        return []
    out = []
    for key in all_divisors(m):
        for A in (set(key), set(range(1, m + 1)) - set(key)):
            if m in A and 1 not in A and 2 not in A:
                out.append(key)
    return out


@lru_cache(maxsize=None)
def keel_ring(n, k_max=None):
    """Cohomology ring of Mbar_0,n from Keel's presentation, with boundary data.

    Computed degree by degree as a quotient of the compatible monomials in the
    divisor classes by the span of (linear relation) * (monomial).
    """
    if not 3 <= n <= 6:
        raise TableError(f"keel_ring supports 3 <= n <= 6, got {n}")
    divs = all_divisors(n)
    dim = n - 3
    full = set(range(1, n + 1))

    # linear relations, as {divisor key: coef}
    lin = []
    for i, j, k, l in itertools.combinations(range(1, n + 1), 4):
        def side(a, b, c, d):
            v = {}
            for key in divs:
                S = set(key)
                for X in (S, full - S):
                    if a in X and b in X and c not in X and d not in X:
                        v[key] = v.get(key, 0) + 1
            return v
        s1, s2, s3 = side(i, j, k, l), side(i, k, j, l), side(i, l, j, k)
        lin.append(vec_add(s1, s2, -1))
        lin.append(vec_add(s1, s3, -1))
    compat = {(a, b): compatible(a, b, n) for a in divs for b in divs}

    def monos(d):
        out = []
        for combo in itertools.combinations_with_replacement(range(len(divs)), d):
            ks = [divs[x] for x in combo]
            if all(compat[a, b] for a, b in itertools.combinations(ks, 2)):
                out.append(tuple(ks))
        return out

    basis_words, normal = [()], {}
    per_degree = {0: [()]}
    reductions = {}
    for d in range(1, dim + 1):
        ms = monos(d)
        # columns: squares first, then squarefree in reverse order, so pivots
        # land on squares and standard monomials are products of distinct divisors
        def colkey(m):
            sqfree = len(set(m)) == len(m)
            return (sqfree, tuple((-len(k), tuple(-x for x in k)) for k in m))
        ms.sort(key=colkey)
        col = {m: c for c, m in enumerate(ms)}
        ech = Echelon()
        lower = monos(d - 1)
        for r in lin:
            for m in lower:
                row = {}
                for key, c in r.items():
                    mm = tuple(sorted(m + (key,), key=divs.index))
                    if mm in col:
                        vec_iadd(row, {col[mm]: Fraction(c)})
                if row:
                    ech.add(row)
        std = [m for m in ms if col[m] not in ech.rows]
        std.sort(key=lambda m: tuple(divs.index(k) for k in m))
        per_degree[d] = std
        reductions[d] = (ech, col, ms)
    names, degrees, words = [], [], []
    for d in range(dim + 1):
        for m in per_degree[d]:
            names.append("1" if not m else "*".join(divisor_name(k) for k in m))
            degrees.append(2 * d)
            words.append(m)
    index = {w: i for i, w in enumerate(words)}

    def normal_form(m):
        """Reduce a monomial (tuple of divisor keys) to the standard basis."""
        d = len(m)
        if d > dim:
            return {}
        m = tuple(sorted(m, key=divs.index))
        if any(not compat[a, b] for a, b in itertools.combinations(m, 2)):
            return {}
        if d == 0:
            return {index[()]: Fraction(1)}
        if m in index:
            return {index[m]: Fraction(1)}
        ech, col, ms = reductions[d]
        residual, _ = ech.reduce({col[m]: Fraction(1)})
        return {index[ms[c]]: x for c, x in residual.items()}

    prods = {}
    for a, wa in enumerate(words):
        for b, wb in enumerate(words):
            if len(wa) + len(wb) <= dim:
                v = normal_form(wa + wb)
                if v:
                    prods[a, b] = v
    A = CDGA(names, degrees, prods, {}, k_max=2 * dim, unit=0, complete=True, label=f"Keel({n})")
    T = RingTable(ident=point_id(0, n), algebra=A, g=0, n=n, words=words,
                  divisors={k: normal_form((k,)) for k in divs},
                  notes="Keel presentation; basis = standard monomials in boundary divisors")
    T.boundary = genus0_boundary_maps(T, lambda m: keel_ring(m))
    return T


def genus0_boundary_maps(T, table_for):
    """Restriction and Gysin data for every boundary divisor of a genus-0 table.

    Restriction of ``D_T`` to ``D_S``: the matching divisor on one side when
    ``T`` is nested in a side of ``S``, minus the two psi classes at the node
    when ``T = S``, zero when they cross.  Gysin maps use surjectivity of
    restriction and the projection formula: ``i_*(i^* x) = x . D_S``.
    """
    n = T.n
    A = T.algebra
    out = {}
    for key in all_divisors(n):
        G, vmap, hmap = divisor_graph(key, n).canonical_form()
        code = G.canonical_code()
        sides = []
        for u in range(G.n_vertices):
            lab = G.local_labels(u)
            legs = {G.leg_label[h]: lab[h] for h in lab if G.leg_label[h]}
            sides.append((frozenset(legs), legs, len(lab)))
        tables = tuple(table_for(m) for _, _, m in sides)
        sources = tuple(t.ident for t in tables)
        src = _tensor_of(tables)
        full = frozenset(range(1, n + 1))

        def restrict_divisor(S):
            S = frozenset(S)
            for X in (S, full - S):
                for u, (L, lab, m) in enumerate(sides):
                    if X == L:
                        total = {}
                        for w, (_, _, mw) in enumerate(sides):
                            psi = {}
                            for k in _psi_last(mw):
                                vec_iadd(psi, tables[w].divisors[k])
                            vecs = [tables[x].algebra.one() for x in range(len(sides))]
                            vecs[w] = psi
                            vec_iadd(total, src.pure(vecs), -1)
                        return total
            for X in (S, full - S):
                for u, (L, lab, m) in enumerate(sides):
                    if X < L and len(X) >= 2:
                        vecs = [tables[x].algebra.one() for x in range(len(sides))]
                        vecs[u] = tables[u].divisors[divisor_key([lab[i] for i in X], m)]
                        return src.pure(vecs)
            return {}

        res_div = {k: restrict_divisor(k) for k in T.divisors}
        res = {}
        for i, word in enumerate(T.words):
            v = src.pure([t.algebra.one() for t in tables])
            for k in word:
                v = src.mul(v, res_div[k])
            res[i] = v
        # Gysin: find preimages under restriction, multiply by the divisor
        ech = Echelon(track=True)
        for i in range(len(A)):
            ech.add(res[i], i)
        gys = {}
        D = T.divisors[key]
        for j in range(len(src)):
            combo = ech.solve({j: Fraction(1)})
            if combo is None:
                raise TableError(f"restriction to {divisor_name(key)} is not surjective")
            gys[j] = A.mul(combo, D)
        out[code] = BoundaryMap(G, sources, {i: v for i, v in res.items() if v},
                                {j: v for j, v in gys.items() if v})
    return out


# ------------------------------------------------- builtin constructors
# The shipped JSON files are generated from these; the test suite checks
# that they agree byte for byte.

def _point_table():
    A = CDGA(["1"], [0], {(0, 0): {0: Fraction(1)}}, {}, k_max=0, unit=0, complete=True, label="H(Mbar_0,3)")
    return RingTable(ident=point_id(0, 3), algebra=A, g=0, n=3, divisors={}, words=[()],
                     symmetric=True, notes="a point")


def _p1_table():
    A = CDGA(["1", "pt"], [0, 2], {(0, 0): {0: Fraction(1)}, (0, 1): {1: Fraction(1)},
                                   (1, 0): {1: Fraction(1)}},
             {}, k_max=2, unit=0, complete=True, label="H(Mbar_0,4)")
    divs = {k: {1: Fraction(1)} for k in all_divisors(4)}
    T = RingTable(ident=point_id(0, 4), algebra=A, g=0, n=4, divisors=divs, words=[(), ((1, 2),)],
                  notes="projective line; every boundary point is the point class")
    T.boundary = genus0_boundary_maps(T, _constructed_genus0)
    return T


def _m05_table():
    """Mbar_0,5 as the blowup of the plane in four points.

    ``E_i = D_{i5}`` are the exceptional curves and ``D_{ij} = H - E_k - E_l``
    for ``{i,j,k,l} = {1,2,3,4}``; intersections ``H.H = 1``, ``E_i.E_i = -1``.
    """
    def cls(key):                       # coordinates (H, E1..E4)
        v = [0] * 5
        if 5 in key:
            v[key[0]] = 1
        else:
            v[0] = 1
            for x in range(1, 5):
                if x not in key:
                    v[x] = -1
        return v

    def dot(u, v):
        return u[0] * v[0] - sum(u[i] * v[i] for i in range(1, 5))

    deg2 = [(1, 5), (2, 5), (3, 5), (4, 5), (1, 2)]
    names = ["1"] + [divisor_name(k) for k in deg2] + ["pt"]
    degrees = [0, 2, 2, 2, 2, 2, 4]
    prods = {}
    for i in range(7):
        prods[0, i] = {i: Fraction(1)}
        prods[i, 0] = {i: Fraction(1)}
    for a, ka in enumerate(deg2, 1):
        for b, kb in enumerate(deg2, 1):
            c = dot(cls(ka), cls(kb))
            if c:
                prods[a, b] = {6: Fraction(c)}
    A = CDGA(names, degrees, prods, {}, k_max=4, unit=0, complete=True, label="H(Mbar_0,5)")
    # express every divisor class in the basis by solving in (H, E) coordinates
    ech = Echelon(track=True)
    for a, k in enumerate(deg2, 1):
        ech.add({i: Fraction(x) for i, x in enumerate(cls(k)) if x}, a)
    divs = {}
    for k in all_divisors(5):
        divs[k] = ech.solve({i: Fraction(x) for i, x in enumerate(cls(k)) if x})
    words = [()] + [(k,) for k in deg2] + [((1, 2), (3, 4))]
    T = RingTable(ident=point_id(0, 5), algebra=A, g=0, n=5, divisors=divs, words=words,
                  notes="blowup of the plane in four points; degree-2 basis D_15, D_25, D_35, D_45, D_12")
    T.boundary = genus0_boundary_maps(T, _constructed_genus0)
    return T


def _m11_table():
    A = CDGA(["1", "pt"], [0, 2], {(0, 0): {0: Fraction(1)}, (0, 1): {1: Fraction(1)},
                                   (1, 0): {1: Fraction(1)}},
             {}, k_max=2, unit=0, complete=True, label="H(Mbar_1,1)")
    T = RingTable(ident=point_id(1, 1), algebra=A, g=1, n=1, symmetric=True,
                  notes=("coarse rational cohomology; the loop divisor is a single point. "
                         "Gysin normalisation: the generator of H^0 of the loop stratum "
                         "pushes forward to the point class (the factor 1/2 from the generic "
                         "involution is absorbed), and restriction sends pt to 0."))
    G, _, _ = graph_from_vertices([(0, [1])], [(0, 0)]).canonical_form()
    T.boundary[G.canonical_code()] = BoundaryMap(G, (point_id(0, 3),), {0: {0: Fraction(1)}},
                                                 {0: {1: Fraction(1)}})
    return T


_CONSTRUCTORS = {(0, 3): _point_table, (0, 4): _p1_table, (0, 5): _m05_table, (1, 1): _m11_table}


@lru_cache(maxsize=None)
def construct_builtin(g, n):
    """Build a built-in table from its defining description (not from the JSON file)."""
    return _CONSTRUCTORS[g, n]()


def _constructed_genus0(m):
    return construct_builtin(0, m)


def _constructed_resolve(ident):
    g, n = (int(x) for x in ident.split(","))
    return construct_builtin(g, n)


def builtin_json(g, n):
    return table_json(construct_builtin(g, n), _constructed_resolve)


def write_builtin_data(directory):
    for (g, n), fname in sorted(BUILTIN.items()):
        with open(os.path.join(directory, fname), "w") as f:
            f.write(builtin_json(g, n))


# ------------------------------------------------------------------ loading
def load_table(path, resolve=None):
    """Load a RingTable JSON file and validate it; raise TableError on failure."""
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise TableError(f"{path}: parse error: {e}") from None
    if resolve is None:
        resolve = directory_resolver(os.path.dirname(os.path.abspath(path)))
    T = table_from_dict(data, resolve)
    report = validate_table(T, resolve)
    bad = [r for r in report if not r[1]]
    if bad:
        name, _, witness = bad[0]
        raise TableError(f"{path}: {name} fails: {witness}")
    return T


def directory_resolver(directory, fallback=True):
    """Resolve table ids from ``*.json`` files in a directory, then built-ins."""
    cache = {}

    def resolve(ident):
        if ident in cache:
            return cache[ident]
        for fname in sorted(os.listdir(directory)):
            if not fname.endswith(".json"):
                continue
            p = os.path.join(directory, fname)
            try:
                with open(p) as f:
                    data = json.load(f)
            except (OSError, json.JSONDecodeError):
                continue
            if isinstance(data, dict) and str(data.get("id")) == ident and "algebra" in data:
                cache[ident] = None
                T = table_from_dict(data, resolve)
                cache[ident] = T
                return T
        if fallback:
            return _builtin_resolve(ident)
        raise TableError(f"no table with id {ident!r} in {directory}")

    return resolve


def validate_table(T, resolve=None):
    """List of ``(check, ok, witness)`` for a ring table."""
    resolve = resolve or _builtin_resolve
    out = []
    A = T.algebra
    diag = verify_cdga(A)
    for c in diag.checks:
        out.append((c.name, c.ok, c.witness))
    if not A.has_zero_differential():
        out.append(("zero differential", False, "table carries a differential"))
    if T.compact:
        dims = A.dimensions()
        top = T.top_degree
        dims = dims + [0] * (top + 1 - len(dims))
        sym = all(dims[q] == dims[top - q] for q in range(top + 1))
        out.append(("Poincare duality dims", sym, "" if sym else f"dims {dims[:top + 1]}"))
    for code, b in sorted(T.boundary.items()):
        try:
            src = source_tensor(b, resolve)
        except Exception as exc:  # unresolved sources
            out.append((f"boundary {code.decode()}", False, f"sources unavailable: {exc}"))
            continue
        wit = ""
        for i, v in b.restriction.items():
            if any(src.degrees[k] != A.degrees[i] for k in v):
                wit = f"restriction of {A.names[i]} changes degree"
        for j, v in b.gysin.items():
            if any(A.degrees[k] != src.degrees[j] + 2 for k in v):
                wit = f"Gysin image of {src.names[j]} does not raise degree by 2"
        if not wit:
            # projection formula i_*(a . i^* b) = i_*(a) . b
            for j in range(len(src)):
                for i in range(len(A)):
                    lhs = apply_map(b.gysin, src.mul({j: Fraction(1)}, b.restriction.get(i, {})))
                    rhs = A.mul(b.gysin.get(j, {}), {i: Fraction(1)})
                    if vec_add(lhs, rhs, -1):
                        wit = f"projection formula at ({src.names[j]}, {A.names[i]})"
                        break
                if wit:
                    break
        if not wit:
            # restriction is a ring map
            for i in range(len(A)):
                for k in range(len(A)):
                    lhs = apply_map(b.restriction, A.product_basis(i, k))
                    rhs = src.mul(b.restriction.get(i, {}), b.restriction.get(k, {}))
                    if vec_add(lhs, rhs, -1):
                        wit = f"restriction not multiplicative at ({A.names[i]}, {A.names[k]})"
                        break
                if wit:
                    break
        out.append((f"boundary {code.decode()}", not wit, wit))
    if T.g is not None and T.n is not None and T.boundary:
        expected = {G.canonical_code() for G in enumerate_graphs(T.g, T.n, max_edges=1) if G.n_edges == 1}
        ok = expected == set(T.boundary)
        out.append(("boundary coverage", ok, "" if ok else f"{len(T.boundary)} of {len(expected)} divisors"))
    return out


# ---------------------------------------------------------------- providers
class Provider:
    """Source of vertex tables ``H(Mbar_{g,n})`` for model assembly."""

    name = "provider"

    def table(self, g, n):
        raise NotImplementedError

    def resolve(self, ident):
        g, n = (int(x) for x in ident.split(","))
        return self.table(g, n)


class BuiltinProvider(Provider):
    name = "builtin"

    def table(self, g, n):
        return builtin_table(g, n)


class KeelProvider(Provider):
    """Keel rings in genus 0 (n <= 6), built-in tables otherwise."""

    name = "keel"

    def table(self, g, n):
        if g == 0 and n <= 6:
            return keel_ring(n)
        return builtin_table(g, n)


class FileProvider(Provider):
    """Tables from a directory of JSON files (or a single file), falling back to built-ins."""

    def __init__(self, path):
        self.name = f"file:{path}"
        directory = path if os.path.isdir(path) else os.path.dirname(os.path.abspath(path))
        self._resolve = directory_resolver(directory)
        self._checked = set()

    def table(self, g, n):
        T = self._resolve(point_id(g, n))
        if T.ident not in self._checked:
            bad = [r for r in validate_table(T, self._resolve) if not r[1]]
            if bad:
                raise TableError(f"table {T.ident}: {bad[0][0]} fails: {bad[0][2]}")
            self._checked.add(T.ident)
        return T

    def resolve(self, ident):
        return self._resolve(ident)


def get_provider(spec):
    if spec in (None, "builtin"):
        return BuiltinProvider()
    if spec == "keel":
        return KeelProvider()
    if spec.startswith("file:"):
        return FileProvider(spec[5:])
    raise TableError(f"unknown provider {spec!r} (builtin, keel, file:PATH)")
