"""Bigraded E1 models of normal-crossings complements.

For ``U = X - D`` with ``D = D_1 u ... u D_r`` a normal crossings divisor,

    A^{p,q} = sum over |S| = -p of H^{2p+q}(D_S),

with product ``(-1)^{pq' + eps} a|_{D_{S u S'}} . a'|_{D_{S u S'}}`` (zero when
``S`` and ``S'`` meet; ``eps`` is the sign of the shuffle sorting the
concatenation ``S.S'``) and differential ``da = sum_j (-1)^{j-1} (i_j)_* a``.

For moduli spaces the index sets become stable graphs: ``A^{p,q}`` is the sum
over graphs ``G`` with ``-p`` interior edges of
``(tensor over vertices of H(Mbar_{g(v),n(v)}))^{Aut G}`` in degree ``2p + q``.
Edges of a graph are ordered by its canonical form, so the same formulas
apply with "edges" in place of "components".
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .cohomology import cohomology, euler_characteristic
from .dga import CDGA, CDGAError, cdga_from_dict, cdga_to_dict, dumps, verify_cdga
from .graphs import StableGraph, enumerate_graphs, parallel_map
from .linalg import Echelon, apply_map, compose_maps, fmt_scalar, kernel, parse_scalar, rank, vec_iadd
from .rings import (
    RingTable, TableError, Tensor, _tensor_of, get_provider, source_tensor, table_from_dict,
)


class ModelError(ValueError):
    pass


def perm_sign(seq):
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


# ------------------------------------------------------------------ model
@dataclass
class Block:
    tag: str
    p: int
    info: dict = field(default_factory=dict)


class MorganBigraded:
    """The E1 algebra: a total-degree CDGA with a bidegree on every basis element."""

    def __init__(self, cdga, bidegrees, blocks=(), label="", genus=None, legs=None):
        self.cdga = cdga
        self.bidegrees = [tuple(b) for b in bidegrees]
        self.blocks = list(blocks)
        self.label = label
        self.genus = genus
        self.legs = legs
        if len(self.bidegrees) != len(cdga):
            raise ModelError("one bidegree per basis element expected")
        for (p, q), k in zip(self.bidegrees, cdga.degrees):
            if p + q != k or p > 0 or q < 0:
                raise ModelError(f"bidegree ({p},{q}) does not fit total degree {k}")

    def to_cdga(self):
        return self.cdga

    def dims(self):
        out = {}
        for b in self.bidegrees:
            out[b] = out.get(b, 0) + 1
        return dict(sorted(out.items(), key=lambda t: (-t[0][0], t[0][1])))

    def dim(self, p, q):
        return self.dims().get((p, q), 0)

    def total_dims(self):
        return self.cdga.dimensions()

    def indices(self, p, q):
        return [i for i, b in enumerate(self.bidegrees) if b == (p, q)]

    def columns(self):
        return sorted({p for p, _ in self.bidegrees}, reverse=True)

    def bigraded_table(self):
        """Rows ``(p, q, dim)`` for the nonzero positions."""
        return [(p, q, n) for (p, q), n in self.dims().items()]


# --------------------------------------------------------------- assembly
@dataclass
class Stratum:
    tag: str
    p: int
    tensor: Tensor
    basis: list                 # homogeneous vectors over tensor indices
    project: object = None      # callable averaging onto invariants, or None
    info: dict = field(default_factory=dict)


def _vname(st, v, k):
    if len(v) == 1:
        (i, c), = v.items()
        if c == 1:
            return st.tensor.names[i]
    return f"inv{k}"


class _Expresser:
    """Write tensor vectors of a stratum in its chosen basis."""

    def __init__(self, st, offset):
        self.st = st
        self.offset = offset
        self.direct = all(len(v) == 1 and next(iter(v.values())) == 1 for v in st.basis)
        if self.direct:
            self.index = {next(iter(v)): offset + k for k, v in enumerate(st.basis)}
        else:
            self.ech = Echelon(track=True)
            for k, v in enumerate(st.basis):
                self.ech.add(v, offset + k)

    def __call__(self, y):
        if not y:
            return {}
        if self.direct:
            out = {}
            for i, c in y.items():
                if i not in self.index:
                    break
                out[self.index[i]] = c
            else:
                return out
            if self.st.project is None:
                raise ModelError(f"vector outside the basis of stratum {self.st.tag}")
            return self(self.st.project(y))
        combo = self.ech.solve(y)
        if combo is None:
            if self.st.project is not None:
                combo = self.ech.solve(self.st.project(y))
            if combo is None:
                raise ModelError(f"vector outside the invariant subspace of stratum {self.st.tag}")
        return combo


def assemble(strata, diff_terms, product_terms, label="", genus=None, legs=None):
    """Assemble a MorganBigraded from strata and their structure maps.

    ``diff_terms(s)`` lists ``(t, sign, map)`` with ``map`` a linear map from
    the tensor of stratum ``s`` to that of ``t``; ``product_terms`` lists
    ``(s1, s2, t, sign, res1, res2)`` where ``sign`` is the shuffle sign and
    the restrictions land in the tensor of ``t``.
    """
    names, degrees, bideg, owner = [], [], [], []
    offsets = []
    for s, st in enumerate(strata):
        offsets.append(len(names))
        for k, v in enumerate(st.basis):
            r = st.tensor.degrees[next(iter(v))]
            q = r - 2 * st.p
            names.append(f"{st.tag}:{_vname(st, v, k)}")
            degrees.append(r - st.p)
            bideg.append((st.p, q))
            owner.append((s, k))
    expr = [_Expresser(st, off) for st, off in zip(strata, offsets)]
    k_max = max(degrees)

    diff = {}
    for s, st in enumerate(strata):
        for t, sign, m in diff_terms(s):
            for k, v in enumerate(st.basis):
                y = apply_map(m, v)
                if y:
                    vec_iadd(diff.setdefault(offsets[s] + k, {}), expr[t](y), sign)

    prods = {}
    for s1, s2, t, sign, r1, r2 in product_terms:
        T = strata[t].tensor
        A1, A2 = strata[s1], strata[s2]
        im1 = [apply_map(r1, v) for v in A1.basis]
        im2 = [apply_map(r2, v) for v in A2.basis]
        for k1, x in enumerate(im1):
            if not x:
                continue
            i = offsets[s1] + k1
            for k2, y in enumerate(im2):
                if not y:
                    continue
                j = offsets[s2] + k2
                if degrees[i] + degrees[j] > k_max:
                    continue
                z = T.mul(x, y)
                if not z:
                    continue
                sgn = sign * (-1 if (bideg[i][0] * bideg[j][1]) % 2 else 1)
                vec_iadd(prods.setdefault((i, j), {}), expr[t](z), sgn)
    prods = {k: v for k, v in prods.items() if v}
    diff = {k: v for k, v in diff.items() if v}
    T0 = strata[0].tensor
    u0 = T0.index[tuple(F.unit for F in T0.factors)]
    unit = offsets[0] + strata[0].basis.index({u0: Fraction(1)})
    A = CDGA(names, degrees, prods, diff, k_max=k_max, unit=unit, complete=True, label=label)
    blocks = [Block(st.tag, st.p, dict(st.info, dim=len(st.basis))) for st in strata]
    return MorganBigraded(A, bideg, blocks, label=label, genus=genus, legs=legs)


# ----------------------------------------------------- normal crossings case
@dataclass
class StrataDescription:
    """``X`` with a normal crossings divisor of ``r`` components.

    ``strata`` maps ``frozenset S`` to the cohomology ring of ``D_S`` (a
    RingTable); ``restrictions[S, T]`` for ``T = S + {i}`` and ``gysin[S, T]``
    for ``T = S - {i}`` are linear maps between basis indices.
    """

    r: int
    strata: dict
    restrictions: dict
    gysin: dict
    label: str = ""

    def validate(self):
        """List of problems (empty when the description is usable)."""
        bad = []
        if frozenset() not in self.strata:
            bad.append("D_empty (the ambient space X) is missing")
        for S, T in self.strata.items():
            if not S <= frozenset(range(1, self.r + 1)):
                bad.append(f"stratum {sorted(S)} uses components outside 1..{self.r}")
            if not T.algebra.has_zero_differential():
                bad.append(f"ring of D_{sorted(S)} carries a differential")
            diag = verify_cdga(T.algebra)
            if not diag.ok:
                bad.append(f"ring of D_{sorted(S)}: {diag.first_violation()}")
        for S in self.strata:
            for i in sorted(S):
                if S - {i} not in self.strata:
                    bad.append(f"D_{sorted(S)} is present but D_{sorted(S - {i})} is not")
                    continue
                if (S - {i}, S) not in self.restrictions:
                    bad.append(f"no restriction D_{sorted(S - {i})} -> D_{sorted(S)}")
                if (S, S - {i}) not in self.gysin:
                    bad.append(f"no Gysin map D_{sorted(S)} -> D_{sorted(S - {i})}")
        for (S, T), m in sorted(self.restrictions.items(), key=lambda t: _skey(t[0][0]) + _skey(t[0][1])):
            if S not in self.strata or T not in self.strata:
                continue
            A, B = self.strata[S].algebra, self.strata[T].algebra
            for i, v in m.items():
                if any(B.degrees[k] != A.degrees[i] for k in v):
                    bad.append(f"restriction D_{sorted(S)} -> D_{sorted(T)} does not preserve degree")
                    break
            for i in range(len(A)):
                for j in range(len(A)):
                    lhs = apply_map(m, A.product_basis(i, j))
                    rhs = B.mul(m.get(i, {}), m.get(j, {}))
                    if lhs != rhs:
                        bad.append(f"restriction D_{sorted(S)} -> D_{sorted(T)} is not multiplicative "
                                   f"at ({A.names[i]}, {A.names[j]})")
                        break
                else:
                    continue
                break
        for (S, T), m in self.gysin.items():
            if S not in self.strata or T not in self.strata:
                continue
            A, B = self.strata[S].algebra, self.strata[T].algebra
            for i, v in m.items():
                if any(B.degrees[k] != A.degrees[i] + 2 for k in v):
                    bad.append(f"Gysin D_{sorted(S)} -> D_{sorted(T)} does not raise degree by 2")
                    break
        return bad


def _skey(S):
    return (len(S), tuple(sorted(S)))


def _stag(S):
    return "X" if not S else "D" + ".".join(str(i) for i in sorted(S))


def build_nc_model(desc, k_max=None):
    bad = desc.validate()
    if bad:
        raise ModelError(bad[0])
    keys = sorted(desc.strata, key=_skey)
    pos = {S: k for k, S in enumerate(keys)}
    strata = []
    for S in keys:
        T = Tensor([desc.strata[S].algebra])
        strata.append(Stratum(_stag(S), -len(S), T, [{i: Fraction(1)} for i in range(len(T))],
                              info={"S": sorted(S)}))
    # tensor indices of a single factor differ from algebra indices only by order
    conv = [{i: T.index[(i,)] for i in range(len(T))} for T in (st.tensor for st in strata)]

    def lift(m, s, t):
        return {conv[s][i]: {conv[t][k]: c for k, c in v.items()} for i, v in m.items()}

    res_cache = {}

    def restriction(S, T):
        if (S, T) not in res_cache:
            if S == T:
                m = {i: {i: Fraction(1)} for i in range(len(desc.strata[S].algebra))}
            else:
                i = min(T - S)
                step = desc.restrictions[S, S | {i}]
                m = compose_maps(restriction(S | {i}, T), step)
            res_cache[S, T] = m
        return res_cache[S, T]

    def diff_terms(s):
        S = keys[s]
        out = []
        for j, i in enumerate(sorted(S)):
            T = S - {i}
            out.append((pos[T], -1 if j % 2 else 1, lift(desc.gysin[S, T], s, pos[T])))
        return out

    terms = []
    for S1, S2 in itertools.product(keys, keys):
        if S1 & S2 or (S1 | S2) not in pos:
            continue
        T = S1 | S2
        eps = perm_sign(sorted(S1) + sorted(S2))
        terms.append((pos[S1], pos[S2], pos[T], eps,
                      lift(restriction(S1, T), pos[S1], pos[T]),
                      lift(restriction(S2, T), pos[S2], pos[T])))
    M = assemble(strata, diff_terms, terms, label=desc.label or "nc-model")
    if k_max is not None and M.cdga.k_max > k_max:
        from .dga import DegreeOverflow
        raise DegreeOverflow(f"model reaches total degree {M.cdga.k_max} > k_max={k_max}")
    return M


def _map_rows(m, src_names, tgt_names):
    return [[src_names[i], tgt_names[k], fmt_scalar(c)] for i in sorted(m) for k, c in sorted(m[i].items())]


def desc_to_dict(desc):
    def sname(S):
        return sorted(S)
    strata = [{"S": sname(S), "algebra": cdga_to_dict(desc.strata[S].algebra)}
              for S in sorted(desc.strata, key=_skey)]
    res = [{"from": sname(S), "to": sname(T),
            "map": _map_rows(m, desc.strata[S].names, desc.strata[T].names)}
           for (S, T), m in sorted(desc.restrictions.items(), key=lambda t: _skey(t[0][0]) + _skey(t[0][1]))]
    gys = [{"from": sname(S), "to": sname(T),
            "map": _map_rows(m, desc.strata[S].names, desc.strata[T].names)}
           for (S, T), m in sorted(desc.gysin.items(), key=lambda t: _skey(t[0][0]) + _skey(t[0][1]))]
    return {"kind": "strata", "label": desc.label, "components": desc.r, "strata": strata,
            "restrictions": res, "gysin": gys}


def desc_from_dict(data):
    try:
        r = int(data["components"])
        strata = {}
        for s in data["strata"]:
            A = cdga_from_dict(s["algebra"])
            S = frozenset(s["S"])
            strata[S] = RingTable(ident=_stag(S), algebra=A)

        def read(rows, S, T):
            if S not in strata or T not in strata:
                raise ModelError(f"map between unknown strata {sorted(S)} -> {sorted(T)}")
            si = {nm: i for i, nm in enumerate(strata[S].names)}
            ti = {nm: i for i, nm in enumerate(strata[T].names)}
            out = {}
            for a, b, c in rows:
                if a not in si or b not in ti:
                    raise ModelError(f"unknown basis element in map {sorted(S)} -> {sorted(T)}: {a!r} or {b!r}")
                vec_iadd(out.setdefault(si[a], {}), {ti[b]: parse_scalar(c)})
            return {k: v for k, v in out.items() if v}

        res = {}
        for m in data.get("restrictions", []):
            S, T = frozenset(m["from"]), frozenset(m["to"])
            if not (S < T and len(T - S) == 1):
                raise ModelError(f"restriction {sorted(S)} -> {sorted(T)} must add one component")
            res[S, T] = read(m["map"], S, T)
        gys = {}
        for m in data.get("gysin", []):
            S, T = frozenset(m["from"]), frozenset(m["to"])
            if not (T < S and len(S - T) == 1):
                raise ModelError(f"Gysin map {sorted(S)} -> {sorted(T)} must drop one component")
            gys[S, T] = read(m["map"], S, T)
    except (KeyError, TypeError) as e:
        raise ModelError(f"malformed strata description: {e}") from None
    return StrataDescription(r, strata, res, gys, label=data.get("label", ""))


def load_description(path):
    with open(path) as f:
        return desc_from_dict(json.load(f))


def example_description(name):
    """Shipped examples: ``p1_three_points``, ``p1_one_point``, ``p2_line``."""
    from importlib import resources
    fname = {"p1_three_points": "p1_three_points.json", "p1_one_point": "p1_one_point.json",
             "p2_line": "p2_line.json"}[name]
    text = resources.files("rationalmoduli").joinpath("data").joinpath(fname).read_text()
    return desc_from_dict(json.loads(text))


def _projective_space(m, label):
    from .dga import tabulated
    basis = [("1" if i == 0 else ("h" if i == 1 else f"h^{i}"), 2 * i) for i in range(m + 1)]
    prods = {}
    for i in range(m + 1):
        for j in range(m + 1 - i):
            prods[basis[i][0], basis[j][0]] = {basis[i + j][0]: 1}
    return RingTable(ident=label, algebra=tabulated(basis, prods, k_max=2 * m, unit="1", label=label))


def make_example_descriptions():
    """Build the shipped example descriptions from scratch."""
    one = Fraction(1)
    P1, pt = _projective_space(1, "P1"), _projective_space(0, "pt")
    P2 = _projective_space(2, "P2")
    out = {}
    strata = {frozenset(): P1}
    res, gys = {}, {}
    for i in (1, 2, 3):
        S = frozenset([i])
        strata[S] = pt
        res[frozenset(), S] = {0: {0: one}}
        gys[S, frozenset()] = {0: {1: one}}
    out["p1_three_points"] = StrataDescription(3, strata, res, gys, label="P1 minus {0,1,inf}")
    S = frozenset([1])
    out["p1_one_point"] = StrataDescription(1, {frozenset(): P1, S: pt}, {(frozenset(), S): {0: {0: one}}},
                                            {(S, frozenset()): {0: {1: one}}}, label="P1 minus a point")
    # a line L in P2: h|_L = h_L, Gysin 1 -> h, h_L -> h^2
    out["p2_line"] = StrataDescription(
        1, {frozenset(): P2, S: P1},
        {(frozenset(), S): {0: {0: one}, 1: {1: one}}},
        {(S, frozenset()): {0: {1: one}, 1: {2: one}}}, label="P2 minus a line")
    return out


def write_example_data(directory):
    import os
    for name, desc in sorted(make_example_descriptions().items()):
        with open(os.path.join(directory, f"{name}.json"), "w") as f:
            f.write(dumps(desc_to_dict(desc)))


# ------------------------------------------------------------ moduli case
class GraphRings:
    """Cohomology of ``Mbar_G = prod_v Mbar_{g(v),n(v)}`` and the maps between them.

    Factors follow the vertex order of ``G`` and the points of each vertex
    carry ``G.local_labels(v)``.
    """

    def __init__(self, provider):
        self.provider = provider
        self._edge = {}
        self._iso = {}

    def tables(self, G):
        return tuple(self.provider.table(G.genera[v], G.valence(v)) for v in range(G.n_vertices))

    def tensor(self, G):
        return _tensor_of(self.tables(G))

    # ----------------------------------------------------------- plumbing
    @staticmethod
    def _factorwise(src, groups, tgt):
        """Apply even maps to consecutive groups of factors.

        ``groups`` is a list of ``(size, table)`` where ``table`` maps a tuple
        of ``size`` factor indices to ``[(fragment, coef), ...]``, or
        ``(1, None)`` for the identity on one factor.
        """
        out = {}
        for a, t in enumerate(src.tuples):
            terms = [((), Fraction(1))]
            pos = 0
            for size, table in groups:
                key = t[pos:pos + size]
                pos += size
                imgs = [(key, Fraction(1))] if table is None else table.get(key, ())
                terms = [(u + f, c * x) for u, c in terms for f, x in imgs]
                if not terms:
                    break
            v = {}
            for u, c in terms:
                vec_iadd(v, {tgt.index[u]: c})
            if v:
                out[a] = v
        return out

    @staticmethod
    def _relabel_table(table, perm):
        m = table.relabel(perm)
        return {(i,): [((k,), c) for k, c in v.items()] for i, v in m.items()}

    @staticmethod
    def _label_perm(G1, v1, G2, v2, hmap):
        l1, l2 = G1.local_labels(v1), G2.local_labels(v2)
        return {l1[h]: l2[hmap[h]] for h in l1}

    def iso_map(self, G1, G2, vmap, hmap):
        """Pushforward along an isomorphism ``G1 -> G2`` (maps of vertices and half-edges)."""
        key = (G1, G2, tuple(vmap), tuple(sorted(hmap.items())) if isinstance(hmap, dict) else tuple(hmap))
        hit = self._iso.get(key)
        if hit is not None:
            return hit
        if not isinstance(hmap, dict):
            hmap = dict(enumerate(hmap))
        T1, T2 = self.tensor(G1), self.tensor(G2)
        tabs = self.tables(G1)
        groups = []
        for v in range(G1.n_vertices):
            perm = self._label_perm(G1, v, G2, vmap[v], hmap)
            if all(a == b for a, b in perm.items()) or tabs[v].symmetric:
                groups.append((1, None))
            else:
                groups.append((1, self._relabel_table(tabs[v], perm)))
        m = self._factorwise(T1, groups, T1) if any(g[1] is not None for g in groups) else None
        inv = [0] * len(vmap)
        for v, w in enumerate(vmap):
            inv[w] = v
        if inv != list(range(len(vmap))):
            p = T1.permute(inv, T2)
            m = p if m is None else compose_maps(p, m)
        elif m is None:
            m = {a: {a: Fraction(1)} for a in range(len(T1))}
        self._iso[key] = m
        return m

    def edge_maps(self, H, e):
        """``(Hc, vmap, hmap, res, gys)`` for contracting edge ``e`` of ``H``.

        ``res`` pulls back from ``Mbar_{H/e}`` to ``Mbar_H``; ``gys`` pushes forward.
        """
        key = (H, e)
        hit = self._edge.get(key)
        if hit is not None:
            return hit
        Hc, vmap, hmap = H.contract([e])
        a, b = H.edges[e]
        u, v = H.half_vertex[a], H.half_vertex[b]
        w = vmap[u]
        labw = Hc.local_labels(w)
        ends = [u] if u == v else [u, v]
        lv = {x: k for k, x in enumerate(ends)}
        genera, hv, ll, origin = [H.genera[x] for x in ends], [], [], []
        for x in ends:
            for h in H.halves_at(x):
                if h in (a, b):
                    continue
                hv.append(lv[x])
                ll.append(labw[hmap[h]])
                origin.append(h)
        hv += [lv[u], lv[v]]
        ll += [0, 0]
        origin += [a, b]
        L = StableGraph(genera, hv, ll, [(len(hv) - 2, len(hv) - 1)])
        Lc, lvmap, lhmap = L.canonical_form()
        Tw = self.provider.table(Hc.genera[w], Hc.valence(w))
        try:
            bm = Tw.boundary_for(Lc)
        except TableError as exc:
            raise ModelError(str(exc)) from None
        bsrc = source_tensor(bm, self.provider.resolve)
        ctabs = self.tables(Lc)
        if [t.names for t in ctabs] != [F.names for F in bsrc.factors]:
            raise ModelError(f"boundary data of table {Tw.ident} uses bases that differ from the provider's")
        # H vertex sitting at each canonical vertex of L
        at = [None] * Lc.n_vertices
        for x in ends:
            at[lvmap[lv[x]]] = x
        others = [z for z in range(Hc.n_vertices) if z != w]
        pre = {}
        for y in range(H.n_vertices):
            if y not in ends:
                pre[vmap[y]] = y
        order = at + [pre[z] for z in others]          # H vertices in split order
        T_H, T_Hc = self.tensor(H), self.tensor(Hc)
        T_split = _tensor_of(tuple(self.tables(H)[y] for y in order))
        T_first = _tensor_of((Tw,) + tuple(self.tables(Hc)[z] for z in others))
        # relabel permutations: H labels -> split labels
        hl = {}
        for c, x in enumerate(at):
            lab_c = Lc.local_labels(c)
            lab_x = H.local_labels(x)
            hl[x] = {lab_x[h]: lab_c[lhmap[origin.index(h)]] for h in lab_x}
        for z in others:
            y = pre[z]
            lab_y, lab_z = H.local_labels(y), Hc.local_labels(z)
            hl[y] = {lab_y[h]: lab_z[hmap[h]] for h in lab_y}
        tabs_H = self.tables(H)

        def relabel_groups(inverse):
            gs = []
            for y in order:
                perm = hl[y]
                if inverse:
                    perm = {b_: a_ for a_, b_ in perm.items()}
                if all(p == q for p, q in perm.items()) or tabs_H[y].symmetric:
                    gs.append((1, None))
                else:
                    gs.append((1, self._relabel_table(tabs_H[y], perm)))
            return gs

        # restriction: T_Hc -> T_first -> T_split (canonical L labels) -> relabel -> T_H
        p1 = T_Hc.permute([w] + others, T_first)
        rtab = {(i,): [(bsrc.tuples[k], c) for k, c in vec.items()] for i, vec in bm.restriction.items()}
        f1 = self._factorwise(T_first, [(1, rtab)] + [(1, None)] * len(others), T_split)
        f2 = self._factorwise(T_split, relabel_groups(inverse=True), T_split)
        p2 = T_split.permute([order.index(k) for k in range(H.n_vertices)], T_H)
        res = compose_maps(p2, compose_maps(f2, compose_maps(f1, p1)))
        # Gysin: T_H -> T_split -> relabel -> T_first -> T_Hc
        q1 = T_H.permute(order, T_split)
        g1 = self._factorwise(T_split, relabel_groups(inverse=False), T_split)
        gtab = {bsrc.tuples[j]: [((k,), c) for k, c in vec.items()] for j, vec in bm.gysin.items()}
        g2 = self._factorwise(T_split, [(len(at), gtab)] + [(1, None)] * len(others), T_first)
        inv = [0] * Hc.n_vertices
        for k, z in enumerate([w] + others):
            inv[z] = k
        q2 = T_first.permute(inv, T_Hc)
        gys = compose_maps(q2, compose_maps(g2, compose_maps(g1, q1)))
        out = (Hc, vmap, hmap, res, gys)
        self._edge[key] = out
        return out

    def contraction_restriction(self, H, E):
        """``(Gc, res)``: contract the edges ``E`` of ``H``; ``res`` pulls back to ``Mbar_H``."""
        E = tuple(sorted(E))
        if not E:
            T = self.tensor(H)
            return H, {a: {a: Fraction(1)} for a in range(len(T))}
        e = E[0]
        Hc, _, _, res1, _ = self.edge_maps(H, e)
        rest = tuple(k - (k > e) for k in E[1:])
        Gc, res2 = self.contraction_restriction(Hc, rest)
        return Gc, compose_maps(res1, res2)

    # ------------------------------------------------------ automorphisms
    def group(self, G):
        """All automorphisms of ``G`` as ``(vertex_map, half_map)`` tuples."""
        aut = G.automorphisms()
        ident = (tuple(range(G.n_vertices)), tuple(range(len(G.half_vertex))))
        elems = {ident}
        frontier = [ident]
        gens = [(a.vertex_map, a.half_map) for a in aut.generators]
        while frontier:
            nxt = []
            for vm, hm in frontier:
                for gv, gh in gens:
                    c = (tuple(gv[x] for x in vm), tuple(gh[x] for x in hm))
                    if c not in elems:
                        elems.add(c)
                        nxt.append(c)
            frontier = nxt
        if len(elems) != aut.order:
            raise ModelError(f"automorphism closure has {len(elems)} elements, expected {aut.order}")
        return sorted(elems)

    def invariants(self, G):
        """``(basis, projector)`` for ``H(Mbar_G)^{Aut G}`` (plain invariants)."""
        T = self.tensor(G)
        elems = self.group(G)
        if len(elems) == 1:
            return [{a: Fraction(1)} for a in range(len(T))], None
        mats = [self.iso_map(G, G, vm, hm) for vm, hm in elems]
        basis = []
        for deg in sorted(set(T.degrees)):
            idx = [a for a in range(len(T)) if T.degrees[a] == deg]
            cols = []
            for a in idx:
                img = {}
                for g, m in enumerate(mats):
                    for k, c in m.get(a, {}).items():
                        vec_iadd(img, {(g, k): c})
                    vec_iadd(img, {(g, a): Fraction(1)}, -1)
                cols.append((a, img))
            basis += kernel(cols)
        n = Fraction(len(mats))

        def project(y):
            out = {}
            for m in mats:
                vec_iadd(out, apply_map(m, y))
            return {k: c / n for k, c in out.items() if c}

        return basis, project


def _edge_index(G):
    out = {}
    for k, (a, b) in enumerate(G.edges):
        out[a] = out[b] = k
    return out


def build_moduli_model(g, n, provider=None, k_max=None):
    """The graph-sum E1 model of ``M_{g,n}``."""
    if isinstance(provider, str) or provider is None:
        provider = get_provider(provider)
    try:
        graphs = enumerate_graphs(g, n)
    except Exception as exc:
        raise ModelError(str(exc)) from None
    R = GraphRings(provider)
    codes = {G.canonical_code(): k for k, G in enumerate(graphs)}

    def make(k):
        G = graphs[k]
        try:
            T = R.tensor(G)
        except TableError as exc:
            raise ModelError(f"graph {G.describe()}: {exc}") from None
        basis, proj = R.invariants(G)
        return Stratum(f"G{k}", -G.n_edges, T, basis, proj,
                       info={"graph": G.describe(), "code": G.canonical_code().decode(),
                             "profile": [list(x) for x in G.vertex_profile()]})

    strata = parallel_map(make, range(len(graphs)))

    def canon(Hc):
        Gc, cv, ch = Hc.canonical_form()
        return codes[Gc.canonical_code()], Gc, cv, ch

    def diff_terms(s):
        G = graphs[s]
        out = []
        for j in range(G.n_edges):
            Hc, _, _, _, gys = R.edge_maps(G, j)
            t, Gc, cv, ch = canon(Hc)
            iso = R.iso_map(Hc, graphs[t], cv, ch)
            eidx = _edge_index(graphs[t])
            orient = perm_sign([eidx[ch[a]] for a, _ in Hc.edges])
            out.append((t, (-1 if j % 2 else 1) * orient, compose_maps(iso, gys)))
        return out

    def pullback(Gamma, E):
        """Restriction from the canonical ``Gamma/E`` plus the order of the kept edges."""
        Gc, res = R.contraction_restriction(Gamma, E)
        t, Gcan, cv, ch = canon(Gc)
        inv_v = [0] * len(cv)
        for v, w in enumerate(cv):
            inv_v[w] = v
        inv_h = {b: a for a, b in ch.items()}
        back = R.iso_map(graphs[t], Gc, inv_v, inv_h)
        eidx = _edge_index(graphs[t])
        kept = [k for k in range(Gamma.n_edges) if k not in E]
        # kept edges of Gamma in the canonical edge order of graphs[t]
        order = sorted(kept, key=lambda k: eidx[ch[Gc.edges[kept.index(k)][0]]])
        return t, compose_maps(res, back), order

    def gamma_terms(u):
        Gamma = graphs[u]
        out = []
        m = Gamma.n_edges
        for mask in range(1 << m):
            E1 = tuple(k for k in range(m) if mask >> k & 1)
            E2 = tuple(k for k in range(m) if not mask >> k & 1)
            s1, r1, o1 = pullback(Gamma, E2)
            s2, r2, o2 = pullback(Gamma, E1)
            out.append((s1, s2, u, perm_sign(o1 + o2), r1, r2))
        return out

    terms = [t for ts in parallel_map(gamma_terms, range(len(graphs))) for t in ts]
    M = assemble(strata, diff_terms, terms, label=f"E1(M_{g},{n})", genus=g, legs=n)
    for b, G in zip(M.blocks, graphs):
        b.info["edges"] = G.n_edges
    if k_max is not None and M.cdga.k_max > k_max:
        from .dga import DegreeOverflow
        raise DegreeOverflow(f"model reaches total degree {M.cdga.k_max} > k_max={k_max}")
    return M


# ---------------------------------------------------------------- reports
@dataclass
class E2Report:
    computed: list
    expected: list
    ok: bool

    def rows(self):
        n = max(len(self.computed), len(self.expected))
        c = self.computed + [0] * (n - len(self.computed))
        e = self.expected + [0] * (n - len(self.expected))
        return [(k, c[k], e[k], "ok" if c[k] == e[k] else "MISMATCH") for k in range(n)]

    def lines(self):
        out = [f"{'degree':>6} {'computed':>8} {'expected':>8}"]
        for k, c, e, flag in self.rows():
            out.append(f"{k:>6} {c:>8} {e:>8}  {flag}")
        out.append("PASS" if self.ok else "FAIL")
        return out


def model_cohomology(M):
    return cohomology(M.to_cdga())


def e2_check(M, expected):
    """Compare ``H(to_cdga(M))`` with the expected Betti numbers (missing entries are 0)."""
    dims = model_cohomology(M).dimensions()
    exp = [int(x) for x in expected]
    n = max(len(dims), len(exp))
    ok = dims + [0] * (n - len(dims)) == exp + [0] * (n - len(exp))
    return E2Report(dims, exp, ok)


@dataclass
class ColumnReport:
    bound: int
    genus: object
    entries: list          # (p, q, dim, flagged)

    @property
    def flagged(self):
        return [e for e in self.entries if e[3]]

    @property
    def ok(self):
        return not self.flagged

    def lines(self):
        out = [f"{'p':>4} {'q':>4} {'dim E2':>6}"]
        for p, q, d, f in self.entries:
            out.append(f"{p:>4} {q:>4} {d:>6}" + ("  p != 0 inside the stable range" if f else ""))
        if self.genus is None:
            out.append("stable range: not applicable (no genus)")
        else:
            out.append(f"stable range: total degree k <= (g-1)/2 = {Fraction(self.genus - 1, 2)}")
        return out


def column_support_report(M, range_bound, genus=None):
    """Row-wise cohomology ``E2^{p,q}`` of the bigraded complex for ``p + q <= range_bound``."""
    A = M.to_cdga()
    if genus is None:
        genus = M.genus
    dims = M.dims()
    entries = []

    def d_rank(p, q):
        idx = M.indices(p, q)
        return rank([A.d_basis(i) for i in idx])

    for (p, q), n in sorted(dims.items(), key=lambda t: (t[0][0] + t[0][1], -t[0][0])):
        if p + q > range_bound:
            continue
        for i in M.indices(p, q):
            for k in A.d_basis(i):
                if M.bidegrees[k] != (p + 1, q):
                    raise ModelError(f"differential of {A.names[i]} leaves bidegree ({p + 1},{q})")
        e2 = n - d_rank(p, q) - (d_rank(p - 1, q) if (p - 1, q) in dims else 0)
        if e2:
            flagged = genus is not None and p != 0 and Fraction(p + q) <= Fraction(genus - 1, 2)
            entries.append((p, q, e2, flagged))
    return ColumnReport(range_bound, genus, entries)


# -------------------------------------------------------------------- JSON
def model_to_dict(M):
    return {
        "kind": "morgan-model",
        "label": M.label,
        "genus": M.genus,
        "legs": M.legs,
        "blocks": [{"tag": b.tag, "p": b.p, "info": b.info} for b in M.blocks],
        "bidegrees": [[nm, p, q] for nm, (p, q) in zip(M.cdga.names, M.bidegrees)],
        "cdga": cdga_to_dict(M.cdga),
    }


def model_from_dict(data):
    if data.get("kind") != "morgan-model":
        raise ModelError("not a morgan-model document")
    try:
        A = cdga_from_dict(data["cdga"])
        bd = {nm: (p, q) for nm, p, q in data["bidegrees"]}
        bideg = [bd[nm] for nm in A.names]
        blocks = [Block(b["tag"], b["p"], b.get("info", {})) for b in data.get("blocks", [])]
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"malformed model: {e}") from None
    return MorganBigraded(A, bideg, blocks, label=data.get("label", ""), genus=data.get("genus"),
                          legs=data.get("legs"))


def save_model(M, path):
    with open(path, "w") as f:
        f.write(dumps(model_to_dict(M)))


def load_model(path):
    with open(path) as f:
        return model_from_dict(json.load(f))


def model_summary(M):
    """Plain-text summary: bigraded dimensions, total dimensions, Euler characteristic."""
    lines = [M.label or "model", "bigraded dimensions (p, q, dim):"]
    for p, q, n in M.bigraded_table():
        lines.append(f"  A^{p},{q} = {n}")
    td = M.total_dims()
    lines.append("total dimensions: " + " ".join(str(x) for x in td))
    lines.append(f"euler characteristic: {euler_characteristic(td)}")
    return lines
