"""Stable labeled graphs: dual graphs of nodal curves.

Graphs are stored by half-edges so that loops, multiple edges and the
automorphisms swapping them are all explicit.  Canonical forms come from an
individualization/refinement search over vertex orderings; legs are labeled,
so they are fixed pointwise by every isomorphism.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from functools import cached_property


class GraphError(ValueError):
    pass


_THREADS = []


def thread_count():
    """Worker count: innermost ``threads()`` block, else ``RATIONALMODULI_THREADS``, else 1."""
    if _THREADS:
        return _THREADS[-1]
    try:
        return max(1, int(os.environ.get("RATIONALMODULI_THREADS", "1")))
    except ValueError:
        return 1


@contextmanager
def threads(n):
    _THREADS.append(max(1, int(n)))
    try:
        yield
    finally:
        _THREADS.pop()


def parallel_map(fn, items):
    """``list(map(fn, items))``, optionally on a thread pool; order is preserved."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class StableGraph:
    """A connected graph with genus-labeled vertices and numbered legs.

    ``half_vertex[h]`` is the vertex carrying half-edge ``h``;
    ``leg_label[h]`` is the leg number (1..n) or 0 for half-edges that belong
    to an interior edge; ``edges`` pairs up the remaining half-edges.
    """

    genera: tuple
    half_vertex: tuple
    leg_label: tuple
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "genera", tuple(int(g) for g in self.genera))
        object.__setattr__(self, "half_vertex", tuple(self.half_vertex))
        object.__setattr__(self, "leg_label", tuple(self.leg_label))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        nh = len(self.half_vertex)
        if len(self.leg_label) != nh:
            raise GraphError("leg_label and half_vertex differ in length")
        used = [0] * nh
        for e in self.edges:
            if len(e) != 2:
                raise GraphError(f"edge {e} is not a pair")
            for h in e:
                if not 0 <= h < nh:
                    raise GraphError(f"edge {e} uses unknown half-edge {h}")
                used[h] += 1
        for h in range(nh):
            if not 0 <= self.half_vertex[h] < len(self.genera):
                raise GraphError(f"half-edge {h} on unknown vertex")
            if self.leg_label[h]:
                used[h] += 1
            if used[h] != 1:
                raise GraphError(f"half-edge {h} must be exactly one of: leg, edge end")
        labels = sorted(x for x in self.leg_label if x)
        if labels != list(range(1, len(labels) + 1)):
            raise GraphError(f"leg labels must be 1..n, got {labels}")
        if any(g < 0 for g in self.genera):
            raise GraphError("negative vertex genus")

    # ------------------------------------------------------------- counts
    @property
    def n_vertices(self):
        return len(self.genera)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_legs(self):
        return sum(1 for x in self.leg_label if x)

    def halves_at(self, v):
        return [h for h, w in enumerate(self.half_vertex) if w == v]

    def valence(self, v):
        return sum(1 for w in self.half_vertex if w == v)

    def legs_at(self, v):
        return sorted(self.leg_label[h] for h in self.halves_at(v) if self.leg_label[h])

    def vertex_profile(self):
        """``[(g(v), n(v)), ...]`` with loop ends counted twice."""
        return [(self.genera[v], self.valence(v)) for v in range(self.n_vertices)]

    def is_connected(self):
        if self.n_vertices == 0:
            return False
        seen = {0}
        stack = [0]
        adj = self.adjacency()
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices

    def adjacency(self):
        adj = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges:
            u, v = self.half_vertex[a], self.half_vertex[b]
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_stable(self):
        return all(2 * g - 2 + n > 0 for g, n in self.vertex_profile())

    def betti(self):
        return self.n_edges - self.n_vertices + 1

    def genus(self):
        if not self.is_connected():
            raise GraphError("genus is defined for connected graphs only")
        return self.betti() + sum(self.genera)

    def edge_vertices(self, e):
        a, b = self.edges[e]
        return self.half_vertex[a], self.half_vertex[b]

    def is_loop(self, e):
        u, v = self.edge_vertices(e)
        return u == v

    def local_labels(self, v):
        """Label the half-edges at ``v`` by 1..n(v): legs by leg number, then the rest by id."""
        hs = self.halves_at(v)
        legs = sorted((self.leg_label[h], h) for h in hs if self.leg_label[h])
        rest = sorted(h for h in hs if not self.leg_label[h])
        order = [h for _, h in legs] + rest
        return {h: k + 1 for k, h in enumerate(order)}

    # ---------------------------------------------------------- contraction
    def contract(self, edge_ids):
        """Contract a set of interior edges.

        Returns ``(graph, vertex_map, half_map)`` where ``vertex_map[v]`` is the
        image of old vertex ``v`` and ``half_map[h]`` the image of a surviving
        half-edge (contracted half-edges are absent).
        """
        edge_ids = set(edge_ids)
        for e in edge_ids:
            if not 0 <= e < self.n_edges:
                raise GraphError(f"no interior edge {e}")
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in sorted(edge_ids):
            u, v = self.edge_vertices(e)
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
        roots = sorted({find(v) for v in range(self.n_vertices)})
        new_index = {r: k for k, r in enumerate(roots)}
        vmap = [new_index[find(v)] for v in range(self.n_vertices)]
        genera = [0] * len(roots)
        nv = [0] * len(roots)
        ne = [0] * len(roots)
        for v in range(self.n_vertices):
            genera[vmap[v]] += self.genera[v]
            nv[vmap[v]] += 1
        for e in edge_ids:
            ne[vmap[self.edge_vertices(e)[0]]] += 1
        for k in range(len(roots)):
            genera[k] += ne[k] - nv[k] + 1
        dead = {h for e in edge_ids for h in self.edges[e]}
        hmap = {}
        hv, ll = [], []
        for h in range(len(self.half_vertex)):
            if h in dead:
                continue
            hmap[h] = len(hv)
            hv.append(vmap[self.half_vertex[h]])
            ll.append(self.leg_label[h])
        edges = [(hmap[a], hmap[b]) for k, (a, b) in enumerate(self.edges) if k not in edge_ids]
        return StableGraph(genera, hv, ll, edges), vmap, hmap

    def contract_edge(self, e):
        """Contract one interior edge (merge its ends, or raise the genus for a loop)."""
        return self.contract([e])[0]

    # ------------------------------------------------------------ canonical
    @cached_property
    def _canon(self):
        return _canonical_search(self)

    def canonical_code(self):
        return self._canon[0]

    def canonical_form(self):
        """Return ``(canonical graph, vertex_map, half_map)`` mapping self onto it."""
        code, orders = self._canon
        return _relabel(self, orders[0])

    def automorphisms(self):
        return _automorphisms(self)

    def is_isomorphic(self, other):
        return self.canonical_code() == other.canonical_code()

    # ------------------------------------------------------------------ I/O
    def to_dict(self):
        hs = []
        for h in range(len(self.half_vertex)):
            d = {"vertex": self.half_vertex[h]}
            if self.leg_label[h]:
                d["leg_label"] = self.leg_label[h]
            hs.append(d)
        return {
            "vertices": [{"genus": g} for g in self.genera],
            "half_edges": hs,
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            genera = [v["genus"] for v in data["vertices"]]
            hv = [h["vertex"] for h in data["half_edges"]]
            ll = [h.get("leg_label", 0) for h in data["half_edges"]]
            edges = [tuple(e) for e in data["edges"]]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph JSON: {exc}") from None
        return cls(genera, hv, ll, edges)

    def describe(self):
        """Short human-readable form, e.g. ``[0:1,2,h0][0:3,4,h1] e(h0,h1)``."""
        parts = []
        for v in range(self.n_vertices):
            legs = ",".join(str(x) for x in self.legs_at(v))
            other = [h for h in self.halves_at(v) if not self.leg_label[h]]
            items = [legs] if legs else []
            items += [f"h{h}" for h in other]
            parts.append(f"[g{self.genera[v]}:{' '.join(items)}]")
        es = " ".join(f"{self.half_vertex[a]}-{self.half_vertex[b]}" for a, b in self.edges)
        return "".join(parts) + (f" edges {es}" if es else "")


def smooth_graph(g, n):
    return StableGraph([g], [0] * n, list(range(1, n + 1)), [])


def graph_from_vertices(vertices, edges):
    """Convenience constructor.

    ``vertices`` is ``[(genus, [leg labels]), ...]``; ``edges`` is a list of
    vertex pairs ``(u, v)`` (``u == v`` for a loop).
    """
    genera, hv, ll = [], [], []
    for v, (g, legs) in enumerate(vertices):
        genera.append(g)
        for lab in legs:
            hv.append(v)
            ll.append(lab)
    es = []
    for u, v in edges:
        a = len(hv)
        hv += [u, v]
        ll += [0, 0]
        es.append((a, a + 1))
    return StableGraph(genera, hv, ll, es)


# ---------------------------------------------------------------- canonical
def _vertex_structure(G):
    mult = {}
    for a, b in G.edges:
        u, v = G.half_vertex[a], G.half_vertex[b]
        key = (min(u, v), max(u, v))
        mult[key] = mult.get(key, 0) + 1
    legpos = [0] * G.n_legs
    for h, lab in enumerate(G.leg_label):
        if lab:
            legpos[lab - 1] = G.half_vertex[h]
    return mult, legpos


def _refine(cells, G, nbrs):
    """Equitable refinement of an ordered partition (list of lists)."""
    while True:
        color = {}
        for k, cell in enumerate(cells):
            for v in cell:
                color[v] = k
        new = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                new.append(cell)
                continue
            sig = {}
            for v in cell:
                s = tuple(sorted((color[w], m) for w, m in nbrs[v].items()))
                sig.setdefault(s, []).append(v)
            if len(sig) > 1:
                changed = True
                for s in sorted(sig):
                    new.append(sig[s])
            else:
                new.append(cell)
        cells = new
        if not changed:
            return cells


def _key_for_order(G, order, mult, legpos):
    pos = {v: k for k, v in enumerate(order)}
    genera = tuple(G.genera[v] for v in order)
    legs = tuple(pos[v] for v in legpos)
    es = []
    for (u, v), m in mult.items():
        a, b = sorted((pos[u], pos[v]))
        es.append((a, b, m))
    return genera, legs, tuple(sorted(es))


def _canonical_search(G):
    mult, legpos = _vertex_structure(G)
    nbrs = [dict() for _ in range(G.n_vertices)]
    for (u, v), m in mult.items():
        nbrs[u][v] = nbrs[u].get(v, 0) + m
        if u != v:
            nbrs[v][u] = nbrs[v].get(u, 0) + m
    init = {}
    for v in range(G.n_vertices):
        loops = mult.get((v, v), 0)
        init.setdefault((G.genera[v], tuple(G.legs_at(v)), G.valence(v), loops), []).append(v)
    cells = [init[k] for k in sorted(init)]
    best = [None, []]

    def search(cells):
        cells = _refine(cells, G, nbrs)
        for k, cell in enumerate(cells):
            if len(cell) > 1:
                for v in cell:
                    rest = [w for w in cell if w != v]
                    search(cells[:k] + [[v], rest] + cells[k + 1:])
                return
        order = [c[0] for c in cells]
        key = _key_for_order(G, order, mult, legpos)
        if best[0] is None or key < best[0]:
            best[0] = key
            best[1] = [order]
        elif key == best[0]:
            best[1].append(order)

    search(cells)
    genera, legs, es = best[0]
    code = ("g" + ",".join(map(str, genera)) + ";l" + ",".join(map(str, legs)) + ";e"
            + ",".join(f"{a}-{b}x{m}" for a, b, m in es)).encode()
    return code, best[1]


def _relabel(G, order):
    """Rebuild ``G`` with vertices in ``order`` and canonically placed half-edges."""
    pos = {v: k for k, v in enumerate(order)}
    n = G.n_legs
    genera = [G.genera[v] for v in order]
    hv = [0] * n
    ll = list(range(1, n + 1))
    hmap = {}
    for h, lab in enumerate(G.leg_label):
        if lab:
            hv[lab - 1] = pos[G.half_vertex[h]]
            hmap[h] = lab - 1
    oriented = []
    for k, (a, b) in enumerate(G.edges):
        pa, pb = pos[G.half_vertex[a]], pos[G.half_vertex[b]]
        if pa > pb or (pa == pb and a > b):
            a, b, pa, pb = b, a, pb, pa
        oriented.append((pa, pb, k, a, b))
    oriented.sort()
    edges = []
    for pa, pb, k, a, b in oriented:
        i = len(hv)
        hv += [pa, pb]
        ll += [0, 0]
        hmap[a], hmap[b] = i, i + 1
        edges.append((i, i + 1))
    vmap = [pos[v] for v in range(G.n_vertices)]
    return StableGraph(genera, hv, ll, edges), vmap, hmap


# ------------------------------------------------------------- automorphisms
@dataclass(frozen=True)
class Automorphism:
    vertex_map: tuple     # v -> image
    half_map: tuple       # h -> image


@dataclass
class AutGroup:
    order: int
    generators: list

    def __len__(self):
        return self.order


def _automorphisms(G):
    code, orders = G._canon
    base = orders[0]
    gens = []
    n_vertex_auts = len(orders)
    # edges grouped by unordered vertex pair, in id order
    groups = {}
    for k, (a, b) in enumerate(G.edges):
        u, v = G.half_vertex[a], G.half_vertex[b]
        groups.setdefault((min(u, v), max(u, v)), []).append(k)

    def oriented(k, u):
        a, b = G.edges[k]
        if G.half_vertex[a] == u:
            return a, b
        return b, a

    for other in orders[1:]:
        sigma = [0] * G.n_vertices
        for x, y in zip(base, other):
            sigma[x] = y
        hm = list(range(len(G.half_vertex)))
        for (u, v), ks in groups.items():
            su, sv = sigma[u], sigma[v]
            targets = groups[(min(su, sv), max(su, sv))]
            for k, t in zip(ks, targets):
                a, b = oriented(k, u)
                ta, tb = oriented(t, su)
                hm[a], hm[b] = ta, tb
        gens.append(Automorphism(tuple(sigma), tuple(hm)))
    order = n_vertex_auts
    ident_v = tuple(range(G.n_vertices))
    for (u, v), ks in sorted(groups.items()):
        order *= math.factorial(len(ks))
        if u == v:
            order *= 2 ** len(ks)
            for k in ks:
                hm = list(range(len(G.half_vertex)))
                a, b = G.edges[k]
                hm[a], hm[b] = b, a
                gens.append(Automorphism(ident_v, tuple(hm)))
        for k1, k2 in zip(ks, ks[1:]):
            hm = list(range(len(G.half_vertex)))
            a1, b1 = oriented(k1, u)
            a2, b2 = oriented(k2, u)
            hm[a1], hm[a2] = a2, a1
            hm[b1], hm[b2] = b2, b1
            gens.append(Automorphism(ident_v, tuple(hm)))
    return AutGroup(order, gens)


def automorphisms(G):
    return G.automorphisms()


def canonical_code(G):
    return G.canonical_code()


def genus(G):
    return G.genus()


def contract_edge(G, e):
    if not 0 <= e < G.n_edges:
        raise GraphError(f"{e} is not an interior edge (legs cannot be contracted)")
    return G.contract_edge(e)


def vertex_profile(G):
    return G.vertex_profile()


# --------------------------------------------------------------- enumeration
def _splits(G):
    """All graphs obtained from ``G`` by splitting one vertex with a new edge."""
    out = []
    nh = len(G.half_vertex)
    for v in range(G.n_vertices):
        gv = G.genera[v]
        hs = G.halves_at(v)
        if gv >= 1:
            genera = list(G.genera)
            genera[v] -= 1
            out.append(StableGraph(genera, list(G.half_vertex) + [v, v], list(G.leg_label) + [0, 0],
                                   list(G.edges) + [(nh, nh + 1)]))
        m = len(hs)
        for mask in range(1 << m):
            side = [hs[i] for i in range(m) if mask >> i & 1]
            rest = m - len(side)
            for g1 in range(gv + 1):
                g2 = gv - g1
                if 2 * g1 - 2 + len(side) + 1 <= 0 or 2 * g2 - 2 + rest + 1 <= 0:
                    continue
                w = G.n_vertices
                genera = list(G.genera) + [g1]
                genera[v] = g2
                hv = list(G.half_vertex)
                for h in side:
                    hv[h] = w
                hv += [v, w]
                out.append(StableGraph(genera, hv, list(G.leg_label) + [0, 0],
                                       list(G.edges) + [(nh, nh + 1)]))
    return out


def _canon_graph(G):
    return G.canonical_code(), G.canonical_form()[0]


def enumerate_graphs(g, n, max_edges=None):
    """One representative per isomorphism class of stable (g, n)-graphs.

    Graphs are returned in canonical form, sorted by (edge count, canonical
    code).  ``max_edges`` restricts the output to graphs with at most that
    many edges; every edge count up to the bound is complete.
    """
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise GraphError(f"(g, n) = ({g}, {n}) is unstable: need 2g - 2 + n > 0")
    top = 3 * g - 3 + n
    if max_edges is not None:
        top = min(top, max_edges)
    level = [smooth_graph(g, n)]
    out = list(level)
    for _ in range(top):
        cands = [H for G in level for H in _splits(G)]
        canon = parallel_map(_canon_graph, cands)
        seen = {}
        for code, H in canon:
            seen.setdefault(code, H)
        level = [seen[c] for c in sorted(seen)]
        if not level:
            break
        out += level
    return out


def graphs_to_json(graphs):
    return json.dumps([G.to_dict() for G in graphs], indent=1, sort_keys=True) + "\n"
