"""Commutative differential graded algebras over the rationals.

A :class:`CDGA` has a finite basis in each degree ``0..k_max``.  Elements are
sparse vectors ``{basis index: Fraction}``.  Two presentations exist:

* tabulated: explicit product structure constants and differential;
* free: the free graded-commutative algebra on a list of generators, with
  monomial basis in Koszul normal form (sorted generator multisets, odd
  generators appear at most once).

A tabulated algebra is *complete* when every degree above ``k_max`` is known
to vanish (finite tables, Morgan models).  A free algebra is truncated, so
nothing is known above ``k_max``; operations that would need that data raise
:class:`DegreeOverflow` rather than answer.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .linalg import apply_map, fmt_scalar, parse_scalar, vec_add, vec_iadd

DEFAULT_K_MAX = 12


class CDGAError(ValueError):
    """Malformed algebra data."""


class DegreeOverflow(CDGAError):
    """An operation needs degrees beyond the truncation ``k_max``."""


class GradedVectorSpace:
    """Named basis elements graded by degree ``0..k_max``."""

    def __init__(self, names, degrees, k_max):
        names = tuple(names)
        degrees = tuple(int(d) for d in degrees)
        if len(names) != len(degrees):
            raise CDGAError("names and degrees differ in length")
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise CDGAError(f"duplicate basis names: {dup}")
        for n, d in zip(names, degrees):
            if d < 0 or d > k_max:
                raise CDGAError(f"basis element {n!r} has degree {d} outside 0..{k_max}")
        self.names = names
        self.degrees = degrees
        self.k_max = k_max
        self._index = {n: i for i, n in enumerate(names)}
        self._by_degree = [[] for _ in range(k_max + 1)]
        for i, d in enumerate(degrees):
            self._by_degree[d].append(i)

    def __len__(self):
        return len(self.names)

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"no basis element named {name!r}") from None

    def by_degree(self, d):
        if 0 <= d <= self.k_max:
            return self._by_degree[d]
        return []

    def dim(self, d):
        return len(self.by_degree(d))

    def dimensions(self):
        return [len(b) for b in self._by_degree]


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    differential: tuple = ()   # ((monomial, coefficient), ...) in normal form


def _mono_mul(a, b, odd):
    """Multiply two normal-form monomials.  Returns ``(sign, monomial)`` or None."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    # count inversions between odd letters of a and b when merging
    sign = 1
    if any(odd[x] for x in a) and any(odd[x] for x in b):
        n_odd_greater = 0
        # for each odd y in b, number of odd x in a with x > y
        odd_a = [x for x in a if odd[x]]
        for y in b:
            if odd[y]:
                for x in odd_a:
                    if x > y:
                        n_odd_greater += 1
                    elif x == y:
                        return None
        if n_odd_greater % 2:
            sign = -1
    return sign, tuple(sorted(a + b))


class CDGA:
    """A commutative differential graded algebra truncated at ``k_max``.

    ``products`` maps ``(i, j)`` to the vector ``basis_i * basis_j`` and
    ``differential`` maps ``i`` to ``d(basis_i)``; absent entries are zero.
    Free algebras compute both on demand from monomials.
    """

    def __init__(self, names, degrees, products=None, differential=None, k_max=DEFAULT_K_MAX,
                 unit=None, complete=True, generators=None, monomials=None, label=""):
        self.space = GradedVectorSpace(names, degrees, k_max)
        self.k_max = k_max
        self.complete = complete
        self.label = label
        self.generators = tuple(generators) if generators is not None else None
        self.monomials = tuple(monomials) if monomials is not None else None
        self._products = dict(products or {})
        self._differential = {i: v for i, v in (differential or {}).items() if v}
        if unit is None:
            unit = 0
        elif isinstance(unit, str):
            unit = self.space.index(unit)
        if not len(self.space) or self.space.degrees[unit] != 0:
            raise CDGAError("unit must be a degree-0 basis element")
        self.unit = unit
        if self.generators is not None:
            self._odd = [g.degree % 2 == 1 for g in self.generators]
            self._mono_index = {m: i for i, m in enumerate(self.monomials)}
            self._dcache = {}

    # ------------------------------------------------------------------ basics
    @property
    def kind(self):
        return "free" if self.generators is not None else "tabulated"

    @property
    def names(self):
        return self.space.names

    @property
    def degrees(self):
        return self.space.degrees

    def __len__(self):
        return len(self.space)

    def __repr__(self):
        dims = ",".join(str(x) for x in self.space.dimensions())
        return f"<CDGA {self.kind} {self.label or ''} dims=({dims}) k_max={self.k_max}>"

    def dim(self, d):
        return self.space.dim(d)

    def dimensions(self):
        return self.space.dimensions()

    def basis(self, name):
        return {self.space.index(name): Fraction(1)}

    def element(self, terms):
        """Build an element from ``{name: coefficient}`` or a polynomial string."""
        if isinstance(terms, str):
            return self.parse(terms)
        out = {}
        for name, c in terms.items():
            vec_iadd(out, {self.space.index(name): parse_scalar(c)})
        return out

    def one(self):
        return {self.unit: Fraction(1)}

    def degree_of(self, v):
        """Degree of a homogeneous element (None for zero)."""
        ds = {self.space.degrees[i] for i in v}
        if len(ds) > 1:
            raise CDGAError("element is not homogeneous")
        return ds.pop() if ds else None

    def format(self, v):
        if not v:
            return "0"
        parts = []
        for i in sorted(v):
            c = v[i]
            name = self.space.names[i]
            if c == 1:
                parts.append(name)
            elif c == -1:
                parts.append("-" + name)
            else:
                parts.append(f"{c}*{name}")
        return " + ".join(parts).replace("+ -", "- ")

    # ------------------------------------------------------------ structure
    def product_basis(self, i, j):
        """Product of two basis elements as a vector."""
        di, dj = self.space.degrees[i], self.space.degrees[j]
        if di + dj > self.k_max:
            if self.complete:
                return {}
            raise DegreeOverflow(
                f"product {self.space.names[i]}*{self.space.names[j]} has degree {di + dj} > k_max={self.k_max}")
        if self.generators is not None:
            r = _mono_mul(self.monomials[i], self.monomials[j], self._odd)
            if r is None:
                return {}
            sign, m = r
            return {self._mono_index[m]: Fraction(sign)}
        return self._products.get((i, j), {})

    def mul(self, a, b):
        out = {}
        for i, x in a.items():
            for j, y in b.items():
                p = self.product_basis(i, j)
                if p:
                    vec_iadd(out, p, x * y)
        return out

    @property
    def safe_top(self):
        """Highest degree whose cohomology is determined by the stored data.

        A zero differential is known in every degree, so truncation only
        costs the top degree when ``d`` is nonzero and the algebra is incomplete.
        """
        if self.complete or self.has_zero_differential():
            return self.k_max
        return self.k_max - 1

    def d_basis(self, i):
        deg = self.space.degrees[i]
        if deg >= self.k_max and self.safe_top < self.k_max:
            raise DegreeOverflow(
                f"d({self.space.names[i]}) lands in degree {deg + 1} > k_max={self.k_max}")
        if self.generators is not None:
            return self._free_d(self.monomials[i])
        return self._differential.get(i, {})

    def d(self, v):
        out = {}
        for i, x in v.items():
            w = self.d_basis(i)
            if w:
                vec_iadd(out, w, x)
        return out

    def differential_matrix(self, q):
        """``d_q`` as ``{source index: image}`` for the degree-q basis."""
        return {i: self.d_basis(i) for i in self.space.by_degree(q)}

    def has_zero_differential(self):
        if self.generators is not None:
            return all(not g.differential for g in self.generators)
        return not self._differential

    def products_table(self):
        """All nonzero structure constants ``(i, j) -> vec`` within ``k_max``."""
        if self.generators is None:
            return dict(self._products)
        out = {}
        for i in range(len(self)):
            for j in range(len(self)):
                if self.degrees[i] + self.degrees[j] <= self.k_max:
                    p = self.product_basis(i, j)
                    if p:
                        out[i, j] = p
        return out

    def differential_table(self):
        out = {}
        for i in range(len(self)):
            if self.degrees[i] < self.k_max or self.complete:
                w = self.d_basis(i)
                if w:
                    out[i] = w
        return out

    # -------------------------------------------------------- free algebras
    def _mono_vec(self, poly):
        """Convert ``((monomial, coef), ...)`` to a vector (monomials must be in range)."""
        out = {}
        for m, c in poly:
            vec_iadd(out, {self._mono_index[m]: Fraction(c)})
        return out

    def _free_d(self, mono):
        if mono in self._dcache:
            return self._dcache[mono]
        if not mono:
            res = {}
        elif len(mono) == 1:
            res = self._mono_vec(self.generators[mono[0]].differential)
        else:
            first, rest = (mono[0],), mono[1:]
            x = self._mono_vec(self.generators[mono[0]].differential)
            r = {self._mono_index[rest]: Fraction(1)}
            f = {self._mono_index[first]: Fraction(1)}
            sign = -1 if self._odd[mono[0]] else 1
            res = vec_add(self.mul(x, r), self.mul(f, self._free_d(rest)), sign)
        self._dcache[mono] = res
        return res

    def generator_index(self, name):
        for k, g in enumerate(self.generators or ()):
            if g.name == name:
                return k
        raise KeyError(f"no generator named {name!r}")

    def parse(self, text):
        """Parse a polynomial like ``"a^2 - 2/3 x*y"`` into an element.

        Factors are multiplied left to right, so Koszul signs follow the
        written order.  For tabulated algebras the factors are basis names.
        """
        out = {}
        for coef, factors in _parse_poly(text):
            term = self.one()
            for name, power in factors:
                f = self.basis(name) if self.generators is None else \
                    self.basis(_mono_name((self.generator_index(name),), self.generators))
                for _ in range(power):
                    term = self.mul(term, f)
            vec_iadd(out, term, coef)
        return out


# ---------------------------------------------------------------- polynomials
_NAME = r"[A-Za-z_][A-Za-z0-9_.']*"
_FACTOR = re.compile(rf"^({_NAME})(?:\^(\d+))?$")


def _parse_poly(text):
    """Return ``[(coefficient, [(name, power), ...]), ...]`` for each term."""
    s = str(text).replace("**", "^").replace(" ^", "^").replace("^ ", "^").strip()
    if s in ("", "0"):
        return []
    tokens = re.split(r"([+-])", s)
    items = [("+", tokens[0])] + list(zip(tokens[1::2], tokens[2::2]))
    terms = []
    for k, (sign, body) in enumerate(items):
        body = body.strip()
        if not body:
            if k == 0:
                continue
            raise CDGAError(f"malformed polynomial {text!r}")
        coef = Fraction(-1 if sign == "-" else 1)
        factors = []
        for tok in re.split(r"[\s*]+", body):
            if not tok:
                continue
            if re.fullmatch(r"\d+(/\d+)?", tok):
                coef *= Fraction(tok)
                continue
            m = _FACTOR.match(tok)
            if not m:
                raise CDGAError(f"malformed factor {tok!r} in {text!r}")
            factors.append((m.group(1), int(m.group(2) or 1)))
        terms.append((coef, factors))
    return terms


def _mono_name(mono, generators):
    if not mono:
        return "1"
    parts = []
    k = 0
    while k < len(mono):
        j = k
        while j < len(mono) and mono[j] == mono[k]:
            j += 1
        name = generators[mono[k]].name
        parts.append(name if j - k == 1 else f"{name}^{j - k}")
        k = j
    return "*".join(parts)


def _monomials(gen_degrees, odd, k_max):
    """All normal-form monomials of degree <= k_max, ordered by (degree, tuple)."""
    out = [()]

    def rec(start, mono, deg):
        for g in range(start, len(gen_degrees)):
            nd = deg + gen_degrees[g]
            if nd > k_max:
                continue
            if odd[g] and mono and mono[-1] == g:
                continue
            m = mono + (g,)
            out.append(m)
            rec(g if not odd[g] else g + 1, m, nd)

    rec(0, (), 0)
    deg = lambda m: sum(gen_degrees[g] for g in m)
    out.sort(key=lambda m: (deg(m), m))
    return out


def free_cdga(generators, k_max=DEFAULT_K_MAX, label=""):
    """The free graded-commutative algebra on ``generators``, truncated at ``k_max``.

    ``generators`` is a list of ``(name, degree, differential)``; the
    differential is a polynomial string in earlier-listed generators, a dict
    ``{polynomial string or monomial name: coefficient}``, or 0/None.
    """
    names, degs = [], []
    for g in generators:
        name, deg = g[0], int(g[1])
        if not re.fullmatch(_NAME, name):
            raise CDGAError(f"bad generator name {name!r}")
        if deg < 1:
            raise CDGAError(f"generator {name!r} must have positive degree, got {deg}")
        if name in names:
            raise CDGAError(f"duplicate generator {name!r}")
        names.append(name)
        degs.append(deg)
    odd = [d % 2 == 1 for d in degs]
    monos = _monomials(degs, odd, k_max)
    proto = [Generator(n, d) for n, d in zip(names, degs)]
    mono_deg = [sum(degs[g] for g in m) for m in monos]
    # scaffolding algebra (zero differential) used to multiply out differentials
    scaffold = CDGA([_mono_name(m, proto) for m in monos], mono_deg, k_max=k_max, complete=False,
                    generators=proto, monomials=monos)
    final = []
    for k, g in enumerate(generators):
        raw = g[2] if len(g) > 2 else None
        poly = ()
        if raw not in (None, 0, "0", ""):
            if isinstance(raw, dict):
                text = " ".join(f"{'-' if parse_scalar(c) < 0 else '+'} {fmt_scalar(abs(parse_scalar(c)))} {m}"
                                for m, c in raw.items())
            else:
                text = str(raw)
            terms = _parse_poly(text)
            for _, factors in terms:
                for fname, _p in factors:
                    if fname not in names[:k]:
                        raise CDGAError(
                            f"differential of {names[k]!r} uses {fname!r}, which is not an earlier generator")
            if degs[k] + 1 <= k_max:
                v = scaffold.parse(text)
                for i in v:
                    if mono_deg[i] != degs[k] + 1:
                        raise CDGAError(
                            f"d({names[k]}) has a term of degree {mono_deg[i]}, expected {degs[k] + 1}")
                poly = tuple((monos[i], c) for i, c in sorted(v.items()))
            else:
                # cannot represent, but still check degrees symbolically
                for _, factors in terms:
                    dd = sum(degs[names.index(f)] * p for f, p in factors)
                    if dd != degs[k] + 1:
                        raise CDGAError(f"d({names[k]}) has a term of degree {dd}, expected {degs[k] + 1}")
        final.append(Generator(names[k], degs[k], poly))
    A = CDGA([_mono_name(m, final) for m in monos], mono_deg, k_max=k_max, complete=False,
             generators=final, monomials=monos, label=label)
    for k, g in enumerate(final):
        if g.degree + 2 <= k_max:
            i = A._mono_index[(k,)]
            dd = A.d(A.d_basis(i))
            if dd:
                raise CDGAError(f"d^2({g.name}) = {A.format(dd)} != 0")
    return A


def tabulated(basis, products, differential=None, k_max=None, unit=None, complete=True, label=""):
    """Build a tabulated CDGA from names.

    ``basis`` is ``[(name, degree), ...]``; ``products`` maps ``(name, name)``
    to ``{name: coef}`` and ``differential`` maps ``name`` to ``{name: coef}``.
    Products with the unit are filled in automatically.
    """
    names = [b[0] for b in basis]
    degrees = [int(b[1]) for b in basis]
    if k_max is None:
        k_max = max(DEFAULT_K_MAX, max(degrees) + 1)
    idx = {n: i for i, n in enumerate(names)}
    if unit is None:
        unit = names[degrees.index(0)]
    u = idx[unit]
    prods = {}
    for (a, b), v in products.items():
        vec = {idx[n]: parse_scalar(c) for n, c in v.items() if parse_scalar(c)}
        if vec:
            prods[idx[a], idx[b]] = vec
    for i in range(len(names)):
        prods.setdefault((u, i), {i: Fraction(1)})
        prods.setdefault((i, u), {i: Fraction(1)})
    diff = {}
    for a, v in (differential or {}).items():
        vec = {idx[n]: parse_scalar(c) for n, c in v.items() if parse_scalar(c)}
        if vec:
            diff[idx[a]] = vec
    return CDGA(names, degrees, prods, diff, k_max=k_max, unit=u, complete=complete, label=label)


def multiply(A, a, b):
    """Product of two elements, refusing to leave the truncation range."""
    return A.mul(a, b)


# ------------------------------------------------------------- verification
@dataclass
class Check:
    name: str
    ok: bool
    count: int
    witness: str = ""


@dataclass
class Diagnostic:
    checks: list

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def first_violation(self):
        for c in self.checks:
            if not c.ok:
                return c
        return None

    def lines(self):
        out = []
        for c in self.checks:
            status = "ok" if c.ok else "FAIL"
            extra = f"  witness: {c.witness}" if c.witness else ""
            out.append(f"{c.name:<24} {status:<4} ({c.count} cases){extra}")
        return out

    def __str__(self):
        return "\n".join(self.lines())


def verify_cdga(A):
    """Check the CDGA axioms on every in-range basis tuple.

    Never raises for axiom failures; the first violation of each identity is
    reported with its witnesses.
    """
    n = len(A)
    deg = A.degrees
    names = A.names
    K = A.k_max
    checks = []

    def d_ok(i):
        return deg[i] < K or A.complete

    # unit
    cnt, wit = 0, ""
    for i in range(n):
        cnt += 1
        if A.product_basis(A.unit, i) != {i: 1} or A.product_basis(i, A.unit) != {i: 1}:
            wit = f"unit*{names[i]}"
            break
    checks.append(Check("unit", not wit, cnt, wit))

    # homogeneity of products and differential
    cnt, wit = 0, ""
    table = A.products_table()
    for (i, j), v in table.items():
        cnt += 1
        bad = [k for k in v if deg[k] != deg[i] + deg[j]]
        if bad:
            wit = f"{names[i]}*{names[j]} contains {names[bad[0]]}"
            break
    if not wit:
        for i in range(n):
            if not d_ok(i):
                continue
            cnt += 1
            bad = [k for k in A.d_basis(i) if deg[k] != deg[i] + 1]
            if bad:
                wit = f"d({names[i]}) contains {names[bad[0]]}"
                break
    checks.append(Check("degree homogeneity", not wit, cnt, wit))

    # d^2 = 0
    cnt, wit = 0, ""
    for i in range(n):
        if deg[i] + 2 > K and not A.complete:
            continue
        cnt += 1
        dd = A.d(A.d_basis(i))
        if dd:
            wit = f"d(d({names[i]})) = {A.format(dd)}"
            break
    checks.append(Check("d^2 = 0", not wit, cnt, wit))

    # graded commutativity
    cnt, wit = 0, ""
    for i in range(n):
        for j in range(i, n):
            if deg[i] + deg[j] > K:
                continue
            cnt += 1
            s = -1 if (deg[i] * deg[j]) % 2 else 1
            if vec_add(A.product_basis(i, j), A.product_basis(j, i), -s):
                wit = f"({names[i]}, {names[j]})"
                break
        if wit:
            break
    checks.append(Check("graded commutativity", not wit, cnt, wit))

    # Leibniz
    cnt, wit = 0, ""
    for i in range(n):
        for j in range(n):
            if deg[i] + deg[j] > K:
                continue
            if deg[i] + deg[j] >= K and not A.complete:
                continue
            cnt += 1
            lhs = A.d(A.product_basis(i, j))
            s = -1 if deg[i] % 2 else 1
            rhs = vec_add(A.mul(A.d_basis(i), {j: 1}), A.mul({i: 1}, A.d_basis(j)), s)
            if vec_add(lhs, rhs, -1):
                wit = f"({names[i]}, {names[j]})"
                break
        if wit:
            break
    checks.append(Check("Leibniz", not wit, cnt, wit))

    # associativity
    cnt, wit = 0, ""
    pos = [i for i in range(n) if i != A.unit]
    for i in pos:
        for j in pos:
            if deg[i] + deg[j] > K:
                continue
            ij = A.product_basis(i, j)
            for k in pos:
                if deg[i] + deg[j] + deg[k] > K:
                    continue
                cnt += 1
                lhs = A.mul(ij, {k: 1})
                rhs = A.mul({i: 1}, A.product_basis(j, k))
                if vec_add(lhs, rhs, -1):
                    wit = f"({names[i]}, {names[j]}, {names[k]})"
                    break
            if wit:
                break
        if wit:
            break
    checks.append(Check("associativity", not wit, cnt, wit))
    return Diagnostic(checks)


# ---------------------------------------------------------------- morphisms
class MorphismError(CDGAError):
    pass


class CdgaMorphism:
    """A linear map between CDGAs given by images of source basis elements.

    ``images[i]`` is the image of source basis element ``i``; the map is
    defined on source degrees ``0..top``.
    """

    def __init__(self, source, target, images, top=None):
        self.source = source
        self.target = target
        if top is None:
            top = min(source.k_max, target.k_max)
        self.top = top
        self.images = {i: {k: Fraction(x) for k, x in v.items() if x}
                       for i, v in images.items() if source.degrees[i] <= top}
        for i, v in self.images.items():
            for k in v:
                if target.degrees[k] != source.degrees[i]:
                    raise MorphismError(
                        f"image of {source.names[i]} has wrong degree")

    def __call__(self, v):
        return apply_map(self.images, {i: x for i, x in v.items()})

    def matrix(self, q):
        return {i: self.images.get(i, {}) for i in self.source.space.by_degree(q)}

    def check(self):
        """Return a list of violations of the chain-map and multiplicativity identities."""
        S, T = self.source, self.target
        bad = []
        for i in range(len(S)):
            dq = S.degrees[i]
            if dq + 1 > self.top or (dq >= S.k_max and not S.complete):
                continue
            if vec_add(self(S.d_basis(i)), T.d(self.images.get(i, {})), -1):
                bad.append(f"d does not commute on {S.names[i]}")
        for i in range(len(S)):
            for j in range(len(S)):
                if S.degrees[i] + S.degrees[j] > self.top:
                    continue
                lhs = self(S.product_basis(i, j))
                rhs = T.mul(self.images.get(i, {}), self.images.get(j, {}))
                if vec_add(lhs, rhs, -1):
                    bad.append(f"not multiplicative on ({S.names[i]}, {S.names[j]})")
        return bad


def morphism_from_generators(source, target, gen_images, top=None):
    """Extend generator images multiplicatively from a free source."""
    if source.generators is None:
        raise MorphismError("source must be free-presented")
    if top is None:
        top = min(source.k_max, target.k_max)
    gimg = []
    for g in source.generators:
        v = gen_images.get(g.name, {})
        if isinstance(v, str):
            v = target.parse(v)
        gimg.append(v)
    images = {}
    for i, m in enumerate(source.monomials):
        if source.degrees[i] > top:
            continue
        v = target.one()
        for g in m:
            v = target.mul(v, gimg[g])
        images[i] = v
    return CdgaMorphism(source, target, images, top)


def identity_morphism(A):
    return CdgaMorphism(A, A, {i: {i: Fraction(1)} for i in range(len(A))})


def compose(f, g):
    """``f o g`` (apply ``g`` first)."""
    if g.target is not f.source and g.target.names != f.source.names:
        raise MorphismError("morphisms are not composable")
    top = min(f.top, g.top)
    images = {i: f(v) for i, v in g.images.items() if g.source.degrees[i] <= top}
    return CdgaMorphism(g.source, f.target, images, top)


def morphisms_equal(f, g):
    if f.source.names != g.source.names or f.target.names != g.target.names:
        raise MorphismError("shape mismatch")
    top = min(f.top, g.top)
    for i in range(len(f.source)):
        if f.source.degrees[i] <= top and f.images.get(i, {}) != g.images.get(i, {}):
            return False
    return True


# --------------------------------------------------------------------- JSON
def cdga_to_dict(A):
    if A.generators is not None:
        gens = []
        for g in A.generators:
            if g.differential:
                v = {A._mono_index[m]: c for m, c in g.differential}
                d = _format_poly(A, v)
            else:
                d = "0"
            gens.append({"name": g.name, "degree": g.degree, "d": d})
        return {"kind": "free", "k_max": A.k_max, "generators": gens}
    return {
        "kind": "tabulated",
        "k_max": A.k_max,
        "complete": A.complete,
        "unit": A.names[A.unit],
        "basis": [{"name": n, "degree": d} for n, d in zip(A.names, A.degrees)],
        "products": [[A.names[i], A.names[j], A.names[k], fmt_scalar(c)]
                     for (i, j), v in sorted(A.products_table().items()) for k, c in sorted(v.items())],
        "differentials": [[A.names[i], A.names[k], fmt_scalar(c)]
                          for i, v in sorted(A.differential_table().items()) for k, c in sorted(v.items())],
    }


def _format_poly(A, v):
    parts = []
    for i in sorted(v):
        c = v[i]
        parts.append(f"{'-' if c < 0 else '+'} {fmt_scalar(abs(c))} {A.names[i]}")
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else s


def cdga_from_dict(data):
    kind = data.get("kind")
    k_max = int(data.get("k_max", DEFAULT_K_MAX))
    if kind == "free":
        gens = [(g["name"], g["degree"], g.get("d", "0")) for g in data["generators"]]
        return free_cdga(gens, k_max)
    if kind != "tabulated":
        raise CDGAError(f"unknown CDGA kind {kind!r}")
    names = [b["name"] for b in data["basis"]]
    degrees = [int(b["degree"]) for b in data["basis"]]
    idx = {n: i for i, n in enumerate(names)}
    try:
        prods = {}
        for a, b, c, x in data.get("products", []):
            vec_iadd(prods.setdefault((idx[a], idx[b]), {}), {idx[c]: parse_scalar(x)})
        diff = {}
        for a, c, x in data.get("differentials", []):
            vec_iadd(diff.setdefault(idx[a], {}), {idx[c]: parse_scalar(x)})
    except KeyError as e:
        raise CDGAError(f"unknown basis element {e.args[0]!r}") from None
    prods = {k: v for k, v in prods.items() if v}
    return CDGA(names, degrees, prods, diff, k_max=k_max, unit=data.get("unit"),
                complete=bool(data.get("complete", True)))


def dumps(obj):
    """Canonical JSON text used for every file this package writes."""
    return json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def save_cdga(A, path):
    with open(path, "w") as f:
        f.write(dumps(cdga_to_dict(A)))


def load_cdga(path):
    with open(path) as f:
        return cdga_from_dict(json.load(f))
