"""Exact sparse linear algebra over the rationals.

Vectors are dicts ``{index: Fraction}`` with no zero entries.  Row reduction
is fraction-free: stored rows are primitive integer vectors, combined by
cross-multiplication and divided by their content.  Pivoting always uses the
earliest nonzero column, so every result is deterministic in the input order.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

Vec = dict


def vec_clean(v):
    return {k: x for k, x in v.items() if x}


def vec_add(u, v, scale=1):
    """Return ``u + scale * v`` as a new vector."""
    out = dict(u)
    for k, x in v.items():
        y = out.get(k, 0) + scale * x
        if y:
            out[k] = y
        else:
            out.pop(k, None)
    return out


def vec_iadd(u, v, scale=1):
    for k, x in v.items():
        y = u.get(k, 0) + scale * x
        if y:
            u[k] = y
        else:
            u.pop(k, None)
    return u


def vec_scale(v, c):
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


def apply_map(m, v):
    """Apply a sparse linear map given column-wise as ``{src: vec}``."""
    out = {}
    for k, x in v.items():
        col = m.get(k)
        if col:
            vec_iadd(out, col, x)
    return out


def compose_maps(f, g):
    """Return ``f o g`` (apply ``g`` first)."""
    return {k: apply_map(f, col) for k, col in g.items()}


def _primitive(v):
    """Scale a rational vector to a primitive integer vector with positive lead."""
    if not v:
        return {}, Fraction(1)
    den = 1
    for x in v.values():
        x = Fraction(x)
        den = den * x.denominator // gcd(den, x.denominator)
    iv = {k: int(Fraction(x) * den) for k, x in v.items()}
    g = 0
    for x in iv.values():
        g = gcd(g, x)
    lead = iv[min(iv)]
    if lead < 0:
        g = -g
    return {k: x // g for k, x in iv.items()}, Fraction(den, g)


class Echelon:
    """Incrementally built row echelon form.

    Rows are added one at a time.  ``add`` reports whether the row was
    independent of the rows already present.  With ``track=True`` every stored
    row remembers the rational combination of added vectors (by label) that
    produced it, which makes ``solve`` possible.
    """

    def __init__(self, track=False):
        self.track = track
        self.rows = {}      # pivot column -> primitive integer row
        self.combos = {}    # pivot column -> {label: Fraction}

    def __len__(self):
        return len(self.rows)

    @property
    def pivots(self):
        return sorted(self.rows)

    def add(self, v, label=None):
        v, scale = _primitive(vec_clean(v))
        combo = {label: scale} if self.track else None
        while v:
            c = min(v)
            row = self.rows.get(c)
            if row is None:
                g = 0
                for x in v.values():
                    g = gcd(g, x)
                if v[c] < 0:
                    g = -g
                if g != 1:
                    v = {k: x // g for k, x in v.items()}
                    if combo is not None:
                        combo = vec_scale(combo, Fraction(1, g))
                self.rows[c] = v
                if combo is not None:
                    self.combos[c] = combo
                return True
            a, b = row[c], v[c]
            new = {k: a * x for k, x in v.items()}
            vec_iadd(new, row, -b)
            if combo is not None:
                combo = vec_add(vec_scale(combo, a), self.combos[c], -b)
            g = 0
            for x in new.values():
                g = gcd(g, x)
            if g > 1:
                new = {k: x // g for k, x in new.items()}
                if combo is not None:
                    combo = vec_scale(combo, Fraction(1, g))
            v = new
        return False

    def reduce(self, v):
        """Return ``(residual, combo)`` with ``v = residual + sum combo[l] * added[l]``."""
        v = {k: Fraction(x) for k, x in v.items() if x}
        combo = {}
        while True:
            cols = [c for c in v if c in self.rows]
            if not cols:
                return v, combo
            c = min(cols)
            row = self.rows[c]
            f = v[c] / row[c]
            vec_iadd(v, row, -f)
            if self.track:
                vec_iadd(combo, self.combos[c], f)

    def contains(self, v):
        return not self.reduce(v)[0]

    def solve(self, v):
        """Combination of added vectors equal to ``v``, or None if ``v`` is outside the span."""
        if not self.track:
            raise ValueError("Echelon was built without tracking")
        residual, combo = self.reduce(v)
        if residual:
            return None
        return combo


def rank(vectors):
    e = Echelon()
    for v in vectors:
        e.add(v)
    return len(e)


def kernel(columns):
    """Basis of the kernel of the map whose images of basis vectors are ``columns``.

    ``columns`` is a list of ``(label, image)``; kernel vectors are returned as
    ``{label: Fraction}``.
    """
    e = Echelon(track=True)
    out = []
    for label, img in columns:
        if not vec_clean(img):
            out.append({label: Fraction(1)})
            continue
        residual, combo = e.reduce(img)
        if residual:
            e.add(img, label)
        else:
            k = {label: Fraction(1)}
            vec_iadd(k, combo, -1)
            out.append(k)
    return out


def image_basis(vectors):
    """Independent vectors among ``vectors`` (earliest first)."""
    e = Echelon()
    return [v for v in vectors if e.add(v)]


def fmt_scalar(x):
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_scalar(s):
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if isinstance(s, float):
        raise ValueError(f"floating point scalar {s!r} not allowed; use 'p/q'")
    return Fraction(str(s).strip())
