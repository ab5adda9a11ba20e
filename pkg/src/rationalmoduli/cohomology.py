"""Cohomology of a CDGA by exact elimination.

Representatives are chosen deterministically: kernel vectors come from
earliest-column elimination, are reduced modulo the exact subspace, and are
kept in basis order whenever they are independent of what came before.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dga import CDGAError, DegreeOverflow, tabulated
from .linalg import Echelon, _primitive, kernel, vec_add


class NotACocycle(CDGAError):
    pass


@dataclass
class DegreeData:
    degree: int
    dim: int
    cycles: int
    boundaries: int
    reps: list
    _ech: Echelon = field(repr=False, default=None)
    _nreps: int = 0


class CohomologyReport:
    """Per-degree cohomology of ``A`` with chosen representative cocycles."""

    def __init__(self, A, degrees):
        self.algebra = A
        self.data = {}
        for q in degrees:
            self.data[q] = _degree_data(A, q)

    @property
    def degrees(self):
        return sorted(self.data)

    def dim(self, q):
        return self.data[q].dim

    def dimensions(self):
        return [self.data[q].dim for q in self.degrees]

    def reps(self, q):
        return self.data[q].reps

    def classify(self, v, q=None):
        """Express a cocycle in the chosen representatives modulo exact elements.

        Returns ``(coefficients, primitive)`` where ``coefficients[i]`` is the
        coefficient of ``reps(q)[i]`` and ``d(primitive) = v - sum(coef * rep)``.
        """
        A = self.algebra
        if q is None:
            q = A.degree_of(v)
            if q is None:
                raise CDGAError("pass the degree explicitly to classify zero")
        if q not in self.data:
            raise DegreeOverflow(f"degree {q} is outside the computed range")
        dv = A.d(v) if q <= A.safe_top else None
        if dv is None:
            raise DegreeOverflow(f"cannot test cocycle condition in degree {q}")
        if dv:
            raise NotACocycle(f"{A.format(v)} is not a cocycle (d = {A.format(dv)})")
        dd = self.data[q]
        combo = dd._ech.solve(v)
        if combo is None:
            raise CDGAError("cocycle outside span of reps + boundaries; elimination bug")
        coeffs = [Fraction(0)] * dd.dim
        prim = {}
        for label, c in combo.items():
            kind, k = label
            if kind == "r":
                coeffs[k] += c
            else:
                prim = vec_add(prim, {k: c})
        return coeffs, prim

    def class_of(self, v, q=None):
        return self.classify(v, q)[0]

    def is_exact(self, v, q=None):
        if not v:
            return True
        return not any(self.classify(v, q)[0])

    def primitive(self, v, q=None):
        """An element ``u`` with ``d(u) = v``, or None when ``v`` is not exact."""
        coeffs, prim = self.classify(v, q)
        if any(coeffs):
            return None
        return prim

    def table(self):
        rows = []
        for q in self.degrees:
            d = self.data[q]
            rows.append((q, d.cycles, d.boundaries, d.dim))
        return rows


def _degree_data(A, q):
    basis = A.space.by_degree(q)
    if q > A.safe_top:
        raise DegreeOverflow(f"cohomology in degree {q} needs d_{q}, beyond k_max={A.k_max}")
    cols = [(i, A.d_basis(i)) for i in basis]
    Z = kernel(cols)
    ech = Echelon(track=True)
    nb = 0
    for j in A.space.by_degree(q - 1):
        if ech.add(A.d_basis(j), ("d", j)):
            nb += 1
    reps = []
    for z in Z:
        residual, _ = ech.reduce(z)
        if not residual:
            continue
        rep, _ = _primitive(residual)
        rep = {k: Fraction(x) for k, x in rep.items()}
        if ech.add(rep, ("r", len(reps))):
            reps.append(rep)
    return DegreeData(q, len(reps), len(Z), nb, reps, ech)


def cohomology(A, degree_range=None):
    """Cohomology report for degrees in ``degree_range`` (default: all safe degrees)."""
    top = A.safe_top
    if degree_range is None:
        degree_range = range(0, top + 1)
    degree_range = list(degree_range)
    if degree_range and max(degree_range) > top:
        raise DegreeOverflow(f"degree {max(degree_range)} exceeds the safe range 0..{top}")
    return CohomologyReport(A, degree_range)


def euler_characteristic(dims):
    return sum((-1) ** q * d for q, d in enumerate(dims))


def cohomology_ring(A, report=None, top=None):
    """The cohomology algebra H(A) as a tabulated CDGA with zero differential.

    Basis elements are named ``h{degree}_{index}``; products are computed on
    representatives and classified.  Only degrees ``0..top`` are included.
    """
    if report is None:
        report = cohomology(A)
    if top is None:
        top = max(report.degrees)
    basis, reps = [], {}
    for q in range(top + 1):
        for k in range(report.dim(q)):
            name = f"h{q}_{k}"
            basis.append((name, q))
            reps[name] = report.reps(q)[k]
    if report.dim(0) != 1:
        raise CDGAError("cohomology ring needs H^0 of dimension one")
    products = {}
    names = [b[0] for b in basis]
    deg = dict(basis)
    for a in names:
        for b in names:
            q = deg[a] + deg[b]
            if q > top:
                continue
            v = A.mul(reps[a], reps[b])
            if not v:
                continue
            coeffs = report.class_of(v, q)
            products[a, b] = {f"h{q}_{k}": c for k, c in enumerate(coeffs) if c}
    # normalise so that the unit class is literally the unit
    one_coeffs = report.class_of(A.one(), 0)
    if one_coeffs != [Fraction(1)]:
        raise CDGAError("unit of A does not represent the chosen degree-0 class")
    H = tabulated(basis, products, k_max=top, unit="h0_0", complete=A.complete and top >= A.k_max,
                  label=f"H({A.label})" if A.label else "H")
    return H, reps
