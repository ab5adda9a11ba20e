"""Sullivan k-minimal models, k-freeness, formality certificates and Massey products.

Everything is restricted to connected, simply connected algebras
(``H^0 = Q``, ``H^1 = 0``), where a minimal model is built one degree at a
time: new closed generators fill the cokernel of ``H(M) -> H(A)``, new
generators with decomposable differential kill its kernel one degree up.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .cohomology import NotACocycle, cohomology, cohomology_ring
from .dga import (
    CDGAError, DegreeOverflow, _format_poly, free_cdga, identity_morphism,
    morphism_from_generators,
)
from .linalg import Echelon, kernel, vec_add


class ModelBuildError(CDGAError):
    pass


class NotKFree(CDGAError):
    def __init__(self, msg, failing_degree=None):
        super().__init__(msg)
        self.failing_degree = failing_degree


@dataclass
class QuasiIsoReport:
    k: int
    rows: list            # (degree, dim source, dim target, rank, requirement, ok)
    problems: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.problems and all(r[5] for r in self.rows)

    def __bool__(self):
        return self.ok

    def lines(self):
        out = [f"{'deg':>4} {'H(src)':>6} {'H(tgt)':>6} {'rank':>5}  need"]
        for q, a, b, r, need, ok in self.rows:
            out.append(f"{q:>4} {a:>6} {b:>6} {r:>5}  {need}{'' if ok else '  FAILS'}")
        out += self.problems
        return out


@dataclass
class MinimalModel:
    model: object          # free CDGA
    morphism: object       # CdgaMorphism model -> target
    k: int
    images: dict           # generator name -> vector in the target
    certificate: dict = field(default_factory=dict)

    @property
    def generators(self):
        return self.model.generators

    def generator_counts(self):
        out = {}
        for g in self.model.generators:
            out[g.degree] = out.get(g.degree, 0) + 1
        return dict(sorted(out.items()))

    def describe(self):
        lines = []
        for g in self.model.generators:
            d = _gen_differential(self.model, g)
            lines.append(f"{g.name} (deg {g.degree})  d = {d}")
        return lines


def _gen_differential(M, g):
    if not g.differential:
        return "0"
    return M.format({M._mono_index[m]: c for m, c in g.differential})


def _gen_differential_by_names(M, g):
    """Differential as ``{tuple of generator names: coef}`` (order independent of indices)."""
    names = [x.name for x in M.generators]
    return {tuple(sorted(names[i] for i in m)): c for m, c in g.differential}


# ----------------------------------------------------------- quasi-isos
def induced_map(f, q, src=None, tgt=None):
    """Matrix of ``H^q(f)``: a list of class-coefficient vectors, one per source rep."""
    src = src or cohomology(f.source, [q])
    tgt = tgt or cohomology(f.target, [q])
    return [tgt.class_of(f(z), q) for z in src.reps(q)]


def verify_k_quasi_iso(f, k):
    """Check ``H^q(f)`` is an isomorphism for ``q <= k`` and injective for ``q = k + 1``."""
    S, T = f.source, f.target
    top = k + 1
    for A, side in ((S, "source"), (T, "target")):
        if top > A.safe_top:
            raise DegreeOverflow(f"{side} cohomology is only known through degree {A.safe_top}, need {top}")
    if top > f.top:
        raise DegreeOverflow(f"morphism is only defined through degree {f.top}, need {top}")
    problems = []
    for i in range(len(S)):
        if S.degrees[i] <= k and vec_add(f(S.d_basis(i)), T.d(f.images.get(i, {})), -1):
            problems.append(f"not a chain map at {S.names[i]}")
            break
    hs = cohomology(S, range(top + 1))
    ht = cohomology(T, range(top + 1))
    rows = []
    for q in range(top + 1):
        mat = induced_map(f, q, hs, ht)
        e = Echelon()
        for v in mat:
            e.add({j: c for j, c in enumerate(v) if c})
        r = len(e)
        a, b = hs.dim(q), ht.dim(q)
        if q <= k:
            rows.append((q, a, b, r, "iso", a == b == r))
        else:
            rows.append((q, a, b, r, "injective", r == a))
    return QuasiIsoReport(k, rows, problems)


# -------------------------------------------------------------- minimality
@dataclass
class Verdict:
    ok: bool
    witness: object = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_minimal(M):
    """Free, no degree-1 generators, decomposable differential."""
    if M.generators is None:
        raise CDGAError("is_minimal needs a free-presented algebra")
    for g in M.generators:
        if g.degree == 1:
            return Verdict(False, g.name, "generator of degree 1")
    for g in M.generators:
        for m, c in g.differential:
            if len(m) == 1:
                return Verdict(False, g.name, f"d({g.name}) has the linear term {M.generators[m[0]].name}")
    return Verdict(True)


def _check_connected(report):
    if report.dim(0) != 1:
        raise ModelBuildError(f"H^0 has dimension {report.dim(0)}; the algebra must be connected")
    if 1 in report.degrees and report.dim(1) != 0:
        raise ModelBuildError(f"H^1 has dimension {report.dim(1)}; the algebra must be simply connected")


# ----------------------------------------------------------- k-minimal model
def k_minimal_model(A, k, debug=None):
    """Degree-by-degree k-minimal model ``M(k) -> A``.

    Generators are named ``v{degree}_{index}``.  With ``debug`` (or the
    environment variable ``RATIONALMODULI_DEBUG`` set) every stage is re-run
    and must add nothing, which checks the one-pass claim.
    """
    if debug is None:
        debug = bool(os.environ.get("RATIONALMODULI_DEBUG"))
    if k < 1:
        raise ModelBuildError("k must be at least 1")
    if k + 1 > A.safe_top:
        raise DegreeOverflow(
            f"certifying stage {k} needs H^{k + 1}(A), but A is only known through degree {A.safe_top}")
    HA = cohomology(A, range(k + 2))
    _check_connected(HA)
    gens = []          # (name, degree, differential text)
    images = {}        # name -> vector in A
    counts = {}

    def build():
        M = free_cdga(gens, k_max=k + 2, label=f"M({k})")
        f = morphism_from_generators(M, A, images, top=k + 1)
        return M, f

    def add(deg, d_text, image):
        name = f"v{deg}_{counts.get(deg, 0)}"
        counts[deg] = counts.get(deg, 0) + 1
        gens.append((name, deg, d_text))
        images[name] = image

    M, f = build()
    for i in range(2, k + 1):
        for rerun in range(2 if debug else 1):
            added = 0
            # cokernel in degree i
            HM = cohomology(M, [i])
            e = Echelon()
            for v in induced_map(f, i, HM, HA):
                e.add({j: c for j, c in enumerate(v) if c})
            for r in range(HA.dim(i)):
                if e.add({r: Fraction(1)}):
                    add(i, "0", HA.reps(i)[r])
                    added += 1
            if added:
                M, f = build()
            # kernel in degree i + 1
            HM = cohomology(M, [i + 1])
            mat = induced_map(f, i + 1, HM, HA)
            cols = [(j, {r: c for r, c in enumerate(v) if c}) for j, v in enumerate(mat)]
            for lam in kernel(cols):
                z = {}
                for j, c in lam.items():
                    for t, x in HM.reps(i + 1)[j].items():
                        z[t] = z.get(t, 0) + c * x
                z = {t: x for t, x in z.items() if x}
                a = HA.primitive(f(z), i + 1)
                if a is None:
                    raise ModelBuildError("kernel class does not map to an exact element")
                add(i, _format_poly(M, z), a)
                added += 1
            if added:
                if rerun:
                    raise ModelBuildError(f"stage {i} was not complete after one pass")
                M, f = build()
    mm = MinimalModel(M, f, k, dict(images))
    v = is_minimal(M)
    if not v:
        raise ModelBuildError(f"constructed model is not minimal: {v.reason}")
    rep = verify_k_quasi_iso(f, k)
    if not rep.ok:
        raise ModelBuildError("constructed model fails the k-quasi-isomorphism check:\n" + "\n".join(rep.lines()))
    mm.certificate["quasi_iso"] = rep
    return mm


# ------------------------------------------------------------ k-freeness
@dataclass
class KFreeResult:
    k: int
    V: list                # (name, degree, vector in H) or None
    failing_degree: int = None
    report: QuasiIsoReport = None

    @property
    def ok(self):
        return self.V is not None

    def __bool__(self):
        return self.ok


def k_free_basis(H, k):
    """Greedy ``V`` with ``S(V) -> H`` iso through degree ``k`` and injective in ``k + 1``."""
    if not H.has_zero_differential():
        raise CDGAError("k_free_basis needs an algebra with zero differential")
    if k + 1 > H.k_max:
        raise DegreeOverflow(f"need products through degree {k + 1}, algebra stops at {H.k_max}")
    V = []
    for i in range(1, k + 1):
        e = Echelon()
        for p in range(1, i):
            for x in H.space.by_degree(p):
                for y in H.space.by_degree(i - p):
                    e.add(H.product_basis(x, y))
        n = 0
        for a in H.space.by_degree(i):
            if e.add({a: Fraction(1)}):
                V.append((f"v{i}_{n}", i, {a: Fraction(1)}))
                n += 1
    S = free_cdga([(nm, d, 0) for nm, d, _ in V], k_max=k + 2, label="S(V)")
    f = morphism_from_generators(S, H, {nm: v for nm, _, v in V}, top=k + 1)
    rows = []
    failing = None
    for q in range(k + 2):
        src = S.space.by_degree(q)
        e = Echelon()
        for i in src:
            e.add(f.images.get(i, {}))
        r, a, b = len(e), len(src), H.dim(q)
        ok = (a == b == r) if q <= k else (r == a)
        rows.append((q, a, b, r, "iso" if q <= k else "injective", ok))
        if not ok and failing is None:
            failing = q
    rep = QuasiIsoReport(k, rows)
    if failing is not None:
        return KFreeResult(k, None, failing, rep)
    return KFreeResult(k, V, None, rep)


def prop_k_formal_model(A, k):
    """``S(V) -> A`` for a k-free ``H(A)``: simultaneously a k-minimal model of ``A`` and ``H(A)``."""
    if k + 1 > A.safe_top:
        raise DegreeOverflow(f"need H^{k + 1}(A), but A is only known through degree {A.safe_top}")
    report = cohomology(A, range(k + 2))
    _check_connected(report)
    H, reps = cohomology_ring(A, report, top=k + 1)
    kf = k_free_basis(H, k)
    if not kf:
        raise NotKFree(f"H(A) is not {k}-free: fails in degree {kf.failing_degree}", kf.failing_degree)
    lifts = {}
    himgs = {}
    for nm, deg, v in kf.V:
        z = {}
        for a, c in v.items():
            for t, x in reps[H.names[a]].items():
                z[t] = z.get(t, 0) + c * x
        lifts[nm] = {t: x for t, x in z.items() if x}
        himgs[nm] = v
    S = free_cdga([(nm, d, 0) for nm, d, _ in kf.V], k_max=k + 2, label=f"S(V), k={k}")
    f = morphism_from_generators(S, A, lifts, top=k + 1)
    g = morphism_from_generators(S, H, himgs, top=k + 1)
    bad = f.check()
    if bad:
        raise ModelBuildError("lifted map is not a CDGA morphism: " + bad[0])
    cert_a = verify_k_quasi_iso(f, k)
    cert_h = verify_k_quasi_iso(g, k)
    mm = MinimalModel(S, f, k, lifts, certificate={"model_of_A": cert_a, "model_of_H": cert_h,
                                                    "to_cohomology": g})
    if not (cert_a.ok and cert_h.ok and is_minimal(S)):
        raise ModelBuildError("k-formality certificate failed to verify")
    return mm


# --------------------------------------------------------------- Massey
@dataclass
class MasseyResult:
    verdict: str                 # "zero", "nonzero" or "undefined"
    degree: int = None
    representative: dict = None
    class_coefficients: list = None
    indeterminacy: list = None   # spanning class vectors
    reason: str = ""


def _as_vec(A, x):
    return A.parse(x) if isinstance(x, str) else dict(x)


def massey_triple(A, alpha, beta, gamma, report=None):
    """Triple Massey product of the classes of the cocycles ``alpha, beta, gamma``."""
    a, b, c = (_as_vec(A, x) for x in (alpha, beta, gamma))
    degs = [A.degree_of(x) for x in (a, b, c)]
    if any(d is None for d in degs):
        return MasseyResult("undefined", reason="zero or inhomogeneous input")
    p, q, r = degs
    n = p + q + r - 1
    if n > A.safe_top:
        raise DegreeOverflow(f"Massey product lands in degree {n} beyond {A.safe_top}")
    if report is None:
        report = cohomology(A, range(n + 1))
    for x, d in zip((a, b, c), degs):
        if A.d(x):
            raise NotACocycle(f"{A.format(x)} is not a cocycle")
    ab, bc = A.mul(a, b), A.mul(b, c)
    u = report.primitive(ab, p + q) if ab else {}
    v = report.primitive(bc, q + r) if bc else {}
    if u is None or v is None:
        return MasseyResult("undefined", n, reason="a product of adjacent classes is not exact")
    sign = -1 if p % 2 else 1
    rep = vec_add(A.mul(a, v), A.mul(u, c), -sign)
    cls = report.class_of(rep, n) if rep else [Fraction(0)] * report.dim(n)
    ind = []
    for z in report.reps(q + r - 1) if q + r - 1 >= 0 else []:
        w = A.mul(a, z)
        if w:
            ind.append(report.class_of(w, n))
    for z in report.reps(p + q - 1) if p + q - 1 >= 0 else []:
        w = A.mul(z, c)
        if w:
            ind.append(report.class_of(w, n))
    e = Echelon()
    for w in ind:
        e.add({j: x for j, x in enumerate(w) if x})
    target = {j: x for j, x in enumerate(cls) if x}
    zero = not target or e.contains(target)
    basis = [[Fraction(x) for x in w] for w in ind if any(w)]
    return MasseyResult("zero" if zero else "nonzero", n, rep, cls, basis)


def massey_survey(A, top=None):
    """All triple Massey products of representative classes landing in degrees ``<= top``."""
    top = A.safe_top if top is None else top
    report = cohomology(A, range(top + 1))
    classes = [(q, z) for q in report.degrees if q >= 1 for z in report.reps(q)]
    out = []
    for qa, za in classes:
        for qb, zb in classes:
            for qc, zc in classes:
                if qa + qb + qc - 1 > top:
                    continue
                out.append(((qa, qb, qc), massey_triple(A, za, zb, zc, report)))
    return out


# ------------------------------------------------------------ union, stable
def union_of_models(models):
    """Colimit of an increasing sequence of models: the largest, after checking the embeddings."""
    models = list(models)
    if not models:
        raise ModelBuildError("no models given")
    for small, big in zip(models, models[1:]):
        bg = {g.name: g for g in big.model.generators}
        for g in small.model.generators:
            h = bg.get(g.name)
            if h is None:
                raise ModelBuildError(f"generator {g.name} of the smaller model is missing from the larger")
            if h.degree != g.degree:
                raise ModelBuildError(f"generator {g.name} changes degree {g.degree} -> {h.degree}")
            if _gen_differential_by_names(small.model, g) != _gen_differential_by_names(big.model, h):
                raise ModelBuildError(f"generator {g.name} has different differentials")
            if small.morphism.target.names == big.morphism.target.names:
                if small.images.get(g.name, {}) != big.images.get(g.name, {}):
                    raise ModelBuildError(f"structure maps disagree on {g.name}")
        if big.k < small.k:
            raise ModelBuildError("models must be listed in increasing order of k")
    last = models[-1]
    return MinimalModel(last.model, last.morphism, max(m.k for m in models), dict(last.images),
                        dict(last.certificate))


def stable_generators(n, k):
    """kappa_i (degree 2i, 2i <= k) and c1_T1..c1_Tn (degree 2), ordered by degree."""
    gens = []
    for i in range(1, k // 2 + 1):
        gens.append((f"kappa{i}", 2 * i))
        if i == 1:
            gens += [(f"c1_T{j}", 2) for j in range(1, n + 1)]
    if k < 2:
        gens = []
    return gens


def stable_model(n, k, k_max=None):
    """The polynomial algebra on kappa and c1 classes, with its k-formality certificate."""
    if k < 0 or n < 0:
        raise ValueError("n and k must be nonnegative")
    if k_max is None:
        k_max = k + 2
    if k > k_max:
        raise DegreeOverflow(f"k = {k} exceeds k_max = {k_max}")
    S = free_cdga([(nm, d, 0) for nm, d in stable_generators(n, k)], k_max=k_max,
                  label=f"stable model n={n} k={k}")
    ident = identity_morphism(S)
    images = {g.name: {S._mono_index[(i,)]: Fraction(1)} for i, g in enumerate(S.generators)}
    mm = MinimalModel(S, ident, k, images)
    if k + 1 <= S.safe_top:
        mm.certificate["formal"] = prop_k_formal_model(S, k)
    return mm


def stable_range(k):
    """``(2k + 3, 2k + 1)``: genus bounds for k-formality and for cohomology stability."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return 2 * k + 3, 2 * k + 1
