"""The acceptance suite behind ``verify all``.

Each criterion returns a verdict and a few deterministic detail lines; the
report never contains timings, so it is byte-identical across runs and
thread counts.  Time budgets are still enforced: exceeding one fails the
criterion.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .cohomology import cohomology, euler_characteristic
from .dga import free_cdga, tabulated, verify_cdga
from .graphs import enumerate_graphs, threads
from .morgan import build_moduli_model, build_nc_model, example_description, make_example_descriptions
from .rings import BUILTIN, builtin_table, keel_ring, validate_table
from .sullivan import (
    is_minimal, k_minimal_model, massey_survey, massey_triple, prop_k_formal_model, stable_model,
    stable_range, verify_k_quasi_iso,
)


@dataclass
class Outcome:
    number: int
    title: str
    ok: bool
    details: list

    def line(self):
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.number}. {self.title}"


def _dims(M):
    return cohomology(M.to_cdga()).dimensions()


def _expect(details, label, got, want):
    ok = got == want
    details.append(f"{label}: {got}" + ("" if ok else f" (expected {want})"))
    return ok


def c1_m04():
    d = []
    M = build_moduli_model(0, 4)
    ok = _expect(d, "H(E1(M_0,4))", _dims(M), [1, 2, 0])
    N = build_nc_model(example_description("p1_three_points"))
    ok &= _expect(d, "H(P1 - {0,1,inf})", _dims(N), [1, 2, 0])
    ok &= _expect(d, "bigraded dims agree", sorted(M.dims().items()) == sorted(N.dims().items()), True)
    return ok, d


def c2_m05():
    d = []
    M = build_moduli_model(0, 5)
    want = {(0, 0): 1, (0, 2): 5, (0, 4): 1, (-1, 2): 10, (-1, 4): 10, (-2, 4): 15}
    ok = _expect(d, "bigraded dims", M.dims(), want)
    td = M.total_dims()
    ok &= _expect(d, "total dims", td, [1, 10, 20, 10, 1])
    h = _dims(M)
    ok &= _expect(d, "cohomology", h, [1, 5, 6, 0, 0])
    ok &= _expect(d, "euler characteristic (chains, cohomology)",
                  (euler_characteristic(td), euler_characteristic(h)), (2, 2))
    return ok, d


def c3_m11():
    d = []
    M = build_moduli_model(1, 1)
    ok = _expect(d, "bigraded dims", M.dims(), {(0, 0): 1, (0, 2): 1, (-1, 2): 1})
    ok &= _expect(d, "cohomology", _dims(M), [1, 0, 0])
    return ok, d


def c4_graphs():
    d = []
    ok = True
    for (g, n), want in [((0, 3), 1), ((0, 4), 4), ((0, 5), 26), ((1, 1), 2)]:
        ok &= _expect(d, f"graphs({g},{n})", len(enumerate_graphs(g, n)), want)
    for n in (4, 5, 6):
        got = sum(1 for G in enumerate_graphs(0, n, max_edges=1) if G.n_edges == 1)
        ok &= _expect(d, f"one-edge graphs(0,{n})", got, 2 ** (n - 1) - n - 1)
    return ok, d


def axiom_suite():
    """``(name, algebra)`` for every algebra the axiom criterion covers."""
    out = []
    for g, n in sorted(BUILTIN):
        out.append((f"builtin table ({g},{n})", builtin_table(g, n).algebra))
    for n in range(3, 7):
        out.append((f"keel ring n={n}", keel_ring(n).algebra))
    for g, n in [(0, 4), (0, 5), (1, 1)]:
        out.append((f"E1 model ({g},{n})", build_moduli_model(g, n).to_cdga()))
    out.append(("E1 model (0,5) via keel", build_moduli_model(0, 5, "keel").to_cdga()))
    for name, desc in sorted(make_example_descriptions().items()):
        out.append((f"nc model {name}", build_nc_model(desc).to_cdga()))
    out += [
        ("free kappa1", free_cdga([("kappa1", 2, 0)], k_max=8)),
        ("free x odd", free_cdga([("x", 3, 0)], k_max=6)),
        ("free kappa1,c1,kappa2", free_cdga([("kappa1", 2, 0), ("c1", 2, 0), ("kappa2", 4, 0)], k_max=6)),
        ("sphere model", sphere_model()),
        ("nonformal model", nonformal_model()),
        ("odd pair", free_cdga([("x", 3, 0), ("y", 3, 0), ("z", 5, "x*y")], k_max=11)),
    ]
    for n in (0, 1, 2):
        out.append((f"stable model n={n} k=8", stable_model(n, 8).model))
    return out


def c5_axioms():
    d = []
    ok = True
    suite = axiom_suite()
    for name, A in suite:
        diag = verify_cdga(A)
        if not diag.ok:
            ok = False
            d.append(f"{name}: {diag.first_violation()}")
    d.append(f"{len(suite)} algebras checked" if ok else "axiom violations found")
    return ok, d


def sphere_ring():
    return tabulated([("1", 0), ("h", 2)], {}, label="Q[h]/(h^2)")


def sphere_model():
    return free_cdga([("a", 2, 0), ("x", 3, "a^2")], k_max=8, label="S2 model")


def nonformal_model():
    return free_cdga([("a", 2, 0), ("b", 2, 0), ("x", 3, "a^2"), ("y", 3, "a*b")], k_max=8,
                     label="nonformal")


def c6_minimal():
    d = []
    mm = k_minimal_model(sphere_ring(), 3)
    ok = _expect(d, "generators of M(3) for Q[h]/(h^2)", mm.generator_counts(), {2: 1, 3: 1})
    runs = [("Q[h]/(h^2)", mm)]
    for k in (2, 3, 4):
        runs.append((f"S2 model k={k}", k_minimal_model(sphere_model(), k)))
    for k in (3, 5):
        runs.append((f"nonformal k={k}", k_minimal_model(nonformal_model(), k)))
    for name, m in runs:
        good = bool(is_minimal(m.model)) and verify_k_quasi_iso(m.morphism, m.k).ok
        ok &= good
        d.append(f"{name}: minimal and {m.k}-quasi-iso: {good}")
    return ok, d


def c7_formality():
    d = []
    ok = True
    defined = 0
    for n in (0, 1, 2):
        for k in range(0, 9):
            mm = prop_k_formal_model(stable_model(n, k).model, k)
            good = mm.certificate["model_of_A"].ok and mm.certificate["model_of_H"].ok
            for _, r in massey_survey(mm.model, top=k) if k >= 2 else []:
                if r.verdict != "undefined":
                    defined += 1
                    good &= r.verdict == "zero"
            ok &= good
    d.append(f"stable models n=0..2, k=0..8 certified; defined Massey triples all zero ({defined} defined)")
    S2 = sphere_model()
    cert = prop_k_formal_model(S2, 2)
    zeros = [r.verdict for _, r in massey_survey(S2, top=5) if r.verdict != "undefined"]
    good = cert.certificate["model_of_A"].ok and all(v == "zero" for v in zeros) and bool(zeros)
    ok &= good
    d.append(f"S2 model: 2-formal certificate, {len(zeros)} defined Massey triples, all zero: {good}")
    r = massey_triple(nonformal_model(), "a", "a", "b")
    good = r.verdict == "nonzero" and not r.indeterminacy
    ok &= good
    d.append(f"<[a],[a],[b]> in the nonformal model: {r.verdict}, indeterminacy dim {len(r.indeterminacy or [])}")
    return ok, d


def c8_range():
    d = []
    ok = all(stable_range(k) == (2 * k + 3, 2 * k + 1) for k in range(11))
    d.append("stable_range(k) = (2k+3, 2k+1) for k = 0..10: " + str(ok))
    return ok, d


CRITERIA = [
    (1, "E1 model of M_0,4", c1_m04, 1.0),
    (2, "E1 model of M_0,5", c2_m05, 10.0),
    (3, "E1 model of M_1,1", c3_m11, 1.0),
    (4, "stable graph counts", c4_graphs, 5.0),
    (5, "CDGA axiom suite", c5_axioms, 30.0),
    (6, "minimal-model suite", c6_minimal, 5.0),
    (7, "formality suite", c7_formality, 10.0),
    (8, "range bookkeeping", c8_range, 1.0),
]


def run_criterion(number):
    for num, title, fn, budget in CRITERIA:
        if num == number:
            t = time.perf_counter()
            try:
                ok, details = fn()
            except Exception as exc:  # a crash is a failure, reported with its message
                ok, details = False, [f"error: {type(exc).__name__}: {exc}"]
            elapsed = time.perf_counter() - t
            if elapsed > budget:
                ok = False
                details = details + [f"exceeded the time budget of {budget:g} s"]
            return Outcome(num, title, ok, details)
    raise KeyError(number)


def report_text(outcomes):
    lines = []
    for o in outcomes:
        lines.append(o.line())
        lines += [f"    {x}" for x in o.details]
    n_ok = sum(o.ok for o in outcomes)
    lines.append(f"{n_ok}/{len(outcomes)} criteria passed")
    return "\n".join(lines) + "\n"


def c9_determinism(many=4):
    """Criteria 1-8 give the same report with one worker and with several."""
    with threads(1):
        a = report_text([run_criterion(n) for n, *_ in CRITERIA])
    with threads(many):
        b = report_text([run_criterion(n) for n, *_ in CRITERIA])
    return a == b, [f"report identical with 1 and {many} threads: {a == b}"]


def verify_all(include_determinism=True):
    outcomes = [run_criterion(n) for n, *_ in CRITERIA]
    if include_determinism:
        ok, details = c9_determinism()
        outcomes.append(Outcome(9, "determinism across thread counts", ok, details))
    return outcomes
