"""Batch command line: ``rationalmoduli <group> <command> ...``.

Plain-text tables go to standard output; ``--format json`` switches to the
canonical JSON documents, each carrying a ``kind`` field understood by
:func:`validate_document`.  Exit codes: 0 success, 1 validation failure,
2 usage error (bad arguments, unreadable or malformed input).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .cohomology import cohomology, euler_characteristic
from .dga import CDGAError, cdga_from_dict, cdga_to_dict, dumps, morphism_from_generators
from .graphs import GraphError, StableGraph, enumerate_graphs, threads
from .linalg import fmt_scalar, parse_scalar
from .morgan import (
    ModelError, build_moduli_model, build_nc_model, column_support_report, desc_from_dict, e2_check,
    example_description, model_from_dict, model_summary, model_to_dict, save_model,
)
from .rings import (
    TableError, get_provider, keel_ring, table_from_dict, table_to_dict, validate_table,
)
from .sullivan import (
    ModelBuildError, NotKFree, is_minimal, k_minimal_model, massey_survey, prop_k_formal_model,
    stable_model, stable_range, verify_k_quasi_iso,
)


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


@dataclass
class RunConfig:
    """Everything one invocation depends on; equal configs give equal output."""
    command: tuple
    inputs: tuple = ()
    g: int = None
    n: int = None
    k: int = None
    provider: str = "builtin"
    fmt: str = "table"
    k_max: int = None
    threads: int = None
    out: str = None
    extra: dict = None


# ------------------------------------------------------------ documents
def _vec_to_dict(A, v):
    return {A.names[i]: fmt_scalar(c) for i, c in sorted(v.items())}


def _vec_from_dict(A, d):
    idx = {nm: i for i, nm in enumerate(A.names)}
    try:
        return {idx[nm]: parse_scalar(c) for nm, c in d.items() if parse_scalar(c)}
    except KeyError as e:
        raise CDGAError(f"unknown basis element {e.args[0]!r}") from None


def _minimal_doc(M, A, k, images):
    return {
        "kind": "minimal-model",
        "k": k,
        "model": cdga_to_dict(M),
        "target": cdga_to_dict(A),
        "images": {nm: _vec_to_dict(A, v) for nm, v in sorted(images.items())},
    }


def minimal_model_to_dict(mm):
    return _minimal_doc(mm.model, mm.morphism.target, mm.k, mm.images)


def minimal_model_from_dict(data):
    """``(model, morphism, k, images)`` rebuilt from a minimal-model document."""
    if data.get("kind") != "minimal-model":
        raise CDGAError("not a minimal-model document")
    try:
        M = cdga_from_dict(data["model"])
        A = cdga_from_dict(data["target"])
        k = int(data["k"])
        images = {nm: _vec_from_dict(A, v) for nm, v in data["images"].items()}
    except (KeyError, TypeError) as e:
        raise CDGAError(f"malformed minimal-model document: {e}") from None
    return M, morphism_from_generators(M, A, images, top=k + 1), k, images


def _graph_list_roundtrip(data):
    gs = [StableGraph.from_dict(x) for x in data["graphs"]]
    return dict(data, graphs=[G.to_dict() for G in gs])


def _minimal_roundtrip(data):
    M, f, k, images = minimal_model_from_dict(data)
    return _minimal_doc(M, f.target, k, images)


def _doc_provider(data):
    """Boundary sources of a table document resolve through the provider recorded in it."""
    return get_provider(data.get("provider", "builtin"))


def _table_doc(T, provider):
    doc = table_to_dict(T, provider.resolve)
    doc["provider"] = provider.name
    return doc


def _report_check(keys):
    def check(data):
        missing = [k for k in keys if k not in data]
        if missing:
            raise ValueError(f"missing fields {missing}")
        return data
    return check


_ROUNDTRIP = {
    "graph-list": _graph_list_roundtrip,
    "ring-table": lambda d: _table_doc(table_from_dict(d, _doc_provider(d).resolve), _doc_provider(d)),
    "morgan-model": lambda d: model_to_dict(model_from_dict(d)),
    "minimal-model": _minimal_roundtrip,
    "free": lambda d: cdga_to_dict(cdga_from_dict(d)),
    "tabulated": lambda d: cdga_to_dict(cdga_from_dict(d)),
    "table-check": _report_check(["ok", "checks"]),
    "cohomology": _report_check(["dimensions", "representatives", "euler_characteristic"]),
    "e2check": _report_check(["ok", "computed", "expected"]),
    "columns": _report_check(["ok", "bound", "entries"]),
    "minimality": _report_check(["ok", "reason"]),
    "formality": _report_check(["ok", "k", "verdict"]),
    "stable-model": _report_check(["punctures", "k", "generators", "dimensions", "certified"]),
    "range": _report_check(["k", "formality_genus", "stability_genus"]),
}


def validate_document(text):
    """Parse a JSON document, rebuild it from its ``kind``, and require identical canonical text."""
    data = json.loads(text)
    kind = data.get("kind")
    if kind not in _ROUNDTRIP:
        raise ValueError(f"unknown document kind {kind!r}")
    again = dumps(_ROUNDTRIP[kind](data))
    if again != text:
        raise ValueError(f"{kind} document does not round-trip")
    return data


# ------------------------------------------------------------- helpers
def _read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: not valid JSON: {e}") from None


def _load_algebra(path):
    data = _read_json(path)
    if data.get("kind") == "morgan-model":
        return model_from_dict(data).to_cdga()
    if data.get("kind") == "minimal-model":
        return minimal_model_from_dict(data)[0]
    return cdga_from_dict(data)


def _int_list(text):
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _emit(out, cfg, doc, lines):
    if cfg.fmt == "json":
        out.write(dumps(doc))
    else:
        out.write("\n".join(lines) + "\n")


def _table_lines(T):
    A = T.algebra
    lines = [f"ring table ({T.ident})  betti {' '.join(str(b) for b in T.betti())}"]
    for q in range(len(A.dimensions())):
        names = [A.names[i] for i in A.space.by_degree(q)]
        if names:
            lines.append(f"  H^{q}: {', '.join(names)}")
    lines.append(f"boundary divisors: {len(T.boundary)}")
    for code in sorted(T.boundary):
        b = T.boundary[code]
        lines.append(f"  {b.graph.describe()}  sources {', '.join(b.sources)}")
    if T.notes:
        lines.append(f"notes: {T.notes}")
    return lines


# ------------------------------------------------------------- commands
def cmd_graphs_enum(cfg, out):
    extra = cfg.extra or {}
    gs = enumerate_graphs(cfg.g, cfg.n, max_edges=extra.get("max_edges"))
    doc = {"kind": "graph-list", "genus": cfg.g, "legs": cfg.n, "graphs": [G.to_dict() for G in gs]}
    lines = [f"{'#':>4} {'edges':>5} {'|Aut|':>5}  graph"]
    for i, G in enumerate(gs):
        lines.append(f"{i:>4} {G.n_edges:>5} {G.automorphisms().order:>5}  {G.describe()}")
    lines.append(f"{len(gs)} stable graphs of type ({cfg.g},{cfg.n})")
    _emit(out, cfg, doc, lines)
    return 0


def _show_table(T, cfg, out, provider):
    _emit(out, cfg, _table_doc(T, provider), _table_lines(T))
    return 0


def cmd_rings_show(cfg, out):
    prov = get_provider(cfg.provider)
    return _show_table(prov.table(cfg.g, cfg.n), cfg, out, prov)


def cmd_rings_keel(cfg, out):
    if not 3 <= cfg.n <= 6:
        raise UsageError("keel tables are available for 3 <= n <= 6")
    return _show_table(keel_ring(cfg.n), cfg, out, get_provider("keel"))


def cmd_rings_validate(cfg, out):
    path = cfg.inputs[0]
    data = _read_json(path)
    try:
        prov = _doc_provider(data)
        T = table_from_dict(data, prov.resolve)
        checks = validate_table(T, prov.resolve)
    except (TableError, CDGAError, GraphError) as e:
        checks = [("parse", False, str(e))]
    ok = all(c[1] for c in checks)
    doc = {"kind": "table-check", "ok": ok,
           "checks": [{"check": name, "ok": good, "witness": str(w or "")} for name, good, w in checks]}
    lines = [f"{'ok' if good else 'FAIL'}  {name}" + (f": {w}" if w and not good else "")
             for name, good, w in checks]
    lines.append(f"{path}: {'valid' if ok else 'INVALID'}")
    _emit(out, cfg, doc, lines)
    return 0 if ok else 1


def _finish_model(M, cfg, out):
    if cfg.out:
        save_model(M, cfg.out)
    _emit(out, cfg, model_to_dict(M), model_summary(M))
    return 0


def cmd_model_build(cfg, out):
    M = build_moduli_model(cfg.g, cfg.n, get_provider(cfg.provider), k_max=cfg.k_max)
    return _finish_model(M, cfg, out)


def cmd_model_nc(cfg, out):
    src = cfg.inputs[0]
    try:
        desc = example_description(src)
    except KeyError:
        desc = desc_from_dict(_read_json(src))
    problems = desc.validate()
    if problems:
        raise ValidationFailure("invalid strata description: " + problems[0])
    return _finish_model(build_nc_model(desc, k_max=cfg.k_max), cfg, out)


def _load_model_arg(path):
    return model_from_dict(_read_json(path))


def cmd_model_cohomology(cfg, out):
    M = _load_model_arg(cfg.inputs[0])
    A = M.to_cdga()
    rep = cohomology(A)
    dims = rep.dimensions()
    doc = {"kind": "cohomology", "dimensions": dims, "euler_characteristic": euler_characteristic(dims),
           "representatives": {str(q): [_vec_to_dict(A, z) for z in rep.reps(q)] for q in rep.degrees}}
    lines = [f"{'deg':>4} {'dim':>4}  representatives"]
    for q in rep.degrees:
        lines.append(f"{q:>4} {rep.dim(q):>4}  " + "; ".join(A.format(z) for z in rep.reps(q)))
    lines.append(f"euler characteristic: {euler_characteristic(dims)}")
    _emit(out, cfg, doc, lines)
    return 0


def cmd_model_e2check(cfg, out):
    M = _load_model_arg(cfg.inputs[0])
    r = e2_check(M, _int_list(cfg.extra["expect"]))
    doc = {"kind": "e2check", "ok": r.ok, "computed": r.computed, "expected": r.expected}
    _emit(out, cfg, doc, r.lines())
    return 0 if r.ok else 1


def cmd_model_columns(cfg, out):
    M = _load_model_arg(cfg.inputs[0])
    r = column_support_report(M, cfg.extra["bound"], genus=cfg.g)
    doc = {"kind": "columns", "ok": r.ok, "bound": r.bound, "genus": r.genus,
           "entries": [{"p": p, "q": q, "dim": d, "flagged": f} for p, q, d, f in r.entries]}
    _emit(out, cfg, doc, r.lines())
    return 0 if r.ok else 1


def cmd_mm_compute(cfg, out):
    A = _load_algebra(cfg.inputs[0])
    mm = k_minimal_model(A, cfg.k)
    doc = minimal_model_to_dict(mm)
    if cfg.out:
        with open(cfg.out, "w") as f:
            f.write(dumps(doc))
    lines = [f"{cfg.k}-minimal model: generators per degree "
             + ", ".join(f"{d}: {c}" for d, c in mm.generator_counts().items())]
    lines += ["  " + x for x in mm.describe()]
    lines += mm.certificate["quasi_iso"].lines()
    _emit(out, cfg, doc, lines)
    return 0


def cmd_mm_check_minimal(cfg, out):
    data = _read_json(cfg.inputs[0])
    f = None
    if data.get("kind") == "minimal-model":
        M, f, k, _ = minimal_model_from_dict(data)
    else:
        M = cdga_from_dict(data)
    if M.generators is None:
        raise UsageError("check-minimal needs a free algebra or a minimal-model document")
    v = is_minimal(M)
    ok, reason = v.ok, v.reason
    lines = [f"minimal: {'yes' if v.ok else 'no'}" + (f" ({v.reason})" if v.reason else "")]
    if f is not None:
        bad = f.check()
        rep = verify_k_quasi_iso(f, k)
        lines += bad[:1] + rep.lines()
        if bad:
            ok, reason = False, bad[0]
        elif not rep.ok:
            ok, reason = False, f"not a {k}-quasi-isomorphism"
    doc = {"kind": "minimality", "ok": ok, "reason": reason}
    lines.append("PASS" if ok else "FAIL")
    _emit(out, cfg, doc, lines)
    return 0 if ok else 1


def cmd_mm_formality(cfg, out):
    A = _load_algebra(cfg.inputs[0])
    k = cfg.k
    try:
        mm = prop_k_formal_model(A, k)
    except NotKFree as e:
        witness = {"failing_degree": e.failing_degree}
        lines = [f"obstruction: H(A) is not {k}-free; S(V) -> H fails in degree {e.failing_degree}"]
        # Massey products of the classes that fail to be free
        top = min(A.safe_top, max(3, (e.failing_degree or k + 1) + 1))
        hits = [(degs, r) for degs, r in massey_survey(A, top=top) if r.verdict == "nonzero"]
        if hits:
            degs, r = hits[0]
            witness["massey"] = {"degrees": list(degs), "representative": _vec_to_dict(A, r.representative)}
            lines.append(f"nonzero triple Massey product of degrees {degs}, "
                         f"represented by {A.format(r.representative)}")
        doc = {"kind": "formality", "ok": False, "k": k, "verdict": "obstruction", "witness": witness}
        _emit(out, cfg, doc, lines)
        return 1
    g = mm.certificate["to_cohomology"]
    H = g.target
    doc = {"kind": "formality", "ok": True, "k": k, "verdict": "certificate",
           "generators": [{"name": x.name, "degree": x.degree,
                           "image_in_A": _vec_to_dict(A, mm.images[x.name]),
                           "image_in_H": _vec_to_dict(H, g(mm.model.basis(x.name)))}
                          for x in mm.model.generators],
           "quasi_iso_A": [list(r) for r in mm.certificate["model_of_A"].rows],
           "quasi_iso_H": [list(r) for r in mm.certificate["model_of_H"].rows]}
    lines = [f"{k}-formal: S(V) maps to A and to H(A) by {k}-quasi-isomorphisms"]
    for x in mm.model.generators:
        lines.append(f"  {x.name} (deg {x.degree}) -> {A.format(mm.images[x.name])}")
    lines.append("model of A:")
    lines += ["  " + s for s in mm.certificate["model_of_A"].lines()]
    lines.append("model of H(A):")
    lines += ["  " + s for s in mm.certificate["model_of_H"].lines()]
    _emit(out, cfg, doc, lines)
    return 0


def cmd_mm_stable(cfg, out):
    mm = stable_model(cfg.n, cfg.k)
    S = mm.model
    dims = S.dimensions()[:cfg.k + 1]
    certified = "formal" in mm.certificate
    doc = {"kind": "stable-model", "punctures": cfg.n, "k": cfg.k,
           "generators": [{"name": x.name, "degree": x.degree} for x in S.generators],
           "dimensions": dims, "certified": certified}
    lines = [f"stable model (n = {cfg.n}, k = {cfg.k}): free polynomial algebra on"]
    lines += [f"  {x.name} (deg {x.degree})" for x in S.generators] or ["  (no generators)"]
    lines.append("dimensions through degree k: " + " ".join(str(d) for d in dims))
    lines.append(f"{cfg.k}-formality certificate: {'verified' if certified else 'not computed'}")
    _emit(out, cfg, doc, lines)
    return 0


def cmd_mm_range(cfg, out):
    a, b = stable_range(cfg.k)
    doc = {"kind": "range", "k": cfg.k, "formality_genus": a, "stability_genus": b}
    _emit(out, cfg, doc, [f"g ≥ {a} (formality), g ≥ {b} (cohomology stability)"])
    return 0


def cmd_verify_all(cfg, out):
    from .verify import report_text, verify_all
    outcomes = verify_all()
    out.write(report_text(outcomes))
    return 0 if all(o.ok for o in outcomes) else 1


COMMANDS = {
    ("graphs", "enum"): cmd_graphs_enum,
    ("rings", "show"): cmd_rings_show,
    ("rings", "keel"): cmd_rings_keel,
    ("rings", "validate"): cmd_rings_validate,
    ("model", "build"): cmd_model_build,
    ("model", "nc"): cmd_model_nc,
    ("model", "cohomology"): cmd_model_cohomology,
    ("model", "e2check"): cmd_model_e2check,
    ("model", "columns"): cmd_model_columns,
    ("mm", "compute"): cmd_mm_compute,
    ("mm", "check-minimal"): cmd_mm_check_minimal,
    ("mm", "formality"): cmd_mm_formality,
    ("mm", "stable"): cmd_mm_stable,
    ("mm", "range"): cmd_mm_range,
    ("verify", "all"): cmd_verify_all,
}


def run(cfg, out=None):
    """Dispatch one configuration; returns the exit code."""
    out = out or sys.stdout
    fn = COMMANDS.get(tuple(cfg.command))
    if fn is None:
        print(f"error: unknown command {' '.join(cfg.command)}", file=sys.stderr)
        return 2
    try:
        if cfg.threads is not None:
            with threads(cfg.threads):
                return fn(cfg, out)
        return fn(cfg, out)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValidationFailure, TableError, ModelError, ModelBuildError, CDGAError, GraphError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


# --------------------------------------------------------------- parsing
def build_parser():
    p = argparse.ArgumentParser(prog="rationalmoduli", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: RATIONALMODULI_THREADS or 1)")
    groups = p.add_subparsers(dest="group", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=["table", "json"], default="table")

    g = groups.add_parser("graphs").add_subparsers(dest="cmd", required=True)
    sp = g.add_parser("enum", help="stable graphs of type (g,n)")
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--legs", type=int, required=True)
    sp.add_argument("--max-edges", type=int, default=None)
    fmt(sp)

    r = groups.add_parser("rings").add_subparsers(dest="cmd", required=True)
    sp = r.add_parser("show", help="cohomology table of Mbar_{g,n}")
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--legs", type=int, required=True)
    sp.add_argument("--provider", default="builtin")
    fmt(sp)
    sp = r.add_parser("keel", help="genus-0 table from the Keel presentation")
    sp.add_argument("--n", type=int, required=True)
    fmt(sp)
    sp = r.add_parser("validate", help="check a ring-table JSON file")
    sp.add_argument("file")
    fmt(sp)

    m = groups.add_parser("model").add_subparsers(dest="cmd", required=True)
    sp = m.add_parser("build", help="E1 model of M_{g,n}")
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--legs", type=int, required=True)
    sp.add_argument("--provider", default="builtin")
    sp.add_argument("--k-max", type=int, default=None)
    sp.add_argument("--out")
    fmt(sp)
    sp = m.add_parser("nc", help="E1 model of a normal crossings complement")
    sp.add_argument("--desc", required=True, help="strata JSON file or a shipped example name")
    sp.add_argument("--k-max", type=int, default=None)
    sp.add_argument("--out")
    fmt(sp)
    sp = m.add_parser("cohomology")
    sp.add_argument("file")
    fmt(sp)
    sp = m.add_parser("e2check")
    sp.add_argument("file")
    sp.add_argument("--expect", required=True, help="Betti numbers, e.g. 1,2,0")
    fmt(sp)
    sp = m.add_parser("columns")
    sp.add_argument("file")
    sp.add_argument("--bound", type=int, required=True)
    sp.add_argument("--genus", type=int, default=None)
    fmt(sp)

    s = groups.add_parser("mm").add_subparsers(dest="cmd", required=True)
    sp = s.add_parser("compute", help="k-minimal model of a CDGA")
    sp.add_argument("--input", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--out")
    fmt(sp)
    sp = s.add_parser("check-minimal")
    sp.add_argument("file")
    fmt(sp)
    sp = s.add_parser("formality", help="k-formality certificate or obstruction")
    sp.add_argument("--input", required=True)
    sp.add_argument("--k", type=int, required=True)
    fmt(sp)
    sp = s.add_parser("stable")
    sp.add_argument("--punctures", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    fmt(sp)
    sp = s.add_parser("range")
    sp.add_argument("--k", type=int, required=True)
    fmt(sp)

    v = groups.add_parser("verify").add_subparsers(dest="cmd", required=True)
    v.add_parser("all", help="run the acceptance suite")
    return p


def config_from_args(a):
    extra = {}
    for key in ("max_edges", "expect", "bound"):
        if getattr(a, key, None) is not None:
            extra[key] = getattr(a, key)
    inputs = tuple(x for x in (getattr(a, "file", None), getattr(a, "desc", None), getattr(a, "input", None))
                   if x is not None)
    return RunConfig(
        command=(a.group, a.cmd), inputs=inputs,
        g=getattr(a, "genus", None),
        n=getattr(a, "legs", None) if getattr(a, "legs", None) is not None else
        (getattr(a, "n", None) if getattr(a, "n", None) is not None else getattr(a, "punctures", None)),
        k=getattr(a, "k", None), provider=getattr(a, "provider", "builtin"),
        fmt=getattr(a, "format", "table"), k_max=getattr(a, "k_max", None), threads=a.threads,
        out=getattr(a, "out", None), extra=extra)


def main(argv=None):
    args = build_parser().parse_args(argv)
    for key in ("genus", "legs", "n", "k", "punctures", "bound", "max_edges", "k_max"):
        val = getattr(args, key, None)
        if val is not None and val < 0:
            print(f"error: --{key.replace('_', '-')} must be nonnegative", file=sys.stderr)
            return 2
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
