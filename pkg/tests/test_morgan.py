import json
from fractions import Fraction

import pytest

from oracles import cohomology_dims, open_m0n_betti
from rationalmoduli.dga import dumps, verify_cdga
from rationalmoduli.graphs import threads
from rationalmoduli.morgan import (
    ModelError, StrataDescription, build_moduli_model, build_nc_model, column_support_report,
    desc_from_dict, desc_to_dict, e2_check, example_description, load_model, model_cohomology,
    model_from_dict, model_summary, model_to_dict, perm_sign, save_model,
)
from rationalmoduli.morgan import _projective_space

ONE = Fraction(1)


def _pad(xs, n):
    return list(xs) + [0] * (n - len(xs))


# ------------------------------------------------------------ moduli spaces
def test_m04():
    M = build_moduli_model(0, 4)
    assert M.dims() == {(0, 0): 1, (0, 2): 1, (-1, 2): 3}
    assert model_cohomology(M).dimensions() == [1, 2, 0]


def test_m05():
    M = build_moduli_model(0, 5)
    assert M.dims() == {(0, 0): 1, (0, 2): 5, (0, 4): 1, (-1, 2): 10, (-1, 4): 10, (-2, 4): 15}
    assert M.total_dims() == [1, 10, 20, 10, 1]
    assert model_cohomology(M).dimensions() == [1, 5, 6, 0, 0]


def test_m11():
    M = build_moduli_model(1, 1)
    assert M.dims() == {(0, 0): 1, (0, 2): 1, (-1, 2): 1}
    assert model_cohomology(M).dimensions() == [1, 0, 0]


@pytest.mark.parametrize("n", [4, 5])
def test_genus0_matches_arrangement_betti_numbers(n):
    M = build_moduli_model(0, n)
    h = model_cohomology(M).dimensions()
    assert h == _pad(open_m0n_betti(n), len(h))
    assert h == cohomology_dims(M.to_cdga(), len(h) - 1)


def test_m06_via_keel():
    M = build_moduli_model(0, 6, "keel")
    h = model_cohomology(M).dimensions()
    assert h == _pad(open_m0n_betti(6), len(h))
    assert verify_cdga(M.to_cdga()).ok


def test_providers_agree_on_m05():
    a = build_moduli_model(0, 5, "builtin")
    b = build_moduli_model(0, 5, "keel")
    assert a.dims() == b.dims()
    assert model_cohomology(a).dimensions() == model_cohomology(b).dimensions()


@pytest.mark.parametrize("g,n", [(0, 4), (0, 5), (1, 1)])
def test_models_are_cdgas_with_bigraded_differential(g, n):
    M = build_moduli_model(g, n)
    A = M.to_cdga()
    assert verify_cdga(A).ok
    for i in range(len(A)):
        p, q = M.bidegrees[i]
        assert A.degrees[i] == p + q
        for k in A.d_basis(i):
            assert M.bidegrees[k] == (p + 1, q)
        for j in range(len(A)):
            for k in A.product_basis(i, j):
                p2, q2 = M.bidegrees[j]
                assert M.bidegrees[k] == (p + p2, q + q2)


@pytest.mark.parametrize("g,n", [(0, 4), (0, 5), (1, 1)])
def test_e2_degenerates(g, n):
    # rows of E2 in total degree k add up to H^k: the weight spectral sequence stops at E2
    M = build_moduli_model(g, n)
    h = model_cohomology(M).dimensions()
    r = column_support_report(M, len(h) - 1)
    sums = [0] * len(h)
    for p, q, d, _ in r.entries:
        sums[p + q] += d
    assert sums == h


def test_model_is_thread_independent():
    with threads(1):
        a = dumps(model_to_dict(build_moduli_model(0, 5)))
    with threads(5):
        b = dumps(model_to_dict(build_moduli_model(0, 5)))
    assert a == b


def test_model_json_round_trip(tmp_path):
    M = build_moduli_model(0, 5)
    text = dumps(model_to_dict(M))
    back = model_from_dict(json.loads(text))
    assert dumps(model_to_dict(back)) == text
    save_model(M, tmp_path / "m.json")
    assert (tmp_path / "m.json").read_text() == text
    assert load_model(tmp_path / "m.json").dims() == M.dims()
    with pytest.raises(ModelError):
        model_from_dict({"kind": "graph-list"})
    with pytest.raises(ModelError):
        model_from_dict({"kind": "morgan-model", "cdga": {"kind": "free", "generators": []}})


def test_e2_check_and_summary():
    M = build_moduli_model(0, 4)
    assert e2_check(M, [1, 2]).ok
    r = e2_check(M, [1, 3])
    assert not r.ok and "MISMATCH" in "\n".join(r.lines())
    assert "euler characteristic: -1" in model_summary(M)


def test_column_flags_inside_the_stable_range():
    M = build_moduli_model(0, 5)
    r = column_support_report(M, 2, genus=7)
    # stable range k <= 3: the genus-0 classes in p = -1, -2 are flagged as off-column
    assert not r.ok
    assert {(p, q) for p, q, _, f in r.entries if f} == {(-1, 2), (-2, 4)}


def test_perm_sign():
    assert perm_sign([0, 1, 2]) == 1
    assert perm_sign([1, 0, 2]) == -1
    assert perm_sign([2, 0, 1]) == 1


# -------------------------------------------------- normal crossings cases
def p1_minus_points(k):
    P1, pt = _projective_space(1, "P1"), _projective_space(0, "pt")
    strata = {frozenset(): P1}
    res, gys = {}, {}
    for i in range(1, k + 1):
        S = frozenset([i])
        strata[S] = pt
        res[frozenset(), S] = {0: {0: ONE}}
        gys[S, frozenset()] = {0: {1: ONE}}
    return StrataDescription(k, strata, res, gys, label=f"P1 minus {k} points")


def p2_minus_lines(r):
    """P^2 minus r <= 3 lines in general position (no three through a point)."""
    P2, P1, pt = (_projective_space(m, f"P{m}") for m in (2, 1, 0))
    strata = {frozenset(): P2}
    res, gys = {}, {}
    for i in range(1, r + 1):
        L = frozenset([i])
        strata[L] = P1
        res[frozenset(), L] = {0: {0: ONE}, 1: {1: ONE}}
        gys[L, frozenset()] = {0: {1: ONE}, 1: {2: ONE}}
        for j in range(i + 1, r + 1):
            S = frozenset([i, j])
            strata[S] = pt
            for a in (i, j):
                res[frozenset([a]), S] = {0: {0: ONE}}
                gys[S, frozenset([a])] = {0: {1: ONE}}
    return StrataDescription(r, strata, res, gys, label=f"P2 minus {r} lines")


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_punctured_lines(k):
    M = build_nc_model(p1_minus_points(k))
    assert model_cohomology(M).dimensions() == [1, k - 1, 0]


@pytest.mark.parametrize("r,expected", [(1, [1, 0, 0]), (2, [1, 1, 0]), (3, [1, 2, 1])])
def test_line_arrangements(r, expected):
    desc = p2_minus_lines(r)
    assert desc.validate() == []
    M = build_nc_model(desc)
    assert verify_cdga(M.to_cdga()).ok
    h = model_cohomology(M).dimensions()
    assert h == _pad(expected, len(h))


def test_shipped_examples():
    assert model_cohomology(build_nc_model(example_description("p1_three_points"))).dimensions() == [1, 2, 0]
    assert model_cohomology(build_nc_model(example_description("p1_one_point"))).dimensions() == [1, 0, 0]
    assert model_cohomology(build_nc_model(example_description("p2_line"))).dimensions() == [1, 0, 0, 0, 0]


def test_nc_model_of_three_points_matches_m04():
    a = build_moduli_model(0, 4)
    b = build_nc_model(example_description("p1_three_points"))
    assert sorted(a.dims().items()) == sorted(b.dims().items())


def test_description_round_trip_and_validation():
    desc = p2_minus_lines(3)
    text = dumps(desc_to_dict(desc))
    assert dumps(desc_to_dict(desc_from_dict(json.loads(text)))) == text
    broken = p2_minus_lines(2)
    del broken.gysin[frozenset([1, 2]), frozenset([1])]
    assert any("no Gysin map" in p for p in broken.validate())
    data = json.loads(text)
    data["restrictions"][0]["to"] = [1, 2, 3]
    with pytest.raises(ModelError):
        desc_from_dict(data)


def test_non_multiplicative_restriction_is_reported():
    desc = p2_minus_lines(1)
    desc.restrictions[frozenset(), frozenset([1])] = {0: {0: Fraction(2)}, 1: {1: ONE}}
    assert any("not multiplicative" in p for p in desc.validate())

