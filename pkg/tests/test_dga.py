import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebras import as_tabulated, exterior_pair, nonformal_model, sphere_model, truncated_polynomial
from oracles import polynomial_dims
from rationalmoduli.dga import (
    CDGA, CDGAError, DegreeOverflow, MorphismError, cdga_from_dict, cdga_to_dict, compose, dumps,
    free_cdga, identity_morphism, load_cdga, morphism_from_generators, morphisms_equal, save_cdga,
    tabulated, verify_cdga,
)


def test_free_algebra_dimensions():
    A = free_cdga([("a", 2, 0), ("b", 2, 0), ("x", 3, 0), ("c", 4, 0)], k_max=10)
    assert A.dimensions() == polynomial_dims([2, 2, 3, 4], 10)
    B = free_cdga([("x", 3, 0), ("y", 3, 0), ("z", 5, 0)], k_max=11)
    assert B.dimensions() == polynomial_dims([3, 3, 5], 11)


def test_odd_generators_square_to_zero_and_anticommute():
    B = free_cdga([("x", 3, 0), ("y", 3, 0)], k_max=6)
    x, y = B.parse("x"), B.parse("y")
    assert B.mul(x, x) == {}
    assert B.mul(x, y) == {k: -c for k, c in B.mul(y, x).items()}
    assert B.parse("y*x") == {k: -c for k, c in B.parse("x*y").items()}


def test_differential_and_leibniz_by_hand():
    A = sphere_model()
    assert A.format(A.d(A.parse("x"))) == "a^2"
    # d(a x) = a d(x) since a is even and closed
    assert A.format(A.d(A.parse("a*x"))) == "a^3"
    # d(x^2) = 0 because x^2 = 0
    assert A.parse("x^2") == {}
    assert A.safe_top == 7


def test_parse_and_format():
    A = nonformal_model()
    v = A.parse("2/3 a*y - b*x + a^2")
    assert A.format(v) == A.format(A.parse(A.format(v)))
    assert A.parse("0") == {}
    with pytest.raises(CDGAError):
        A.parse("a + 3x")
    with pytest.raises(KeyError):
        A.parse("q")


def test_tabulated_fills_unit_and_checks():
    A = exterior_pair()
    assert verify_cdga(A).ok
    assert A.mul(A.parse("y"), A.parse("x")) == {3: -1}
    with pytest.raises(CDGAError):
        CDGA(["x"], [1])


def test_truncation_rules():
    A = free_cdga([("a", 2, 0)], k_max=4)
    with pytest.raises(DegreeOverflow):
        A.mul(A.parse("a^2"), A.parse("a"))
    T = truncated_polynomial(3)
    assert T.complete
    assert T.mul(T.parse("h2"), T.parse("h2")) == {}
    S = sphere_model(k_max=5)
    with pytest.raises(DegreeOverflow):
        S.d_basis(S.names.index("a*x"))


# -------------------------------------------------------------- axioms
ALGEBRAS = {
    "sphere model": sphere_model,
    "nonformal": nonformal_model,
    "exterior pair": exterior_pair,
    "Q[h]/h^4": lambda: truncated_polynomial(4),
    "odd z": lambda: free_cdga([("x", 3, 0), ("y", 3, 0), ("z", 5, "x*y")], k_max=11),
    "mixed": lambda: free_cdga([("a", 2, 0), ("u", 3, 0), ("w", 4, "a*u")], k_max=9),
}


@pytest.mark.parametrize("name", sorted(ALGEBRAS))
def test_axioms_hold(name):
    diag = verify_cdga(ALGEBRAS[name]())
    assert diag.ok, str(diag)
    assert all(c.count > 0 for c in diag.checks)


def test_flipped_sign_is_caught_by_leibniz():
    A = as_tabulated(sphere_model())
    data = cdga_to_dict(A)
    # flip d(a*x) = a^3 to -a^3; d^2 = 0 still holds, Leibniz does not
    data["differentials"] = [[s, t, ("-1/1" if s == "a*x" else c)] for s, t, c in data["differentials"]]
    bad = cdga_from_dict(data)
    diag = verify_cdga(bad)
    v = diag.first_violation()
    assert v.name == "Leibniz"
    assert v.witness == "(a, x)"  # the pair whose product is a*x


def test_non_associative_table_is_rejected():
    basis = [("1", 0), ("a", 2), ("b", 2), ("p", 4), ("q", 4), ("r", 6)]
    prods = {("a", "a"): {"p": 1}, ("a", "b"): {"q": 1}, ("b", "a"): {"q": 1},
             ("p", "b"): {"r": 1}, ("b", "p"): {"r": 1}}
    diag = verify_cdga(tabulated(basis, prods))
    assert not diag.ok
    assert diag.first_violation().name == "associativity"


def test_noncommutative_and_inhomogeneous_tables():
    basis = [("1", 0), ("x", 3), ("y", 3), ("xy", 6)]
    diag = verify_cdga(tabulated(basis, {("x", "y"): {"xy": 1}, ("y", "x"): {"xy": 1}}))
    assert diag.first_violation().name == "graded commutativity"
    diag = verify_cdga(tabulated([("1", 0), ("a", 2), ("b", 3)], {}, {"a": {"a": 1}}))
    assert diag.first_violation().name == "degree homogeneity"


def test_d_squared_failure():
    basis = [("1", 0), ("u", 1), ("v", 2), ("w", 3)]
    A = tabulated(basis, {}, {"u": {"v": 1}, "v": {"w": 1}})
    assert verify_cdga(A).first_violation().name == "d^2 = 0"


# --------------------------------------------------- property-based tests
@st.composite
def free_algebras(draw):
    n = draw(st.integers(1, 4))
    gens = []
    for k in range(n):
        gens.append((f"g{k}", draw(st.integers(2, 5)), 0))
    return free_cdga(gens, k_max=draw(st.integers(6, 9)))


@st.composite
def algebra_and_elements(draw):
    A = draw(free_algebras())
    coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=3)

    def element():
        q = draw(st.sampled_from(sorted(set(A.degrees))))
        idx = A.space.by_degree(q)
        return {i: draw(coeffs) for i in idx if draw(st.booleans())}, q

    return A, element(), element(), element()


@settings(max_examples=80, deadline=None)
@given(algebra_and_elements())
def test_graded_commutativity_and_associativity(case):
    A, (x, p), (y, q), (z, r) = case
    x = {i: c for i, c in x.items() if c}
    y = {i: c for i, c in y.items() if c}
    z = {i: c for i, c in z.items() if c}
    if p + q <= A.k_max:
        s = -1 if p * q % 2 else 1
        assert A.mul(x, y) == {i: s * c for i, c in A.mul(y, x).items()}
    if p + q + r <= A.k_max:
        assert A.mul(A.mul(x, y), z) == A.mul(x, A.mul(y, z))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 16))
def test_basis_order_does_not_matter(m, seed):
    import random
    A = as_tabulated(sphere_model(k_max=m + 2))
    order = list(range(len(A)))
    random.Random(seed).shuffle(order)
    B = as_tabulated(A, order)
    assert verify_cdga(B).ok
    assert B.dimensions() == A.dimensions()
    for i in range(len(A)):
        for j in range(len(A)):
            if A.degrees[i] + A.degrees[j] <= A.k_max:
                a = {A.names[k]: c for k, c in A.product_basis(i, j).items()}
                b = {B.names[k]: c for k, c in B.product_basis(order.index(i), order.index(j)).items()}
                assert a == b


# -------------------------------------------------------------- morphisms
def test_morphism_from_generators_and_composition():
    A = sphere_model()
    H = truncated_polynomial(2)
    f = morphism_from_generators(A, H, {"a": "h1", "x": {}}, top=6)
    assert f.check() == []
    ident = identity_morphism(A)
    assert morphisms_equal(compose(f, ident), f)
    P = free_cdga([("a", 2, 0)], k_max=6)
    g = morphism_from_generators(P, P, {"a": "a"})
    g.images[P.names.index("a^2")] = {P.names.index("a^2"): Fraction(2)}
    assert any("multiplicative" in s for s in g.check())
    with pytest.raises(MorphismError):
        morphism_from_generators(H, A, {})
    with pytest.raises(MorphismError):
        morphism_from_generators(A, H, {"a": "h1", "x": "h1"})


def test_non_chain_map_is_reported():
    A = free_cdga([("a", 2, 0), ("b", 2, 0), ("x", 3, "a*b")], k_max=6)
    P = free_cdga([("a", 2, 0), ("b", 2, 0)], k_max=6)
    f = morphism_from_generators(A, P, {"a": "a", "b": "b", "x": {}}, top=6)
    assert any("commute" in s for s in f.check())


# ------------------------------------------------------------------- JSON
@pytest.mark.parametrize("name", sorted(ALGEBRAS))
def test_json_round_trip_is_byte_stable(name, tmp_path):
    A = ALGEBRAS[name]()
    text = dumps(cdga_to_dict(A))
    B = cdga_from_dict(json.loads(text))
    assert dumps(cdga_to_dict(B)) == text
    assert B.names == A.names and B.dimensions() == A.dimensions()
    save_cdga(B, tmp_path / "a.json")
    assert (tmp_path / "a.json").read_text() == text
    assert dumps(cdga_to_dict(load_cdga(tmp_path / "a.json"))) == text
    T = as_tabulated(A)
    ttext = dumps(cdga_to_dict(T))
    assert dumps(cdga_to_dict(cdga_from_dict(json.loads(ttext)))) == ttext


def test_bad_json_is_rejected():
    with pytest.raises(CDGAError):
        cdga_from_dict({"kind": "mystery"})
    with pytest.raises(CDGAError):
        cdga_from_dict({"kind": "tabulated", "basis": [{"name": "1", "degree": 0}],
                        "products": [["1", "1", "z", "1/1"]]})
    with pytest.raises(ValueError):
        cdga_from_dict({"kind": "tabulated", "basis": [{"name": "1", "degree": 0}],
                        "products": [["1", "1", "1", 0.5]]})


def test_scalars_are_exact():
    A = free_cdga([("a", 2, 0), ("x", 3, {"a^2": Fraction(1, 3)})], k_max=6)
    assert A.d(A.parse("x")) == {A.names.index("a^2"): Fraction(1, 3)}
    assert '"1/3 a^2"' in dumps(cdga_to_dict(A))
