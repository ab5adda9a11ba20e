import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebras import as_tabulated, exterior_pair, nonformal_model, sphere_model, truncated_polynomial
from oracles import cohomology_dims
from rationalmoduli.cohomology import NotACocycle, cohomology, cohomology_ring, euler_characteristic
from rationalmoduli.dga import DegreeOverflow, free_cdga, verify_cdga
from rationalmoduli.linalg import vec_add


def test_sphere_model_is_the_sphere():
    assert cohomology(sphere_model()).dimensions() == [1, 0, 1, 0, 0, 0, 0, 0]


def test_nonformal_model_dimensions():
    A = nonformal_model()
    assert cohomology(A).dimensions() == cohomology_dims(A, A.safe_top)
    assert cohomology(A, range(6)).dimensions()[:6] == [1, 0, 2, 0, 1, 1]


@pytest.mark.parametrize("make", [sphere_model, nonformal_model, exterior_pair,
                                  lambda: truncated_polynomial(5, 4)])
def test_dimensions_agree_with_sympy(make):
    A = make()
    assert cohomology(A).dimensions() == cohomology_dims(A, A.safe_top)


def test_overflow_and_non_cocycles():
    A = sphere_model(k_max=6)
    with pytest.raises(DegreeOverflow):
        cohomology(A, range(7))
    rep = cohomology(A)
    with pytest.raises(NotACocycle):
        rep.classify(A.parse("x"))


def test_classify_and_primitive():
    A = nonformal_model()
    rep = cohomology(A, range(6))
    w = A.parse("a*y - b*x")
    coeffs, prim = rep.classify(w)
    assert any(coeffs)
    assert rep.primitive(w) is None
    assert rep.primitive(A.parse("a*b")) == A.parse("y")
    assert rep.is_exact(A.parse("a^2"))


def test_cohomology_ring_of_a_sphere():
    A = sphere_model()
    H, reps = cohomology_ring(A)
    assert H.names == ("h0_0", "h2_0")
    assert H.has_zero_differential()
    assert verify_cdga(H).ok
    assert H.mul(H.parse("h2_0"), H.parse("h2_0")) == {}
    assert reps["h0_0"] == A.one()


def test_cohomology_ring_of_s3_times_s3():
    H, _ = cohomology_ring(exterior_pair())
    x, y = H.parse("h3_0"), H.parse("h3_1")
    assert H.mul(x, y) == {k: -c for k, c in H.mul(y, x).items()}
    assert H.mul(x, y)


# ------------------------------------------------------------ properties
@st.composite
def pure_sullivan_algebras(draw):
    """Even closed generators plus odd generators whose differentials are even polynomials.

    d^2 = 0 automatically, so these are valid CDGAs with nontrivial cohomology.
    """
    evens = [(f"e{k}", draw(st.sampled_from([2, 4]))) for k in range(draw(st.integers(1, 3)))]
    k_max = draw(st.integers(7, 10))
    scaffold = free_cdga([(n, d, 0) for n, d in evens], k_max=k_max + 1)
    gens = [(n, d, 0) for n, d in evens]
    for k in range(draw(st.integers(0, 2))):
        deg = draw(st.sampled_from([3, 5, 7]))
        terms = [scaffold.names[i] for i in scaffold.space.by_degree(deg + 1)]
        chosen = [t for t in terms if draw(st.booleans())]
        coeffs = [draw(st.integers(-2, 2)) for _ in chosen]
        d = " + ".join(f"{c} {t}" for c, t in zip(coeffs, chosen) if c) or "0"
        gens.append((f"o{k}", deg, d.replace("+ -", "- ")))
    return free_cdga(gens, k_max=k_max)


@settings(max_examples=40, deadline=None)
@given(pure_sullivan_algebras())
def test_cohomology_matches_oracle(A):
    assert verify_cdga(A).ok
    rep = cohomology(A)
    dims = rep.dimensions()
    assert dims == cohomology_dims(A, A.safe_top)
    for q in rep.degrees:
        for z in rep.reps(q):
            assert A.d(z) == {}
            coeffs, prim = rep.classify(z)
            assert sum(c != 0 for c in coeffs) == 1


@settings(max_examples=30, deadline=None)
@given(pure_sullivan_algebras(), st.data())
def test_classify_reconstructs_cocycles(A, data):
    rep = cohomology(A)
    q = data.draw(st.sampled_from(rep.degrees))
    if q == 0:
        return
    coeffs = [data.draw(st.integers(-2, 2)) for _ in rep.reps(q)]
    z = {}
    for c, r in zip(coeffs, rep.reps(q)):
        z = vec_add(z, r, c)
    prev = A.space.by_degree(q - 1)
    for i in prev:
        z = vec_add(z, A.d_basis(i), data.draw(st.integers(-1, 1)))
    got, prim = rep.classify(z, q)
    assert got == coeffs
    total = vec_add(z, A.d(prim), -1)
    for c, r in zip(got, rep.reps(q)):
        total = vec_add(total, r, -c)
    assert total == {}


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.permutations(range(6)))
def test_cohomology_ignores_basis_order(m, perm):
    A = as_tabulated(truncated_polynomial(m))
    order = [p for p in perm if p < len(A)]
    order += [i for i in range(len(A)) if i not in order]
    B = as_tabulated(A, order)
    assert cohomology(B).dimensions() == cohomology(A).dimensions()


@settings(max_examples=30, deadline=None)
@given(pure_sullivan_algebras())
def test_euler_characteristic_of_truncated_quotients(A):
    Q = as_tabulated(A, complete=True)
    assert verify_cdga(Q).ok
    assert euler_characteristic(Q.dimensions()) == euler_characteristic(cohomology(Q).dimensions())


def test_truncated_sphere_quotient():
    Q = as_tabulated(sphere_model(k_max=5), complete=True)
    assert Q.dimensions() == [1, 0, 1, 1, 1, 1]
    assert cohomology(Q).dimensions() == [1, 0, 1, 0, 0, 1]
