import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deformquant.deform import (
    Composition,
    Dense,
    Heisenberg,
    LinearCombination,
    RankOne,
    ad_U,
    deformed_product,
    dense_norm,
    derivation,
    heisenberg_U,
    hs_inner,
    identity_operator,
    l1_fourier_norm,
    op_L,
    op_R,
    power_norm,
    to_dense,
    twisted_convolution,
    zero_operator,
)
from deformquant.experiments import random_band_limited
from deformquant.fourier import forward_array, translate
from deformquant.grid import GridFunction, SkewForm, TorusGrid, inner_product_E, norm_E, norm_L2
from oracles import random_trig_poly

G1 = TorusGrid(1, 32, 4 * np.pi)
G2 = TorusGrid(2, 16, 4 * np.pi)
J2 = SkewForm.from_theta(2, 2.0)


def rand(grid, k, rng, band=None):
    return random_band_limited(grid, k, rng, band)


def test_undeformed_product_is_pointwise(rng):
    for grid in (G1, G2):
        f, g = rand(grid, 2, rng), rand(grid, 2, rng)
        assert deformed_product(f, g).allclose(f.pointwise(g), rtol=1e-12)
        assert deformed_product(f, g, SkewForm.zero(grid.n)).allclose(f.pointwise(g), rtol=1e-12)


def test_unit_of_the_deformed_algebra(rng):
    g = rand(G2, 2, rng)
    one = GridFunction.constant(G2, np.eye(2))
    assert deformed_product(one, g, J2).allclose(g, rtol=1e-12)
    assert deformed_product(g, one, J2).allclose(g, rtol=1e-12)
    assert op_L(one, J2).apply(g).allclose(g, rtol=1e-12)
    assert op_R(one, J2).apply(g).allclose(g, rtol=1e-12)


@pytest.mark.parametrize("theta", [0.5, 2.0, -3.0])
def test_plane_wave_phase(theta):
    J = SkewForm.from_theta(2, theta)
    pts = G2.points()
    rng = np.random.default_rng(7)
    for _ in range(5):
        a, b = rng.integers(-4, 5, size=(2, 2)) * G2.dxi
        ea = GridFunction(G2, np.exp(1j * pts @ a))
        eb = GridFunction(G2, np.exp(1j * pts @ b))
        want = np.exp(1j * (b @ J.matrix @ a) / (2 * np.pi)) * np.exp(1j * pts @ (a + b))
        got = deformed_product(ea, eb, J).values[..., 0, 0]
        assert np.max(np.abs(got - want)) < 1e-12


def test_left_multiplication_by_plane_wave_shifts_off_lattice():
    rng = np.random.default_rng(8)
    J = SkewForm.from_theta(2, 1.3)
    a = np.array([2, -1]) * G2.dxi
    p = random_trig_poly(rng, G2.dxi, 3, n=2)
    pts = G2.points()
    g = GridFunction(G2, p(pts))
    got = op_L(GridFunction(G2, np.exp(1j * pts @ a)), J).apply(g).values[..., 0, 0]
    want = np.exp(1j * pts @ a) * p(pts + J(a) / (2 * np.pi))
    assert np.max(np.abs(got - want)) < 1e-12


def test_matrix_order_is_kept(rng):
    A = np.array([[0, 1], [0, 0]], dtype=complex)
    B = np.array([[0, 0], [1, 0]], dtype=complex)
    f = GridFunction.constant(G1, A)
    g = GridFunction.constant(G1, B)
    np.testing.assert_allclose(deformed_product(f, g).values[0], A @ B, atol=1e-14)
    # at J = 0, R_g multiplies on the right and L_g on the left
    h = GridFunction.constant(G1, A)
    np.testing.assert_allclose(op_R(g).apply(h).values[0], A @ B, atol=1e-14)
    np.testing.assert_allclose(op_L(g).apply(h).values[0], B @ A, atol=1e-14)
    assert not np.allclose(A @ B, B @ A)


@pytest.mark.parametrize("method", ["sparse", "direct"])
def test_kernels_agree(method, rng):
    f, g = rand(G2, 2, rng), rand(G2, 2, rng)
    fh, gh = forward_array(f.values, G2), forward_array(g.values, G2)
    ref = twisted_convolution(fh, gh, G2, J2, method="auto")
    got = twisted_convolution(fh, gh, G2, J2, method=method)
    np.testing.assert_allclose(got, ref, atol=1e-12 * np.max(np.abs(ref)))


def test_product_errors(rng):
    f = rand(G1, 1, rng)
    with pytest.raises(ValueError):
        deformed_product(f, rand(G1, 2, rng))
    with pytest.raises(ValueError):
        deformed_product(f, rand(TorusGrid(1, 32, 5.0), 1, rng))
    with pytest.raises(ValueError):
        deformed_product(f, f, J2)
    with pytest.raises(ValueError):
        twisted_convolution(f.values, f.values, G1, SkewForm.zero(1), method="fast")


@given(st.integers(0, 10 ** 6), st.sampled_from([0.0, 0.5, 2.0]), st.sampled_from([1, 2]))
def test_algebra_identities(seed, theta, k):
    rng = np.random.default_rng(seed)
    J = SkewForm.from_theta(2, theta)
    f, g, h = rand(G2, k, rng), rand(G2, k, rng), rand(G2, k, rng)
    fg = deformed_product(f, g, J)
    assert deformed_product(fg, h, J).allclose(deformed_product(f, deformed_product(g, h, J), J), rtol=1e-10)
    star = deformed_product(g.adjoint_pointwise(), f.adjoint_pointwise(), J)
    assert fg.adjoint_pointwise().allclose(star, rtol=1e-10)
    lhs = op_L(f, J).apply(op_L(g, J).apply(h))
    assert norm_E(lhs - op_L(fg, J).apply(h)) <= 1e-10 * norm_E(h)
    L, R = op_L(f, J), op_R(g, J)
    assert norm_E(L.apply(R.apply(h)) - R.apply(L.apply(h))) <= 1e-10 * norm_E(h)
    bound = (2 * np.pi) ** -1 * l1_fourier_norm(f) * norm_L2(h)
    assert norm_L2(L.apply(h)) <= bound * (1 + 1e-12)


def test_adjoint_contracts(rng):
    k = 2
    f, g, h = rand(G2, k, rng), rand(G2, k, rng), rand(G2, k, rng)
    L = op_L(f, J2)
    np.testing.assert_allclose(inner_product_E(L.apply(g), h), inner_product_E(g, L.adjoint().apply(h)), atol=1e-10)
    # right multiplications are adjointable for the trace pairing
    R = op_R(f, J2)
    assert hs_inner(R.apply(g), h) == pytest.approx(hs_inner(g, R.adjoint().apply(h)), abs=1e-10)
    U = Heisenberg(G2, k, a=np.array([2, 1]) * G2.h, b=np.array([-1, 3]) * G2.dxi, c=0.4)
    np.testing.assert_allclose(inner_product_E(U.apply(g), h), inner_product_E(g, U.adjoint().apply(h)), atol=1e-12)
    v, w = rand(G2, k, rng), rand(G2, k, rng)
    P = RankOne(v, w)
    np.testing.assert_allclose(inner_product_E(P.apply(g), h), inner_product_E(g, P.adjoint().apply(h)), atol=1e-12)
    C = Composition([L, U])
    np.testing.assert_allclose(inner_product_E(C.apply(g), h), inner_product_E(g, C.adjoint().apply(h)), atol=1e-10)


@given(st.integers(0, 10 ** 6))
def test_operators_are_linear(seed):
    rng = np.random.default_rng(seed)
    f, g, h = rand(G1, 2, rng), rand(G1, 2, rng), rand(G1, 2, rng)
    c = complex(*rng.standard_normal(2))
    for A in (op_L(f), op_R(f), Heisenberg(G1, 2, a=[3 * G1.h]), RankOne(f, g), 0.5 * op_L(f) - op_R(g)):
        assert A.apply(g * c + h).allclose(A.apply(g) * c + A.apply(h), rtol=1e-12)


def test_operator_arithmetic(rng):
    f, g = rand(G1, 1, rng), rand(G1, 1, rng)
    A, B = op_L(f), op_R(g)
    np.testing.assert_allclose((A @ B).apply(f).values, A.apply(B.apply(f)).values)
    np.testing.assert_allclose((A + B).apply(f).values, A.apply(f).values + B.apply(f).values)
    np.testing.assert_allclose((A - B).apply(f).values, A.apply(f).values - B.apply(f).values)
    np.testing.assert_allclose((-A).apply(f).values, -A.apply(f).values)
    np.testing.assert_allclose((2j * A)(f).values, 2j * A.apply(f).values)
    assert np.all(zero_operator(G1).apply(f).values == 0)
    with pytest.raises(ValueError):
        A.apply(rand(G1, 2, rng))


def test_heisenberg_examples(rng):
    f = rand(G2, 2, rng)
    assert heisenberg_U(None, None, 0.0, G2, 2).apply(f).allclose(f, rtol=0)
    assert heisenberg_U(None, None, np.pi, G2, 2).apply(f).allclose(-f, rtol=1e-15)
    a = np.array([3, -2]) * G2.h
    b = np.array([1, 4]) * G2.dxi
    U = heisenberg_U(a, b, 0.7, G2, 2)
    assert norm_E(U.apply(f)) == pytest.approx(norm_E(f), rel=1e-12)
    assert U.inverse().apply(U.apply(f)).allclose(f, rtol=1e-12)
    # the action, checked pointwise on a trigonometric polynomial
    p = random_trig_poly(rng, G2.dxi, 3, n=2)
    pts = G2.points()
    out = heisenberg_U(a, b, 0.7, G2).apply(GridFunction(G2, p(pts))).values[..., 0, 0]
    np.testing.assert_allclose(out, np.exp(0.7j) * np.exp(1j * pts @ b) * p(pts - a), atol=1e-12)


def test_heisenberg_group_law(rng):
    f = rand(G2, 1, rng)
    a = np.array([2, 5]) * G2.h
    b = np.array([-3, 1]) * G2.dxi
    Ua, Ub = heisenberg_U(a, None, 0, G2), heisenberg_U(None, b, 0, G2)
    ab = Ua.apply(Ub.apply(f))
    ba = Ub.apply(Ua.apply(f))
    assert ab.allclose(ba * np.exp(-1j * (b @ a)), rtol=1e-12)


def test_heisenberg_rejects_off_lattice():
    with pytest.raises(ValueError):
        heisenberg_U([0.3 * G1.h], None, 0, G1)
    with pytest.raises(ValueError):
        heisenberg_U(None, [0.5 * G1.dxi], 0, G1)


def test_conjugation(rng):
    f, h = rand(G2, 2, rng), rand(G2, 2, rng)
    L = op_L(f, J2)
    assert ad_U(L).apply(h).allclose(L.apply(h), rtol=1e-14)
    a = np.array([3, -1]) * G2.h
    moved = op_L(translate(f, a), J2)
    assert ad_U(L, a=a).apply(h).allclose(moved.apply(h), rtol=1e-12)
    b = np.array([2, 1]) * G2.dxi
    I = identity_operator(G2, 2)
    assert ad_U(I, a=a, b=b).apply(h).allclose(h, rtol=1e-12)
    C = ad_U(L, a=a, b=b)
    U = heisenberg_U(a, b, 0, G2, 2)
    assert norm_E(C.apply(h)) == pytest.approx(norm_E(L.apply(U.inverse().apply(h))), rel=1e-12)


def test_dense_materialization_and_norms(rng):
    g = TorusGrid(1, 16, 2 * np.pi)
    f = rand(g, 2, rng)
    A = op_L(f)
    M = to_dense(A).matrix
    assert M.shape == (16 * 4, 16 * 4)
    h = rand(g, 2, rng)
    D = Dense(g, 2, M)
    assert D.apply(h).allclose(A.apply(h), rtol=1e-12)
    assert D.adjoint().apply(h).allclose(A.adjoint().apply(h), rtol=1e-12)
    # at J = 0, L_f is pointwise multiplication: its norm is the sup of ||f(x)||
    assert dense_norm(A) == pytest.approx(np.max(np.linalg.norm(f.values, 2, axis=(-2, -1))), rel=1e-10)
    assert power_norm(A) == pytest.approx(dense_norm(A), rel=1e-6)
    U = Heisenberg(g, 2, a=[g.h], b=[g.dxi])
    assert dense_norm(U) == pytest.approx(1.0, rel=1e-12)


def test_linear_combination_grid_checks(rng):
    with pytest.raises(ValueError):
        LinearCombination([])
    with pytest.raises(ValueError):
        LinearCombination([(1.0, identity_operator(G1)), (1.0, identity_operator(G2))])


# ---------------------------------------------------------------------------
# derivations; the lattice must resolve the band for the 1e-4 quotient tolerance

G2F = TorusGrid(2, 64, 4 * np.pi)


def test_derivation_of_identity_vanishes(rng):
    h = rand(G2F, 1, rng)
    for i in range(1, 5):
        D = derivation(identity_operator(G2F), i)
        assert norm_E(D.apply(h)) < 1e-12


@pytest.mark.parametrize("index", [1, 2, 3, 4])
def test_derivation_of_left_multiplication(index):
    rng = np.random.default_rng(index)
    J = SkewForm.from_theta(2, 1.5)
    p = random_trig_poly(rng, G2F.dxi, 2, n=2)
    pts = G2F.points()
    phi = GridFunction(G2F, p(pts))
    n = 2
    e = np.eye(n)[(index - 1) % n]
    v = e if index <= n else -J(e) / (2 * np.pi)
    dphi = np.exp(1j * pts @ p.freqs.T) @ (1j * (p.freqs @ v) * p.coefs)
    want = op_L(GridFunction(G2F, dphi), J)
    h = rand(G2F, 1, rng, band=3)
    exact = derivation(op_L(phi, J), index, method="exact")
    assert exact.apply(h).allclose(want.apply(h), atol=1e-12)
    approx = derivation(op_L(phi, J), index, method="difference")
    err = norm_E(approx.apply(h) - want.apply(h))
    assert err <= 1e-4 * max(norm_E(want.apply(h)), 1e-300) + 1e-12


def test_derivation_of_modulation_along_translations(rng):
    b = np.array([1, -1]) * G2F.dxi
    U = heisenberg_U(None, b, 0, G2F)
    h = rand(G2F, 1, rng)
    for i in (1, 2):
        want = U.apply(h) * (1j * b[i - 1])
        assert derivation(U, i, method="exact").apply(h).allclose(want, rtol=1e-12)
        assert derivation(U, i, method="difference").apply(h).allclose(want, rtol=1e-4)


def test_derivation_of_translation_along_modulations(rng):
    a = np.array([1, 2]) * G2F.h
    U = heisenberg_U(a, None, 0, G2F)
    h = rand(G2F, 1, rng)
    for i in (3, 4):
        want = U.apply(h) * (-1j * a[i - 3])
        assert derivation(U, i, method="exact").apply(h).allclose(want, rtol=1e-12)
        assert derivation(U, i, method="difference").apply(h).allclose(want, rtol=1e-4)


def test_difference_quotient_is_second_order():
    g = TorusGrid(1, 64, 4 * np.pi)
    rng = np.random.default_rng(11)
    phi = rand(g, 1, rng, band=4)
    A = op_L(phi)
    h = rand(g, 1, rng, band=4)
    exact = derivation(A, 1, method="exact").apply(h)
    e1 = norm_E(derivation(A, 1, steps=1, method="difference", richardson=False).apply(h) - exact)
    e2 = norm_E(derivation(A, 1, steps=2, method="difference", richardson=False).apply(h) - exact)
    assert e2 / e1 == pytest.approx(4.0, rel=0.05)


def test_derivation_composition_follows_leibniz(rng):
    f, g2, h = rand(G2F, 2, rng, 1), rand(G2F, 2, rng, 1), rand(G2F, 2, rng, 2)
    U = heisenberg_U(None, np.array([1, 0]) * G2F.dxi, 0, G2F, 2)
    A = Composition([op_L(f, J2), U])
    B = LinearCombination([(2.0, A), (1j, op_L(g2, J2))])
    for i in (1, 3):
        ex = derivation(B, i, method="exact").apply(h)
        fd = derivation(B, i, method="difference").apply(h)
        assert norm_E(ex - fd) <= 1e-4 * norm_E(ex)


def test_derivation_errors():
    I = identity_operator(G1)
    with pytest.raises(ValueError):
        derivation(I, 0)
    with pytest.raises(ValueError):
        derivation(I, 3)
    with pytest.raises(ValueError):
        derivation(I, 1, steps=0, method="difference")
    with pytest.raises(ValueError):
        derivation(RankOne(GridFunction.constant(G1, np.eye(1)), GridFunction.constant(G1, np.eye(1))), 1, method="exact")


def test_product_matches_direct_double_loop(rng):
    # band 3 keeps the product strictly below the Nyquist mode
    grid = TorusGrid(2, 16, 4 * np.pi)
    J = SkewForm.from_theta(2, 1.5)
    f, g = rand(grid, 2, rng, band=3), rand(grid, 2, rng, band=3)
    F, G = forward_array(f.values, grid), forward_array(g.values, grid)
    modes = np.array(np.meshgrid(*[np.arange(-8, 8)] * 2, indexing="ij")).reshape(2, -1).T
    want = np.zeros_like(F)
    for xi in modes:
        for w in modes:
            d = (xi - w + 8) % 16
            phase = np.exp(1j * (xi * grid.dxi) @ J.matrix @ (w * grid.dxi) / (2 * np.pi))
            want[tuple(xi + 8)] += F[tuple(w + 8)] @ G[tuple(d)] * phase
    want *= grid.dxi ** 2 / (2 * np.pi)
    got = forward_array(deformed_product(f, g, J).values, grid)
    assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))
