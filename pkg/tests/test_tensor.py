import numpy as np
import pytest

from alflab import tensor as tc
from alflab import taubnut as tn

E = np.eye(4)


def test_complex_structures_square_to_minus_identity():
    for J in tc.standard_complex_structures():
        assert np.array_equal(J @ J, -E)


def test_quaternion_relations():
    I1, I2, I3 = tc.standard_complex_structures()
    assert np.array_equal(I1 @ I2, I3)
    assert np.array_equal(I2 @ I1, -I3)


def test_I1_sends_dx1_to_dx2():
    assert np.array_equal(tc.act_on_form(tc.I1, E[0]), E[1])
    # on vectors: d/dx1 -> d/dx2 (multiplication by i on z1)
    assert np.array_equal(tc.I1 @ E[0], E[1])


def test_structures_are_returned_as_copies():
    I1, _, _ = tc.standard_complex_structures()
    I1[0, 0] = 5
    assert tc.I1[0, 0] == 0


def test_wedge_basics():
    assert np.array_equal(tc.wedge(E[0], E[0]), np.zeros((4, 4)))
    assert tc.wedge(E[0], E[1])[0, 1] == 1
    assert E[0] @ tc.wedge(E[0], E[1]) @ E[1] == 1
    rng = np.random.default_rng(1)
    a, b, c = rng.normal(size=(3, 4))
    assert np.allclose(tc.wedge(a, b), -tc.wedge(b, a))
    assert np.allclose(tc.wedge(2 * a + c, b), 2 * tc.wedge(a, b) + tc.wedge(c, b))


def test_wedge_ratio_euclidean_and_degenerate():
    we = tc.wedge(E[0], E[1]) + tc.wedge(E[2], E[3])
    assert tc.two_form_wedge_ratio(we, we) == pytest.approx(2.0, abs=1e-15)
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=(2, 4))
    w = tc.wedge(a, b)
    assert abs(tc.two_form_wedge_ratio(w, w)) < 1e-14


def test_wedge_ratio_taubnut_form():
    rng = np.random.default_rng(3)
    for p in tn.sample_points(rng, 1.0, 10):
        w = tn.kahler_form_f(p)
        assert tc.two_form_wedge_ratio(w, w) == pytest.approx(2.0, abs=1e-10)


def test_hermitian_form_roundtrip_and_ddc_normalisation():
    # dd^c (r^2/4) = omega_e with the Hermitian matrix I/2
    we = tc.herm_to_form(0.5 * np.eye(2))
    assert np.allclose(we, tc.wedge(E[0], E[1]) + tc.wedge(E[2], E[3]))
    rng = np.random.default_rng(4)
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = M @ M.conj().T
    assert np.allclose(tc.form_to_herm(tc.herm_to_form(h)), h)
    g = tc.metric_from_form(tc.herm_to_form(h))
    assert np.allclose(g, g.T)
    assert np.allclose(tc.form_from_metric(g), tc.herm_to_form(h))


def test_ddc_sign_convention_on_quadratic():
    # d(I1 d(r^2/4)) = omega_e = dx1^dx2 + dx3^dx4
    grad = lambda x: x / 2
    w = tc.exterior_derivative(lambda x: tc.act_on_form(tc.I1, grad(x)), np.ones(4), 0.1)
    assert np.allclose(w, tc.herm_to_form(0.5 * np.eye(2)), atol=1e-12)
    assert np.allclose(w, tc.wedge(E[0], E[1]) + tc.wedge(E[2], E[3]), atol=1e-12)


def test_exterior_derivative_of_exact_quadratic_is_zero():
    rng = np.random.default_rng(5)
    Q = rng.normal(size=(4, 4))
    Q = Q + Q.T
    b = rng.normal(size=4)
    df = lambda x: Q @ x + b
    w = tc.exterior_derivative(df, rng.normal(size=4), 0.3)
    assert np.abs(w).max() < 1e-12


def test_exterior_derivative_linear_coefficient():
    field = lambda x: np.array([0.0, x[0], 0.0, 0.0])  # x1 dx2
    w = tc.exterior_derivative(field, np.array([0.3, -1, 2, 0.5]), 0.1)
    assert np.allclose(w, tc.wedge(E[0], E[1]), atol=1e-13)


def test_exterior_derivative_second_order_convergence():
    # d of a non-closed smooth form: error ratio ~4 under halving
    field = lambda x: np.array([np.sin(x[1]) * x[2], np.exp(x[0]) * x[3], x[0] ** 3, np.cos(x[2])])
    p = np.array([0.2, 0.4, -0.3, 0.7])
    x1, x2, x3, x4 = p
    exact_D = np.array([
        [0, np.cos(x2) * x3, np.sin(x2), 0],
        [np.exp(x1) * x4, 0, 0, np.exp(x1)],
        [3 * x1 ** 2, 0, 0, 0],
        [0, 0, -np.sin(x3), 0]])
    exact = exact_D.T - exact_D
    errs = [np.abs(tc.exterior_derivative(field, p, h) - exact).max() for h in (0.1, 0.05, 0.025)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2) < 0.2)


def test_exterior_derivative_rejects_bad_step():
    with pytest.raises(ValueError):
        tc.exterior_derivative(lambda x: x, np.zeros(4), 0.0)
    with pytest.raises(ValueError):
        tc.exterior_derivative(lambda x: x, np.zeros(4), -1e-3)


def test_hodge_star_basis():
    s = tc.hodge_star_r3((1, 0, 0))
    assert s[1, 2] == 1 and s[2, 1] == -1 and np.count_nonzero(s) == 2
    s = tc.hodge_star_r3((0, 1, 0))
    assert s[2, 0] == 1 and s[0, 2] == -1
    s = tc.hodge_star_r3((0, 0, 1))
    assert s[0, 1] == 1


def test_hodge_star_of_dV_at_unit_radius():
    m = 0.7
    V = lambda y: 2 * m * (1 + 1 / (4 * m * np.linalg.norm(y)))
    y = np.array([1.0, 0, 0])
    h = 1e-5
    grad = np.array([(V(y + h * e) - V(y - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.allclose(grad, [-0.5, 0, 0], atol=1e-9)
    p = tn.point_from_moment(m, y)
    assert np.allclose(tn.dV_components(p), [-0.5, 0, 0])
    assert np.allclose(tc.hodge_star_r3(grad), tc.hodge_star_r3([-0.5, 0, 0]), atol=1e-9)


def test_lie_bracket_of_rotations():
    X = lambda x: np.array([-x[1], x[0], 0, 0])
    Y = lambda x: np.array([0, -x[2], x[1], 0])
    Z = lambda x: np.array([-x[2], 0, x[0], 0])
    p = np.array([0.3, -0.2, 0.9, 1.1])
    assert np.allclose(tc.lie_bracket(X, Y, p, 0.1), Z(p), atol=1e-12)


def test_flat_metric_has_zero_curvature():
    g = lambda x: np.eye(4)
    R = tc.riemann(g, np.ones(4), 0.1)
    assert np.abs(R).max() == 0


def test_conformally_flat_metric_is_curved():
    # conformally flat metric e^{2u} delta with u linear is not flat; check Ricci symmetry
    g = lambda x: np.exp(0.2 * x[0]) * np.eye(4)
    R = tc.riemann(g, np.zeros(4), 0.05)
    Ric = tc.ricci(R)
    assert np.allclose(Ric, Ric.T, atol=1e-8)
    assert np.abs(R).max() > 1e-4


def test_tensor_norm_euclidean():
    T = np.arange(16.0).reshape(4, 4)
    assert tc.tensor_norm(T, np.eye(4)) == pytest.approx(np.linalg.norm(T))
    assert tc.tensor_norm(T, 4 * np.eye(4)) == pytest.approx(np.linalg.norm(T) / 4)
