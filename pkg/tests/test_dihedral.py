import numpy as np
import pytest

from alflab import dihedral as dh
from alflab import taubnut as tn


def _samples(seed, n=6):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))


def test_tau_action():
    tau = dh.DihedralElement(2, 0, 1)
    z = np.array([1 + 2j, -0.5 + 1j])
    assert np.array_equal(dh.act(tau, z), np.array([z[1], -z[0]]))


@pytest.mark.parametrize("k", [2, 3, 5])
def test_zeta_order_and_tau_square(k):
    zeta, tau = dh.generators(k)
    assert np.allclose(np.linalg.matrix_power(zeta, 2 * k), np.eye(2), atol=1e-14)
    assert not np.allclose(np.linalg.matrix_power(zeta, k), np.eye(2))
    assert np.array_equal(tau @ tau, -np.eye(2))
    assert np.allclose(np.linalg.matrix_power(zeta, k), -np.eye(2), atol=1e-14)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_group_axioms(k):
    ax = dh.check_group_axioms(k)
    assert ax["order"] == 4 * k
    assert ax["det"] <= 1e-12 and ax["unitary"] <= 1e-12 and ax["closure"] <= 1e-12


def test_generators_reject_small_k():
    with pytest.raises(ValueError):
        dh.generators(1)
    with pytest.raises(ValueError):
        dh.invariant_triple((1, 1), 1)


def test_action_is_free_away_from_origin():
    z = _samples(1)
    for g in dh.group_elements(3)[1:]:
        for w in z:
            assert np.linalg.norm(dh.act(g, w) - w) > 1e-6


def test_real_matrix_matches_complex_action():
    g = dh.DihedralElement(3, 2, 1)
    w = np.array([0.3 - 1j, 2 + 0.5j])
    x = np.array([w[0].real, w[0].imag, w[1].real, w[1].imag])
    gw = dh.act(g, w)
    assert np.allclose(dh.act_real(g, x), [gw[0].real, gw[0].imag, gw[1].real, gw[1].imag])


def test_invariant_triple_origin():
    assert dh.invariant_triple((0, 0), 2) == (0, 0, 0)
    assert dh.syzygy_residual((0, 0), 2) == 0


@pytest.mark.parametrize("k", [2, 3, 5])
def test_syzygy_and_invariance(k):
    for z in _samples(k):
        assert dh.syzygy_residual(z, k) <= 1e-10
        base = np.array(dh.invariant_triple(z, k))
        for g in dh.group_elements(k):
            val = np.array(dh.invariant_triple(dh.act(g, z), k))
            assert np.abs(val - base).max() <= 1e-10 * np.abs(base).max()


@pytest.mark.parametrize("k", [2, 3])
def test_potential_invariance(k):
    res = dh.check_potential_invariance(k, 1.0, _samples(10 + k))
    assert max(res.values()) <= 1e-10


def test_tau_swaps_u_and_v():
    z = np.array([0.7 + 0.2j, -1.1 + 0.9j])
    u, v = tn.solve_uv(z[0], z[1], 0.6)
    ut, vt = tn.solve_uv(*dh.act(dh.DihedralElement(2, 0, 1), z), 0.6)
    assert ut == pytest.approx(v, rel=1e-13) and vt == pytest.approx(u, rel=1e-13)


def test_tetrahedral_witness():
    T = dh.tetrahedral_generator()
    assert np.allclose(T.conj().T @ T, np.eye(2), atol=1e-14)
    assert abs(np.linalg.det(T) - 1) < 1e-14
    assert dh.tetrahedral_defect(1.0, _samples(20)) >= 1e-3
    # the flat potential r^2/4 cannot see the difference
    assert dh.tetrahedral_defect(0.0, _samples(20)) <= 1e-12


@pytest.mark.parametrize("k", [2, 5])
def test_metric_invariance(k):
    assert dh.check_metric_invariance(k, 1.0, _samples(30 + k, 3)) <= 1e-9


def test_multiplication_normal_form():
    k = 3
    els = dh.group_elements(k)
    for g in els:
        for h in els:
            assert np.allclose((g * h).matrix, g.matrix @ h.matrix, atol=1e-12)
    with pytest.raises(ValueError):
        dh.DihedralElement(2, 0, 0) * dh.DihedralElement(3, 0, 0)
