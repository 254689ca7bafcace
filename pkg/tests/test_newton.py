import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdfdyn.coulomb import GaussianShape, coulomb_inner, gaussian_density
from bdfdyn.lattice import build_lattice
from bdfdyn.newton import NucleusState, newton_rhs, nuclear_force, potential_energy_U
from bdfdyn.opspace import KernelOperator, density_of, random_hs_sample


def pair(x1=(-1.0, 0, 0), x2=(1.0, 0, 0)):
    return [
        NucleusState.gaussian(1.0, 100.0, 0.5, x1, (0, 0.02, 0)),
        NucleusState.gaussian(2.0, 60.0, 0.7, x2, (0, -0.02, 0)),
    ]


def test_nucleus_validation():
    with pytest.raises(ValueError):
        NucleusState.gaussian(0.0, 1.0, 0.5, (0, 0, 0))
    with pytest.raises(ValueError):
        NucleusState.gaussian(1.0, -1.0, 0.5, (0, 0, 0))
    with pytest.raises(ValueError):
        NucleusState.gaussian(1.0, 1.0, 0.0, (0, 0, 0))
    n = NucleusState.gaussian(1.0, 1.0, 0.5, [1, 2, 3])
    assert n.x.dtype == float and n.x.shape == (3,)
    m = n.moved(x=np.zeros(3))
    assert np.all(m.x == 0) and np.all(n.x == [1, 2, 3])


def test_potential_energy_definition(tiny, rng):
    q = random_hs_sample(tiny, 1.0, 3)
    nuc = pair()
    alpha = 0.3
    rho = density_of(q)
    f = [gaussian_density(tiny, n.shape, n.x, n.z) for n in nuc]
    expected = alpha * (-coulomb_inner(rho, f[0] + f[1]).real + coulomb_inner(f[0], f[1]).real)
    assert potential_energy_U(q, nuc, alpha) == pytest.approx(expected, rel=1e-12)


def test_force_is_minus_gradient(tiny):
    q = random_hs_sample(tiny, 1.0, 5)
    nuc = pair((-0.6, 0.2, 0.1), (0.7, -0.1, 0.3))
    h = 1e-5
    for k in range(2):
        f = nuclear_force(q, nuc, 0.4, k)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            up = [n.moved(x=n.x + e) if i == k else n for i, n in enumerate(nuc)]
            dn = [n.moved(x=n.x - e) if i == k else n for i, n in enumerate(nuc)]
            fd = -(potential_energy_U(q, up, 0.4) - potential_energy_U(q, dn, 0.4)) / (2 * h)
            assert f[j] == pytest.approx(fd, abs=1e-8)


def test_pair_forces_balance_without_electrons(tiny):
    q = KernelOperator.zeros(tiny)
    nuc = pair((-0.6, 0.2, 0.1), (0.7, -0.1, 0.3))
    f0 = nuclear_force(q, nuc, 0.5, 0)
    f1 = nuclear_force(q, nuc, 0.5, 1)
    np.testing.assert_allclose(f0 + f1, 0, atol=1e-14)
    # repulsion pushes them apart
    assert np.dot(f1, nuc[1].x - nuc[0].x) > 0


def test_single_nucleus_in_symmetric_density_feels_no_force(tiny):
    q = KernelOperator.zeros(tiny)
    nuc = [NucleusState.gaussian(1.0, 1.0, 0.5, (0, 0, 0))]
    np.testing.assert_allclose(nuclear_force(q, nuc, 0.5, 0), 0, atol=1e-15)


def test_no_coupling_no_force(tiny):
    q = random_hs_sample(tiny, 1.0, 1)
    assert np.all(nuclear_force(q, pair(), 0.0, 1) == 0)


def test_index_out_of_range(tiny):
    with pytest.raises(IndexError):
        nuclear_force(KernelOperator.zeros(tiny), pair(), 0.1, 2)


def test_newton_rhs(tiny):
    q = random_hs_sample(tiny, 1.0, 9)
    nuc = pair()
    out = newton_rhs(nuc, q, 0.2)
    for k, (dx, dv) in enumerate(out):
        np.testing.assert_array_equal(dx, nuc[k].v)
        np.testing.assert_allclose(dv, nuclear_force(q, nuc, 0.2, k) / nuc[k].m)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.floats(0.05, 1.0))
def test_force_gradient_property(seed, alpha):
    lat = build_lattice(1.5, 3)
    r = np.random.default_rng(seed)
    q = random_hs_sample(lat, 1.0, seed)
    nuc = pair(tuple(r.uniform(-1, 1, 3)), tuple(r.uniform(-1, 1, 3)))
    h = 1e-5
    f = nuclear_force(q, nuc, alpha, 0)
    e = r.standard_normal(3)
    e /= np.linalg.norm(e)
    up = [nuc[0].moved(x=nuc[0].x + h * e), nuc[1]]
    dn = [nuc[0].moved(x=nuc[0].x - h * e), nuc[1]]
    fd = -(potential_energy_U(q, up, alpha) - potential_energy_U(q, dn, alpha)) / (2 * h)
    assert np.dot(f, e) == pytest.approx(fd, abs=1e-8)


def test_shape_type():
    assert isinstance(pair()[0].shape, GaussianShape)
