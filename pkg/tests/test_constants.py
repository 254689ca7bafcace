import math

import numpy as np
import pytest

from bdfdyn.constants import ball_membership, estimate_constants, gaussian_cf, space_norm
from bdfdyn.dynamics import SimulationOptions, build_initial_state, simulate
from bdfdyn.errors import ConfigurationError
from bdfdyn.opspace import hs_norm
from bdfdyn.oracles import gaussian_coulomb_norms

from conftest import reference_nuclei


@pytest.fixture(scope="module")
def tiny_setup(tiny):
    s0 = build_initial_state("perturbed", tiny, reference_nuclei(), epsilon=0.1, seed=7)
    return s0, space_norm(tiny, s0.q.mat)


def test_gaussian_cf_against_quadrature():
    for z, sigma in ((1.0, 0.5), (2.0, 0.3), (0.5, 1.2)):
        plain, grad = gaussian_coulomb_norms(z, sigma)
        assert gaussian_cf(z, sigma) == pytest.approx(max(plain, grad), rel=1e-8)
    assert gaussian_cf(1.0, 0.5) == pytest.approx(1.5023, abs=1e-4)


def test_space_norm_dominates_hs_norm(tiny_setup):
    s0, qn = tiny_setup
    assert qn >= hs_norm(s0.q)
    assert space_norm(s0.lattice, 0 * s0.q.mat) == 0


def test_report_fields(tiny, tiny_setup):
    s0, qn = tiny_setup
    rep = estimate_constants(tiny, s0.nuclei, 0.1, 2.0, qn, samples=4, seed=1)
    assert rep.C_f == pytest.approx(gaussian_cf(1.0, 0.5))
    for name in ("C_F", "C1", "C2", "C3", "kappa"):
        assert getattr(rep, name) > 0 and math.isfinite(getattr(rep, name))
    assert rep.tau_inequality_1 == pytest.approx((1 - 1 / 2.0) / rep.C_F, rel=1e-8)
    tau = rep.tau_admissible
    assert tau == min(rep.tau_inequality_1, rep.tau_inequality_2)
    assert rep.satisfies(tau, 0.1, s0.nuclei) == (True, True)
    assert rep.satisfies(1.01 * rep.tau_inequality_2, 0.1, s0.nuclei)[1] is False
    d = rep.as_dict()
    assert d["tau_admissible"] == tau and d["samples"] == 4


def test_deterministic(tiny, tiny_setup):
    s0, qn = tiny_setup
    a = estimate_constants(tiny, s0.nuclei, 0.1, 2.0, qn, samples=3, seed=5)
    b = estimate_constants(tiny, s0.nuclei, 0.1, 2.0, qn, samples=3, seed=5)
    assert a == b


def test_more_samples_never_lower_the_estimate(tiny, tiny_setup):
    s0, qn = tiny_setup
    a = estimate_constants(tiny, s0.nuclei, 0.1, 2.0, qn, samples=2, seed=0)
    b = estimate_constants(tiny, s0.nuclei, 0.1, 2.0, qn, samples=6, seed=0)
    for name in ("C_F", "C1", "C2", "C3", "kappa"):
        assert getattr(b, name) >= getattr(a, name)


def test_no_coupling(tiny, tiny_setup):
    s0, qn = tiny_setup
    rep = estimate_constants(tiny, s0.nuclei, 0.0, 2.0, qn, samples=3)
    assert rep.C_F == pytest.approx(rep.C1, rel=1e-12)
    assert rep.C2 == 0 and rep.C3 == 0
    assert rep.tau_inequality_2 == math.inf


def test_vacuum_at_rest_has_no_velocity_condition(tiny):
    s0 = build_initial_state("vacuum", tiny, [n.moved(v=np.zeros(3)) for n in reference_nuclei()])
    rep = estimate_constants(tiny, s0.nuclei, 0.1, 2.0, 0.0, samples=2)
    assert rep.tau_inequality_2 == math.inf
    assert math.isfinite(rep.tau_inequality_1)


def test_validation(tiny):
    with pytest.raises(ConfigurationError):
        estimate_constants(tiny, (), 0.1, 1.0, 1.0)
    with pytest.raises(ConfigurationError):
        estimate_constants(tiny, (), 0.1, 2.0, 1.0, samples=0)
    with pytest.raises(ConfigurationError):
        estimate_constants(tiny, (), -0.1, 2.0, 1.0)


def test_ball_membership(tiny, tiny_setup):
    s0, qn = tiny_setup
    rep = estimate_constants(tiny, s0.nuclei, 0.1, 2.0, qn, samples=2)
    traj = simulate(s0, 0.02, 0.2, 0.1, SimulationOptions(sample_every=1))
    assert ball_membership(traj, rep, 0.2) == {"electronic": True, "nuclear": True}
    tight = type(rep)(**{**rep.__dict__, "c_e": 0.5})
    assert ball_membership(traj, tight, 0.2)["electronic"] is False
    lean = simulate(s0, 0.02, 0.04, 0.1, SimulationOptions(keep_states=False))
    lean.states.clear()
    with pytest.raises(ValueError):
        ball_membership(lean, rep, 0.2)
