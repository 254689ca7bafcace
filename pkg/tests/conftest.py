import numpy as np
import pytest

from bdfdyn.dynamics import build_initial_state
from bdfdyn.lattice import build_lattice
from bdfdyn.newton import NucleusState


def reference_nuclei():
    return [
        NucleusState.gaussian(1.0, 100.0, 0.5, (-1.0, 0.0, 0.0), (0.0, 0.02, 0.0)),
        NucleusState.gaussian(1.0, 100.0, 0.5, (1.0, 0.0, 0.0), (0.0, -0.02, 0.0)),
    ]


@pytest.fixture(scope="session")
def tiny():
    # 19 points
    return build_lattice(1.5, 3)


@pytest.fixture(scope="session")
def small():
    # 32 points, even grid without the origin
    return build_lattice(1.5, 4)


@pytest.fixture(scope="session")
def ref_lattice():
    return build_lattice(2.0, 5)


@pytest.fixture(scope="session")
def ref_nuclei():
    return reference_nuclei()


@pytest.fixture(scope="session")
def ref_state(ref_lattice, ref_nuclei):
    return build_initial_state("perturbed", ref_lattice, ref_nuclei, epsilon=0.1, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(lattice, rng, scale=1.0):
    d = lattice.dim
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (g + g.conj().T) / np.sqrt(d)


def projector_difference(lattice, rng, eps=0.2):
    """``U P0 U* - P0`` for a random unitary close to the identity."""
    from scipy.linalg import expm

    from bdfdyn.opspace import p0_matrix

    a = random_hermitian(lattice, rng)
    u = expm(1j * eps * a)
    p0 = p0_matrix(lattice)
    m = u @ p0 @ u.conj().T - p0
    return 0.5 * (m + m.conj().T)


# criterion -> list of (clause passed, detail); filled by test_acceptance
ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


def record_criterion(criterion: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, clauses in ACCEPTANCE.items():
        tag = "PASS" if all(ok for ok, _ in clauses) else "FAIL"
        terminalreporter.write_line(f"{tag} {name}: " + "; ".join(d for _, d in clauses))
