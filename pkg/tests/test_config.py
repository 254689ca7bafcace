import warnings
from pathlib import Path

import pytest

from bdfdyn.config import ALPHA_CRITICAL, RegimeWarning, load_config, parse_config
from bdfdyn.errors import ConfigurationError

ROOT = Path(__file__).resolve().parents[1]

MINIMAL = """
alpha: 0.1
lambda_cutoff: 2.0
n_per_axis: 5
dt: 0.001
t_final: 1.0
"""


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.alpha == 0.1 and cfg.n_per_axis == 5
    assert cfg.nuclei == ()
    assert cfg.initial_state.kind == "vacuum"
    assert cfg.integrator.retraction is False and cfg.integrator.retraction_period == 10
    assert cfg.output.sample_every == 10
    assert cfg.constants.c_e == 2.0
    assert cfg.warnings == ()


def test_reference_config_loads():
    cfg = load_config(ROOT / "configs" / "reference.yaml")
    assert len(cfg.nuclei) == 2
    assert cfg.nuclei[0].x0 == (-1.0, 0.0, 0.0)
    assert cfg.nuclei[1].v0 == (0.0, -0.02, 0.0)
    assert cfg.initial_state.kind == "perturbed" and cfg.initial_state.seed == 7


@pytest.mark.parametrize(
    "extra, where",
    [
        ("alpha: -1\n", "alpha"),
        ("bogus: 1\n", "bogus"),
        ("n_per_axis: 1\n", "n_per_axis"),
        ("n_per_axis: 2.5\n", "n_per_axis"),
        ("dt: 0\n", "dt"),
        ("dt: true\n", "dt"),
        ("nuclei: [{z: 1, m: 1, sigma: -0.5, x0: [0, 0, 0]}]\n", "nuclei[0].sigma"),
        ("nuclei: [{z: 1, m: 1, sigma: 0.5, x0: [0, 0]}]\n", "nuclei[0].x0"),
        ("nuclei: [{z: 1, m: 1, sigma: 0.5}]\n", "nuclei[0].x0"),
        ("nuclei: [{z: 1, m: 1, sigma: 0.5, x0: [0, 0, 0], spin: 1}]\n", "nuclei[0].spin"),
        ("initial_state: {kind: excited}\n", "initial_state.kind"),
        ("initial_state: {kind: charged}\n", "initial_state.q"),
        ("initial_state: {kind: perturbed}\n", "initial_state.epsilon"),
        ("integrator: {retraction: 1}\n", "integrator.retraction"),
        ("output: {sample_every: 0}\n", "output.sample_every"),
        ("constants: {c_e: 1.0}\n", "constants.c_e"),
    ],
)
def test_rejections_name_the_key(extra, where):
    lines = [ln for ln in MINIMAL.strip().splitlines() if not ln.startswith(extra.split(":")[0] + ":")]
    text = "\n".join(lines) + "\n" + extra
    with pytest.raises(ConfigurationError) as info:
        parse_config(text)
    assert str(info.value).startswith(where)


def test_missing_required():
    with pytest.raises(ConfigurationError, match="t_final"):
        parse_config(MINIMAL.replace("t_final: 1.0", ""))


def test_invalid_yaml():
    with pytest.raises(ConfigurationError, match="YAML"):
        parse_config("alpha: [1, 2")


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.yaml")


def test_supercritical_alpha_warns_but_parses():
    with pytest.warns(RegimeWarning):
        cfg = parse_config(MINIMAL.replace("alpha: 0.1", "alpha: 1.3"))
    assert cfg.alpha == 1.3 > ALPHA_CRITICAL
    assert len(cfg.warnings) == 1


def test_subcritical_alpha_is_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_config(MINIMAL.replace("alpha: 0.1", "alpha: 1.27"))
