import logging
import math
from pathlib import Path

import pytest

from cavity_cooler.errors import ConfigError
from cavity_cooler.run_config import load_config, parse_config

DIRECT = """\
mode = rates
method = perturbative

[params]
g = 0.41
kappa = 14.29
gamma = 1.93e-4
eta = 0.0205
nu_si = 2199114.857512855

[drive]
delta = -1.0
delta_c = 0.0
omega = 0.05
"""

PHYSICAL = """\
mode = sweep
molecule = COS    # bundled table
omega = 0.05

[sweep]
delta_points = 3
delta_c_points = 5
"""


def test_empty_text_needs_mode():
    with pytest.raises(ConfigError, match="mode required"):
        parse_config("")


def test_direct_block(tmpdir):
    run = parse_config(DIRECT, base_dir=str(tmpdir))
    assert run.mode == "rates"
    assert run.method == "perturbative"
    assert run.params.g == 0.41
    assert run.params.delta == -1.0
    assert run.params.phi == pytest.approx(math.pi / 4)
    assert run.params.layout.n_trap == 5
    assert not run.uses_physical
    assert run.output_dir() == Path(str(tmpdir)) / "results"


def test_physical_block_with_defaults():
    run = parse_config(PHYSICAL)
    assert run.uses_physical
    assert run.params.g == pytest.approx(0.41, rel=0.03)
    assert run.params.kappa == pytest.approx(14.29, rel=0.01)
    assert list(run.delta_axis()) == [-3.0, -1.0, 1.0]
    assert list(run.delta_c_axis()) == [-30.0, -15.0, 0.0, 15.0, 30.0]
    assert run.workers == 1
    assert run.svg is False


def test_blocks_are_exclusive():
    with pytest.raises(ConfigError, match="mutually exclusive"):
        parse_config(DIRECT + "\n[physical]\nmolecule = COS\n")


def test_one_block_is_required():
    with pytest.raises(ConfigError, match="required"):
        parse_config("mode = rates\ndelta = -1\ndelta_c = 0\nomega = 0.05\n")


def test_molecule_mode_forbids_direct_block():
    assert parse_config("mode = molecule\n").params is None
    with pytest.raises(ConfigError):
        parse_config("mode = molecule\ng = 0.4\n")


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("mode = rates\n\nfoo = 1\n")
    assert excinfo.value.lineno == 3
    assert str(excinfo.value).startswith("line 3:")


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("mode = rates\nthis line has no separator\n")
    assert excinfo.value.lineno == 2


def test_key_in_wrong_section():
    with pytest.raises(ConfigError, match="belongs to"):
        parse_config("mode = rates\n[drive]\ng = 0.4\n")


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("mode = rates\n[laser]\n")


@pytest.mark.parametrize(
    "line",
    ["dt = -1", "n_trap = 1", "record_every = 0", "engine = euler", "fit_mode = linear", "svg = maybe", "kappa = nan"],
)
def test_range_violations(line):
    text = DIRECT.replace("method = perturbative", f"method = perturbative\n{line}")
    if line.startswith("kappa"):
        text = DIRECT.replace("kappa = 14.29", line)
    with pytest.raises(ConfigError):
        parse_config(text)


def test_drive_is_required_for_rates():
    with pytest.raises(ConfigError, match="delta_c required"):
        parse_config(DIRECT.replace("delta_c = 0.0\n", ""))


def test_incomplete_direct_block():
    with pytest.raises(ConfigError, match="missing eta"):
        parse_config(DIRECT.replace("eta = 0.0205\n", ""))


def test_missing_molecule_file(tmpdir):
    with pytest.raises(ConfigError, match="does not exist"):
        parse_config("mode = molecule\nmolecule_file = nowhere.txt\n", base_dir=str(tmpdir))


def test_omega_axis_must_increase():
    with pytest.raises(ConfigError, match="omega_axis"):
        parse_config(PHYSICAL + "omega_axis = 0.1, 0.05\n")


def test_convergence_levels():
    text = DIRECT.replace("mode = rates", "mode = convergence") + "\n[convergence]\nn_trap_list = 2, 3\n"
    with pytest.raises(ConfigError):
        parse_config(text)
    run = parse_config(text.replace("2, 3", "4, 5, 6"))
    assert run.n_trap_list == (4, 5, 6)


def test_numerics_settings():
    text = DIRECT + "\n[numerics]\ndt = 1e-4\nt_end = 200\nn_trap = 4\nengine = stepwise\ninitial_state = fock\ninitial_fock_n = 2\n"
    run = parse_config(text)
    settings = run.propagation_settings()
    assert settings.dt == 1e-4
    assert settings.t_end == 200.0
    assert settings.engine == "stepwise"
    assert settings.initial.kind == "fock"
    assert run.params.layout.n_trap == 4
    assert run.numeric_engine().settings == settings


def test_overrides():
    run = parse_config(DIRECT).with_overrides(workers=4, method=None, output="elsewhere")
    assert run.workers == 4
    assert run.method == "perturbative"
    assert run.output == "elsewhere"


def test_manifest_round_trip(tmpdir):
    run = parse_config(PHYSICAL, base_dir=str(tmpdir))
    text = run.to_manifest(version="1.0", timestamp="2024-01-01T00:00:00+00:00")
    assert text.startswith("# cavity-cooler run manifest")
    assert "# version = 1.0" in text
    again = parse_config(text, base_dir="/")
    assert again.mode == run.mode
    assert again.params == run.params
    assert again.output_dir() == run.output_dir().resolve()
    assert {k: v for k, v in again.values.items() if k != "output"} == {
        k: v for k, v in run.values.items() if k != "output"
    }


def test_load_config(tmpdir):
    path = tmpdir.join("run.ini")
    path.write(DIRECT)
    run = load_config(str(path))
    assert run.base_dir == Path(str(tmpdir))
    with pytest.raises(ConfigError):
        load_config(str(tmpdir.join("missing.ini")))


def test_large_lamb_dicke_parameter_warns_once(caplog):
    with caplog.at_level(logging.WARNING, logger="cavity_cooler.model"):
        run = parse_config(DIRECT.replace("eta = 0.0205", "eta = 0.5"))
        cells = [run.params.replace(delta=d) for d in (-2.0, -1.0, 0.0)]
    assert len(cells) == 3
    assert caplog.text.count("Lamb-Dicke") == 1
