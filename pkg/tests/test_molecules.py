import math

import pytest

from cavity_cooler.errors import ConfigError
from cavity_cooler.molecules import (
    Drive,
    cooperativity,
    einstein_a,
    lamb_dicke,
    load_molecules,
    molecule_report,
    default_cavity,
    default_trap,
    to_model_params,
    vacuum_rabi,
)

NU_SI = 2 * math.pi * 350e3


def test_einstein_coefficients():
    assert einstein_a(2108, 0.15) == pytest.approx(424, rel=0.01)
    assert einstein_a(1609, 0.036) == pytest.approx(11, rel=0.02)
    assert einstein_a(2108, 0.0) == 0


def test_lamb_dicke_parameter():
    assert lamb_dicke(2108, 60.07, NU_SI) == pytest.approx(0.0205, rel=0.03)
    assert lamb_dicke(2108, 600.7, NU_SI) == pytest.approx(lamb_dicke(2108, 60.07, NU_SI) / math.sqrt(10))


def test_lamb_dicke_hand_evaluation():
    # MgH+ at 1 MHz: k = 2π·160900 /m, M = 25.31 amu
    nu = 2 * math.pi * 1.0e6
    k = 2 * math.pi * 160900.0
    expected = math.sqrt(1.054571817e-34 * k**2 / (2 * 25.31 * 1.66053906660e-27 * nu))
    assert lamb_dicke(1609, 25.31, nu) == pytest.approx(expected, rel=1e-6)


def test_vacuum_rabi_coupling():
    assert vacuum_rabi(0.15, 150.0) / NU_SI == pytest.approx(0.41, rel=0.03)
    assert vacuum_rabi(0.15, 0.0) == 0
    assert vacuum_rabi(0.15, 300.0) == pytest.approx(2 * vacuum_rabi(0.15, 150.0))


def test_cooperativity():
    assert cooperativity(0.41, 14.29, 1.93e-4) == pytest.approx(61, rel=0.05)
    assert cooperativity(0.0, 14.29, 1.93e-4) == 0
    assert cooperativity(0.82, 28.58, 3.86e-4) == pytest.approx(cooperativity(0.41, 14.29, 1.93e-4))
    assert math.isnan(cooperativity(0.41, 0.0, 1.0))
    with pytest.raises(ConfigError):
        cooperativity(0.41, 14.29, -1.0)


def test_cos_in_the_default_set_up():
    cos = load_molecules()["COS"]
    params = to_model_params(cos, default_trap(), default_cavity(), Drive(omega=0.05, delta=-1.0, delta_c=0.0))
    assert params.eta == pytest.approx(0.02, rel=0.1)
    assert params.kappa == pytest.approx(14.29, rel=0.01)
    assert params.gamma == pytest.approx(1.93e-4, rel=0.03)
    assert params.g == pytest.approx(0.41, rel=0.03)
    assert cooperativity(params.g, params.kappa, params.gamma) == pytest.approx(61, rel=0.05)
    assert params.omega == 0.05
    assert params.nu_si == pytest.approx(NU_SI)


def test_si_round_trip():
    params = to_model_params(load_molecules()["COS"], default_trap(), default_cavity(), Drive(0.05, -1.0, 0.0))
    assert params.kappa * params.nu_si == pytest.approx(2 * math.pi * 5e6)
    assert params.gamma * params.nu_si == pytest.approx(424)


def test_bundled_table():
    molecules = load_molecules()
    assert list(molecules) == ["CHBr3", "HCCCF3", "TMA", "COS", "CFI3", "CSCl2", "MgH+"]
    assert molecules["MgH+"].mass == pytest.approx(25.31)
    assert molecules["COS"].point_group == "Cinfv"


def test_table_gamma_matches_formula():
    for name, molecule in load_molecules().items():
        deviation = abs(einstein_a(molecule.wavenumber, molecule.dipole) / molecule.gamma_si - 1)
        if name == "CSCl2":
            assert deviation > 5
        else:
            assert deviation < 0.1


def test_malformed_molecule_file(tmpdir):
    path = tmpdir.join("molecules.txt")
    path.write("# header\nCOS Cinfv Sigma_g 2108 0.15 424 60.07\nXY C1 A 100 0.1\n")
    with pytest.raises(ConfigError) as excinfo:
        load_molecules(str(path))
    assert excinfo.value.lineno == 3
    with pytest.raises(ConfigError):
        load_molecules(str(tmpdir.join("missing.txt")))


def test_molecule_report():
    rows = {row.molecule.name: row for row in molecule_report(default_trap(), default_cavity())}
    assert len(rows) == 7
    assert rows["COS"].cooperativity == pytest.approx(61, rel=0.05)
    assert rows["COS"].gamma_deviation == pytest.approx(0.009, abs=0.005)
    assert rows["CSCl2"].anomaly
    assert not rows["COS"].anomaly


def test_dark_molecule_reports_undefined_cooperativity(tmpdir):
    path = tmpdir.join("molecules.txt")
    path.write("DARK C1 A 1000 0.0 0.0 50.0\n")
    rows = molecule_report(default_trap(), default_cavity(), load_molecules(str(path)))
    assert rows[0].gamma_nu == 0
    assert math.isnan(rows[0].cooperativity)


def test_molecule_file_rejects_unphysical_rows(tmpdir):
    path = tmpdir.join("molecules.txt")
    path.write("COS Cinfv Sigma_g 2108 0.15 424 60.07\nXY C1 A 1000 0.1 10 0.0\n")
    with pytest.raises(ConfigError) as excinfo:
        load_molecules(str(path))
    assert excinfo.value.lineno == 2
