"""
Molecular and cavity parameters in SI units and their conversion to trap units.

The vacuum Rabi coupling uses g = μ·ε_c / (2ħ), the convention that gives
g = 0.41ν for COS with ε_c = 150 V/m at ν = 2π×350 kHz.
"""

import math
from dataclasses import dataclass
from pathlib import Path

from scipy import constants

from cavity_cooler.config import config
from cavity_cooler.errors import ConfigError
from cavity_cooler.hilbert import HilbertLayout
from cavity_cooler.model import ModelParams

DATA_FILE = Path(__file__).parent / "data" / "molecules.txt"
AU_DIPOLE = constants.physical_constants["atomic unit of electric dipole mom."][0]
SOURCE_ANOMALIES = {"CSCl2"}
SETUP = config["setup"]


@dataclass(frozen=True)
class MoleculeSpec:
    name: str
    point_group: str
    irrep: str
    wavenumber: float
    dipole: float
    gamma_si: float
    mass: float

    def __post_init__(self):
        if self.wavenumber <= 0 or self.dipole < 0 or self.mass <= 0:
            raise ConfigError(f"{self.name}: wavenumber and mass must be > 0, dipole >= 0")


@dataclass(frozen=True)
class TrapSpec:
    nu_si: float
    depth: float = SETUP["trap_depth_uk"]
    trap_wavelength: float = SETUP["trap_wavelength_nm"]

    def __post_init__(self):
        if self.nu_si <= 0:
            raise ConfigError("trap frequency must be > 0")

    @classmethod
    def from_hz(cls, frequency_hz, **kwargs):
        return cls(nu_si=2 * math.pi * frequency_hz, **kwargs)


@dataclass(frozen=True)
class CavitySpec:
    field_amplitude: float
    kappa_si: float

    def __post_init__(self):
        if self.field_amplitude <= 0 or self.kappa_si <= 0:
            raise ConfigError("cavity field amplitude and linewidth must be > 0")

    @classmethod
    def from_hz(cls, field_amplitude, linewidth_hz):
        return cls(field_amplitude=field_amplitude, kappa_si=2 * math.pi * linewidth_hz)


@dataclass(frozen=True)
class Drive:
    omega: float
    delta: float
    delta_c: float


@dataclass(frozen=True)
class Geometry:
    phi: float = SETUP["phi"]
    theta_l: float = SETUP["theta_l"]
    theta_c: float = SETUP["theta_c"]


def default_trap():
    return TrapSpec.from_hz(SETUP["trap_frequency_hz"])


def default_cavity():
    return CavitySpec.from_hz(SETUP["cavity_field"], SETUP["cavity_linewidth_hz"])


def einstein_a(wavenumber, dipole):
    """Spontaneous emission rate [1/s] for a wavenumber [1/cm] and a transition dipole [au]."""
    omega = 2 * math.pi * constants.c * wavenumber * 100.0
    mu = dipole * AU_DIPOLE
    return omega**3 * mu**2 / (3 * math.pi * constants.epsilon_0 * constants.hbar * constants.c**3)


def lamb_dicke(wavenumber, mass, nu_si):
    """η = sqrt(ħk² / 2Mν) with k = 2π·ν̃."""
    k = 2 * math.pi * wavenumber * 100.0
    m = mass * constants.atomic_mass
    return math.sqrt(constants.hbar * k**2 / (2 * m * nu_si))


def vacuum_rabi(dipole, field_amplitude):
    return dipole * AU_DIPOLE * field_amplitude / (2 * constants.hbar)


def cooperativity(g, kappa, gamma):
    """C₁ = g² / (κγ); NaN when either linewidth vanishes."""
    if kappa < 0 or gamma < 0:
        raise ConfigError(f"cooperativity needs kappa, gamma >= 0, got {kappa}, {gamma}")
    if kappa == 0 or gamma == 0:
        return math.nan
    return g**2 / (kappa * gamma)


def molecule_gamma(molecule: MoleculeSpec):
    # tabulated value wins; the formula fills rows without one
    if molecule.gamma_si > 0:
        return molecule.gamma_si
    return einstein_a(molecule.wavenumber, molecule.dipole)


def to_model_params(
    molecule: MoleculeSpec,
    trap: TrapSpec,
    cavity: CavitySpec,
    drive: Drive,
    geometry: Geometry = None,
    layout: HilbertLayout = None,
) -> ModelParams:
    geometry = geometry or Geometry()
    nu = trap.nu_si
    return ModelParams(
        delta=drive.delta,
        delta_c=drive.delta_c,
        omega=drive.omega,
        g=vacuum_rabi(molecule.dipole, cavity.field_amplitude) / nu,
        kappa=cavity.kappa_si / nu,
        gamma=molecule_gamma(molecule) / nu,
        eta=lamb_dicke(molecule.wavenumber, molecule.mass, nu),
        phi=geometry.phi,
        theta_l=geometry.theta_l,
        theta_c=geometry.theta_c,
        nu_si=nu,
        layout=layout or HilbertLayout(),
    )


def load_molecules(path=None) -> dict:
    path = Path(path) if path else DATA_FILE
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ConfigError(f"can not read molecule file {path}") from e

    molecules = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 7:
            raise ConfigError(f"{path}: expected 7 fields, got {len(fields)}", lineno)
        name, point_group, irrep = fields[:3]
        try:
            wavenumber, dipole, gamma_si, mass = (float(x) for x in fields[3:])
        except ValueError as e:
            raise ConfigError(f"{path}: {e}", lineno) from e
        if wavenumber <= 0 or mass <= 0 or dipole < 0 or gamma_si < 0:
            raise ConfigError(f"{path}: {name} needs wavenumber, mass > 0 and dipole, gamma >= 0", lineno)
        molecules[name] = MoleculeSpec(name, point_group, irrep, wavenumber, dipole, gamma_si, mass)
    return molecules


@dataclass(frozen=True)
class MoleculeRow:
    molecule: MoleculeSpec
    gamma_formula: float
    gamma_deviation: float
    eta: float
    g_nu: float
    kappa_nu: float
    gamma_nu: float
    cooperativity: float
    anomaly: bool


def molecule_report(trap: TrapSpec, cavity: CavitySpec, molecules=None) -> list:
    molecules = molecules if molecules is not None else load_molecules()
    drive = Drive(omega=0.0, delta=0.0, delta_c=0.0)
    rows = []
    for molecule in molecules.values():
        params = to_model_params(molecule, trap, cavity, drive)
        gamma_formula = einstein_a(molecule.wavenumber, molecule.dipole)
        deviation = (gamma_formula - molecule.gamma_si) / molecule.gamma_si if molecule.gamma_si > 0 else math.nan
        rows.append(
            MoleculeRow(
                molecule=molecule,
                gamma_formula=gamma_formula,
                gamma_deviation=deviation,
                eta=params.eta,
                g_nu=params.g,
                kappa_nu=params.kappa,
                gamma_nu=params.gamma,
                cooperativity=cooperativity(params.g, params.kappa, params.gamma),
                anomaly=molecule.name in SOURCE_ANOMALIES,
            )
        )
    return rows
