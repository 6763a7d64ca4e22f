"""
Run files: ``key = value`` lines with optional ``[section]`` headers.

Keys before the first header may be any known key; keys under a header must
belong to it. Unknown keys and sections are errors. A run uses either the
direct ν-unit block (g, kappa, gamma, eta, nu_si) or the physical block
(molecule, trap, cavity), never both.
"""

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from cavity_cooler.config import config
from cavity_cooler.dynamics import ENGINES, PropagationSettings
from cavity_cooler.errors import ConfigError
from cavity_cooler.hilbert import HilbertLayout, InitialState
from cavity_cooler.model import ModelParams, warn_lamb_dicke
from cavity_cooler.molecules import CavitySpec, Drive, Geometry, TrapSpec, load_molecules, to_model_params
from cavity_cooler.rates.fit import FIT_MODES
from cavity_cooler.rates.numeric_rates import NumericRates
from cavity_cooler.sweep import make_axis

MODES = ("simulate", "rates", "sweep", "omega-scan", "molecule", "convergence")
METHODS = ("numeric", "perturbative", "both")
TOP = "__top__"

NUMERICS = config["numerics"]
SWEEP = config["sweep"]
SETUP = config["setup"]


def _text(raw):
    return raw


def _float(raw):
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError(f"{raw!r} is not finite")
    return value


def _positive(raw):
    value = _float(raw)
    if value <= 0:
        raise ValueError(f"{raw!r} must be > 0")
    return value


def _non_negative(raw):
    value = _float(raw)
    if value < 0:
        raise ValueError(f"{raw!r} must be >= 0")
    return value


def _int_at_least(low):
    def convert(raw):
        value = int(raw)
        if value < low:
            raise ValueError(f"{raw!r} must be >= {low}")
        return value

    return convert


def _bool(raw):
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{raw!r} is not a boolean")


def _choice(options):
    def convert(raw):
        if raw not in options:
            raise ValueError(f"{raw!r} is not one of {', '.join(options)}")
        return raw

    return convert


def _float_list(raw):
    values = tuple(_float(x) for x in raw.split(",") if x.strip())
    if not values:
        raise ValueError("empty list")
    return values


def _int_list(raw):
    values = tuple(int(x) for x in raw.split(",") if x.strip())
    if not values:
        raise ValueError("empty list")
    return values


# key: (section, converter, default); a default of None means "unset"
KEYS = {
    "mode": ("run", _choice(MODES), None),
    "method": ("run", _choice(METHODS), "numeric"),
    "output": ("run", _text, "results"),
    "svg": ("run", _bool, False),
    "workers": ("run", _int_at_least(1), 1),
    "seed": ("run", int, None),
    "g": ("params", _non_negative, None),
    "kappa": ("params", _non_negative, None),
    "gamma": ("params", _non_negative, None),
    "eta": ("params", _non_negative, None),
    "nu_si": ("params", _positive, None),
    "molecule": ("physical", _text, None),
    "molecule_file": ("physical", _text, None),
    "trap_frequency_hz": ("physical", _positive, None),
    "trap_depth_uk": ("physical", _positive, None),
    "trap_wavelength_nm": ("physical", _positive, None),
    "cavity_field": ("physical", _positive, None),
    "cavity_linewidth_hz": ("physical", _positive, None),
    "delta": ("drive", _float, None),
    "delta_c": ("drive", _float, None),
    "omega": ("drive", _non_negative, None),
    "phi": ("geometry", _float, SETUP["phi"]),
    "theta_l": ("geometry", _float, SETUP["theta_l"]),
    "theta_c": ("geometry", _float, SETUP["theta_c"]),
    "dt": ("numerics", _positive, None),
    "t_end": ("numerics", _positive, None),
    "n_trap": ("numerics", _int_at_least(2), NUMERICS["n_trap"]),
    "record_every": ("numerics", _int_at_least(1), NUMERICS["record_every"]),
    "engine": ("numerics", _choice(ENGINES), "power"),
    "fit_mode": ("numerics", _choice(FIT_MODES), NUMERICS["fit_mode"]),
    "initial_state": ("numerics", _choice(("thermal", "fock")), "thermal"),
    "initial_mean_n": ("numerics", _non_negative, 1.0),
    "initial_fock_n": ("numerics", _int_at_least(0), 0),
    "horizon_factor": ("numerics", _positive, NUMERICS["horizon_factor"]),
    "min_horizon": ("numerics", _positive, NUMERICS["min_horizon"]),
    "max_horizon": ("numerics", _positive, NUMERICS["max_horizon"]),
    "transient_kappa_periods": ("numerics", _non_negative, NUMERICS["transient_kappa_periods"]),
    "delta_min": ("sweep", _float, SWEEP["delta_min"]),
    "delta_max": ("sweep", _float, SWEEP["delta_max"]),
    "delta_points": ("sweep", _int_at_least(1), SWEEP["points"]),
    "delta_c_min": ("sweep", _float, SWEEP["delta_c_min"]),
    "delta_c_max": ("sweep", _float, SWEEP["delta_c_max"]),
    "delta_c_points": ("sweep", _int_at_least(1), SWEEP["points"]),
    "omega_axis": ("sweep", _float_list, SWEEP["omega_axis"]),
    "n_trap_list": ("convergence", _int_list, config["convergence"]["n_trap_list"]),
    "tolerance": ("convergence", _positive, config["convergence"]["tolerance"]),
}
SECTIONS = ("run", "params", "physical", "drive", "geometry", "numerics", "sweep", "convergence")
DIRECT_KEYS = {k for k, spec in KEYS.items() if spec[0] == "params"}
PHYSICAL_KEYS = {k for k, spec in KEYS.items() if spec[0] == "physical"}


def _line_of(text, pattern):
    regex = re.compile(pattern)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if regex.match(line):
            return lineno
    return None


def _key_line(text, key):
    return _line_of(text, rf"^\s*{re.escape(key)}\s*[=:]")


def _read(text):
    parser = configparser.ConfigParser(
        interpolation=None,
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#", ";"),
        strict=True,
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{TOP}]\n{text}")
    except configparser.ParsingError as e:
        lineno, line = e.errors[0]
        raise ConfigError(f"syntax error: {line.strip()!r}", lineno - 1) from e
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError(e.message.split(":", 1)[-1].strip() if hasattr(e, "message") else str(e), e.lineno - 1) from e
    except configparser.Error as e:
        raise ConfigError(f"syntax error: {e}") from e
    return parser


@dataclass(frozen=True)
class RunConfig:
    mode: str
    values: dict
    params: ModelParams = None
    base_dir: Path = field(default_factory=Path)

    def __getattr__(self, name):
        values = self.__dict__.get("values", {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    @property
    def uses_physical(self):
        return any(self.values.get(k) is not None for k in PHYSICAL_KEYS) or self.mode == "molecule"

    def with_overrides(self, **overrides):
        values = dict(self.values)
        for key, value in overrides.items():
            if value is not None:
                values[key] = value
        return replace(self, values=values)

    def output_dir(self):
        out = Path(self.values["output"])
        return out if out.is_absolute() else self.base_dir / out

    def layout(self):
        return HilbertLayout(n_trap=self.values["n_trap"])

    def initial_state(self):
        v = self.values
        return InitialState(kind=v["initial_state"], mean_n=v["initial_mean_n"], fock_n=v["initial_fock_n"])

    def propagation_settings(self):
        v = self.values
        return PropagationSettings(
            dt=v["dt"],
            t_end=v["t_end"],
            record_every=v["record_every"],
            engine=v["engine"],
            initial=self.initial_state(),
        )

    def numeric_engine(self):
        v = self.values
        return NumericRates(
            self.propagation_settings(),
            fit_mode=v["fit_mode"],
            horizon_factor=v["horizon_factor"],
            min_horizon=v["min_horizon"],
            max_horizon=v["max_horizon"],
            transient_kappa_periods=v["transient_kappa_periods"],
        )

    def delta_axis(self):
        v = self.values
        return make_axis(v["delta_min"], v["delta_max"], v["delta_points"])

    def delta_c_axis(self):
        v = self.values
        return make_axis(v["delta_c_min"], v["delta_c_max"], v["delta_c_points"])

    def trap(self):
        v = self.values
        return TrapSpec.from_hz(
            v["trap_frequency_hz"] or SETUP["trap_frequency_hz"],
            depth=v["trap_depth_uk"] or SETUP["trap_depth_uk"],
            trap_wavelength=v["trap_wavelength_nm"] or SETUP["trap_wavelength_nm"],
        )

    def cavity(self):
        v = self.values
        return CavitySpec.from_hz(
            v["cavity_field"] or SETUP["cavity_field"],
            v["cavity_linewidth_hz"] or SETUP["cavity_linewidth_hz"],
        )

    def molecule_path(self):
        path = self.values["molecule_file"]
        if path is None:
            return None
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    def molecules(self):
        return load_molecules(self.molecule_path())

    def to_manifest(self, version, timestamp):
        lines = [
            "# cavity-cooler run manifest",
            f"# version = {version}",
            f"# created = {timestamp}",
        ]
        skip = DIRECT_KEYS if self.uses_physical else PHYSICAL_KEYS
        values = dict(self.values, output=str(self.output_dir().resolve()))
        if values["molecule_file"] is not None:
            values["molecule_file"] = str(self.molecule_path().resolve())
        for section in SECTIONS:
            entries = [
                (key, values[key])
                for key, spec in KEYS.items()
                if spec[0] == section and key not in skip and values.get(key) is not None
            ]
            if section == "run":
                entries = [("mode", self.mode)] + [e for e in entries if e[0] != "mode"]
            if not entries:
                continue
            lines.append("")
            lines.append(f"[{section}]")
            lines.extend(f"{key} = {_serialize(value)}" for key, value in entries)
        if self.params is not None:
            lines.append("")
            lines.append("# resolved parameters in units of nu")
            for name in ("delta", "delta_c", "omega", "g", "kappa", "gamma", "eta", "phi", "theta_l", "theta_c", "nu_si"):
                lines.append(f"#   {name} = {_serialize(getattr(self.params, name))}")
            lines.append(f"#   n_trap = {self.params.layout.n_trap}")
        return "\n".join(lines) + "\n"


def _serialize(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_serialize(v) for v in value)
    return str(value)


def _required_drive(mode):
    if mode == "molecule":
        return ()
    if mode == "omega-scan":
        return ()
    if mode == "sweep":
        return ("omega",)
    return ("delta", "delta_c", "omega")


def _resolve_params(mode, values, base_dir):
    direct = [k for k in DIRECT_KEYS if values.get(k) is not None]
    physical = [k for k in PHYSICAL_KEYS if values.get(k) is not None]
    if mode == "molecule":
        if direct:
            raise ConfigError(f"mode = molecule takes the physical block only, found {', '.join(sorted(direct))}")
        return None
    if direct and physical:
        raise ConfigError(
            f"direct nu-unit block ({', '.join(sorted(direct))}) and physical block "
            f"({', '.join(sorted(physical))}) are mutually exclusive"
        )
    if not direct and not physical:
        raise ConfigError("one of the direct nu-unit block or the physical block is required")
    for key in _required_drive(mode):
        if values.get(key) is None:
            raise ConfigError(f"{key} required for mode = {mode}")

    drive = Drive(
        omega=values["omega"] if values["omega"] is not None else SWEEP["omega_axis"][0],
        delta=values["delta"] if values["delta"] is not None else -1.0,
        delta_c=values["delta_c"] if values["delta_c"] is not None else 0.0,
    )
    geometry = Geometry(phi=values["phi"], theta_l=values["theta_l"], theta_c=values["theta_c"])
    layout = HilbertLayout(n_trap=values["n_trap"])

    if direct:
        missing = [k for k in ("g", "kappa", "gamma", "eta") if values.get(k) is None]
        if missing:
            raise ConfigError(f"direct block is missing {', '.join(missing)}")
        return ModelParams(
            delta=drive.delta,
            delta_c=drive.delta_c,
            omega=drive.omega,
            g=values["g"],
            kappa=values["kappa"],
            gamma=values["gamma"],
            eta=values["eta"],
            phi=geometry.phi,
            theta_l=geometry.theta_l,
            theta_c=geometry.theta_c,
            nu_si=values["nu_si"] or 2 * math.pi * SETUP["trap_frequency_hz"],
            layout=layout,
        )

    draft = RunConfig(mode=mode, values=values, base_dir=base_dir)
    name = values["molecule"]
    if name is None:
        raise ConfigError("physical block needs molecule")
    molecules = draft.molecules()
    if name not in molecules:
        raise ConfigError(f"unknown molecule {name!r}, available: {', '.join(molecules)}")
    return to_model_params(molecules[name], draft.trap(), draft.cavity(), drive, geometry, layout)


def parse_config(text, base_dir=None) -> RunConfig:
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    parser = _read(text)

    raw = {}
    for section in parser.sections():
        if section != TOP and section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", _line_of(text, rf"^\s*\[{re.escape(section)}\]"))
        for key, value in parser.items(section, raw=True):
            if key not in KEYS:
                raise ConfigError(f"unknown key {key!r}", _key_line(text, key))
            if section != TOP and KEYS[key][0] != section:
                raise ConfigError(f"key {key!r} belongs to [{KEYS[key][0]}], not [{section}]", _key_line(text, key))
            if key in raw:
                raise ConfigError(f"duplicate key {key!r}", _key_line(text, key))
            raw[key] = value.strip()

    if "mode" not in raw:
        raise ConfigError("mode required")

    values = {}
    for key, (_, convert, default) in KEYS.items():
        if key not in raw:
            values[key] = default
            continue
        try:
            values[key] = convert(raw[key])
        except ValueError as e:
            raise ConfigError(f"{key}: {e}", _key_line(text, key)) from e

    mode = values["mode"]
    if values["molecule_file"] is not None:
        path = Path(values["molecule_file"])
        path = path if path.is_absolute() else base_dir / path
        if not path.is_file():
            raise ConfigError(f"molecule_file {values['molecule_file']!r} does not exist", _key_line(text, "molecule_file"))
    if mode == "convergence" and min(values["n_trap_list"]) < 3:
        raise ConfigError("n_trap_list values must be >= 3", _key_line(text, "n_trap_list"))
    omega_axis = values["omega_axis"]
    if omega_axis[0] <= 0 or any(b <= a for a, b in zip(omega_axis, omega_axis[1:])):
        raise ConfigError("omega_axis must be positive and strictly increasing", _key_line(text, "omega_axis"))

    params = _resolve_params(mode, values, base_dir)
    if params is not None:
        warn_lamb_dicke(params)
    return RunConfig(mode=mode, values=values, params=params, base_dir=base_dir)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"can not read config file {path}") from e
    return parse_config(text, base_dir=path.parent)
