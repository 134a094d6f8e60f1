"""
BEWS Config Loader
==================
Lädt Szenario-/Analyse-Configs (YAML) und baut daraus die Laufzeit-Objekte.
Die Datei wird über die Defaults aus config/ gelegt; unbekannte Schlüssel
und falsche Typen sind Fehler, keine Warnungen.
"""

import copy
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from packaging.version import InvalidVersion, Version

from config import (
    DEFAULT_BODE, DEFAULT_COMPARE, DEFAULT_ESTIMATOR, DEFAULT_GAINS, DEFAULT_IDENTIFICATION,
    DEFAULT_METRICS, DEFAULT_ROTOR, DEFAULT_SCENARIO, DEFAULT_SURFACE, DEFAULT_VERIFY,
    DEFAULT_WIND, MIN_CONVERGENCE_REVOLUTIONS, MIN_SCHEMA_VERSION, SCHEMA_VERSION,
)
from modules.analysis import BodeGridSpec
from modules.errors import BewsError, ConfigError
from modules.estimators import EstimatorGains, EstimatorSettings, theorem1_map
from modules.logger import log_debug, log_warning
from modules.sim_harness import Scenario
from modules.turbine_model import RotorParams, WindFieldConfig, default_surface, load_surface

# Abschnitt → Defaults; die Schlüssel der Defaults sind zugleich das Schema
SECTIONS: Dict[str, dict] = {
    "scenario": DEFAULT_SCENARIO,
    "rotor": DEFAULT_ROTOR,
    "surface": DEFAULT_SURFACE,
    "wind": DEFAULT_WIND,
    "gains": DEFAULT_GAINS,
    "estimator": DEFAULT_ESTIMATOR,
    "metrics": DEFAULT_METRICS,
    "bode": DEFAULT_BODE,
    "identification": DEFAULT_IDENTIFICATION,
    "verify": DEFAULT_VERIFY,
    "compare": DEFAULT_COMPARE,
}

# Schlüssel mit Default None: erlaubter Typ, falls gesetzt
_OPTIONAL_TYPES = {
    ("gains", "k_p"): "number",
    ("gains", "k_i"): "number",
    ("gains", "omega0"): "number",
    ("surface", "table_file"): "string",
}


@dataclass(frozen=True)
class IdentificationSpec:
    omega_min_factor: float = DEFAULT_IDENTIFICATION["omega_min_factor"]
    omega_max_factor: float = DEFAULT_IDENTIFICATION["omega_max_factor"]
    frequencies: int = DEFAULT_IDENTIFICATION["frequencies"]
    amplitude: float = DEFAULT_IDENTIFICATION["amplitude"]
    transient_cycles: int = DEFAULT_IDENTIFICATION["transient_cycles"]
    fit_cycles: int = DEFAULT_IDENTIFICATION["fit_cycles"]
    steps_per_period: int = DEFAULT_IDENTIFICATION["steps_per_period"]
    max_workers: int = DEFAULT_IDENTIFICATION["max_workers"]

    def __post_init__(self):
        if not 0 < self.omega_min_factor <= self.omega_max_factor:
            raise ValueError("identification: 0 < omega_min_factor ≤ omega_max_factor erforderlich")
        if self.frequencies < 1 or self.amplitude <= 0:
            raise ValueError("identification: frequencies ≥ 1 und amplitude > 0 erforderlich")
        if self.transient_cycles < 10 or self.fit_cycles < 20:
            raise ValueError("identification: mindestens 10 Einschwing- und 20 Fit-Zyklen")
        if self.steps_per_period < 20 or self.max_workers < 1:
            raise ValueError("identification: steps_per_period ≥ 20 und max_workers ≥ 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class VerifySpec:
    theorem1_grid: int = DEFAULT_VERIFY["theorem1_grid"]
    theorem1_tolerance: float = DEFAULT_VERIFY["theorem1_tolerance"]
    magnitude_tolerance: float = DEFAULT_VERIFY["magnitude_tolerance"]
    phase_tolerance_deg: float = DEFAULT_VERIFY["phase_tolerance_deg"]

    def __post_init__(self):
        if self.theorem1_grid < 1:
            raise ValueError("verify: theorem1_grid ≥ 1 erforderlich")
        if min(self.theorem1_tolerance, self.magnitude_tolerance, self.phase_tolerance_deg) <= 0:
            raise ValueError("verify: Toleranzen müssen > 0 sein")


@dataclass(frozen=True)
class CompareSpec:
    shear_levels: tuple = tuple(DEFAULT_COMPARE["shear_levels"])
    ordering_tolerance: float = DEFAULT_COMPARE["ordering_tolerance"]

    def __post_init__(self):
        object.__setattr__(self, 'shear_levels', tuple(float(s) for s in self.shear_levels))
        if self.ordering_tolerance < 0:
            raise ValueError("compare: ordering_tolerance darf nicht negativ sein")


@dataclass(frozen=True)
class BewsConfig:
    """Vollständig validierte Konfiguration eines CLI-Laufs"""
    scenario: Scenario
    metrics: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_METRICS))
    bode: BodeGridSpec = field(default_factory=BodeGridSpec)
    identification: IdentificationSpec = field(default_factory=IdentificationSpec)
    verify: VerifySpec = field(default_factory=VerifySpec)
    compare: CompareSpec = field(default_factory=CompareSpec)
    source: Optional[Path] = None

    @property
    def gains(self) -> EstimatorGains:
        return self.scenario.gains

    def with_seed(self, seed: int) -> 'BewsConfig':
        return replace(self, scenario=replace(self.scenario, seed=int(seed)))

    def with_gains(self, gains: EstimatorGains) -> 'BewsConfig':
        return replace(self, scenario=replace(self.scenario, gains=gains))


class ConfigLoader:
    """Liest eine YAML-Config und legt sie über die Defaults"""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None

    def load(self) -> BewsConfig:
        """
        Raises:
            ConfigError: Datei fehlt, ist kein gültiges YAML oder verletzt das Schema
        """
        if self.path is None:
            return self.from_dict({})
        if not self.path.is_file():
            raise ConfigError(f"Config nicht gefunden: {self.path}")
        try:
            with open(self.path, 'r', encoding='utf-8') as f:
                raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{self.path}: ungültiges YAML ({e})") from e
        except OSError as e:
            raise ConfigError(f"{self.path}: nicht lesbar ({e})") from e
        log_debug(f"Config geladen: {self.path}", "CONFIG")
        return self.from_dict(raw if raw is not None else {}, self.path.parent, self.path)

    @classmethod
    def from_dict(cls, raw: Any, base_dir: Optional[Path] = None,
                  source: Optional[Path] = None) -> BewsConfig:
        if not isinstance(raw, dict):
            raise ConfigError("Config muss ein Mapping auf oberster Ebene sein")
        raw = dict(raw)
        check_schema_version(raw.pop("schema_version", None))
        unknown = sorted(set(raw) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"Unbekannte Abschnitte: {', '.join(map(str, unknown))}")
        merged = {name: merge_section(name, defaults, raw.get(name))
                  for name, defaults in SECTIONS.items()}
        try:
            return cls._build(merged, base_dir or Path.cwd(), source)
        except BewsError:
            raise
        except (ValueError, TypeError) as e:
            raise ConfigError(str(e)) from e

    @staticmethod
    def _build(merged: Dict[str, dict], base_dir: Path, source: Optional[Path]) -> BewsConfig:
        rotor = RotorParams(**merged["rotor"])
        surface = _build_surface(merged["surface"], base_dir)
        wind_raw = dict(merged["wind"])
        wind = WindFieldConfig(**{**wind_raw, "harmonics": tuple(wind_raw["harmonics"])})
        settings = EstimatorSettings(**merged["estimator"])
        gains = _build_gains(merged["gains"], rotor)
        scenario = Scenario(gains=gains, rotor=rotor, surface=surface, wind=wind,
                            settings=settings, **merged["scenario"])
        if 0 < scenario.revolutions < MIN_CONVERGENCE_REVOLUTIONS:
            log_warning(f"Simulationsdauer {scenario.revolutions:.1f} Umdrehungen < "
                        f"{MIN_CONVERGENCE_REVOLUTIONS}: Schätzer evtl. nicht eingeschwungen",
                        "CONFIG")
        if wind.deterministic_minimum() <= 0:
            log_warning("Windfeld kann U_i ≤ 0 erzeugen (Scherung/Turmschatten zu groß)", "CONFIG")
        metrics = dict(merged["metrics"])
        if metrics["settling_tolerance"] <= 0 or metrics["window_revolutions"] <= 0 \
                or metrics["settling_hold"] < 0:
            raise ValueError("metrics: Toleranz und Fenster > 0, hold ≥ 0 erforderlich")
        compare = dict(merged["compare"])
        return BewsConfig(
            scenario=scenario,
            metrics=metrics,
            bode=BodeGridSpec(**merged["bode"]),
            identification=IdentificationSpec(**merged["identification"]),
            verify=VerifySpec(**merged["verify"]),
            compare=CompareSpec(shear_levels=tuple(compare["shear_levels"]),
                                ordering_tolerance=compare["ordering_tolerance"]),
            source=source,
        )


def check_schema_version(value) -> Optional[Version]:
    """Fehlt → aktuelles Schema; zu alt → ConfigError; neuer → Warnung"""
    if value is None:
        return None
    try:
        version = Version(str(value))
    except InvalidVersion as e:
        raise ConfigError(f"Ungültige schema_version: {value!r}") from e
    if version < Version(MIN_SCHEMA_VERSION):
        raise ConfigError(f"schema_version {version} wird nicht mehr unterstützt "
                          f"(mindestens {MIN_SCHEMA_VERSION})")
    if version > Version(SCHEMA_VERSION):
        log_warning(f"schema_version {version} ist neuer als {SCHEMA_VERSION}", "CONFIG")
    return version


def merge_section(name: str, defaults: dict, override: Any) -> dict:
    """Legt einen Abschnitt über seine Defaults; prüft Schlüssel und Typen"""
    merged = copy.deepcopy(defaults)
    if override is None:
        return merged
    if not isinstance(override, dict):
        raise ConfigError(f"Abschnitt '{name}' muss ein Mapping sein")
    for key, value in override.items():
        if key not in defaults:
            raise ConfigError(f"Unbekannter Schlüssel '{name}.{key}' "
                              f"(erlaubt: {', '.join(sorted(defaults))})")
        merged[key] = _check_type(name, key, defaults[key], value)
    return merged


def _check_type(section: str, key: str, default: Any, value: Any) -> Any:
    where = f"{section}.{key}"
    if default is None:
        if value is None:
            return None
        kind = _OPTIONAL_TYPES.get((section, key), "number")
        if kind == "string":
            if not isinstance(value, str):
                raise ConfigError(f"{where}: Text erwartet, erhalten {value!r}")
            return value
        return _as_number(where, value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: true/false erwartet, erhalten {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: Ganzzahl erwartet, erhalten {value!r}")
        return value
    if isinstance(default, float):
        return _as_number(where, value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: Text erwartet, erhalten {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where}: Liste erwartet, erhalten {value!r}")
        return [_check_list_item(where, item) for item in value]
    return value


def _check_list_item(where: str, item: Any):
    if isinstance(item, list):
        return [_as_number(where, v) for v in item]
    return _as_number(where, item)


def _as_number(where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: Zahl erwartet, erhalten {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}: Wert muss endlich sein")
    return value


def _build_surface(params: dict, base_dir: Path):
    table = params.get("table_file")
    if table:
        path = Path(table)
        if not path.is_absolute():
            path = base_dir / path
        return load_surface(path)
    return default_surface(**{k: v for k, v in params.items() if k != "table_file"})


def _build_gains(params: dict, rotor: RotorParams) -> EstimatorGains:
    omega0 = params["omega0"] if params["omega0"] is not None else rotor.rotor_speed
    k_col, k_0 = params["K_col"], params["K_0"]
    k_p, k_i = params["k_p"], params["k_i"]
    if k_p is None or k_i is None:
        mapped_p, mapped_i = theorem1_map(k_col, k_0, omega0)
        k_p = mapped_p if k_p is None else k_p
        k_i = mapped_i if k_i is None else k_i
    gains = EstimatorGains(k_p=k_p, k_i=k_i, k_col=k_col, k_0=k_0, omega0=omega0)
    if not gains.is_theorem1_consistent():
        log_warning("PIN-Gains weichen von der Gain-Abbildung ab", "CONFIG")
    return gains


__all__ = [
    'ConfigLoader', 'BewsConfig', 'IdentificationSpec', 'VerifySpec', 'CompareSpec',
    'SECTIONS', 'check_schema_version', 'merge_section',
]
