"""
BEWS Turbinenmodell - Surrogat-Rotor und Windfeld
==================================================
Blattwurzel-Biegemoment (MOoP) aus der Blattwindgeschwindigkeit:
    m = q · πR² · R · C_m(λ, ψ),  λ = ω_r·R/U,  q = ½ρU²

C_m kommt entweder aus dem analytischen Surrogat oder aus einer
CSV-Tabelle (erste Zeile λ, erste Spalte ψ).
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from config import DEFAULT_ROTOR, DEFAULT_SURFACE, DEFAULT_WIND
from modules.coleman_frame import AzimuthTriplet, BladeTriplet, TWO_PI
from modules.errors import ConfigError, NonPositiveWindError, OutOfEnvelopeError
from modules.logger import log_debug, log_info

# Numerischer Spielraum an den Gitterrändern
_EDGE_TOL = 1e-9


# ============================================================================
# ROTOR
# ============================================================================

@dataclass(frozen=True)
class RotorParams:
    """Rotorradius [m], Luftdichte [kg/m³], Nenndrehzahl [rad/s]"""
    radius: float = DEFAULT_ROTOR["radius"]
    air_density: float = DEFAULT_ROTOR["air_density"]
    rotor_speed: float = DEFAULT_ROTOR["rotor_speed"]

    def __post_init__(self):
        for name in ("radius", "air_density", "rotor_speed"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"RotorParams.{name} muss > 0 sein, ist {value}")

    @property
    def period(self) -> float:
        """Umdrehungsdauer T = 2π/ω_r [s]"""
        return TWO_PI / self.rotor_speed

    @property
    def moment_arm_area(self) -> float:
        """A_ref · R = πR³"""
        return math.pi * self.radius ** 3


def dynamic_pressure(air_density: float, speed):
    """q = ½ρU² [Pa]"""
    return 0.5 * air_density * np.square(speed)


@dataclass(frozen=True)
class BladeState:
    """
    Staudruck pro Blatt q_i [Pa], das q-Argument der Momentenabbildung.
    Im Schätzer q̂_i = ½ρÛ_i², in der Messung q_i = ½ρU_i².
    """
    q: Tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, 'q', tuple(float(v) for v in self.q))
        if len(self.q) != 3:
            raise ValueError(f"BladeState braucht drei Werte: {self.q}")
        if any(not (v >= 0) for v in self.q):
            raise ValueError(f"Staudruck muss ≥ 0 sein: {self.q}")

    @classmethod
    def from_wind(cls, rotor: RotorParams, speeds) -> 'BladeState':
        """Aus BladeTriplet oder Array der Blattwinde"""
        if isinstance(speeds, BladeTriplet):
            speeds = speeds.as_array()
        return cls(tuple(dynamic_pressure(rotor.air_density, np.asarray(speeds, dtype=float))))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.q)


# ============================================================================
# KEGELKOEFFIZIENT
# ============================================================================

@dataclass(frozen=True, eq=False)
class ConeCoefficientSurface:
    """
    C_m(λ, ψ) auf einem Gitter, bilinear interpoliert, periodisch in ψ.

    values hat die Form (len(lambdas), len(psis)); psis liegt in [0, 2π)
    und wird intern um den ersten Stützpunkt + 2π ergänzt.
    """
    lambdas: np.ndarray
    psis: np.ndarray
    values: np.ndarray
    source: str = "surrogate"
    _interp: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        psi = np.asarray(self.psis, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if lam.ndim != 1 or lam.size < 2 or np.any(np.diff(lam) <= 0):
            raise ValueError("λ-Stützstellen müssen streng steigend sein (mindestens 2)")
        if psi.ndim != 1 or psi.size < 1 or np.any(np.diff(psi) <= 0):
            raise ValueError("ψ-Stützstellen müssen streng steigend sein")
        if psi[0] < 0 or psi[-1] >= psi[0] + TWO_PI:
            raise ValueError("ψ-Stützstellen müssen eine Periode [ψ₀, ψ₀+2π) abdecken")
        if val.shape != (lam.size, psi.size):
            raise ValueError(f"C_m-Tabelle hat Form {val.shape}, erwartet {(lam.size, psi.size)}")
        if not np.all(np.isfinite(val)):
            raise ValueError("C_m-Tabelle enthält nicht-endliche Werte")

        psi_wrapped = np.append(psi, psi[0] + TWO_PI)
        val_wrapped = np.column_stack([val, val[:, :1]])
        interp = RegularGridInterpolator((lam, psi_wrapped), val_wrapped, method="linear")
        object.__setattr__(self, 'lambdas', lam)
        object.__setattr__(self, 'psis', psi)
        object.__setattr__(self, 'values', val)
        object.__setattr__(self, '_interp', interp)

    @property
    def lambda_min(self) -> float:
        return float(self.lambdas[0])

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas[-1])

    def speed_window(self, rotor_speed: float, radius: float) -> Tuple[float, float]:
        """Windgeschwindigkeiten, deren λ im Gitter liegt"""
        return rotor_speed * radius / self.lambda_max, rotor_speed * radius / self.lambda_min

    def coefficient(self, lam, psi):
        """
        C_m an (λ, ψ), skalar oder elementweise.

        Raises:
            OutOfEnvelopeError: λ außerhalb des Gitters
        """
        lam_arr = np.asarray(lam, dtype=float)
        psi_arr = np.asarray(psi, dtype=float)
        lo, hi = self.lambda_min, self.lambda_max
        if np.any(lam_arr < lo - _EDGE_TOL) or np.any(lam_arr > hi + _EDGE_TOL) \
                or not np.all(np.isfinite(lam_arr)):
            raise OutOfEnvelopeError(
                f"λ = {lam_arr} außerhalb des C_m-Gitters [{lo}, {hi}]"
            )
        lam_arr = np.clip(lam_arr, lo, hi)
        psi_q = np.mod(psi_arr - self.psis[0], TWO_PI) + self.psis[0]
        lam_b, psi_b = np.broadcast_arrays(lam_arr, psi_q)
        points = np.column_stack([lam_b.ravel(), psi_b.ravel()])
        result = self._interp(points).reshape(lam_b.shape)
        return float(result) if result.ndim == 0 else result

    def lambda_slope_sign(self) -> int:
        """
        Vorzeichen von ∂C_m/∂λ über das ganze Gitter: −1, +1 oder 0 (gemischt).
        ∂C_m/∂U hat über λ = ω_r R/U das umgekehrte Vorzeichen.
        """
        slopes = np.diff(self.values, axis=0)
        if np.all(slopes < 0):
            return -1
        if np.all(slopes > 0):
            return 1
        return 0

    def max_slope(self) -> float:
        """Größter Betrag der Differenzenquotienten (Glattheits-Proxy)"""
        d_lam = np.abs(np.diff(self.values, axis=0)) / np.diff(self.lambdas)[:, None]
        psi_wrapped = np.append(self.psis, self.psis[0] + TWO_PI)
        val_wrapped = np.column_stack([self.values, self.values[:, :1]])
        d_psi = np.abs(np.diff(val_wrapped, axis=1)) / np.diff(psi_wrapped)[None, :]
        return float(max(d_lam.max(), d_psi.max()))


def surrogate_coefficient(lam, psi, c0: float, c1: float, c2: float, amplitude: float):
    """C_m = (c0 + c1·λ + c2·λ²)(1 + a·cos ψ)"""
    lam = np.asarray(lam, dtype=float)
    return (c0 + c1 * lam + c2 * lam ** 2) * (1.0 + amplitude * np.cos(psi))


def default_surface(**overrides) -> ConeCoefficientSurface:
    """Surrogat-Fläche auf λ ∈ [2, 20] (Schritt 0.1) × 64 Azimut-Stützstellen"""
    p = {**DEFAULT_SURFACE, **overrides}
    n_lam = int(round((p["lambda_max"] - p["lambda_min"]) / p["lambda_step"])) + 1
    lambdas = np.linspace(p["lambda_min"], p["lambda_max"], n_lam)
    psis = TWO_PI * np.arange(int(p["azimuth_points"])) / int(p["azimuth_points"])
    lam_grid, psi_grid = np.meshgrid(lambdas, psis, indexing="ij")
    values = surrogate_coefficient(lam_grid, psi_grid, p["c0"], p["c1"], p["c2"],
                                   p["azimuth_amplitude"])
    surface = ConeCoefficientSurface(lambdas, psis, values, source="surrogate")
    if surface.lambda_slope_sign() == 0:
        log_info("Surrogat-Fläche ist nicht monoton in λ", "TURBINE")
    return surface


def load_surface(path) -> ConeCoefficientSurface:
    """
    Lädt eine C_m-Tabelle (CSV, '#' für Kommentare).

    Erste Zeile: λ-Stützstellen (erste Zelle Platzhalter),
    erste Spalte: ψ-Stützstellen [rad], Rumpf: C_m[ψ, λ].

    Raises:
        ConfigError: Datei fehlt oder Tabelle ungültig
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"C_m-Tabelle nicht gefunden: {path}")
    try:
        table = np.genfromtxt(path, delimiter=",", comments="#", dtype=float)
    except ValueError as e:
        raise ConfigError(f"C_m-Tabelle {path.name} nicht lesbar: {e}") from e
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 3:
        raise ConfigError(f"C_m-Tabelle {path.name}: mindestens 1 ψ-Zeile und 2 λ-Spalten nötig")

    lambdas = table[0, 1:]
    psis = table[1:, 0]
    try:
        surface = ConeCoefficientSurface(lambdas, psis, table[1:, 1:].T, source=str(path))
    except ValueError as e:
        raise ConfigError(f"C_m-Tabelle {path.name}: {e}") from e
    log_debug(f"C_m-Tabelle geladen: {lambdas.size}×{psis.size} aus {path}", "TURBINE")
    return surface


# ============================================================================
# MOMENT
# ============================================================================

def moment(params: RotorParams, surface: ConeCoefficientSurface,
           omega_r: float, speed, q, psi):
    """
    m = q · πR² · R · C_m(ω_r R/U, ψ) [Nm], skalar oder elementweise.

    Raises:
        NonPositiveWindError: U ≤ 0
        OutOfEnvelopeError: λ außerhalb des Gitters
    """
    speed = np.asarray(speed, dtype=float)
    if np.any(~(speed > 0)):
        raise NonPositiveWindError(f"Windgeschwindigkeit muss > 0 sein: {speed}")
    lam = omega_r * params.radius / speed
    result = np.asarray(q, dtype=float) * params.moment_arm_area * surface.coefficient(lam, psi)
    return float(result) if np.ndim(result) == 0 else result


# ============================================================================
# WINDFELD
# ============================================================================

@dataclass(frozen=True)
class WindFieldConfig:
    """
    Mittelwind, Scherung (relative 1P-Amplitude), Turmschatten,
    Zusatzharmonische (Vielfaches von 1P, Amplitude m/s, Phase rad), Rauschen.
    """
    mean_speed: float = DEFAULT_WIND["mean_speed"]
    shear: float = DEFAULT_WIND["shear"]
    tower_shadow: float = DEFAULT_WIND["tower_shadow"]
    tower_shadow_width: float = DEFAULT_WIND["tower_shadow_width"]
    harmonics: Tuple[Tuple[float, float, float], ...] = ()
    noise_std: float = DEFAULT_WIND["noise_std"]

    def __post_init__(self):
        if not (math.isfinite(self.mean_speed) and self.mean_speed > 0):
            raise ValueError(f"Mittelwind muss > 0 sein, ist {self.mean_speed}")
        if self.tower_shadow < 0 or self.noise_std < 0 or self.tower_shadow_width <= 0:
            raise ValueError("Turmschatten, Breite und Rauschen dürfen nicht negativ sein")
        object.__setattr__(self, 'harmonics',
                           tuple(tuple(float(v) for v in h) for h in self.harmonics))
        if any(len(h) != 3 for h in self.harmonics):
            raise ValueError("Harmonische brauchen [vielfaches, amplitude, phase]")

    @property
    def is_uniform(self) -> bool:
        return (self.shear == 0 and self.tower_shadow == 0
                and not self.harmonics and self.noise_std == 0)

    def deterministic_minimum(self) -> float:
        """Untere Schranke für U_i ohne Rauschen"""
        return (self.mean_speed * (1.0 - abs(self.shear) - self.tower_shadow)
                - sum(abs(h[1]) for h in self.harmonics))


def _shadow_profile(psi: np.ndarray, width: float) -> np.ndarray:
    """Gauß-Glocke um ψ = π (Blatt zeigt nach unten)"""
    offset = np.mod(psi, TWO_PI) - math.pi
    return np.exp(-0.5 * (offset / width) ** 2)


def bews_true(cfg: WindFieldConfig, psi: AzimuthTriplet, t: float,
              rng: Optional[np.random.Generator] = None) -> BladeTriplet:
    """
    Blatteffektive Windgeschwindigkeit U_i(t) [m/s].

    Scherung wirkt als Ū·shear·cos ψ_i (Blatt oben bei ψ = 0),
    Harmonische als A·sin(k·ψ_i + φ). Rauschen nur mit Generator.

    Raises:
        NonPositiveWindError: ein U_i ≤ 0
    """
    return BladeTriplet.from_array(_wind_samples(cfg, psi.as_array(), rng))


def _wind_samples(cfg: WindFieldConfig, angles: np.ndarray,
                  rng: Optional[np.random.Generator]) -> np.ndarray:
    speeds = cfg.mean_speed * (1.0 + cfg.shear * np.cos(angles))
    if cfg.tower_shadow:
        speeds = speeds - cfg.mean_speed * cfg.tower_shadow * _shadow_profile(
            angles, cfg.tower_shadow_width)
    for multiple, amplitude, phase in cfg.harmonics:
        speeds = speeds + amplitude * np.sin(multiple * angles + phase)
    if cfg.noise_std > 0:
        if rng is None:
            raise ValueError("Rauschen braucht einen Zufallsgenerator (Seed)")
        speeds = speeds + rng.normal(0.0, cfg.noise_std, size=3)
    if np.any(~(speeds > 0)):
        raise NonPositiveWindError(f"Windfeld erzeugt U_i ≤ 0: {speeds}")
    return speeds


class WindField:
    """
    Windfeld eines Szenarios mit eigenem, geseedetem Generator.
    Gleiche Seeds und gleiche Abfragefolge → identische Samples.
    """

    def __init__(self, cfg: WindFieldConfig, seed: int = 0):
        self.cfg = cfg
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def sample(self, psi: AzimuthTriplet, t: float) -> BladeTriplet:
        return bews_true(self.cfg, psi, t, self._rng)

    def sample_array(self, angles: Sequence[float]) -> np.ndarray:
        """Wie sample, aber direkt auf Blattazimut-Array (Hot-Loop)"""
        return _wind_samples(self.cfg, np.asarray(angles, dtype=float), self._rng)


class MomentModel:
    """
    Momentenabbildung des Rotors: Blattwind → MOoP mit q = ½ρU².
    Dient als Messung (mit U_i) und als Modell im Schätzer (mit Û_i).
    """

    def __init__(self, rotor: RotorParams, surface: ConeCoefficientSurface):
        self.rotor = rotor
        self.surface = surface

    def speed_window(self, omega_r: float) -> Tuple[float, float]:
        return self.surface.speed_window(omega_r, self.rotor.radius)

    def blade_state(self, speeds) -> BladeState:
        return BladeState.from_wind(self.rotor, speeds)

    def blade_moments(self, omega_r: float, speeds, angles,
                      state: Optional[BladeState] = None) -> np.ndarray:
        """m_i für alle Blätter [Nm]; ohne state gilt q_i = ½ρU_i²"""
        speeds = np.asarray(speeds, dtype=float)
        if state is None:
            state = self.blade_state(speeds)
        return np.asarray(moment(self.rotor, self.surface, omega_r, speeds, state.as_array(), angles))


__all__ = [
    'RotorParams', 'BladeState', 'ConeCoefficientSurface', 'WindFieldConfig',
    'WindField', 'MomentModel', 'dynamic_pressure', 'surrogate_coefficient',
    'default_surface', 'load_surface', 'moment', 'bews_true',
]
