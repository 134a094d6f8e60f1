"""
BEWS Simulations-Harness
========================
Geschlossener Kreis: Windfeld → Momente (Messung) → Residuum → Schätzer.
Ein Takt für Anlage und Schätzer; ψ_k = ψ₀ + ω_r·(k·dt) exakt aus dem
Schrittindex, gewrappt nur in der Trigonometrie.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from config import DEFAULT_SCENARIO, MIN_STEPS_PER_REVOLUTION
from modules.coleman_frame import blade_azimuths
from modules.errors import NonFiniteError
from modules.estimators import EstimatorGains, EstimatorSettings, make_estimator, residual
from modules.logger import log_debug, log_error, log_info
from modules.turbine_model import (
    ConeCoefficientSurface, MomentModel, RotorParams, WindField, WindFieldConfig,
    default_surface,
)

ESTIMATOR_CHOICES = {"pin": ("pin",), "coleman": ("coleman",), "both": ("pin", "coleman")}


@dataclass(frozen=True)
class Scenario:
    """Alles, was ein Lauf braucht; dt ≤ T/200, dt > 0, duration ≥ 0"""
    gains: EstimatorGains
    rotor: RotorParams = field(default_factory=RotorParams)
    surface: ConeCoefficientSurface = field(default_factory=default_surface)
    wind: WindFieldConfig = field(default_factory=WindFieldConfig)
    settings: EstimatorSettings = field(default_factory=EstimatorSettings)
    estimator: str = DEFAULT_SCENARIO["estimator"]
    dt: float = DEFAULT_SCENARIO["dt"]
    duration: float = DEFAULT_SCENARIO["duration"]
    seed: int = DEFAULT_SCENARIO["seed"]
    initial_azimuth: float = DEFAULT_SCENARIO["initial_azimuth"]
    name: str = DEFAULT_SCENARIO["name"]

    def __post_init__(self):
        if self.estimator not in ESTIMATOR_CHOICES:
            raise ValueError(f"estimator muss pin, coleman oder both sein, ist '{self.estimator}'")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt muss > 0 sein, ist {self.dt}")
        if self.dt > self.rotor.period / MIN_STEPS_PER_REVOLUTION:
            raise ValueError(
                f"dt = {self.dt} zu groß: höchstens T/{MIN_STEPS_PER_REVOLUTION} = "
                f"{self.rotor.period / MIN_STEPS_PER_REVOLUTION:.6g} s"
            )
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ValueError(f"duration muss ≥ 0 sein, ist {self.duration}")

    @property
    def kinds(self) -> Tuple[str, ...]:
        return ESTIMATOR_CHOICES[self.estimator]

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def revolutions(self) -> float:
        return self.duration / self.rotor.period


@dataclass
class EstimatorTrace:
    eps: np.ndarray      # (N, 3) Nm
    u_hat: np.ndarray    # (N, 3) m/s, die zur Residuumsbildung benutzte Schätzung


@dataclass
class Trace:
    """Zeitreihen auf gleichförmigem Gitter, alle gleich lang"""
    t: np.ndarray
    psi: np.ndarray
    wind: np.ndarray
    moments: np.ndarray
    estimates: Dict[str, EstimatorTrace]
    clamp_events: Dict[str, int]
    omega_r: float

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega_r

    def __len__(self) -> int:
        return self.t.size

    def final_estimate(self, kind: str) -> np.ndarray:
        return self.estimates[kind].u_hat[-1]


def run(scenario: Scenario) -> Trace:
    """
    Simuliert den Regelkreis; deterministisch bei festem Seed.

    Raises:
        NonFiniteError / DivergenceError: Schätzer instabil (mit Schrittindex)
        NonPositiveWindError: Windfeld erzeugt U_i ≤ 0
    """
    n = scenario.n_steps
    omega = scenario.rotor.rotor_speed
    dt = scenario.dt
    model = MomentModel(scenario.rotor, scenario.surface)
    window = model.speed_window(omega)
    estimators = {
        kind: make_estimator(kind, scenario.gains, scenario.settings, window)
        for kind in scenario.kinds
    }
    wind_field = WindField(scenario.wind, scenario.seed)

    t = dt * np.arange(n)
    psi = scenario.initial_azimuth + omega * t
    wind = np.empty((n, 3))
    moments = np.empty((n, 3))
    records = {kind: EstimatorTrace(np.empty((n, 3)), np.empty((n, 3))) for kind in estimators}

    log_info(f"Szenario '{scenario.name}': {n} Schritte, {scenario.revolutions:.1f} Umdrehungen, "
             f"Schätzer {', '.join(estimators)}", "SIM")
    for k in range(n):
        angles = blade_azimuths(psi[k])
        speeds = wind_field.sample_array(angles)
        measured = model.blade_moments(omega, speeds, angles)
        wind[k] = speeds
        moments[k] = measured
        psi_next = scenario.initial_azimuth + omega * ((k + 1) * dt)
        for kind, est in estimators.items():
            u_hat = est.estimate
            eps = residual(omega, u_hat, psi[k], measured, model)
            records[kind].u_hat[k] = u_hat
            records[kind].eps[k] = eps
            try:
                est.step(eps, omega, psi[k], psi_next, dt)
            except NonFiniteError as e:
                log_error(f"{kind} divergiert bei t = {t[k]:.3f} s (Schritt {k}): {e}", "SIM")
                raise

    clamp_events = {kind: est.clamp_events for kind, est in estimators.items()}
    for kind, count in clamp_events.items():
        if count:
            log_info(f"{kind}: {count} Clamp-Ereignisse", "SIM")
    log_debug(f"Szenario '{scenario.name}' fertig", "SIM")
    return Trace(t=t, psi=psi, wind=wind, moments=moments, estimates=records,
                 clamp_events=clamp_events, omega_r=omega)


def trace_header(kinds) -> List[str]:
    """t, psi, U1..3, m1..3, dann eps/Uhat (mit Suffix, wenn mehrere Schätzer)"""
    header = ["t", "psi", "U1", "U2", "U3", "m1", "m2", "m3"]
    kinds = list(kinds)
    for kind in kinds:
        suffix = f"_{kind}" if len(kinds) > 1 else ""
        header += [f"eps{i}{suffix}" for i in (1, 2, 3)]
        header += [f"Uhat{i}{suffix}" for i in (1, 2, 3)]
    return header


def write_trace_csv(trace: Trace, path) -> Path:
    """Trace als CSV, Floats in kürzester Rundreise-Darstellung"""
    path = Path(path)
    kinds = list(trace.estimates)
    columns = [trace.t[:, None], trace.psi[:, None], trace.wind, trace.moments]
    for kind in kinds:
        columns += [trace.estimates[kind].eps, trace.estimates[kind].u_hat]
    table = np.hstack(columns) if len(trace) else np.empty((0, len(trace_header(kinds))))
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(trace_header(kinds))
        for row in table:
            writer.writerow([repr(float(v)) for v in row])
    return path


__all__ = ['Scenario', 'Trace', 'EstimatorTrace', 'run', 'trace_header', 'write_trace_csv',
           'ESTIMATOR_CHOICES']
