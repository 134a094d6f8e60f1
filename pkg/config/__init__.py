"""
BEWS Toolkit - Konfiguration und Konstanten
===========================================
Zentrale Default-Werte für alle Module.
Szenario-Dateien (YAML) in config/scenarios/ überschreiben diese Werte.
"""

import math
from pathlib import Path

# ============================================================================
# PFADE
# ============================================================================
# .parent.parent: config/__init__.py → config/ → Projekt-Root
APP_DIR = Path(__file__).parent.parent
CONFIG_DIR = APP_DIR / "config"
SCENARIO_DIR = CONFIG_DIR / "scenarios"
EXAMPLE_SURFACE_FILE = CONFIG_DIR / "cone_coefficient_example.csv"
OUTPUT_DIR = APP_DIR / "output"

# ============================================================================
# VERSION
# ============================================================================
APP_VERSION = "1.0.0"
SCHEMA_VERSION = "1.0"       # Aktuelles Schema der YAML-Configs
MIN_SCHEMA_VERSION = "1.0"   # Älteste noch unterstützte Schema-Version

# ============================================================================
# ROTOR (Platzhalter einer Multi-MW-Anlage, keine Messwerte)
# ============================================================================
DEFAULT_ROTOR = {
    "radius": 60.0,                     # R [m]
    "air_density": 1.225,               # ρ [kg/m³]
    "rotor_speed": 2.0 * math.pi * 0.2,  # ω_r [rad/s], f_r = 0.2 Hz
}

# ============================================================================
# KEGELKOEFFIZIENT C_m(λ, ψ) - Surrogat
# ============================================================================
# C_m = (c0 + c1·λ + c2·λ²) · (1 + a·cos ψ)
DEFAULT_SURFACE = {
    "c0": 0.30,
    "c1": -0.012,
    "c2": 2.0e-4,
    "azimuth_amplitude": 0.1,   # a
    "lambda_min": 2.0,
    "lambda_max": 20.0,
    "lambda_step": 0.1,
    "azimuth_points": 64,
    "table_file": None,         # Optional: CSV-Tabelle statt Surrogat
}

# ============================================================================
# WINDFELD
# ============================================================================
DEFAULT_WIND = {
    "mean_speed": 10.0,          # Ū [m/s]
    "shear": 0.0,                # Relative 1P-Amplitude der Scherung
    "tower_shadow": 0.0,         # Relative Einbruchtiefe am Turm
    "tower_shadow_width": 0.3,   # Breite der Turmschatten-Glocke [rad]
    "harmonics": [],             # Liste von [vielfaches_1P, amplitude_m_s, phase_rad]
    "noise_std": 0.0,            # [m/s], Standard: aus
}

# ============================================================================
# SCHÄTZER
# ============================================================================
DEFAULT_GAINS = {
    "K_col": 0.6,
    "K_0": 1.2,
    "k_p": None,   # None → per Gain-Abbildung aus K_0
    "k_i": None,   # None → per Gain-Abbildung aus K_col
    "omega0": None,  # None → Rotordrehzahl des Szenarios
}

DEFAULT_ESTIMATOR = {
    "initial_estimate": 8.0,    # Û(0) [m/s]
    "clamp_min": 0.5,           # [m/s]
    "clamp_max": 40.0,          # [m/s]
    "feedback_sign": -1.0,      # Negative Rückkopplung: Û = K(s)·(−ε)
    "moment_scale": 1.0e6,      # Residuum in MNm an die Verstärkungen
    "divergence_margin": 20.0,  # [m/s] außerhalb des Clamp-Fensters → Divergenz
}

# ============================================================================
# SIMULATION
# ============================================================================
DEFAULT_SCENARIO = {
    "name": "uniform",
    "estimator": "both",        # pin | coleman | both
    "dt": 0.005,                # [s] → 1000 Schritte pro Umdrehung bei 0.2 Hz
    "duration": 300.0,          # [s] → 60 Umdrehungen
    "seed": 0,
    "initial_azimuth": 0.0,     # ψ₀ [rad]
}
MIN_STEPS_PER_REVOLUTION = 200
MIN_CONVERGENCE_REVOLUTIONS = 20

DEFAULT_METRICS = {
    "settling_tolerance": 0.01,  # |Û − U|/U
    "settling_hold": 5.0,        # Umdrehungen, die das Band gehalten werden muss
    "window_revolutions": 10.0,  # Auswertefenster am Ende der Simulation
}

# ============================================================================
# ANALYSE
# ============================================================================
DEFAULT_BODE = {
    "omega_min_factor": 1.0e-2,   # ω_min = Faktor · ω₀
    "omega_max_factor": 1.0e2,
    "points": 400,
    "refine_peak": True,          # Stützstellen ω₀(1 ± 10^-k), k = 3..5
    "diagonal_only": False,
    "include_pin": False,
}

DEFAULT_IDENTIFICATION = {
    "omega_min_factor": 0.05,
    "omega_max_factor": 5.0,
    "frequencies": 20,
    "amplitude": 1.0,
    "transient_cycles": 10,
    "fit_cycles": 20,
    "steps_per_period": 2000,
    "max_workers": 1,
}

DEFAULT_VERIFY = {
    "theorem1_grid": 1000,
    "theorem1_tolerance": 1.0e-12,
    "magnitude_tolerance": 0.01,   # 1 % relativ
    "phase_tolerance_deg": 1.0,
}

DEFAULT_COMPARE = {
    "shear_levels": [0.05, 0.1, 0.2],
    "ordering_tolerance": 1.0e-3,
}

# ============================================================================
# NUMERISCHE TOLERANZEN
# ============================================================================
NEAR_POLE_SCALE = 1.0e-300        # tf_eval: |den(s)| < Skala · Koeffizienten-Norm
BODE_POLE_EXCLUSION = 1.0e-6      # relativer Abstand zu Polen im Bode-Gitter
IDENT_POLE_EXCLUSION = 1.0e-3     # relativer Abstand zu {0, ω₀} bei Identifikation
FIT_RESIDUAL_LIMIT = 0.05         # 5 % der Ausgangsamplitude
IDENT_ERROR_FLOOR = 1.0e-2        # Bezugsgröße für Einträge nahe einer Nullstelle, relativ zu ‖H_ref‖_F
REALIZATION_TOLERANCE = 1.0e-9
RECONSTRUCTION_TOLERANCE = 1.0e-12

# ============================================================================
# LOGGING
# ============================================================================
LOG_LEVEL = "WARNING"              # Konsole; Override via BEWS_LOG
LOG_ENV_VAR = "BEWS_LOG"
LOG_DIR_ENV_VAR = "BEWS_LOG_DIR"

# ============================================================================
# EXIT-CODES (CLI)
# ============================================================================
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_DIVERGED = 3
