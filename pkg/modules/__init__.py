"""
BEWS Toolkit - Modul-Initializer
"""

__version__ = "1.0.0"
__author__ = "BEWS Project Contributors"
__description__ = "BEWS - Blattweise Windgeschwindigkeits-Schätzer (PIN und Coleman)"

# Leichte Kern-Module; cli/analysis/sim_harness werden bei Bedarf importiert
from modules.errors import BewsError
from modules.estimators import (
    ColemanEstimator, EstimatorGains, PinEstimator, build_c_col, theorem1_map,
)

__all__ = [
    "BewsError",
    "EstimatorGains",
    "PinEstimator",
    "ColemanEstimator",
    "build_c_col",
    "theorem1_map",
]
