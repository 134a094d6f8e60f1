"""
BEWS Fehlerklassen
==================
Alle fachlichen Fehler erben von BewsError, damit die CLI sie
auf Exit-Codes abbilden kann (ConfigError → 2, NonFiniteError → 3).
"""

from typing import Optional


class BewsError(Exception):
    """Basisklasse aller Toolkit-Fehler"""


class NearPoleError(BewsError):
    """Auswertung (oder Identifikation) zu nah an einem Pol"""


class ConvergenceFailure(BewsError):
    """Nullstellensuche des Nennerpolynoms fehlgeschlagen"""


class ImproperTfError(BewsError):
    """Zählergrad > Nennergrad, keine Zustandsraum-Realisierung möglich"""


class RealizationError(BewsError):
    """Realisierung reproduziert die Übertragungsfunktion nicht"""


class NonFiniteError(BewsError):
    """Zustand wurde NaN/Inf"""

    def __init__(self, message: str, step_index: Optional[int] = None):
        if step_index is not None:
            message = f"{message} (Schritt {step_index})"
        super().__init__(message)
        self.step_index = step_index


class DivergenceError(NonFiniteError):
    """Unbegrenzte Schätzung hat das Clamp-Fenster weit verlassen"""


class ReconstructionMismatch(BewsError):
    """Zerlegung C₋/C₊/C_col reproduziert die Coleman-Matrix nicht"""


class NonPositiveWindError(BewsError):
    """Windfeld erzeugt U_i ≤ 0"""


class OutOfEnvelopeError(BewsError):
    """Schnelllaufzahl λ außerhalb des C_m-Gitters"""


class FitResidualTooLarge(BewsError):
    """Sinus-Fit-Residuum über der Grenze (Pol zu nah / zu wenige Zyklen)"""


class ConfigError(BewsError):
    """Konfiguration ungültig, fehlt oder ist nicht lesbar"""


__all__ = [
    'BewsError', 'NearPoleError', 'ConvergenceFailure', 'ImproperTfError',
    'RealizationError', 'NonFiniteError', 'DivergenceError',
    'ReconstructionMismatch', 'NonPositiveWindError', 'OutOfEnvelopeError',
    'FitResidualTooLarge', 'ConfigError',
]
