"""
BEWS Coleman-Rahmen - Azimut, Coleman-Transformation, Zerlegung
================================================================
Rotierendes System (Blatt 1..3) ↔ nicht-rotierendes System (col/tilt/yaw).

Konvention: ψ_i = ψ + 2π(i−1)/3, Blatt 1 ist Referenz.
Nur gleichmäßig verteilte Dreiblattrotoren.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from config import RECONSTRUCTION_TOLERANCE
from modules.errors import ReconstructionMismatch

TWO_PI = 2.0 * math.pi
BLADE_OFFSETS = np.array([0.0, TWO_PI / 3.0, 2.0 * TWO_PI / 3.0])

# Vertauscht tilt- und yaw-Kanal: die Faktor-Matrizen der Zerlegung führen
# cos vor sin, T_cm führt sin vor cos.
CHANNEL_SWAP = np.array([[1.0, 0.0, 0.0],
                         [0.0, 0.0, 1.0],
                         [0.0, 1.0, 0.0]])


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


# ============================================================================
# DATENTYPEN
# ============================================================================

@dataclass(frozen=True)
class AzimuthTriplet:
    """Blattazimute ψ1, ψ2, ψ3 [rad], äquidistant um 2π/3"""
    psi1: float
    psi2: float
    psi3: float

    def __post_init__(self):
        for a, b in ((self.psi1, self.psi2), (self.psi2, self.psi3), (self.psi3, self.psi1)):
            gap = math.remainder(b - a - TWO_PI / 3.0, TWO_PI)
            if abs(gap) > 1e-9:
                raise ValueError("Blattazimute müssen um 2π/3 versetzt sein")

    @classmethod
    def from_rotor(cls, psi: float) -> 'AzimuthTriplet':
        p1, p2, p3 = blade_azimuths(psi)
        return cls(float(p1), float(p2), float(p3))

    @property
    def rotor(self) -> float:
        return self.psi1

    def as_array(self) -> np.ndarray:
        return np.array([self.psi1, self.psi2, self.psi3])


@dataclass(frozen=True)
class BladeTriplet:
    """Signal pro Blatt (ε_i in Nm, Û_i in m/s)"""
    b1: float
    b2: float
    b3: float

    def __post_init__(self):
        if not _finite(self.b1, self.b2, self.b3):
            raise ValueError(f"BladeTriplet nicht endlich: {self}")

    @classmethod
    def from_array(cls, values) -> 'BladeTriplet':
        v = np.asarray(values, dtype=float)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.b3])


@dataclass(frozen=True)
class NrfTriplet:
    """Signal im nicht-rotierenden System (col, tilt, yaw)"""
    col: float
    tilt: float
    yaw: float

    def __post_init__(self):
        if not _finite(self.col, self.tilt, self.yaw):
            raise ValueError(f"NrfTriplet nicht endlich: {self}")

    @classmethod
    def from_array(cls, values) -> 'NrfTriplet':
        v = np.asarray(values, dtype=float)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.col, self.tilt, self.yaw])


AzimuthLike = Union[float, AzimuthTriplet]


# ============================================================================
# TRANSFORMATIONEN
# ============================================================================

def blade_azimuths(psi: float) -> np.ndarray:
    """ψ_i = ψ + 2π(i−1)/3, gewrappt auf [0, 2π) nur für die Trigonometrie"""
    return np.mod(float(psi), TWO_PI) + BLADE_OFFSETS


def azimuth_midpoint(psi, psi_next):
    """
    Azimut in der Mitte eines Abtastschritts, auch über den 2π-Umbruch.
    Voraussetzung |ψ_next − ψ| < π, bei dt ≤ T/200 immer erfüllt.
    Skalar oder Array.
    """
    psi = np.asarray(psi, dtype=float)
    step = np.mod(np.asarray(psi_next, dtype=float) - psi + math.pi, TWO_PI) - math.pi
    mid = psi + 0.5 * step
    return float(mid) if mid.ndim == 0 else mid


def _angles(psi: AzimuthLike) -> np.ndarray:
    if isinstance(psi, AzimuthTriplet):
        return np.mod(psi.as_array(), TWO_PI)
    return blade_azimuths(psi)


def t_cm(psi: AzimuthLike) -> np.ndarray:
    """Vorwärts-Coleman T_cm(ψ) = (2/3)·[½ ½ ½; sin ψ_i; cos ψ_i]"""
    ang = _angles(psi)
    return (2.0 / 3.0) * np.vstack([np.full(3, 0.5), np.sin(ang), np.cos(ang)])


def t_cm_inv(psi: AzimuthLike) -> np.ndarray:
    """Inverse Coleman, Zeilen [1, sin ψ_i, cos ψ_i]"""
    ang = _angles(psi)
    return np.column_stack([np.ones(3), np.sin(ang), np.cos(ang)])


def forward_coleman(psi: AzimuthTriplet, blades: BladeTriplet) -> NrfTriplet:
    """Blattsignale → (col, tilt, yaw)"""
    return NrfTriplet.from_array(t_cm(psi) @ blades.as_array())


def inverse_coleman(psi: AzimuthTriplet, nrf: NrfTriplet) -> BladeTriplet:
    """(col, tilt, yaw) → Blattsignale"""
    return BladeTriplet.from_array(t_cm_inv(psi) @ nrf.as_array())


# ============================================================================
# KOMPLEXE ZERLEGUNG C₋, C₊, C_col
# ============================================================================

@dataclass(frozen=True, eq=False)
class DecompMatrices:
    """
    Frequenzverschiebungs-Zerlegung der Coleman-Matrizen.

    C₊ = conj(C₋); alle sechs Produkte C₋ᵀC₋, C₊ᵀC₊, C₋ᵀC_col, C₊ᵀC_col,
    C_colᵀC₋, C_colᵀC₊ verschwinden.
    """
    Cminus: np.ndarray
    Cplus: np.ndarray
    Ccol: np.ndarray

    def orthogonality_products(self) -> dict:
        cm, cp, cc = self.Cminus, self.Cplus, self.Ccol
        return {
            "Cminus^T Cminus": cm.T @ cm,
            "Cplus^T Cplus": cp.T @ cp,
            "Cminus^T Ccol": cm.T @ cc,
            "Cplus^T Ccol": cp.T @ cc,
            "Ccol^T Cminus": cc.T @ cm,
            "Ccol^T Cplus": cc.T @ cp,
        }

    def max_orthogonality_residual(self) -> float:
        return max(float(np.max(np.abs(p))) for p in self.orthogonality_products().values())


def decomp_matrices() -> DecompMatrices:
    """C₋ = ½·F₋·G, C₊ = ½·F₊·G mit G = [0; cos θ_i; sin θ_i], θ = (0, 2π/3, 4π/3)"""
    trig = np.vstack([np.zeros(3), np.cos(BLADE_OFFSETS), np.sin(BLADE_OFFSETS)]).astype(complex)
    f_minus = np.array([[0, 0, 0],
                        [0, 1, 1j],
                        [0, -1j, 1]], dtype=complex)
    f_plus = np.array([[0, 0, 0],
                       [0, 1, -1j],
                       [0, 1j, 1]], dtype=complex)
    c_col = np.array([[1, 1, 1],
                      [0, 0, 0],
                      [0, 0, 0]], dtype=complex)
    return DecompMatrices(Cminus=0.5 * f_minus @ trig, Cplus=0.5 * f_plus @ trig, Ccol=c_col)


def _modulated(psi: float, dm: DecompMatrices, transpose: bool) -> np.ndarray:
    rot = np.exp(1j * math.remainder(float(psi), TWO_PI))
    cm = dm.Cminus.T if transpose else dm.Cminus
    cp = dm.Cplus.T if transpose else dm.Cplus
    return rot * cm + np.conj(rot) * cp


def _as_real(matrix: np.ndarray, what: str) -> np.ndarray:
    imag = float(np.max(np.abs(matrix.imag)))
    if imag > RECONSTRUCTION_TOLERANCE:
        raise ReconstructionMismatch(f"{what}: Imaginärrest {imag:.2e}")
    return matrix.real


def reconstruct_inverse_from_decomp(psi: float) -> np.ndarray:
    """
    T_cm_inv(ψ) = C_colᵀ + (e^{jψ}C₋ᵀ + e^{−jψ}C₊ᵀ)·P.

    Der Skalar vor dem modulierten Term ist 1 (Abgleich bei ψ = 0),
    P tauscht tilt/yaw.

    Raises:
        ReconstructionMismatch: Imaginärrest oder Abweichung > 1e-12
    """
    dm = decomp_matrices()
    recon = _as_real(dm.Ccol.T + _modulated(psi, dm, transpose=True) @ CHANNEL_SWAP,
                     "Inverse Rekonstruktion")
    err = float(np.max(np.abs(recon - t_cm_inv(psi))))
    if err > RECONSTRUCTION_TOLERANCE:
        raise ReconstructionMismatch(f"Inverse Rekonstruktion weicht um {err:.2e} ab (ψ = {psi})")
    return recon


def reconstruct_forward_from_decomp(psi: float) -> np.ndarray:
    """T_cm(ψ) = P·((2/3)(e^{jψ}C₋ + e^{−jψ}C₊) + (1/3)C_col)"""
    dm = decomp_matrices()
    recon = _as_real(CHANNEL_SWAP @ ((2.0 / 3.0) * _modulated(psi, dm, transpose=False)
                                     + dm.Ccol / 3.0),
                     "Vorwärts-Rekonstruktion")
    err = float(np.max(np.abs(recon - t_cm(psi))))
    if err > RECONSTRUCTION_TOLERANCE:
        raise ReconstructionMismatch(f"Vorwärts-Rekonstruktion weicht um {err:.2e} ab (ψ = {psi})")
    return recon


def c_col_from_decomposition(k_col: float, k_0: float, omega0: float, s: complex) -> np.ndarray:
    """
    C_col(s) direkt aus der Frequenzverschiebung:
    (2/3)C₋ᵀC_cm(s−jω₀)C₊ + (2/3)C₊ᵀC_cm(s+jω₀)C₋ + (1/3)C_colᵀC_cm(s)C_col,
    C_cm(s) = diag(K_col, K_0, K_0)/s. Unabhängiger Gegencheck zu build_c_col.
    """
    dm = decomp_matrices()
    gains = np.array([k_col, k_0, k_0], dtype=complex)

    def c_cm(z: complex) -> np.ndarray:
        return np.diag(gains / z)

    s = complex(s)
    shift = 1j * omega0
    return ((2.0 / 3.0) * dm.Cminus.T @ c_cm(s - shift) @ dm.Cplus
            + (2.0 / 3.0) * dm.Cplus.T @ c_cm(s + shift) @ dm.Cminus
            + (1.0 / 3.0) * dm.Ccol.T @ c_cm(s) @ dm.Ccol)


__all__ = [
    'AzimuthTriplet', 'BladeTriplet', 'NrfTriplet', 'DecompMatrices',
    'blade_azimuths', 'azimuth_midpoint', 't_cm', 't_cm_inv', 'forward_coleman', 'inverse_coleman',
    'decomp_matrices', 'reconstruct_inverse_from_decomp',
    'reconstruct_forward_from_decomp', 'c_col_from_decomposition', 'CHANNEL_SWAP',
]
