"""
BEWS Schätzer - PIN und Coleman
===============================
Beide Schätzer korrigieren Û aus dem Momentenresiduum ε = m̂(Û) − m
in negativer Rückkopplung: Û = U_init + K·(feedback_sign · ε / moment_scale).

    PIN:      pro Blatt K(s) = k_p·K_N(s) + k_i/s, vollständig entkoppelt
    Coleman:  T_cm(ψ) → diag(K_col, K_0, K_0)/s → T_cm⁻¹(ψ)

Dazu die geschlossene LTI-Form C_col(s) (zirkulant) und die
Gain-Abbildung, unter der C_PIN der Diagonale von C_col entspricht.
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

import numpy as np

from config import DEFAULT_ESTIMATOR
from modules.coleman_frame import AzimuthTriplet, azimuth_midpoint, blade_azimuths, t_cm, t_cm_inv
from modules.errors import DivergenceError, NonFiniteError
from modules.logger import log_debug, log_warning
from modules.tf_core import (
    RationalTf, TfMatrix3, integrator, notch_peak, realize,
    rk4_propagator, simulate_lti, tf_add, tf_scale,
)
from modules.turbine_model import BladeState, MomentModel

SQRT3 = math.sqrt(3.0)


# ============================================================================
# GAINS
# ============================================================================

def theorem1_map(k_col: float, k_0: float, omega0: float) -> Tuple[float, float]:
    """(K_col, K_0, ω₀) → (k_p, k_i) = (K_0/(3ω₀), K_col/3)"""
    if not omega0 > 0:
        raise ValueError(f"ω₀ muss > 0 sein, ist {omega0}")
    return k_0 / (3.0 * omega0), k_col / 3.0


@dataclass(frozen=True)
class EstimatorGains:
    """k_p, k_i (PIN), K_col, K_0 (Coleman) und Schedule-Drehzahl ω₀, alle > 0"""
    k_p: float
    k_i: float
    k_col: float
    k_0: float
    omega0: float

    # Namen, unter denen die CLI (--perturb-gain) und die Config die Gains kennen
    ALIASES = {"k_p": "k_p", "kp": "k_p", "k_i": "k_i", "ki": "k_i",
               "k_col": "k_col", "kcol": "k_col", "k_0": "k_0", "k0": "k_0"}

    def __post_init__(self):
        for name in ("k_p", "k_i", "k_col", "k_0", "omega0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"Gain {name} muss > 0 sein, ist {value}")

    @classmethod
    def from_coleman(cls, k_col: float, k_0: float, omega0: float) -> 'EstimatorGains':
        """PIN-Gains über die Gain-Abbildung"""
        k_p, k_i = theorem1_map(k_col, k_0, omega0)
        return cls(k_p=k_p, k_i=k_i, k_col=k_col, k_0=k_0, omega0=omega0)

    def perturbed(self, name: str, percent: float) -> 'EstimatorGains':
        """Kopie mit einem um `percent` % verstellten Gain"""
        key = self.ALIASES.get(name.strip().lower().replace("-", "_"))
        if key is None:
            raise ValueError(f"Unbekannter Gain '{name}' (erlaubt: k_p, k_i, K_col, K_0)")
        return replace(self, **{key: getattr(self, key) * (1.0 + percent / 100.0)})

    def is_theorem1_consistent(self, rel_tol: float = 1e-12) -> bool:
        k_p, k_i = theorem1_map(self.k_col, self.k_0, self.omega0)
        return (math.isclose(self.k_p, k_p, rel_tol=rel_tol)
                and math.isclose(self.k_i, k_i, rel_tol=rel_tol))

    def to_dict(self) -> Dict[str, float]:
        return {"k_p": self.k_p, "k_i": self.k_i, "K_col": self.k_col,
                "K_0": self.k_0, "omega0": self.omega0}


@dataclass(frozen=True)
class EstimatorSettings:
    """Initialisierung, Clamp, Vorzeichen, Skalierung des Residuums"""
    initial_estimate: float = DEFAULT_ESTIMATOR["initial_estimate"]
    clamp_min: float = DEFAULT_ESTIMATOR["clamp_min"]
    clamp_max: float = DEFAULT_ESTIMATOR["clamp_max"]
    feedback_sign: float = DEFAULT_ESTIMATOR["feedback_sign"]
    moment_scale: float = DEFAULT_ESTIMATOR["moment_scale"]
    divergence_margin: float = DEFAULT_ESTIMATOR["divergence_margin"]

    def __post_init__(self):
        if not 0 < self.clamp_min < self.clamp_max:
            raise ValueError("Clamp-Fenster muss 0 < min < max erfüllen")
        if self.feedback_sign not in (-1.0, 1.0):
            raise ValueError("feedback_sign muss -1 oder +1 sein")
        if not self.moment_scale > 0 or not self.divergence_margin > 0:
            raise ValueError("moment_scale und divergence_margin müssen > 0 sein")
        if not self.clamp_min <= self.initial_estimate <= self.clamp_max:
            raise ValueError("Startschätzung liegt außerhalb des Clamp-Fensters")


# ============================================================================
# RESIDUUM
# ============================================================================

def residual(omega_r: float, u_hat, psi, measured, model: MomentModel,
             q_hat: Optional[BladeState] = None) -> np.ndarray:
    """
    ε_i = m̂_i(ω_r, Û_i, q̂_i, ψ_i) − m_i [Nm], Standard q̂_i = ½ρÛ_i².

    psi: Rotorazimut (Skalar) oder AzimuthTriplet
    q_hat: abweichender Staudruck, z. B. aus einer separaten Messung
    """
    angles = psi.as_array() if isinstance(psi, AzimuthTriplet) else blade_azimuths(psi)
    return model.blade_moments(omega_r, u_hat, angles, q_hat) - np.asarray(measured, dtype=float)


# ============================================================================
# SCHÄTZER
# ============================================================================

class BewsEstimator:
    """
    Gemeinsamer Rahmen: Startwert, Clamp, Divergenz-Erkennung, Zähler.

    step() liefert Û zum nächsten Abtastzeitpunkt; die Filterzustände
    selbst werden nicht begrenzt.
    """

    name = "base"

    def __init__(self, settings: Optional[EstimatorSettings] = None,
                 speed_window: Optional[Tuple[float, float]] = None):
        self.settings = settings or EstimatorSettings()
        lo, hi = self.settings.clamp_min, self.settings.clamp_max
        if speed_window is not None:
            # Clamp auf den Schnitt mit dem C_m-Gitter, damit m̂ auswertbar bleibt
            lo, hi = max(lo, speed_window[0]), min(hi, speed_window[1])
            if lo >= hi:
                raise ValueError(f"Clamp-Fenster leer nach Schnitt mit C_m-Gitter: [{lo}, {hi}]")
        self.clamp_window = (lo, hi)
        self.clamp_events = 0
        self.step_count = 0
        start = float(np.clip(self.settings.initial_estimate, lo, hi))
        self.estimate = np.full(3, start)

    @property
    def rews_estimate(self) -> float:
        """Rotoreffektive Windgeschwindigkeit (Blattmittel)"""
        return float(np.mean(self.estimate))

    def _input(self, eps) -> np.ndarray:
        return self.settings.feedback_sign * np.asarray(eps, dtype=float) / self.settings.moment_scale

    def _finalize(self, raw: np.ndarray) -> np.ndarray:
        """Prüft Endlichkeit/Divergenz, begrenzt Û und zählt Clamp-Ereignisse"""
        self.step_count += 1
        if not np.all(np.isfinite(raw)):
            raise NonFiniteError(f"{self.name}: Schätzung nicht endlich", self.step_count)
        lo, hi = self.clamp_window
        margin = self.settings.divergence_margin
        if np.any(raw < lo - margin) or np.any(raw > hi + margin):
            raise DivergenceError(
                f"{self.name}: Schätzung {raw} verlässt [{lo:.3f}, {hi:.3f}] um mehr als {margin} m/s",
                self.step_count,
            )
        clamped = np.clip(raw, lo, hi)
        if np.any(clamped != raw):
            if self.clamp_events == 0:
                log_warning(f"{self.name}: Schätzung begrenzt auf [{lo:.3f}, {hi:.3f}] "
                            f"(Schritt {self.step_count})", "ESTIMATOR")
            self.clamp_events += 1
        self.estimate = clamped
        return clamped

    def step(self, eps, omega_r: float, psi: float, psi_next: float, dt: float) -> np.ndarray:
        raise NotImplementedError


class PinEstimator(BewsEstimator):
    """
    Proportional-Integral-Notch: drei unabhängige Kopien der Realisierung
    von K(s) = k_p·K_N(s) + k_i/s, RK4 mit gehaltenem Eingang.
    K_N wird mit der gemessenen Drehzahl nachgeführt (Gain-Scheduling).
    k_p = 0 ist erlaubt (rein integrale Wirkung).
    """

    name = "pin"

    def __init__(self, k_p: float, k_i: float, settings: Optional[EstimatorSettings] = None,
                 speed_window: Optional[Tuple[float, float]] = None):
        super().__init__(settings, speed_window)
        if k_p < 0 or k_i < 0:
            raise ValueError("PIN-Gains dürfen nicht negativ sein")
        self.k_p = k_p
        self.k_i = k_i
        self._omega: Optional[float] = None
        self._dt: Optional[float] = None
        self._ss = None
        self._phi = self._gamma = None
        self.state = np.zeros((3, 3))

    @classmethod
    def from_gains(cls, gains: EstimatorGains, **kwargs) -> 'PinEstimator':
        return cls(gains.k_p, gains.k_i, **kwargs)

    def kernel(self, omega_r: float) -> RationalTf:
        return build_pin_kernel(self.k_p, self.k_i, omega_r)

    def _schedule(self, omega_r: float, dt: float):
        if omega_r == self._omega and dt == self._dt:
            return
        ss = realize(self.kernel(omega_r))
        if self._ss is not None and ss.n != self.state.shape[0]:
            self.state = np.zeros((ss.n, 3))
        self._ss = ss
        self._phi, self._gamma = rk4_propagator(ss, dt)
        if self._omega is not None:
            log_debug(f"PIN neu geplant: ω_r {self._omega:.6f} → {omega_r:.6f}", "ESTIMATOR")
        self._omega, self._dt = omega_r, dt

    def step(self, eps, omega_r: float, psi: float = 0.0, psi_next: float = 0.0,
             dt: float = 0.005) -> np.ndarray:
        """Ein RK4-Schritt pro Blatt; ψ wird vom PIN-Schätzer nicht benötigt"""
        if dt <= 0:
            raise ValueError(f"dt muss > 0 sein, ist {dt}")
        self._schedule(omega_r, dt)
        u = self._input(eps)
        self.state = self._phi @ self.state + np.outer(self._gamma, u)
        if not np.all(np.isfinite(self.state)):
            raise NonFiniteError("pin: Filterzustand nicht endlich", self.step_count + 1)
        y = self._ss.C[0] @ self.state + self._ss.D[0, 0] * u
        return self._finalize(self.settings.initial_estimate + y)

    def open_loop_response(self, eps: np.ndarray, omega_r: float, dt: float) -> np.ndarray:
        """
        Reiner Filterausgang K·ε für eine Eingangsfolge (N, 3) ab Nullzustand,
        ohne Vorzeichen, Skalierung, Startwert und Clamp.
        """
        ss = realize(self.kernel(omega_r))
        eps = np.asarray(eps, dtype=float)
        return np.column_stack([simulate_lti(ss, eps[:, i], dt) for i in range(3)])


class ColemanEstimator(BewsEstimator):
    """
    Coleman-Schätzer: ε → (col, tilt, yaw) → Integratoren → Blätter.
    Integratoren mit gehaltenem Eingang sind mit RK4 exakt: x += g·u·dt.
    Demodulation beim Azimut der Schrittmitte (ψ_k + ψ_k+1)/2, passend
    zum gehaltenen Eingang; Rückprojektion bei ψ_k+1.
    K_0 = 0 ist erlaubt (nur kollektiver Kanal).
    """

    name = "coleman"

    def __init__(self, k_col: float, k_0: float, settings: Optional[EstimatorSettings] = None,
                 speed_window: Optional[Tuple[float, float]] = None):
        super().__init__(settings, speed_window)
        if k_col < 0 or k_0 < 0:
            raise ValueError("Coleman-Gains dürfen nicht negativ sein")
        self.k_col = k_col
        self.k_0 = k_0
        self.channel_gains = np.array([k_col, k_0, k_0])
        self.state = np.zeros(3)

    @classmethod
    def from_gains(cls, gains: EstimatorGains, **kwargs) -> 'ColemanEstimator':
        return cls(gains.k_col, gains.k_0, **kwargs)

    @property
    def nrf_estimate(self) -> np.ndarray:
        """(Û_col, Û_tilt, Û_yaw) vor dem Clamp"""
        return np.array([self.settings.initial_estimate, 0.0, 0.0]) + self.state

    @property
    def rews_estimate(self) -> float:
        """Û_col"""
        return float(self.nrf_estimate[0])

    def step(self, eps, omega_r: float, psi: float, psi_next: float,
             dt: float = 0.005) -> np.ndarray:
        """ε in der Schrittmitte transformieren, integrieren, bei ψ_next zurückprojizieren"""
        if dt <= 0:
            raise ValueError(f"dt muss > 0 sein, ist {dt}")
        u_nrf = t_cm(azimuth_midpoint(psi, psi_next)) @ self._input(eps)
        self.state = self.state + self.channel_gains * u_nrf * dt
        if not np.all(np.isfinite(self.state)):
            raise NonFiniteError("coleman: Integratorzustand nicht endlich", self.step_count + 1)
        return self._finalize(t_cm_inv(psi_next) @ self.nrf_estimate)

    def open_loop_response(self, eps: np.ndarray, psi: np.ndarray, dt: float,
                           chunk: int = 100_000) -> np.ndarray:
        """
        Reiner Filterausgang für ε (N, 3) bei Rotorazimut psi (N+1,),
        ab Nullzustand, blockweise vektorisiert. Zeile k ist der Ausgang
        nach Schritt k (bei psi[k+1]).
        """
        eps = np.asarray(eps, dtype=float)
        psi = np.asarray(psi, dtype=float)
        n = eps.shape[0]
        if psi.shape[0] != n + 1:
            raise ValueError("psi braucht N+1 Werte (Start- und Folgezeitpunkte)")
        out = np.empty_like(eps)
        x = np.zeros(3)
        offsets = np.array([0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0])
        for start in range(0, n, chunk):
            stop = min(start + chunk, n)
            mid = azimuth_midpoint(psi[start:stop], psi[start + 1:stop + 1])
            ang_in = np.mod(mid, 2.0 * math.pi)[:, None] + offsets
            ang_out = np.mod(psi[start + 1:stop + 1], 2.0 * math.pi)[:, None] + offsets
            e = eps[start:stop]
            u_nrf = (2.0 / 3.0) * np.column_stack([
                0.5 * e.sum(axis=1),
                (np.sin(ang_in) * e).sum(axis=1),
                (np.cos(ang_in) * e).sum(axis=1),
            ])
            states = x + np.cumsum(self.channel_gains * u_nrf * dt, axis=0)
            out[start:stop] = (states[:, :1]
                               + np.sin(ang_out) * states[:, 1:2]
                               + np.cos(ang_out) * states[:, 2:3])
            x = states[-1]
        if not np.all(np.isfinite(out)):
            raise NonFiniteError("coleman: Open-Loop-Antwort nicht endlich")
        return out


def make_estimator(kind: str, gains: EstimatorGains,
                   settings: Optional[EstimatorSettings] = None,
                   speed_window: Optional[Tuple[float, float]] = None) -> BewsEstimator:
    """Fabrik für 'pin' und 'coleman'"""
    if kind == "pin":
        return PinEstimator.from_gains(gains, settings=settings, speed_window=speed_window)
    if kind == "coleman":
        return ColemanEstimator.from_gains(gains, settings=settings, speed_window=speed_window)
    raise ValueError(f"Unbekannter Schätzer: {kind}")


# ============================================================================
# GESCHLOSSENE FORMEN
# ============================================================================

def build_pin_kernel(k_p: float, k_i: float, omega_r: float) -> RationalTf:
    """K(s) = k_p·K_N(s) + k_i/s (ungekürzt, Ordnung 3)"""
    return tf_add(tf_scale(notch_peak(omega_r), k_p), integrator(k_i))


def build_c_pin(gains: EstimatorGains, omega_r: float) -> TfMatrix3:
    """Diagonal, Nebendiagonalen sind die Null-Übertragungsfunktion"""
    k = build_pin_kernel(gains.k_p, gains.k_i, omega_r)
    z = RationalTf.zero()
    return TfMatrix3(((k, z, z), (z, k, z), (z, z, k)))


def kr_entries(k_col: float, k_0: float, omega0: float) -> Tuple[RationalTf, RationalTf, RationalTf]:
    """K_R,a, K_R,b, K_R,c mit gemeinsamem Nenner 3s(s² + ω₀²)"""
    den = (3.0, 0.0, 3.0 * omega0 ** 2, 0.0)
    w2 = k_col * omega0 ** 2
    a = RationalTf((2.0 * k_0 + k_col, 0.0, w2), den)
    b = RationalTf((k_col - k_0, SQRT3 * k_0 * omega0, w2), den)
    c = RationalTf((k_col - k_0, -SQRT3 * k_0 * omega0, w2), den)
    return a, b, c


def build_c_col(gains: EstimatorGains, omega0: Optional[float] = None) -> TfMatrix3:
    """Zirkulante LTI-Form des Coleman-Schätzers [[a,b,c],[c,a,b],[b,c,a]]"""
    omega0 = gains.omega0 if omega0 is None else omega0
    if not omega0 > 0:
        raise ValueError(f"ω₀ muss > 0 sein, ist {omega0}")
    a, b, c = kr_entries(gains.k_col, gains.k_0, omega0)
    return TfMatrix3(((a, b, c), (c, a, b), (b, c, a)))


__all__ = [
    'EstimatorGains', 'EstimatorSettings', 'BewsEstimator', 'PinEstimator',
    'ColemanEstimator', 'make_estimator', 'residual', 'theorem1_map',
    'build_pin_kernel', 'build_c_pin', 'kr_entries', 'build_c_col',
]
