"""
BEWS Transferfunktionen - Rationale TF, Bode, Zustandsraum
===========================================================
Koeffizientenform in absteigenden Potenzen von s.
Keine Pol-Nullstellen-Kürzung: Äquivalenzprüfungen vergleichen Werte,
nicht Koeffizientenformen.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy import signal

from config import NEAR_POLE_SCALE, BODE_POLE_EXCLUSION, REALIZATION_TOLERANCE
from modules.errors import (
    ConvergenceFailure, ImproperTfError, NearPoleError,
    NonFiniteError, RealizationError,
)
from modules.logger import log_debug, log_info


def _trim(coeffs: Sequence[float]) -> Tuple[float, ...]:
    """Entfernt führende Nullen, mindestens ein Koeffizient bleibt"""
    arr = np.atleast_1d(np.asarray(coeffs, dtype=float))
    nz = np.flatnonzero(arr)
    if nz.size == 0:
        return (0.0,)
    return tuple(float(c) for c in arr[nz[0]:])


@dataclass(frozen=True)
class RationalTf:
    """
    SISO-Übertragungsfunktion num(s)/den(s).

    Beherbergt K(s), K_N(s) und K_R,a/b/c. Führende Nullen werden
    entfernt, sonst bleiben die Koeffizienten wie übergeben.
    """
    num: Tuple[float, ...]
    den: Tuple[float, ...]

    def __post_init__(self):
        num = _trim(self.num)
        den = _trim(self.den)
        if den == (0.0,):
            raise ValueError("Nenner ist das Nullpolynom")
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise ValueError("Koeffizienten müssen endlich sein")
        object.__setattr__(self, 'num', num)
        object.__setattr__(self, 'den', den)

    @classmethod
    def zero(cls) -> 'RationalTf':
        return cls((0.0,), (1.0,))

    @classmethod
    def constant(cls, gain: float) -> 'RationalTf':
        return cls((gain,), (1.0,))

    @property
    def num_degree(self) -> int:
        return len(self.num) - 1

    @property
    def den_degree(self) -> int:
        return len(self.den) - 1

    @property
    def is_zero(self) -> bool:
        return self.num == (0.0,)

    @property
    def is_proper(self) -> bool:
        return self.is_zero or self.num_degree <= self.den_degree

    def __call__(self, s: complex) -> complex:
        return tf_eval(self, s)

    def __add__(self, other: 'RationalTf') -> 'RationalTf':
        return tf_add(self, other)


def integrator(gain: float) -> RationalTf:
    """gain/s"""
    return RationalTf((gain,), (1.0, 0.0))


def notch_peak(omega_r: float) -> RationalTf:
    """K_N(s) = 2ω_r·s/(s² + ω_r²), Resonator bei 1P"""
    return RationalTf((2.0 * omega_r, 0.0), (1.0, 0.0, omega_r ** 2))


# ============================================================================
# ALGEBRA & AUSWERTUNG
# ============================================================================

def tf_eval(tf: RationalTf, s: complex) -> complex:
    """
    Horner-Auswertung num(s)/den(s).

    Raises:
        NearPoleError: |den(s)| praktisch null (s ist ein Pol)
    """
    s = complex(s)
    den_val = np.polyval(tf.den, s)
    scale = float(np.sum(np.abs(tf.den))) * max(1.0, abs(s)) ** tf.den_degree
    if abs(den_val) < NEAR_POLE_SCALE * scale or den_val == 0:
        raise NearPoleError(f"s = {s} liegt auf einem Pol (|den(s)| = {abs(den_val):.3e})")
    return complex(np.polyval(tf.num, s) / den_val)


def tf_eval_many(tf: RationalTf, s_values: np.ndarray) -> np.ndarray:
    """Vektorisierte Auswertung; Pole müssen vorher ausgefiltert sein"""
    s_values = np.asarray(s_values, dtype=complex)
    return np.polyval(tf.num, s_values) / np.polyval(tf.den, s_values)


def tf_poles(tf: RationalTf) -> List[complex]:
    """
    Nullstellen des Nenners.

    Raises:
        ConvergenceFailure: Eigenwertsuche liefert keine endlichen Wurzeln
    """
    if tf.den_degree == 0:
        return []
    try:
        roots = np.roots(tf.den)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(f"Nullstellensuche fehlgeschlagen: {e}") from e
    if roots.size != tf.den_degree or not np.all(np.isfinite(roots)):
        raise ConvergenceFailure(f"Nullstellensuche lieferte {roots} für den = {tf.den}")
    # Polieren: exakte Nullen bleiben exakt (z.B. Integrator)
    roots = np.where(np.abs(roots) < 1e-14 * max(1.0, float(np.max(np.abs(roots)))), 0.0, roots)
    return [complex(r) for r in roots]


def tf_add(a: RationalTf, b: RationalTf) -> RationalTf:
    """Exakte Kreuzmultiplikation, ohne Kürzung gemeinsamer Faktoren"""
    num = np.polyadd(np.polymul(a.num, b.den), np.polymul(b.num, a.den))
    den = np.polymul(a.den, b.den)
    return RationalTf(tuple(num), tuple(den))


def tf_scale(tf: RationalTf, gain: float) -> RationalTf:
    """gain · tf (nur der Zähler wird skaliert)"""
    return RationalTf(tuple(gain * np.asarray(tf.num)), tf.den)


# ============================================================================
# 3×3 MATRIX
# ============================================================================

@dataclass(frozen=True)
class TfMatrix3:
    """3×3 Matrix von RationalTf (C_PIN, C_col)"""
    entries: Tuple[Tuple[RationalTf, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if len(rows) != 3 or any(len(row) != 3 for row in rows):
            raise ValueError("TfMatrix3 braucht genau 3×3 Einträge")
        if not all(isinstance(e, RationalTf) for row in rows for e in row):
            raise TypeError("Alle Einträge müssen RationalTf sein")
        object.__setattr__(self, 'entries', rows)

    def __getitem__(self, idx: Tuple[int, int]) -> RationalTf:
        i, j = idx
        return self.entries[i][j]

    def evaluate(self, s: complex) -> np.ndarray:
        """Komplexe 3×3 Matrix bei s"""
        return np.array([[tf_eval(e, s) for e in row] for row in self.entries], dtype=complex)

    def poles(self) -> List[complex]:
        """Vereinigung der Pole aller Einträge (ohne Duplikate)"""
        found: List[complex] = []
        for row in self.entries:
            for entry in row:
                if entry.is_zero:
                    continue
                for p in tf_poles(entry):
                    if not any(abs(p - q) <= 1e-12 * max(1.0, abs(p)) for q in found):
                        found.append(p)
        return found


# ============================================================================
# ZUSTANDSRAUM
# ============================================================================

@dataclass(frozen=True, eq=False)
class StateSpaceSiso:
    """Steuerbare Normalform (A, B, C, D), reell"""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def transfer(self, s: complex) -> complex:
        """C(sI − A)⁻¹B + D"""
        if self.n == 0:
            return complex(self.D[0, 0])
        resolvent = np.linalg.solve(s * np.eye(self.n) - self.A, self.B)
        return complex((self.C @ resolvent)[0, 0] + self.D[0, 0])

    def zero_state(self, channels: int = 0) -> np.ndarray:
        """Nullzustand, optional mit Kanal-Achse (n, channels)"""
        return np.zeros((self.n, channels)) if channels else np.zeros(self.n)


def _check_points(tf: RationalTf) -> List[complex]:
    """Testpunkte für den Realisierungs-Check, fern von allen Polen"""
    poles = tf_poles(tf)
    radius = max([1.0] + [abs(p) for p in poles])
    candidates = [radius * z for z in (0.37 + 1.3j, -0.8 + 0.45j, 2.1 - 0.7j, 0.05 + 3.3j)]
    return [s for s in candidates
            if all(abs(s - p) > 1e-3 * radius for p in poles)]


def realize(tf: RationalTf) -> StateSpaceSiso:
    """
    Steuerbare Normalform via scipy.signal.tf2ss.

    Raises:
        ImproperTfError: Zählergrad > Nennergrad
        RealizationError: Rundreise-Check verfehlt 1e-9 relativ
    """
    if not tf.is_proper:
        raise ImproperTfError(
            f"Zählergrad {tf.num_degree} > Nennergrad {tf.den_degree}, nicht realisierbar"
        )
    A, B, C, D = signal.tf2ss(np.asarray(tf.num), np.asarray(tf.den))
    n = tf.den_degree
    ss = StateSpaceSiso(
        A=np.asarray(A, dtype=float).reshape(n, n),
        B=np.asarray(B, dtype=float).reshape(n, 1),
        C=np.asarray(C, dtype=float).reshape(1, n),
        D=np.asarray(D, dtype=float).reshape(1, 1),
    )

    for s in _check_points(tf):
        ref = tf_eval(tf, s)
        got = ss.transfer(s)
        err = abs(got - ref) / max(abs(ref), 1e-300)
        if abs(ref) > 0 and err > REALIZATION_TOLERANCE:
            raise RealizationError(f"Realisierung weicht bei s = {s} um {err:.2e} ab")
    log_debug(f"Realisiert: n = {ss.n}, den = {tf.den}", "TF")
    return ss


def _check_finite(x: np.ndarray):
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("Zustand ist nicht mehr endlich (instabil oder dt zu groß)")


def step_state(ss: StateSpaceSiso, state: np.ndarray, u, dt: float):
    """
    Ein RK4-Schritt von ẋ = Ax + Bu mit gehaltenem u.

    state darf (n,) oder (n, k) sein; bei (n, k) ist u ein Vektor der Länge k
    (k unabhängige Kanäle, z.B. drei Blätter).
    Empfehlung: dt · max|eig(A)| < 0.1 (nicht erzwungen).

    Returns:
        (neuer Zustand, y = Cx_neu + Du)
    """
    if dt <= 0:
        raise ValueError(f"dt muss > 0 sein, ist {dt}")
    x = np.asarray(state, dtype=float)
    u_arr = np.asarray(u, dtype=float)
    b = ss.B[:, 0]
    bu = np.outer(b, u_arr) if x.ndim == 2 else b * float(u_arr)

    def f(xi):
        return ss.A @ xi + bu

    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(x_new)

    y = ss.C[0] @ x_new + ss.D[0, 0] * u_arr
    if x.ndim == 1:
        y = float(y)
    return x_new, y


def rk4_propagator(ss: StateSpaceSiso, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Diskrete Form des RK4-Schritts für lineare Systeme mit gehaltenem Eingang:
    x⁺ = Φx + Γu. Der Schritt ist linear in (x, u), also liefert step_state
    Φ aus der Einheitsmatrix (n Kanäle, u = 0) und Γ aus x = 0, u = 1.
    """
    n = ss.n
    phi, _ = step_state(ss, np.eye(n), np.zeros(n), dt)
    gamma, _ = step_state(ss, np.zeros(n), 1.0, dt)
    return phi, gamma


def simulate_lti(ss: StateSpaceSiso, u: np.ndarray, dt: float) -> np.ndarray:
    """
    Lange RK4-Simulation ab Nullzustand, vektorisiert über Modalzerlegung.

    Φ ist ein Polynom in A, teilt also die Eigenvektoren von A; jede Mode
    ist eine Rekursion erster Ordnung (scipy.signal.lfilter).

    Returns:
        y[k] = C·x[k+1] (Ausgang nach dem k-ten Schritt, wie step_state)

    Raises:
        RealizationError: A nicht diagonalisierbar (schlecht konditioniert)
    """
    u = np.asarray(u, dtype=float)
    if ss.n == 0:
        return ss.D[0, 0] * u
    eigvals, vecs = np.linalg.eig(ss.A)
    if np.linalg.cond(vecs) > 1e8:
        raise RealizationError("A ist nicht (gut) diagonalisierbar, Modalsimulation abgebrochen")
    h_lam = dt * eigvals
    phi_modal = 1 + h_lam + h_lam ** 2 / 2 + h_lam ** 3 / 6 + h_lam ** 4 / 24
    _, gamma = rk4_propagator(ss, dt)
    gamma_modal = np.linalg.solve(vecs, gamma.astype(complex))
    c_modal = ss.C[0] @ vecs

    y = np.zeros(u.shape, dtype=complex)
    for lam, g, c in zip(phi_modal, gamma_modal, c_modal):
        # z[k+1] = λ·z[k] + g·u[k]
        y += c * signal.lfilter([g], [1.0, -lam], u.astype(complex))
    y = y.real + ss.D[0, 0] * u
    _check_finite(y)
    return y


# ============================================================================
# BODE
# ============================================================================

@dataclass
class BodeMagnitude:
    """Ergebnis von bode_mag: Betrag [dB] pro Eintrag und überlebender Frequenz"""
    omegas: np.ndarray
    mag_db: np.ndarray                  # Form (3, 3, len(omegas))
    filtered: List[float] = field(default_factory=list)


def pole_distance(omega: float, poles: Sequence[complex]) -> float:
    """Kleinster relativer Abstand von jω zu einem Pol"""
    s = 1j * omega
    best = np.inf
    for p in poles:
        ref = max(abs(p), abs(s))
        rel = 0.0 if ref == 0 else abs(s - p) / ref
        best = min(best, rel)
    return best


def bode_mag(tfm: TfMatrix3, freqs: Sequence[float],
             exclusion: float = BODE_POLE_EXCLUSION) -> BodeMagnitude:
    """
    20·log10|entry(jω)| für alle neun Einträge.

    Frequenzen näher als `exclusion` (relativ) an einem Pol werden
    ausgefiltert und in `filtered` gemeldet statt ±inf zu liefern.
    Identisch verschwindende Einträge liefern -inf.
    """
    poles = tfm.poles()
    keep, filtered = [], []
    for w in freqs:
        w = float(w)
        if pole_distance(w, poles) < exclusion:
            filtered.append(w)
        else:
            keep.append(w)
    if filtered:
        log_info(f"Bode: {len(filtered)} Frequenzen nahe Polen ausgefiltert", "TF")

    omegas = np.asarray(keep, dtype=float)
    mag = np.empty((3, 3, omegas.size))
    with np.errstate(divide='ignore'):
        for i in range(3):
            for j in range(3):
                entry = tfm[i, j]
                if entry.is_zero:
                    mag[i, j] = -np.inf
                else:
                    mag[i, j] = 20.0 * np.log10(np.abs(tf_eval_many(entry, 1j * omegas)))
    return BodeMagnitude(omegas=omegas, mag_db=mag, filtered=filtered)


__all__ = [
    'RationalTf', 'TfMatrix3', 'StateSpaceSiso', 'BodeMagnitude',
    'integrator', 'notch_peak', 'tf_eval', 'tf_eval_many', 'tf_poles',
    'tf_add', 'tf_scale', 'realize', 'step_state', 'rk4_propagator', 'simulate_lti',
    'pole_distance', 'bode_mag',
]
