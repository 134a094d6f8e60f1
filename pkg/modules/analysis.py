"""
BEWS Analyse - Identifikation, Äquivalenz-Checks, Bode-Export, Metriken
=======================================================================
Werkzeuge, mit denen die geschlossenen Formen gegen die
Zeitbereichs-Schätzer geprüft werden:

    identify_coleman_response  Sinus-Injektion, Open-Loop, LS-Sinusfit
    verify_theorem1            K(jω) gegen K_R,a(jω) auf einem Log-Gitter
    compare_estimators         PIN und Coleman auf identischem Wind
    export_bode                plot-fertige Tabelle der Betragsgänge
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import (
    DEFAULT_BODE, DEFAULT_COMPARE, DEFAULT_IDENTIFICATION, DEFAULT_METRICS,
    FIT_RESIDUAL_LIMIT, IDENT_ERROR_FLOOR, IDENT_POLE_EXCLUSION, BODE_POLE_EXCLUSION,
)
from modules.errors import FitResidualTooLarge, NearPoleError
from modules.estimators import (
    ColemanEstimator, EstimatorGains, PinEstimator, build_c_col,
    build_c_pin, build_pin_kernel, kr_entries,
)
from modules.logger import log_debug, log_info, log_warning
from modules.tf_core import TfMatrix3, bode_mag, tf_eval_many


# ============================================================================
# SINUSFIT
# ============================================================================

@dataclass
class SineFit:
    """Ergebnis von fit_sinusoid: y ≈ Im(phasor·e^{jωt}) + Störterme"""
    phasor: complex
    relative_residual: float
    residual_rms: float = 0.0

    @property
    def amplitude(self) -> float:
        return abs(self.phasor)


def fit_sinusoid(t: np.ndarray, y: np.ndarray, omega: float,
                 nuisance_omegas: Sequence[float] = (), offset: bool = True) -> SineFit:
    """
    Least-Squares-Fit y ≈ a·sin ωt + b·cos ωt (+ c) (+ Störfrequenzen).

    phasor = a + jb, d.h. für y = Im(H·A·e^{jωt}) ist phasor = H·A.
    relative_residual = rms(Rest) / |phasor|.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    columns = [np.sin(omega * t), np.cos(omega * t)]
    if offset:
        columns.append(np.ones_like(t))
    for w in nuisance_omegas:
        columns.extend([np.sin(w * t), np.cos(w * t)])
    design = np.column_stack(columns)
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    rest = y - design @ coeffs
    phasor = complex(coeffs[0], coeffs[1])
    rms = float(np.sqrt(np.mean(rest ** 2))) if rest.size else 0.0
    amp = abs(phasor)
    rel = rms / amp if amp > 0 else (0.0 if rms == 0 else math.inf)
    return SineFit(phasor=phasor, relative_residual=rel, residual_rms=rms)


# ============================================================================
# FREQUENZGANG-IDENTIFIKATION
# ============================================================================

@dataclass
class FreqResponseSample:
    """Identifizierte (H) und geschlossene (H_ref) 3×3 Matrix bei ω"""
    omega: float
    H: np.ndarray
    H_ref: np.ndarray
    omega0: float = 0.0

    def __post_init__(self):
        if self.omega0 > 0:
            check_identification_frequency(self.omega, self.omega0)

    @property
    def error_floor(self) -> float:
        """Untergrenze des Bezugsbetrags: IDENT_ERROR_FLOOR · ‖H_ref‖_F"""
        return IDENT_ERROR_FLOOR * float(np.linalg.norm(self.H_ref))

    def _reference_scale(self) -> np.ndarray:
        scale = np.maximum(np.abs(self.H_ref), self.error_floor)
        return np.where(scale > 0, scale, 1.0)

    def magnitude_errors(self) -> np.ndarray:
        """
        ||H| − |H_ref|| / max(|H_ref|, Floor) pro Eintrag.

        Einträge nahe einer Nullstelle von H_ref (z. B. K_R,a bei
        ω₀·√(K_col/(2K₀ + K_col))) werden gegen den Floor gemessen.
        """
        return np.abs(np.abs(self.H) - np.abs(self.H_ref)) / self._reference_scale()

    def phase_errors_deg(self) -> np.ndarray:
        """
        |∠(H / H_ref)| in Grad pro Eintrag; unterhalb des Floors ist die
        Phase unbestimmt, dort zählt der Kleinwinkel-Äquivalent
        |H − H_ref| / Floor.
        """
        ref = self.H_ref
        above = np.abs(ref) >= self.error_floor
        above &= np.abs(ref) > 0
        safe = np.where(above, ref, 1.0)
        angle = np.abs(np.angle(self.H / safe))
        equivalent = np.abs(self.H - ref) / self._reference_scale()
        return np.degrees(np.where(above, angle, equivalent))

    def circulant_spread(self) -> float:
        """Größte Abweichung innerhalb der drei zirkulanten Klassen, relativ"""
        h = self.H
        spread = 0.0
        for shift in range(3):
            cls_vals = np.array([h[i, (i + shift) % 3] for i in range(3)])
            scale = max(float(np.max(np.abs(cls_vals))), 1e-300)
            spread = max(spread, float(np.max(np.abs(cls_vals - cls_vals[0]))) / scale)
        return spread


def check_identification_frequency(omega: float, omega0: float,
                                   exclusion: float = IDENT_POLE_EXCLUSION):
    """Raises NearPoleError, wenn ω relativ näher als `exclusion` an 0 oder ω₀ liegt"""
    if omega <= exclusion * omega0 or abs(omega - omega0) < exclusion * omega0:
        raise NearPoleError(
            f"ω = {omega} liegt im Ausschlussradius {exclusion:g} um 0 oder ω₀ = {omega0}"
        )


def identification_frequencies(omega0: float, spec: Optional[dict] = None) -> List[float]:
    """Log-Gitter in [min, max]·ω₀, Polnähe ausgefiltert"""
    spec = {**DEFAULT_IDENTIFICATION, **(spec or {})}
    grid = np.logspace(math.log10(spec["omega_min_factor"]), math.log10(spec["omega_max_factor"]),
                       int(spec["frequencies"])) * omega0
    kept = []
    for w in grid:
        try:
            check_identification_frequency(float(w), omega0)
            kept.append(float(w))
        except NearPoleError:
            log_info(f"Identifikation: ω = {w:.6f} wegen Polnähe übersprungen", "ANALYSIS")
    return kept


# Simulator: (ε (N,3), ψ (N+1,), dt) → Ausgang (N,3), Zeile k bei t_{k+1}
OpenLoopSimulator = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def _identify_at(simulate: OpenLoopSimulator, omega: float, omega0: float, amplitude: float,
                 transient_cycles: int, fit_cycles: int, steps_per_period: int) -> np.ndarray:
    """Eine Frequenz: drei Injektionen (eine pro Eingangskanal) → H(jω)"""
    check_identification_frequency(omega, omega0)
    dt = 2.0 * math.pi / max(omega, omega0) / steps_per_period
    period = 2.0 * math.pi / omega
    n = int(math.ceil((transient_cycles + fit_cycles) * period / dt))
    t = dt * np.arange(n + 1)
    psi = omega0 * t
    drive = amplitude * np.sin(omega * t[:-1])
    t_out = t[1:]
    window = t_out >= transient_cycles * period

    H = np.zeros((3, 3), dtype=complex)
    for j in range(3):
        eps = np.zeros((n, 3))
        eps[:, j] = drive
        out = simulate(eps, psi, dt)
        fits = {}
        for i in range(3):
            y = out[window, i]
            if np.max(np.abs(y)) <= 1e-12 * amplitude:
                continue  # kein Pfad j → i
            fits[i] = fit_sinusoid(t_out[window], y, omega, nuisance_omegas=(omega0,))
        # Residuum relativ zur Spaltenamplitude, wenn ein Eintrag in einer Nullstelle liegt
        floor = IDENT_ERROR_FLOOR * max((f.amplitude for f in fits.values()), default=0.0)
        for i, fit in fits.items():
            reference = max(fit.amplitude, floor)
            ratio = fit.residual_rms / reference if reference > 0 else fit.relative_residual
            if ratio > FIT_RESIDUAL_LIMIT:
                raise FitResidualTooLarge(
                    f"Sinusfit bei ω = {omega:.6f}, Eintrag ({i + 1},{j + 1}): "
                    f"Residuum {ratio:.2%} > {FIT_RESIDUAL_LIMIT:.0%}"
                )
            H[i, j] = fit.phasor / amplitude
    log_debug(f"Identifiziert ω = {omega:.6f} ({n} Schritte, dt = {dt:.3e})", "ANALYSIS")
    return H


def _check_cycles(transient_cycles: int, fit_cycles: int):
    if transient_cycles < 10 or fit_cycles < 20:
        raise ValueError("Identifikation braucht ≥ 10 Einschwing- und ≥ 20 Fit-Zyklen")


def _identify(simulate: OpenLoopSimulator, reference: TfMatrix3, omega0: float,
              freqs: Sequence[float], amplitude: float, transient_cycles: int,
              fit_cycles: int, steps_per_period: int, max_workers: int) -> List[FreqResponseSample]:
    _check_cycles(transient_cycles, fit_cycles)
    freqs = [float(w) for w in freqs]
    for w in freqs:
        check_identification_frequency(w, omega0)

    def one(w: float) -> FreqResponseSample:
        H = _identify_at(simulate, w, omega0, amplitude, transient_cycles,
                         fit_cycles, steps_per_period)
        return FreqResponseSample(omega=w, H=H, H_ref=reference.evaluate(1j * w), omega0=omega0)

    if max_workers > 1 and len(freqs) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            samples = list(pool.map(one, freqs))
    else:
        samples = [one(w) for w in freqs]
    return sorted(samples, key=lambda s: s.omega)


def identify_coleman_response(gains: EstimatorGains, omega0: float, freqs: Sequence[float],
                              amplitude: float = DEFAULT_IDENTIFICATION["amplitude"],
                              transient_cycles: int = DEFAULT_IDENTIFICATION["transient_cycles"],
                              fit_cycles: int = DEFAULT_IDENTIFICATION["fit_cycles"],
                              steps_per_period: int = DEFAULT_IDENTIFICATION["steps_per_period"],
                              max_workers: int = DEFAULT_IDENTIFICATION["max_workers"],
                              ) -> List[FreqResponseSample]:
    """
    Frequenzgang des Coleman-Schätzers per Sinus-Injektion im offenen Kreis
    bei konstanter Drehzahl ω₀, gepaart mit build_c_col.

    Raises:
        NearPoleError: Frequenz im Ausschlussradius um 0 oder ω₀
        FitResidualTooLarge: Sinusfit-Residuum > 5 %
    """
    estimator = ColemanEstimator(gains.k_col, gains.k_0)
    return _identify(estimator.open_loop_response, build_c_col(gains, omega0), omega0, freqs,
                     amplitude, transient_cycles, fit_cycles, steps_per_period, max_workers)


def identify_pin_response(gains: EstimatorGains, omega0: float, freqs: Sequence[float],
                          amplitude: float = DEFAULT_IDENTIFICATION["amplitude"],
                          transient_cycles: int = DEFAULT_IDENTIFICATION["transient_cycles"],
                          fit_cycles: int = DEFAULT_IDENTIFICATION["fit_cycles"],
                          steps_per_period: int = DEFAULT_IDENTIFICATION["steps_per_period"],
                          max_workers: int = DEFAULT_IDENTIFICATION["max_workers"],
                          ) -> List[FreqResponseSample]:
    """Wie identify_coleman_response, für den PIN-Schätzer gegen build_c_pin"""
    estimator = PinEstimator(gains.k_p, gains.k_i)

    def simulate(eps: np.ndarray, psi: np.ndarray, dt: float) -> np.ndarray:
        return estimator.open_loop_response(eps, omega0, dt)

    return _identify(simulate, build_c_pin(gains, omega0), omega0, freqs,
                     amplitude, transient_cycles, fit_cycles, steps_per_period, max_workers)


@dataclass
class IdentificationSummary:
    max_magnitude_error: float
    max_phase_error_deg: float
    worst_omega: Optional[float]
    max_circulant_spread: float

    def passed(self, magnitude_tol: float, phase_tol_deg: float) -> bool:
        return self.max_magnitude_error < magnitude_tol and self.max_phase_error_deg < phase_tol_deg


def summarize_identification(samples: Sequence[FreqResponseSample]) -> IdentificationSummary:
    """Schlechteste Frequenz nach Betrags- bzw. Phasenfehler"""
    worst_mag = worst_phase = spread = 0.0
    worst_omega = None
    worst_score = -1.0
    for s in samples:
        mag = float(np.max(s.magnitude_errors()))
        ph = float(np.max(s.phase_errors_deg()))
        worst_mag = max(worst_mag, mag)
        worst_phase = max(worst_phase, ph)
        spread = max(spread, s.circulant_spread())
        # Normiert auf 1 % / 1°, damit beide Fehlerarten vergleichbar sind
        score = max(mag / 0.01, ph / 1.0)
        if score > worst_score:
            worst_score, worst_omega = score, s.omega
    return IdentificationSummary(worst_mag, worst_phase, worst_omega, spread)


# ============================================================================
# STRUKTURÄQUIVALENZ PIN ↔ COLEMAN
# ============================================================================

def theorem1_grid(omega0: float, grid_size: int = 1000,
                  span: Tuple[float, float] = (1e-3, 1e2)) -> np.ndarray:
    """Log-Gitter in span·ω₀ ohne 1e-6-Umgebungen der Pole 0, ±jω₀"""
    grid = np.logspace(math.log10(span[0]), math.log10(span[1]), grid_size) * omega0
    keep = np.abs(grid - omega0) >= BODE_POLE_EXCLUSION * omega0
    return grid[keep]


def theorem1_errors(gains: EstimatorGains, omega0: float, grid_size: int = 1000
                    ) -> Tuple[np.ndarray, np.ndarray]:
    """|K(jω) − K_R,a(jω)| / |K_R,a(jω)| mit den übergebenen PIN-Gains"""
    omegas = theorem1_grid(omega0, grid_size)
    s = 1j * omegas
    k_pin = tf_eval_many(build_pin_kernel(gains.k_p, gains.k_i, omega0), s)
    k_ra = tf_eval_many(kr_entries(gains.k_col, gains.k_0, omega0)[0], s)
    return omegas, np.abs(k_pin - k_ra) / np.abs(k_ra)


def verify_theorem1(gains: EstimatorGains, omega0: float, grid_size: int = 1000) -> float:
    """Maximaler relativer Fehler zwischen PIN-Diagonale und K_R,a"""
    _, errors = theorem1_errors(gains, omega0, grid_size)
    worst = float(np.max(errors)) if errors.size else 0.0
    log_debug(f"Strukturäquivalenz-Check: max. Fehler {worst:.3e} über {errors.size} Frequenzen", "ANALYSIS")
    return worst


# ============================================================================
# ZEITBEREICHS-METRIKEN
# ============================================================================

@dataclass
class ErrorMetrics:
    """
    rmse [m/s] und 1P-Fehler (relativ zur wahren 1P-Amplitude) pro Blatt,
    Einschwingzeit [s] (inf, wenn das Band nie dauerhaft erreicht wird),
    RMSE der rotoreffektiven Schätzung, Anzahl Clamp-Ereignisse.
    """
    rmse: Tuple[float, float, float]
    one_p_error: Tuple[float, float, float]
    settling_time: float
    rews_rmse: float
    clamp_events: int = 0

    def to_dict(self) -> dict:
        return {
            "rmse": list(self.rmse),
            "one_p_error": list(self.one_p_error),
            "settling_time": None if math.isinf(self.settling_time) else self.settling_time,
            "rews_rmse": self.rews_rmse,
            "clamp_events": self.clamp_events,
        }


def settling_time(t: np.ndarray, truth: np.ndarray, estimate: np.ndarray,
                  tolerance: float, hold: float) -> float:
    """Ab wann |Û_i − U_i|/U_i < tolerance für alle Blätter dauerhaft gilt (mind. `hold` s)"""
    if t.size == 0:
        return math.inf
    outside = np.any(np.abs(estimate - truth) / truth >= tolerance, axis=1)
    if not np.any(outside):
        start = float(t[0])
    else:
        last = int(np.flatnonzero(outside)[-1])
        if last == t.size - 1:
            return math.inf
        start = float(t[last + 1])
    return start if float(t[-1]) - start >= hold else math.inf


def compute_metrics(t: np.ndarray, truth: np.ndarray, estimate: np.ndarray, omega_r: float,
                    window_start: float, tolerance: float = DEFAULT_METRICS["settling_tolerance"],
                    hold: float = 0.0, clamp_events: int = 0) -> ErrorMetrics:
    """Metriken über das Fenster t ≥ window_start (Einschwingzeit über die ganze Spur)"""
    t = np.asarray(t, dtype=float)
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    win = t >= window_start
    if not np.any(win):
        raise ValueError("Auswertefenster enthält keine Samples")
    tw, uw, ew = t[win], truth[win], estimate[win]
    err = ew - uw

    rmse = tuple(float(np.sqrt(np.mean(err[:, i] ** 2))) for i in range(3))
    mean_speed = float(np.mean(uw))
    one_p = []
    for i in range(3):
        true_amp = fit_sinusoid(tw, uw[:, i], omega_r).amplitude
        err_amp = fit_sinusoid(tw, err[:, i], omega_r).amplitude
        ref = true_amp if true_amp > 1e-9 * mean_speed else mean_speed
        one_p.append(float(err_amp / ref))
    rews_err = np.mean(ew, axis=1) - np.mean(uw, axis=1)
    return ErrorMetrics(
        rmse=rmse,
        one_p_error=tuple(one_p),
        settling_time=settling_time(t, truth, estimate, tolerance, hold),
        rews_rmse=float(np.sqrt(np.mean(rews_err ** 2))),
        clamp_events=int(clamp_events),
    )


def trace_metrics(trace, kind: str, metrics_spec: Optional[dict] = None) -> ErrorMetrics:
    """Metriken eines Schätzers aus einer Trace (Fenster: letzte N Umdrehungen)"""
    spec = {**DEFAULT_METRICS, **(metrics_spec or {})}
    period = trace.period
    window_start = max(0.0, float(trace.t[-1]) - spec["window_revolutions"] * period) \
        if trace.t.size else 0.0
    return compute_metrics(
        trace.t, trace.wind, trace.estimates[kind].u_hat, trace.omega_r, window_start,
        tolerance=spec["settling_tolerance"], hold=spec["settling_hold"] * period,
        clamp_events=trace.clamp_events.get(kind, 0),
    )


# ============================================================================
# VERGLEICH PIN ↔ COLEMAN
# ============================================================================

@dataclass
class ComparisonResult:
    shear: float
    pin: ErrorMetrics
    coleman: ErrorMetrics
    ordering_ok: bool
    ordering_checked: bool

    def to_dict(self) -> dict:
        return {
            "shear": self.shear,
            "pin": self.pin.to_dict(),
            "coleman": self.coleman.to_dict(),
            "ordering_ok": self.ordering_ok,
            "ordering_checked": self.ordering_checked,
        }


def ordering_holds(pin: ErrorMetrics, coleman: ErrorMetrics, tolerance: float) -> bool:
    """Coleman-1P-Fehler ≤ PIN-1P-Fehler + Toleranz, für jedes Blatt (Gleichstand erlaubt)"""
    return all(c <= p + tolerance for p, c in zip(pin.one_p_error, coleman.one_p_error))


def compare_estimators(scenario, gains: Optional[EstimatorGains] = None,
                       metrics_spec: Optional[dict] = None) -> Tuple[ErrorMetrics, ErrorMetrics]:
    """Beide Schätzer im geschlossenen Kreis auf identischem Wind"""
    from modules.sim_harness import run

    if gains is not None:
        scenario = replace(scenario, gains=gains)
    if not scenario.gains.is_theorem1_consistent():
        log_warning("Vergleich mit nicht abbildungskonsistenten Gains", "ANALYSIS")
    trace = run(replace(scenario, estimator="both"))
    return trace_metrics(trace, "pin", metrics_spec), trace_metrics(trace, "coleman", metrics_spec)


def compare_shear_sweep(scenario, shear_levels: Sequence[float],
                        ordering_tolerance: float = DEFAULT_COMPARE["ordering_tolerance"],
                        metrics_spec: Optional[dict] = None) -> List[ComparisonResult]:
    """
    compare_estimators für mehrere Scherungen (leer → Wind aus dem Szenario).
    Die Reihenfolge Coleman ≤ PIN wird nur bei Scherung ≠ 0 geprüft.
    """
    levels = list(shear_levels) if shear_levels else [scenario.wind.shear]
    results = []
    for shear in levels:
        sc = replace(scenario, wind=replace(scenario.wind, shear=float(shear)))
        pin, col = compare_estimators(sc, metrics_spec=metrics_spec)
        checked = shear != 0
        ok = ordering_holds(pin, col, ordering_tolerance) if checked else True
        log_info(f"Vergleich shear = {shear}: PIN 1P {max(pin.one_p_error):.3e}, "
                 f"Coleman 1P {max(col.one_p_error):.3e} → {'OK' if ok else 'VERLETZT'}", "ANALYSIS")
        results.append(ComparisonResult(float(shear), pin, col, ok, checked))
    return results


# ============================================================================
# BODE-EXPORT
# ============================================================================

BODE_COLUMNS = ["matrix", "omega", "row", "col", "magnitude_db", "omega_1p"]


@dataclass
class BodeGridSpec:
    """Log-Gitter in [min, max]·ω₀, optional mit Stützstellen ω₀(1 ± 10^-k)"""
    omega_min_factor: float = DEFAULT_BODE["omega_min_factor"]
    omega_max_factor: float = DEFAULT_BODE["omega_max_factor"]
    points: int = DEFAULT_BODE["points"]
    refine_peak: bool = DEFAULT_BODE["refine_peak"]
    diagonal_only: bool = DEFAULT_BODE["diagonal_only"]
    include_pin: bool = DEFAULT_BODE["include_pin"]
    refine_exponents: Tuple[int, ...] = field(default=(3, 4, 5))

    def __post_init__(self):
        if not 0 < self.omega_min_factor <= self.omega_max_factor or self.points < 1:
            raise ValueError("Bode-Gitter: 0 < min ≤ max und points ≥ 1 erforderlich")

    def omegas(self, omega0: float) -> np.ndarray:
        if self.points == 1:
            grid = np.array([self.omega_min_factor * omega0])
        else:
            grid = np.logspace(math.log10(self.omega_min_factor),
                               math.log10(self.omega_max_factor), self.points) * omega0
        if self.refine_peak:
            extra = [omega0 * (1 + sign * 10.0 ** -k)
                     for k in self.refine_exponents for sign in (-1, 1)]
            grid = np.concatenate([grid, extra])
        return np.unique(grid)


def export_bode(tfm: TfMatrix3, omegas: Sequence[float], omega_1p: float,
                diagonal_only: bool = False, label: str = "C_col") -> List[dict]:
    """
    Zeilen (matrix, ω, Zeile, Spalte, Betrag dB, ω_1P), polgefiltert.
    Die Spalte omega_1p markiert die 1P-Linie; identisch verschwindende
    Einträge werden nicht exportiert.
    """
    bode = bode_mag(tfm, omegas)
    entries = [(i, j) for i in range(3) for j in range(3)
               if (i == j or not diagonal_only) and not tfm[i, j].is_zero]
    records = []
    for k, w in enumerate(bode.omegas):
        for i, j in entries:
            records.append({
                "matrix": label,
                "omega": float(w),
                "row": i + 1,
                "col": j + 1,
                "magnitude_db": float(bode.mag_db[i, j, k]),
                "omega_1p": float(omega_1p),
            })
    log_debug(f"Bode-Export {label}: {len(records)} Zeilen, {len(bode.filtered)} gefiltert", "ANALYSIS")
    return records


def write_records_csv(records: Sequence[dict], path, columns: Sequence[str]) -> Path:
    """CSV mit fester Kopfzeile; Floats in kürzester Rundreise-Darstellung"""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_fmt(rec[c]) for c in columns])
    return path


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def max_db_near(records: Sequence[dict], omega0: float, rel: float = 1e-3) -> Dict[Tuple[int, int], float]:
    """Größter Betrag pro Eintrag innerhalb rel·ω₀ um ω₀"""
    best: Dict[Tuple[int, int], float] = {}
    for rec in records:
        if abs(rec["omega"] - omega0) <= rel * omega0:
            key = (rec["row"], rec["col"])
            best[key] = max(best.get(key, -math.inf), rec["magnitude_db"])
    return best


__all__ = [
    'SineFit', 'fit_sinusoid', 'FreqResponseSample', 'check_identification_frequency',
    'identification_frequencies', 'identify_coleman_response', 'identify_pin_response',
    'IdentificationSummary', 'summarize_identification', 'theorem1_grid', 'theorem1_errors',
    'verify_theorem1', 'ErrorMetrics', 'settling_time', 'compute_metrics', 'trace_metrics',
    'ComparisonResult', 'ordering_holds', 'compare_estimators', 'compare_shear_sweep',
    'BODE_COLUMNS', 'BodeGridSpec', 'export_bode', 'write_records_csv', 'max_db_near',
]
