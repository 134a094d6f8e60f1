"""
BEWS Kommandozeile
==================
    bews simulate --config uniform.yaml --out output/uniform
    bews bode     --config bode.yaml    --out output/bode.csv [--diagonal-only] [--include-pin]
    bews verify   --config verify.yaml  [--perturb-gain k_p:5]
    bews compare  --config compare.yaml --out output/compare

Exit-Codes: 0 ok, 1 Prüfung gescheitert / unerwarteter Fehler,
2 Config- oder Dateifehler, 3 Schätzer divergiert.
"""

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from packaging.version import Version

from config import (
    APP_VERSION, EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR, EXIT_DIVERGED, EXIT_OK, OUTPUT_DIR,
)
from modules.analysis import (
    BODE_COLUMNS, compare_shear_sweep, export_bode, identification_frequencies,
    identify_coleman_response, identify_pin_response, summarize_identification,
    theorem1_errors, trace_metrics, write_records_csv,
)
from modules.config_loader import BewsConfig, ConfigLoader
from modules.errors import BewsError, ConfigError, NonFiniteError
from modules.estimators import build_c_col, build_c_pin
from modules.logger import log_error, log_info, refresh_console_level
from modules.sim_harness import run, write_trace_csv
from modules.utils import VerdictPrinter, fmt_float, json_safe

COMPARE_COLUMNS = ["shear", "estimator", "blade", "rmse", "one_p_error",
                   "settling_time", "rews_rmse", "clamp_events", "ordering_ok"]


# ============================================================================
# HILFSFUNKTIONEN
# ============================================================================

def parse_perturbation(text: str):
    """'k_p:5' → ('k_p', 5.0)"""
    name, sep, pct = text.partition(":")
    if not sep or not name.strip():
        raise ConfigError(f"--perturb-gain erwartet name:prozent, erhalten '{text}'")
    try:
        return name.strip(), float(pct)
    except ValueError as e:
        raise ConfigError(f"--perturb-gain: '{pct}' ist keine Zahl") from e


def prepare_config(config_path, seed: Optional[int] = None,
                   perturb: Sequence[str] = ()) -> BewsConfig:
    """Lädt die Config und wendet --seed / --perturb-gain an"""
    if config_path is None:
        raise ConfigError("Keine Config angegeben (--config)")
    cfg = ConfigLoader(config_path).load()
    if seed is not None:
        cfg = cfg.with_seed(seed)
    gains = cfg.gains
    for item in perturb or ():
        name, pct = parse_perturbation(item)
        try:
            gains = gains.perturbed(name, pct)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        log_info(f"Gain {name} um {pct:+g} % verstellt", "CLI")
    return cfg.with_gains(gains) if gains is not cfg.gains else cfg


def _dump_json(data, path: Optional[Path] = None) -> str:
    text = json.dumps(json_safe(data), indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return text


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


# ============================================================================
# KOMMANDOS
# ============================================================================

def cmd_simulate(config_path, out_dir=None, seed: Optional[int] = None,
                 perturb: Sequence[str] = ()) -> int:
    """Regelkreis-Simulation → trace.csv + metrics.json"""
    cfg = prepare_config(config_path, seed, perturb)
    out = _ensure_dir(Path(out_dir) if out_dir else OUTPUT_DIR / cfg.scenario.name)
    trace = run(cfg.scenario)
    write_trace_csv(trace, out / "trace.csv")

    scenario = cfg.scenario
    estimators = {}
    for kind in trace.estimates:
        entry = trace_metrics(trace, kind, cfg.metrics).to_dict() if len(trace) else {}
        entry["final_estimate"] = [float(v) for v in trace.final_estimate(kind)] if len(trace) else []
        estimators[kind] = entry
    _dump_json({
        "scenario": scenario.name,
        "seed": scenario.seed,
        "dt": scenario.dt,
        "duration": scenario.duration,
        "steps": len(trace),
        "gains": scenario.gains.to_dict(),
        "estimators": estimators,
    }, out / "metrics.json")
    log_info(f"Simulation '{scenario.name}' geschrieben nach {out}", "CLI")
    return EXIT_OK


def cmd_bode(config_path, out_path=None, diagonal_only: bool = False,
             include_pin: bool = False, seed: Optional[int] = None,
             perturb: Sequence[str] = ()) -> int:
    """Betragsgänge von C_col (optional C_PIN) als plot-fertige CSV"""
    cfg = prepare_config(config_path, seed, perturb)
    out = Path(out_path) if out_path else OUTPUT_DIR / "bode.csv"
    if out.is_dir():
        out = out / "bode.csv"
    _ensure_dir(out.parent)

    gains = cfg.gains
    omega0 = gains.omega0
    omegas = cfg.bode.omegas(omega0)
    diagonal_only = diagonal_only or cfg.bode.diagonal_only
    records = export_bode(build_c_col(gains, omega0), omegas, omega0, diagonal_only, "C_col")
    if include_pin or cfg.bode.include_pin:
        records += export_bode(build_c_pin(gains, omega0), omegas, omega0, diagonal_only, "C_PIN")
    write_records_csv(records, out, BODE_COLUMNS)
    log_info(f"Bode-Tabelle mit {len(records)} Zeilen nach {out}", "CLI")
    return EXIT_OK


def cmd_verify(config_path, out_path=None, include_pin: bool = False,
               seed: Optional[int] = None, perturb: Sequence[str] = (),
               verbose: bool = False, stream=None) -> int:
    """
    Strukturäquivalenz-Check und Frequenzgang-Identifikation gegen C_col.
    JSON-Verdikt auf stdout, Klartext-Liste auf stderr.
    """
    cfg = prepare_config(config_path, seed, perturb)
    gains = cfg.gains
    omega0 = gains.omega0
    spec = cfg.verify
    printer = VerdictPrinter()

    omegas, errors = theorem1_errors(gains, omega0, spec.theorem1_grid)
    worst_idx = int(errors.argmax()) if errors.size else None
    worst_err = float(errors[worst_idx]) if worst_idx is not None else 0.0
    theorem1_ok = worst_err < spec.theorem1_tolerance
    theorem1 = {
        "max_relative_error": worst_err,
        "tolerance": spec.theorem1_tolerance,
        "grid_points": int(omegas.size),
        "worst_omega": float(omegas[worst_idx]) if worst_idx is not None else None,
        "passed": theorem1_ok,
    }
    printer.check("Strukturäquivalenz", "K(jω) = K_R,a(jω)", theorem1_ok,
                  f"max. Fehler {fmt_float(worst_err)} (Toleranz {fmt_float(spec.theorem1_tolerance)})"
                  + ("" if theorem1_ok else f", schlechteste ω = {theorem1['worst_omega']:.6g}"))

    ident = cfg.identification
    freqs = identification_frequencies(omega0, ident.to_dict())
    kwargs = dict(amplitude=ident.amplitude, transient_cycles=ident.transient_cycles,
                  fit_cycles=ident.fit_cycles, steps_per_period=ident.steps_per_period,
                  max_workers=ident.max_workers)
    checks = {"coleman": identify_coleman_response(gains, omega0, freqs, **kwargs)}
    if include_pin or cfg.bode.include_pin:
        checks["pin"] = identify_pin_response(gains, omega0, freqs, **kwargs)

    identification = {}
    for kind, samples in checks.items():
        summary = summarize_identification(samples)
        ok = bool(samples) and summary.passed(spec.magnitude_tolerance, spec.phase_tolerance_deg)
        identification[kind] = {
            "frequencies": len(samples),
            "max_magnitude_error": summary.max_magnitude_error,
            "max_phase_error_deg": summary.max_phase_error_deg,
            "max_circulant_spread": summary.max_circulant_spread,
            "worst_omega": summary.worst_omega,
            "passed": ok,
        }
        message = (f"{len(samples)} Frequenzen, Betrag {summary.max_magnitude_error:.2%}, "
                   f"Phase {summary.max_phase_error_deg:.3f}°")
        if not ok and summary.worst_omega is not None:
            message += f", schlechteste ω = {summary.worst_omega:.6g}"
        printer.check("Identifikation", f"{kind} gegen geschlossene Form", ok, message)

    passed = printer.passed
    verdict = {
        "passed": passed,
        "gains": gains.to_dict(),
        "omega0": omega0,
        "theorem1": theorem1,
        "identification": identification,
    }
    text = _dump_json(verdict, None)
    if out_path:
        out = Path(out_path)
        _ensure_dir(out.parent)
        _dump_json(verdict, out)
    (stream or sys.stdout).write(text)
    printer.print_results(verbose=verbose)
    if not passed:
        log_error("Verifikation gescheitert", "CLI")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_compare(config_path, out_dir=None, seed: Optional[int] = None,
                perturb: Sequence[str] = (), verbose: bool = False) -> int:
    """PIN und Coleman auf identischem Wind über die Scherungsstufen"""
    cfg = prepare_config(config_path, seed, perturb)
    out = _ensure_dir(Path(out_dir) if out_dir else OUTPUT_DIR / "compare")
    results = compare_shear_sweep(cfg.scenario, cfg.compare.shear_levels,
                                  cfg.compare.ordering_tolerance, cfg.metrics)
    printer = VerdictPrinter()
    rows = []
    for res in results:
        label = f"shear = {res.shear:g}"
        message = (f"1P-Fehler PIN {fmt_float(max(res.pin.one_p_error))}, "
                   f"Coleman {fmt_float(max(res.coleman.one_p_error))}")
        if res.ordering_checked:
            printer.check("Reihenfolge Coleman ≤ PIN", label, res.ordering_ok, message)
        else:
            printer.add("Reihenfolge Coleman ≤ PIN", label, VerdictPrinter.INFO,
                        message + " (ohne Scherung nicht geprüft)")
        for kind, metrics in (("pin", res.pin), ("coleman", res.coleman)):
            for blade in range(3):
                rows.append([
                    repr(res.shear), kind, blade + 1,
                    repr(metrics.rmse[blade]), repr(metrics.one_p_error[blade]),
                    repr(metrics.settling_time), repr(metrics.rews_rmse),
                    metrics.clamp_events, res.ordering_ok,
                ])

    _dump_json({
        "scenario": cfg.scenario.name,
        "seed": cfg.scenario.seed,
        "gains": cfg.gains.to_dict(),
        "ordering_tolerance": cfg.compare.ordering_tolerance,
        "results": [r.to_dict() for r in results],
        "passed": printer.passed,
    }, out / "compare_metrics.json")
    with open(out / "compare_metrics.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COMPARE_COLUMNS)
        writer.writerows(rows)
    printer.print_results(verbose=verbose)
    return EXIT_OK if printer.passed else EXIT_CHECK_FAILED


# ============================================================================
# PARSER / EINSTIEG
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Szenario-/Analyse-Config (YAML)")
    common.add_argument("--out", type=Path, help="Ausgabeverzeichnis bzw. -datei")
    common.add_argument("--seed", type=int, help="Überschreibt scenario.seed")
    common.add_argument("--perturb-gain", action="append", default=[], metavar="NAME:PCT",
                        help="Gain um PCT %% verstellen (k_p, k_i, K_col, K_0), mehrfach möglich")
    common.add_argument("-v", "--verbose", action="store_true",
                        help="Auch bestandene Prüfungen auflisten")

    parser = argparse.ArgumentParser(
        prog="bews",
        description="Blattweise Windgeschwindigkeits-Schätzer: Simulation und Verifikation",
    )
    parser.add_argument("--version", action="version", version=f"bews {Version(APP_VERSION)}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="Regelkreis simulieren")
    bode = sub.add_parser("bode", parents=[common], help="Bode-Betragsgänge exportieren")
    bode.add_argument("--diagonal-only", action="store_true", help="Nur Diagonaleinträge")
    bode.add_argument("--include-pin", action="store_true", help="C_PIN zusätzlich exportieren")
    verify = sub.add_parser("verify", parents=[common], help="Strukturäquivalenz und C_col prüfen")
    verify.add_argument("--include-pin", action="store_true",
                        help="PIN-Schätzer zusätzlich identifizieren")
    sub.add_parser("compare", parents=[common], help="PIN und Coleman vergleichen")
    return parser


def _dispatch(args) -> int:
    common = dict(seed=args.seed, perturb=args.perturb_gain)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out, **common)
    if args.command == "bode":
        return cmd_bode(args.config, args.out, args.diagonal_only, args.include_pin, **common)
    if args.command == "verify":
        return cmd_verify(args.config, args.out, args.include_pin, verbose=args.verbose, **common)
    return cmd_compare(args.config, args.out, verbose=args.verbose, **common)


def guarded(func: Callable[[], int]) -> int:
    """Führt ein Kommando aus und bildet Ausnahmen auf Exit-Codes ab"""
    try:
        return func()
    except ConfigError as e:
        log_error(f"Ungültige Config: {e}", "CLI")
        print(f"Fehler: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except NonFiniteError as e:
        log_error(f"Schätzer divergiert: {e}", "CLI")
        print(f"Divergenz: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as e:
        log_error(f"Datei-/Verzeichnisfehler: {e}", "CLI")
        print(f"Fehler: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except BewsError as e:
        log_error(f"{type(e).__name__}: {e}", "CLI")
        print(f"Fehler: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except Exception as e:
        log_error(f"Unerwarteter Fehler: {e}", "CLI", e)
        print(f"Unerwarteter Fehler: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    refresh_console_level()
    args = build_parser().parse_args(argv)
    return guarded(lambda: _dispatch(args))


__all__ = [
    'main', 'build_parser', 'guarded', 'cmd_simulate', 'cmd_bode', 'cmd_verify',
    'cmd_compare', 'prepare_config', 'parse_perturbation', 'COMPARE_COLUMNS',
]
