"""
BEWS Toolkit - Utility Funktionen
=================================
Prüfergebnisse sammeln und als Klartext-Zusammenfassung ausgeben.
"""

import math
import sys
from typing import List, Optional, TextIO


class VerdictPrinter:
    """
    Sammelt Prüfergebnisse ({"category", "name", "level", "message"})
    und gibt sie kategorisiert aus, standardmäßig auf stderr, damit
    stdout für das JSON-Verdikt frei bleibt.
    """

    # Ergebnis-Level
    OK = "OK"
    WARN = "WARN"
    FAIL = "FAIL"
    INFO = "INFO"

    ICONS = {
        OK:   "[  OK  ]",
        WARN: "[ WARN ]",
        FAIL: "[ FAIL ]",
        INFO: "[ INFO ]",
    }

    def __init__(self, stream: Optional[TextIO] = None):
        self.stream = stream
        self.results: List[dict] = []

    def add(self, category: str, name: str, level: str, message: str = ""):
        self.results.append({"category": category, "name": name,
                             "level": level, "message": message})

    def check(self, category: str, name: str, passed: bool, message: str = "",
              warn_only: bool = False):
        """Trägt ein bestandenes (OK) oder gescheitertes (FAIL/WARN) Ergebnis ein"""
        if passed:
            level = self.OK
        else:
            level = self.WARN if warn_only else self.FAIL
        self.add(category, name, level, message)
        return passed

    @property
    def passed(self) -> bool:
        return not any(r["level"] == self.FAIL for r in self.results)

    def counts(self) -> dict:
        counts = {self.OK: 0, self.WARN: 0, self.FAIL: 0, self.INFO: 0}
        for r in self.results:
            counts[r["level"]] = counts.get(r["level"], 0) + 1
        return counts

    def print_results(self, verbose: bool = False):
        """Gibt die Ergebnisse formatiert aus (nicht-verbose: nur WARN/FAIL)"""
        out = self.stream or sys.stderr
        current_category = None
        for r in self.results:
            level = r["level"]
            if not verbose and level in (self.OK, self.INFO):
                continue

            # Kategorie-Header
            if r["category"] != current_category:
                current_category = r["category"]
                print(f"\n  --- {current_category} ---", file=out)

            icon = self.ICONS.get(level, "[????]")
            print(f"  {icon} {r['name']}: {r['message']}", file=out)

        # Zusammenfassung
        counts = self.counts()
        total = counts[self.OK] + counts[self.WARN] + counts[self.FAIL]
        line = f"  Ergebnis: {counts[self.OK]}/{total} OK"
        if counts[self.WARN]:
            line += f", {counts[self.WARN]} Warnungen"
        if counts[self.FAIL]:
            line += f", {counts[self.FAIL]} FEHLER"
        print(f"\n  {'=' * 50}", file=out)
        print(line, file=out)


def fmt_float(value: float, digits: int = 3) -> str:
    """Kurzdarstellung für Meldungen; inf/nan bleiben lesbar"""
    if value is None:
        return "-"
    if math.isinf(value) or math.isnan(value):
        return str(value)
    return f"{value:.{digits}e}"


def json_safe(value):
    """Ersetzt inf/nan rekursiv durch None (JSON kennt sie nicht)"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


__all__ = ['VerdictPrinter', 'fmt_float', 'json_safe']
