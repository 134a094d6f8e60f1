"""
BEWS Toolkit - Haupteinstieg
============================
Main entry point für die Kommandozeile
Mit Import-Check und Crash-Handling

    python main.py simulate --config config/scenarios/uniform.yaml --out output/uniform
"""

import sys
import traceback
from pathlib import Path

# Projekt-Root importierbar machen, ohne das Arbeitsverzeichnis zu wechseln
# (relative --config/--out Pfade beziehen sich auf den Aufrufer)
sys.path.insert(0, str(Path(__file__).parent))

try:
    from modules.cli import main
    from modules.logger import log_error, log_info

    if __name__ == "__main__":
        try:
            sys.exit(main(sys.argv[1:]))
        except KeyboardInterrupt:
            print("\n[SHUTDOWN] Abgebrochen durch Benutzer", file=sys.stderr)
            log_info("Lauf durch Benutzer abgebrochen", "SHUTDOWN")
            sys.exit(130)
        except Exception as e:
            print(f"\n[FATAL] Kritischer Fehler: {e}", file=sys.stderr)
            traceback.print_exc()
            log_error(f"Kritischer Fehler: {e}", "FATAL", e)
            sys.exit(1)

except ImportError as e:
    print(f"❌ Fehler beim Import: {e}", file=sys.stderr)
    print("\nBitte installieren Sie die Abhängigkeiten:", file=sys.stderr)
    print("  pip install -r requirements.txt", file=sys.stderr)
    sys.exit(1)
