"""
BEWS Logger - Zentrales Logging-System mit Log-Rotation
=======================================================
Einheitliche Logging-Struktur für alle Module.
Datei-Log rotiert täglich, Konsole geht nach stderr
(stdout bleibt frei für JSON-Verdikte der CLI).
"""

import logging
import os
import sys
from pathlib import Path
from logging.handlers import TimedRotatingFileHandler

from config import APP_DIR, LOG_LEVEL, LOG_ENV_VAR, LOG_DIR_ENV_VAR

# Log-Verzeichnis (BEWS_LOG_DIR überschreibt)
LOG_DIR = Path(os.environ.get(LOG_DIR_ENV_VAR) or APP_DIR / "logs")
LOG_DIR.mkdir(parents=True, exist_ok=True)

LOG_FILE = LOG_DIR / "bews.log"  # Basis-Dateiname, Handler rotiert automatisch
BACKUP_COUNT = 14  # Halte 14 Tage Logs


class ColoredFormatter(logging.Formatter):
    """Formatter mit Farben für Console-Ausgabe"""

    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Green
        'WARNING': '\033[33m',    # Yellow
        'ERROR': '\033[31m',      # Red
        'CRITICAL': '\033[41m',   # Red Background
    }
    RESET = '\033[0m'

    def format(self, record):
        if sys.platform == 'win32':
            # Keine Farben auf Windows
            return super().format(record)

        # Kopie, damit der File-Handler den Level ohne Escape-Codes sieht
        record = logging.makeLogRecord(record.__dict__)
        color = self.COLORS.get(record.levelname, self.RESET)
        record.levelname = f"{color}{record.levelname}{self.RESET}"
        return super().format(record)


def console_level() -> int:
    """Konsolen-Level aus BEWS_LOG (DEBUG|INFO|WARNING|ERROR), sonst LOG_LEVEL"""
    name = os.environ.get(LOG_ENV_VAR, LOG_LEVEL).strip().upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING


def setup_logger(name: str, level: int = logging.DEBUG) -> logging.Logger:
    """
    Erstellt einen konfigurierten Logger

    Args:
        name: Name des Loggers
        level: Logging-Level des Loggers selbst (Handler filtern getrennt)

    Returns:
        Konfigurierter Logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False

    # Entferne existierende Handler
    logger.handlers.clear()

    # ===== FILE HANDLER MIT TAGESROTATION =====
    try:
        file_handler = TimedRotatingFileHandler(
            LOG_FILE,
            when='midnight',
            interval=1,
            backupCount=BACKUP_COUNT,
            encoding='utf-8'
        )
        file_handler.suffix = '%Y%m%d'  # bews.log.20250614
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '[%(asctime)s] [%(name)s] [%(levelname)s] %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        logger.addHandler(file_handler)
    except OSError as e:
        # Schreibgeschütztes Log-Verzeichnis: nur Konsole
        print(f"⚠️  Log-Datei nicht beschreibbar ({e}), nur Konsolen-Log", file=sys.stderr)

    # ===== CONSOLE HANDLER =====
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(console_level())
    console_handler.setFormatter(ColoredFormatter('[%(levelname)s] %(name)s: %(message)s'))
    logger.addHandler(console_handler)

    return logger


# Global Logger für das Toolkit
bews_logger = setup_logger('BEWS')


def refresh_console_level():
    """Liest BEWS_LOG neu ein (z.B. nachdem die CLI die Umgebung gesetzt hat)"""
    for handler in bews_logger.handlers:
        if not isinstance(handler, logging.FileHandler):
            handler.setLevel(console_level())


def log_debug(message: str, module: str = 'CORE'):
    """Log Debug-Nachricht"""
    bews_logger.debug(f"[{module}] {message}")


def log_info(message: str, module: str = 'CORE'):
    """Log Info-Nachricht"""
    bews_logger.info(f"[{module}] {message}")


def log_warning(message: str, module: str = 'CORE'):
    """Log Warnung"""
    bews_logger.warning(f"[{module}] {message}")


def log_error(message: str, module: str = 'CORE', exception: Exception = None):
    """Log Fehler"""
    if exception:
        bews_logger.error(f"[{module}] {message}", exc_info=exception)
    else:
        bews_logger.error(f"[{module}] {message}")


def log_critical(message: str, module: str = 'CORE'):
    """Log kritischer Fehler"""
    bews_logger.critical(f"[{module}] {message}")


def get_log_file() -> Path:
    """Gibt den Pfad zur aktuellen Log-Datei zurück"""
    return LOG_FILE
