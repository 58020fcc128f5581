"""
Configuración: archivo clave-valor, número de hilos y registro de mensajes.
"""

import configparser
import logging
import os
import sys

from constants.information import THREADS_ENV_VAR
from constants.tolerances import DEFAULT_WORKERS

logger = logging.getLogger(__name__)

_SECTION = "qdecide"


def load_config_file(path: str) -> dict:
    """
    Lee un archivo de texto ``clave = valor`` (sin cabecera de sección).

    Las claves usan los nombres largos de las opciones; los guiones se
    convierten en guiones bajos.

    Args:
        path (str): Ruta del archivo

    Returns:
        dict: Valores como texto, sin convertir
    """
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_string(f"[{_SECTION}]\n{text}", source=path)
    return {key.strip().replace("-", "_"): value.strip() for key, value in parser.items(_SECTION)}


def worker_count(default: int = DEFAULT_WORKERS) -> int:
    """
    Número de hilos: ``QDECIDE_THREADS`` si es un entero positivo, si no
    ``min(default, cpu_count)``.
    """
    cpus = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning("%s=%r no es un entero positivo; se ignora", THREADS_ENV_VAR, raw)
    return max(1, min(default, cpus))


def setup_logging(verbose: bool = False) -> None:
    """Mensajes de diagnóstico a stderr con el formato ``[NIVEL] mensaje``."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_qdecide", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
    handler._qdecide = True
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
