"""
Punto de entrada principal para la aplicación qdecide.
Este script simplemente invoca la interfaz de línea de comandos.
"""

import sys

from core.cli import Cli


def main(argv=None) -> int:
    cli = Cli(argv)
    return cli.main()


if __name__ == "__main__":
    sys.exit(main())
