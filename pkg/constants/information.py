"""
Módulo con constantes de infos.
"""

PARSER_DESCRIPTION = (
    "Calcula costes de decisión bayesianos para conjuntos de N partículas de "
    "espín 1/2 polarizadas: medición secuencial, combinada y por grupos."
)
QDECIDE_VERSION = "1.0.0"
QDECIDE_NAME = "qdecide"
QDECIDE_DESCRIPTION = (
    "Prueba de hipótesis cuántica binaria bayesiana para conjuntos de espines"
)
QDECIDE_AUTHOR = "cosLatte"
QDECIDE_AUTHOR_EMAIL = "gabrielpazruiz02@gmail.com"
QDECIDE_MAINTAINER = "Sataros221"
QDECIDE_MAINTAINER_EMAIL = "sataros221@gmail.com"

CSV_SCHEMA_LINE = "# qdecide-csv v1"
THREADS_ENV_VAR = "QDECIDE_THREADS"
