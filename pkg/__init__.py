"""
qdecide - Costes de decisión bayesianos para conjuntos de espines polarizados
"""

__version__ = "1.0.0"
