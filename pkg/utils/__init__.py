"""
Módulos de utilidades para qdecide: formato de salida y configuración.
"""
