"""
Módulos centrales: núcleo matricial, estados, decisión, análisis secuencial,
Monte Carlo e interfaz de línea de comandos.
"""
