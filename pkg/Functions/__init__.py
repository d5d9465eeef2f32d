"""
Paquete de funciones de MindKit.

Cada subpaquete implementa un módulo del pipeline fMRI -> características -> video.
"""

__version__ = "1.0.0"
