"""MindKit: reconstrucción de video a partir de fMRI (escala de escritorio)."""

__version__ = "1.0.0"
__author__ = "Matias Garcia"
