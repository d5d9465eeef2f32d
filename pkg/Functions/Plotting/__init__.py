"""
Módulo Plotting: figuras PNG de los artefactos.
"""

from .figures import plot_importance, plot_loss_curves, plot_metric_bars, plot_pvalue_histograms

__all__ = [
    'plot_importance',
    'plot_loss_curves',
    'plot_metric_bars',
    'plot_pvalue_histograms',
]
