"""
Vegetation condition forecasting: weekly NDVI compositing, gap-filling,
condition indices, Gaussian process and autoregressive forecasts, and
drought-alert skill evaluation.
"""

__version__ = "0.1.0"
