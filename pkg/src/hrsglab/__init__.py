"""HRSG steam-temperature control lab: fixed PI vs LSTM vs physics-informed gain tuning."""
__version__ = "0.1.0"
