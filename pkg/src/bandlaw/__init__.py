"""Random band and block matrices with correlated entries, and their limiting spectra."""
__version__ = "0.1.0"
