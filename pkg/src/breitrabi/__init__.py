"""Breit-Rabi hyperfine spectra, electron-nuclear entanglement and Berry phases."""

__version__ = "0.1.0"
