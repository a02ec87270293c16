"""Robust beamforming and quantization-noise design for cache-enabled CRANs."""

__version__ = "0.1.0"
