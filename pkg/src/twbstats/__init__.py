"""Photon-number statistics of twin beams seen through SiPM detectors."""

__version__ = "0.1.0"
