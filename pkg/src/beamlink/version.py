"""Version information for beamlink."""

VERSION = "1.0.0"
