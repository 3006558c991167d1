"""Laser vehicle-to-vehicle link simulator."""
