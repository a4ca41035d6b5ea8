"""Delayed two-population Hegselmann-Krause opinion dynamics."""
