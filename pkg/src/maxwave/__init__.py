"""Numerical toolkit for the frequency-localized free Schrodinger evolution in the plane."""
