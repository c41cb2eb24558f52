"""Discrete surface geometry of 3-valent graphs in R^3."""
