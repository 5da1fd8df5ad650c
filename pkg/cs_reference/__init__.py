"""Referencia clásica de compressed sensing por bloques."""
