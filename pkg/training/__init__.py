"""Entrenamiento conjunto de medida y reconstrucción."""
