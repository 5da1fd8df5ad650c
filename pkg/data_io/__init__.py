"""Imágenes, manifiestos y checkpoints."""
