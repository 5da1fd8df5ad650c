"""Configuración de entorno y de experimentos."""
