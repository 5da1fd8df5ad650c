"""Métricas de calidad, tiempos e informes."""
