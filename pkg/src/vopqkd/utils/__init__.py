"""Utility modules for vopqkd."""
