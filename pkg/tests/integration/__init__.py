"""Integration tests for vopqkd."""
