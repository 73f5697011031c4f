"""Unit tests for vopqkd."""
