"""Tests for vopqkd."""
