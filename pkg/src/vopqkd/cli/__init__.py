"""Command-line surface for vopqkd."""
