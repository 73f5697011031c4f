"""Protocol engines, closed-form analysis and figure sweeps for vopqkd."""
