"""Two-level state algebra, measurements and the photon-loss channel."""
