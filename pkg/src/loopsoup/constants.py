SOUP_STREAM_KEY = 7
"""Sub-stream key separating soup randomness from the curves of the same sample."""

TABLE_STREAM_KEY = 11
MIN_BRIDGE_POINTS = 64
PROPOSAL_BATCH = 512
MAX_PROPOSAL_ROUNDS = 10_000
CALIBRATION_RADIUS = 0.5
"""Loops of the disc surrounding 0 that leave this radius carry mass log(1 / CALIBRATION_RADIUS)."""
