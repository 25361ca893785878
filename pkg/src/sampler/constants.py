RIGHT_STREAM = 1
LEFT_STREAM = 2

MARTINGALE_ARC_VERTICES = 96
CHUNKS_PER_WORKER = 4

EPS_LADDER = (0.5, 0.25, 0.1)
