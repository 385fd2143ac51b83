import numpy as np

# Bresenham circle of radius 3 used by the FAST segment test, clockwise from 12 o'clock.
# Closed under 90 degree rotation, so detection commutes with np.rot90.
CIRCLE_DX = np.array([0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1], dtype=np.int64)
CIRCLE_DY = np.array([-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3], dtype=np.int64)

POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)

# Tolerance when deciding whether an affine sample falls inside the source raster.
WARP_EDGE_TOL = 1e-9
