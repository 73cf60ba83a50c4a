"""Heterogeneous parameter vectors shared by several test modules.

Each keeps ``rate * t**order`` well below the cancellation limit.
"""

POISSON_ORDERS = (0.5, 0.8, 0.6, 0.9) + (0.7,) * 56
POISSON_RATE = 2.0
POISSON_T = 0.5

CAPUTO_ORDERS = (0.9, 0.6, 0.8, 0.7, 0.95)
CAPUTO_RATE = 1.0
CAPUTO_T = 1.0

BIRTH_ORDERS = (0.7, 0.9, 0.8, 0.6)
BIRTH_RATES = (1.0, 2.0, 3.0, 1.5)
BIRTH_T = 1.0
