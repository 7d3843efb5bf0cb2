"""Environment-aware resource management for harsh-environment networks.

Throughput is predicted from environmental readings with a three-branch 1-D
CNN, and the predicted cap is shared among competing services through a
priced non-cooperative power-control game.
"""

__version__ = "0.1.0"
