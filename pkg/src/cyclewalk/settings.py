"""Environment-driven settings."""

import os

from dotenv import load_dotenv

load_dotenv()

# Worker cap for the verification suite
CYCLE_WALK_THREADS = int(os.getenv("CYCLE_WALK_THREADS", str(os.cpu_count() or 1)))

LOG_LEVEL = os.getenv("CYCLE_WALK_LOG_LEVEL", "INFO").upper()

# Default k-grid for Bloch quadratures (2**14 points)
DEFAULT_GRID = int(os.getenv("CYCLE_WALK_GRID", "16384"))
