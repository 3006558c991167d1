"""
Settings
"""

import os

from dotenv import load_dotenv

PROJECT_ROOT = os.path.dirname(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
)
ENV_FILE = os.path.join(PROJECT_ROOT, ".env")

# Load .env file into os.environ
load_dotenv(ENV_FILE)

DATA_DIR = os.path.join(PROJECT_ROOT, "data")
LOG_DIR = os.getenv("BEAMLINK_LOG_DIR", os.path.join(DATA_DIR, "logs"))
LOG_SYSTEM = os.path.join(LOG_DIR, "system.log")
LOG_SIZE = 512 * 1024
LOG_HISTORY = 20
LOG_LEVEL = os.getenv("BEAMLINK_LOG_LEVEL", "INFO").upper()
LOGGING_FMT = (
    "%(levelname)s %(asctime)s %(filename)s:%(lineno)s (%(funcName)s) - %(message)s"
)
LOGGING_USE_GZIP = True
IS_TEST = os.getenv("IS_TEST", "0") == "1"

WORKERS = int(os.getenv("BEAMLINK_WORKERS", str(min(8, os.cpu_count() or 1))))

# Bundled vertical-stroke reference trace. A lightly damped sub-Hz resonance
# sampled at 100 Hz plus a small sensor floor; the default AR(10) perturbation
# model is fitted to it.
REFERENCE_SEED = int(os.getenv("BEAMLINK_REFERENCE_SEED", "20180720"))
REFERENCE_SAMPLE_RATE_HZ = 100.0
REFERENCE_DURATION_S = 2000.0
REFERENCE_RESONANCE_HZ = 0.1
REFERENCE_DAMPING_PER_S = 0.2
REFERENCE_STD_M = 5e-3
REFERENCE_FLOOR_STD_M = 1e-4
DEFAULT_AR_ORDER = 10
