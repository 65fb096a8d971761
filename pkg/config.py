"""
Configuration settings for the mixed K-stability toolkit
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Logging Configuration
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
LOG_FILE = os.getenv('LOG_FILE', os.path.join(os.path.dirname(__file__), 'kstab.log'))

# File Storage
REPORTS_DIR = os.getenv('REPORTS_DIR', os.path.join(os.path.dirname(__file__), 'reports'))
SCENARIOS_DIR = os.getenv('SCENARIOS_DIR', os.path.join(os.path.dirname(__file__), 'scenarios'))

# Decimal rendering (CSV and report only; all computation is exact)
DECIMAL_PRECISION = int(os.getenv('DECIMAL_PRECISION', 12))

# An open ampleness wall w is closed at the largest multiple of
# 1/AMPLE_WALL_DENOMINATOR strictly below w
AMPLE_WALL_DENOMINATOR = int(os.getenv('AMPLE_WALL_DENOMINATOR', 10 ** 6))

# Finite-level section counting
MAX_LEVEL = int(os.getenv('MAX_LEVEL', 64))

# Bundled scenario names (see scenarios/)
BUNDLED_SCENARIOS = [
    'radial_p2',
    'cubic_fourfold',
    'cubic_pencil',
    'p2_anticanonical',
    'test_configurations',
]
