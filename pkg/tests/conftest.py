"""
Shared test setup. IS_TEST must be set before beamlink.settings is imported
so no rotating log file is opened.
"""

import os

os.environ["IS_TEST"] = "1"
