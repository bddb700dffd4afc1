"""
Configuration settings for nestprover
"""

import os

ENGINE_VERSION = "0.3.0"

# Search Configuration
DEFAULT_BUDGET = int(os.getenv("NESTPROVER_BUDGET", "100000"))  # nodes per search
SEARCH_RECURSION_LIMIT = int(os.getenv("NESTPROVER_RECURSION_LIMIT", "10000"))
MAX_SEARCH_DEPTH = int(os.getenv("NESTPROVER_MAX_DEPTH", "1500"))  # nested search calls per branch

# Countermodel Bounds
KRIPKE_WORLDS = int(os.getenv("NESTPROVER_KRIPKE_WORLDS", "3"))
NBR_WORLDS = int(os.getenv("NESTPROVER_NBR_WORLDS", "2"))

# Corpus Generator
CORPUS_SIZE = int(os.getenv("NESTPROVER_CORPUS_SIZE", "200"))
CORPUS_DEPTH = int(os.getenv("NESTPROVER_CORPUS_DEPTH", "5"))
CORPUS_ATOMS = int(os.getenv("NESTPROVER_CORPUS_ATOMS", "3"))
CORPUS_BOX_DEPTH = int(os.getenv("NESTPROVER_CORPUS_BOX_DEPTH", "2"))

# Logging Configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")
LOG_FILE = os.getenv("LOG_FILE", "")  # empty disables the file handler
LOG_MEMORY_LIMIT = int(os.getenv("LOG_MEMORY_LIMIT", "1000"))
