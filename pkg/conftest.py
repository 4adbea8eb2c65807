import os
import sys

# Make `src` importable from the tests without installing the repository.
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
