import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

settings.register_profile("default", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("default")
