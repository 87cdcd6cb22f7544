"""
jugglespec - Siteswap juggling planner, jerk-trajectory optimizer and contact-physics verifier.
"""

__version__ = "0.1.0"
