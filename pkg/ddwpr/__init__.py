"""
DDWPR - discrete distribution of the Wiener process range
Distribution, truncated distribution, analytics, Monte-Carlo oracle and table reproduction
"""

__version__ = "1.0.0"
