"""Multi-view molecular property prediction."""
__version__ = "0.1.0"
