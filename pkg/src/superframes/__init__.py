"""
Superframe segmentation of videos from dense optical flow.
"""

__version__ = "0.1.0"
