"""
Initialize package for readability_wmd
"""
__version__ = "0.1.0"
