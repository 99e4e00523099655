"""
Tests for readability_wmd
"""
