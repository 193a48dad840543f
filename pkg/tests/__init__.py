"""
Test package for the singular traces toolkit.
"""
