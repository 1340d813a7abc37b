"""
Test suite for subdiff-lab.
"""
