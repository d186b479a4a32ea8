"""
Dataset generation scripts.
"""
