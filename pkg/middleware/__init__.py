"""
Middleware package for the command-line application.

This package wraps command execution: exception to exit-code mapping and stage timing.
"""
