"""
Smoothing module for the CATS bandit tool.
"""

from .smoothing_kernel import SmoothingKernel, SupportInterval

__all__ = ['SmoothingKernel', 'SupportInterval']
