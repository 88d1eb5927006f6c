"""
CATS bandit tool

Contextual bandits over the continuous action space [0, 1] with tree
policies, kernel smoothing and off-policy model selection.
"""

__version__ = '0.1.0'
