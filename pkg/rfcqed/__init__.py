"""
rfcqed: ultrastrong-coupling circuit QED in the radio-frequency regime.
"""

__version__ = "0.3.0"
