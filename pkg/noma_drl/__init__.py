"""
NOMA downlink channel assignment with policy-gradient training and
closed-form joint power allocation
"""

__version__ = "1.0.0"
