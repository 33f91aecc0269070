"""Cooperative multi-agent XR codec adaptation: simulator, oQMIX learner, APS baseline."""

__version__ = "0.1.0"
