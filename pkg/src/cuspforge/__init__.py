"""Numeric models and checks for finite-volume negatively curved manifolds."""

from .profiles import ProfileFunction, make_decay_profile, scale_profile, smooth_kink

__version__ = "0.1.0"

__all__ = ["ProfileFunction", "make_decay_profile", "scale_profile", "smooth_kink", "__version__"]
