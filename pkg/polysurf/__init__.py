"""polysurf - polygonal surfaces, holonomy, unfolding and billiard dynamics."""

__version__ = "0.1.0"
__author__ = "Min-Hsao Chen"
