"""Stream productivity via balanced outermost termination."""

__version__ = "0.1.0"
