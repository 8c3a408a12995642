"""E-net simulation and analysis with a miniature secure web-page subsystem."""

__version__ = "0.1.0"
