# Polynomial reproducing kernels and sampling/interpolation diagnostics

__version__ = "1.0.0"
