"""Computable free Poisson machinery: exact noncrossing-partition cumulant
calculus, truncated Fock-space random weights, analytic free-probability
transforms with the Levy-Ito splitting, finite-dimensional second
quantization of completely positive maps, and symbolic classification of
free Levy filtration algebras."""

__version__ = "0.1.0"
