"""GroupoidKit - exact calculus for finite groupoids, bibundles and descent."""
__version__ = "0.3.0"
