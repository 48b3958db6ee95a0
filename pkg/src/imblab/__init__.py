"""imblab: resampling x classifier x paradigm benchmarks for imbalanced binary data."""

__version__ = "0.1.0"
