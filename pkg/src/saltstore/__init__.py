"""Archival pipeline for continuous-learning edge storage: layered residual
compression, ring-LWE encryption, RAID-5 striping over a simulated pool with
computational-storage drives, and read-path exemplar selection."""

__version__ = "0.1.0"
