"""Head wave transforms on gliding sets: forward sweeps, explicit inversions and kernel gauges."""

__version__ = "0.1.0"
