"""Sum-rate and outage of two-user downlink NOMA under underlay spectrum sharing."""

__version__ = "0.1.0"
