"""Coverage and cost of downlink cellular networks with Poisson BSs and silent empty cells."""

__version__ = "0.1.0"
