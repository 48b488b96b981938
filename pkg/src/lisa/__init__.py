"""Multi-energy system planning: dispatch LP, investment pathways with learning
curves, closed optimization and Benders decomposition."""

__version__ = "0.1.0"
