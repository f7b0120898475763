# Quasi-Monte Carlo module
