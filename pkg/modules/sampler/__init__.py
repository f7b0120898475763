# Sampling oracle module
