# Mixing distributions module
