# Moment inversion module
