# Orthant probability module
