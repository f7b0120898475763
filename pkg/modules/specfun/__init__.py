# Special functions module
