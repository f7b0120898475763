# Self-test module
