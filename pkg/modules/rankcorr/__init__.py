# Rank correlation module
