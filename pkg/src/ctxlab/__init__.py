"""Sequential-measurement contextuality scenarios: quantum values and hidden-variable bounds."""
