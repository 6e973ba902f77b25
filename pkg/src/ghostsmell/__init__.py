"""Fuzzy oversampling and tuned feedforward networks for imbalanced tabular data."""
