"""Core configuration, errors, models and logging."""
