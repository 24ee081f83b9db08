"""Configuration, errors and structured logging."""
