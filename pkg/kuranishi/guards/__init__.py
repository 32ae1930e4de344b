"""Input validation and command middleware."""
