"""gridwqo test suite."""
