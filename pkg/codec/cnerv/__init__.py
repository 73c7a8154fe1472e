"""Content-adaptive neural representation for visual data."""
