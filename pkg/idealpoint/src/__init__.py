"""Core estimation modules."""
