"""idealpoint test package."""
