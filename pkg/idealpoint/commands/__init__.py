"""Command implementations behind the idealpoint CLI."""
