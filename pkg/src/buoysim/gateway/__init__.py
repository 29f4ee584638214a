"""Command-line entry points and the live session server."""
