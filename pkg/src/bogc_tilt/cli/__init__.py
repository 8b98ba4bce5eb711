"""Command line suite runner."""
