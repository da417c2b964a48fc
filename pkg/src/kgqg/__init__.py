"""Reference-less evaluation harness for knowledge-grounded conversational question generation."""

__version__ = "0.1.0"
