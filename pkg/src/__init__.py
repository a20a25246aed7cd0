"""Resilient CPS Laboratory."""
