"""Gqla platform."""
