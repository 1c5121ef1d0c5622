"""Test doubles for gqla tests."""
