"""Tests for gqla."""
