"""Tests for the geodesic census."""
