"""Test suite for Lead-Lag Engine."""
