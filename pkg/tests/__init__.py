"""Tests for klift."""
