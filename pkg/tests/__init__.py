"""Tests for ktree-bounds."""
