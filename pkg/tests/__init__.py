"""Tests for gsqc-lab package."""
