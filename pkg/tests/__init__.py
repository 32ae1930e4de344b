"""Tests for the kuranishi package."""
