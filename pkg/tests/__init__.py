"""Test package for stgsvd."""
