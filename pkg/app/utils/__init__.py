"""Utility functions"""